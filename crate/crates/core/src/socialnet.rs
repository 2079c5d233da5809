//! Social graph generation, centrality metrics, influencer selection and
//! community formation.

use std::collections::VecDeque;
use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::error::{Error, Result};

/// Undirected simple graph over users `0..user_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocialGraph {
    neighbors: Vec<Vec<usize>>,
}

impl SocialGraph {
    pub fn edgeless(user_count: usize) -> Self {
        SocialGraph {
            neighbors: vec![Vec::new(); user_count],
        }
    }

    pub fn from_edges(user_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = SocialGraph::edgeless(user_count);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        let n = self.user_count();
        if u >= n || v >= n {
            return Err(Error::invalid(format!("edge ({u}, {v}) outside {n} users")));
        }
        if u == v {
            return Err(Error::invalid(format!("self-loop at {u}")));
        }
        match self.neighbors[u].binary_search(&v) {
            Ok(_) => Err(Error::invalid(format!("duplicate edge ({u}, {v})"))),
            Err(pos) => {
                self.neighbors[u].insert(pos, v);
                let pos = self.neighbors[v].binary_search(&u).unwrap_err();
                self.neighbors[v].insert(pos, u);
                Ok(())
            }
        }
    }

    pub fn user_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Sorted neighbor ids.
    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.neighbors[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.neighbors[u].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
            .collect()
    }

    pub fn adjacency(&self) -> DMatrix<f64> {
        let n = self.user_count();
        let mut a = DMatrix::zeros(n, n);
        for (u, v) in self.edges() {
            a[(u, v)] = 1.0;
            a[(v, u)] = 1.0;
        }
        a
    }

    fn bfs(&self, src: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.user_count()];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap();
            for &v in &self.neighbors[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.user_count() == 0 || self.bfs(0).iter().all(Option::is_some)
    }

    fn require_connected(&self, what: &str) -> Result<()> {
        if self.is_connected() {
            Ok(())
        } else {
            Err(Error::Domain(format!("{what} needs a connected graph")))
        }
    }

    /// One `u v` line per edge, `u < v`, sorted, LF-terminated.
    pub fn to_edge_list(&self) -> String {
        self.edges()
            .into_iter()
            .map(|(u, v)| format!("{u} {v}\n"))
            .collect()
    }

    /// Parse the edge-list format written by [`SocialGraph::to_edge_list`].
    /// Blank lines and `#` comments are ignored. Either orientation of a pair
    /// is accepted but each undirected edge may appear once.
    pub fn from_edge_list(text: &str, user_count: usize) -> Result<Self> {
        let mut g = SocialGraph::edgeless(user_count);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<usize> {
                tok.ok_or_else(|| Error::invalid(format!("line {}: expected `u v`", lineno + 1)))?
                    .parse::<usize>()
                    .map_err(|e| Error::invalid(format!("line {}: {e}", lineno + 1)))
            };
            let u = parse(parts.next())?;
            let v = parse(parts.next())?;
            if parts.next().is_some() {
                return Err(Error::invalid(format!(
                    "line {}: trailing tokens",
                    lineno + 1
                )));
            }
            g.add_edge(u, v)
                .map_err(|e| Error::invalid(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(g)
    }
}

/// Clique on `m + 1` seed nodes; every later node attaches `m` edges to
/// distinct existing nodes chosen with probability proportional to degree.
pub fn generate_preferential_attachment<R: Rng + ?Sized>(
    user_count: usize,
    edges_per_node: usize,
    rng: &mut R,
) -> Result<SocialGraph> {
    let m = edges_per_node;
    if m == 0 || user_count <= m {
        return Err(Error::invalid(format!(
            "preferential attachment needs n >= m + 1 >= 2 (n = {user_count}, m = {m})"
        )));
    }
    let mut g = SocialGraph::edgeless(user_count);
    // Each endpoint appears once per incident edge, so a uniform pick from
    // this list is a degree-proportional pick.
    let mut endpoints = Vec::with_capacity(2 * (m * (m + 1) / 2 + m * (user_count - m - 1)));
    for u in 0..=m {
        for v in (u + 1)..=m {
            g.add_edge(u, v)?;
            endpoints.extend([u, v]);
        }
    }
    let mut targets = Vec::with_capacity(m);
    for new in (m + 1)..user_count {
        targets.clear();
        while targets.len() < m {
            let t = endpoints[rng.gen_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            g.add_edge(new, t)?;
            endpoints.extend([new, t]);
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Centrality {
    Degree,
    Closeness,
    Betweenness,
    Eigenvector,
}

impl fmt::Display for Centrality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Centrality::Degree => "degree",
            Centrality::Closeness => "closeness",
            Centrality::Betweenness => "betweenness",
            Centrality::Eigenvector => "eigenvector",
        })
    }
}

impl std::str::FromStr for Centrality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "degree" => Ok(Centrality::Degree),
            "closeness" => Ok(Centrality::Closeness),
            "betweenness" => Ok(Centrality::Betweenness),
            "eigenvector" => Ok(Centrality::Eigenvector),
            other => Err(Error::invalid(format!("unknown centrality `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentralityScores {
    pub metric: Centrality,
    pub scores: Vec<f64>,
    /// Rayleigh-quotient estimate of the largest adjacency eigenvalue; only
    /// set for eigenvector centrality.
    pub leading_eigenvalue: Option<f64>,
}

impl CentralityScores {
    fn plain(metric: Centrality, scores: Vec<f64>) -> Self {
        CentralityScores {
            metric,
            scores,
            leading_eigenvalue: None,
        }
    }
}

pub fn centrality(g: &SocialGraph, metric: Centrality) -> Result<CentralityScores> {
    match metric {
        Centrality::Degree => Ok(degree_centrality(g)),
        Centrality::Closeness => closeness_centrality(g),
        Centrality::Betweenness => betweenness_centrality(g),
        Centrality::Eigenvector => {
            eigenvector_centrality(g, EIGEN_TOLERANCE, EIGEN_MAX_ITERATIONS)
        }
    }
}

pub fn degree_centrality(g: &SocialGraph) -> CentralityScores {
    let scores = (0..g.user_count()).map(|u| g.degree(u) as f64).collect();
    CentralityScores::plain(Centrality::Degree, scores)
}

/// `(N − 1) / Σ_v dist(u, v)` with hop-count distances.
pub fn closeness_centrality(g: &SocialGraph) -> Result<CentralityScores> {
    g.require_connected("closeness centrality")?;
    let n = g.user_count();
    let scores = (0..n)
        .map(|u| {
            let total: usize = g.bfs(u).into_iter().map(|d| d.unwrap()).sum();
            if total == 0 {
                0.0
            } else {
                (n - 1) as f64 / total as f64
            }
        })
        .collect();
    Ok(CentralityScores::plain(Centrality::Closeness, scores))
}

/// Brandes accumulation over unweighted shortest paths. Each unordered pair
/// of endpoints is counted once.
pub fn betweenness_centrality(g: &SocialGraph) -> Result<CentralityScores> {
    g.require_connected("betweenness centrality")?;
    let n = g.user_count();
    let mut bc = vec![0.0; n];
    let mut stack = Vec::with_capacity(n);
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![-1i64; n];
    let mut delta = vec![0.0f64; n];
    let mut queue = VecDeque::with_capacity(n);
    for s in 0..n {
        stack.clear();
        preds.iter_mut().for_each(Vec::clear);
        sigma.fill(0.0);
        dist.fill(-1);
        delta.fill(0.0);
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in g.neighbors(v) {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                bc[w] += delta[w];
            }
        }
    }
    bc.iter_mut().for_each(|b| *b /= 2.0);
    Ok(CentralityScores::plain(Centrality::Betweenness, bc))
}

pub const EIGEN_TOLERANCE: f64 = 1e-10;
pub const EIGEN_MAX_ITERATIONS: usize = 100_000;

/// Leading adjacency eigenvector by power iteration from the all-ones vector.
///
/// Iterates on `A + I`, which has the same eigenvectors as `A` but a strictly
/// dominant leading eigenvalue on connected graphs, so bipartite graphs (where
/// `A` has `−λ₁` in its spectrum) still converge. Stops when successive
/// unit-norm iterates differ by less than `tol` in max-norm.
pub fn eigenvector_centrality(
    g: &SocialGraph,
    tol: f64,
    max_iter: usize,
) -> Result<CentralityScores> {
    let n = g.user_count();
    if n == 0 {
        return Ok(CentralityScores {
            metric: Centrality::Eigenvector,
            scores: Vec::new(),
            leading_eigenvalue: Some(0.0),
        });
    }
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut next = vec![0.0; n];
    let mut converged = false;
    for _ in 0..max_iter {
        for u in 0..n {
            next[u] = x[u] + g.neighbors(u).iter().map(|&v| x[v]).sum::<f64>();
        }
        let norm = next.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Numeric("power iteration collapsed".into()));
        }
        let mut diff = 0.0f64;
        for (xi, ni) in x.iter_mut().zip(&next) {
            let v = ni / norm;
            diff = diff.max((v - *xi).abs());
            *xi = v;
        }
        if diff < tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numeric(format!(
            "eigenvector centrality did not converge in {max_iter} iterations"
        )));
    }
    let ax_dot_x: f64 = (0..n)
        .map(|u| x[u] * g.neighbors(u).iter().map(|&v| x[v]).sum::<f64>())
        .sum();
    Ok(CentralityScores {
        metric: Centrality::Eigenvector,
        scores: x,
        leading_eigenvalue: Some(ax_dot_x),
    })
}

/// The `k` highest-scoring users, best first; equal scores go to the lower id.
pub fn top_k_influential(scores: &CentralityScores, k: usize) -> Result<Vec<usize>> {
    let n = scores.scores.len();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("K = {k} outside 1..={n}")));
    }
    let s = &scores.scores;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
    order.truncate(k);
    Ok(order)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunityAssignment {
    pub community_of: Vec<usize>,
    pub influencer_of: Vec<usize>,
}

impl CommunityAssignment {
    pub fn community_count(&self) -> usize {
        self.influencer_of.len()
    }

    pub fn members(&self, c: usize) -> Vec<usize> {
        (0..self.community_of.len())
            .filter(|&u| self.community_of[u] == c)
            .collect()
    }
}

/// Rows of the `k` leading adjacency eigenvectors (largest eigenvalues first),
/// each eigenvector signed so its largest-magnitude entry is positive.
pub fn spectral_embedding(g: &SocialGraph, k: usize) -> Result<Vec<Vec<f64>>> {
    let n = g.user_count();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("K = {k} outside 1..={n}")));
    }
    let eig = SymmetricEigen::new(g.adjacency());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(k);
    for &j in order.iter().take(k) {
        let mut col: Vec<f64> = eig.eigenvectors.column(j).iter().copied().collect();
        let pivot = col
            .iter()
            .enumerate()
            .fold(0, |best, (i, v)| if v.abs() > col[best].abs() { i } else { best });
        if col[pivot] < 0.0 {
            col.iter_mut().for_each(|v| *v = -*v);
        }
        columns.push(col);
    }
    Ok((0..n)
        .map(|u| columns.iter().map(|c| c[u]).collect())
        .collect())
}

pub const KMEANS_MAX_ITERATIONS: usize = 300;
pub const KMEANS_TOLERANCE: f64 = 1e-9;

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(point, centroid);
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    best
}

/// K-means with k-means++ seeding and Lloyd iterations. Empty clusters take
/// the member of the largest cluster farthest from its centroid. Labels are
/// renumbered by first appearance in point order.
pub fn kmeans<R: Rng + ?Sized>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Result<Vec<usize>> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("K = {k} outside 1..={n}")));
    }

    let mut centroids: Vec<Vec<f64>> = vec![points[rng.gen_range(0..n)].clone()];
    while centroids.len() < k {
        let d2: Vec<f64> = points
            .iter()
            .map(|p| centroids.iter().map(|c| sq_dist(p, c)).fold(f64::INFINITY, f64::min))
            .collect();
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, d) in d2.iter().enumerate() {
                acc += d;
                if acc > target {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        centroids.push(points[pick].clone());
    }

    let dim = points[0].len();
    let mut labels = vec![0usize; n];
    for _ in 0..KMEANS_MAX_ITERATIONS {
        for (label, p) in labels.iter_mut().zip(points) {
            *label = nearest(p, &centroids);
        }
        repair_empty_clusters(points, &mut labels, &centroids, k);
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(p) {
                *s += x;
            }
        }
        let mut movement = 0.0f64;
        for c in 0..k {
            let updated: Vec<f64> = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            movement = movement.max(sq_dist(&updated, &centroids[c]).sqrt());
            centroids[c] = updated;
        }
        if movement < KMEANS_TOLERANCE {
            break;
        }
    }
    for (label, p) in labels.iter_mut().zip(points) {
        *label = nearest(p, &centroids);
    }
    repair_empty_clusters(points, &mut labels, &centroids, k);

    let mut renumber = vec![usize::MAX; k];
    let mut next = 0;
    for l in labels.iter_mut() {
        if renumber[*l] == usize::MAX {
            renumber[*l] = next;
            next += 1;
        }
        *l = renumber[*l];
    }
    Ok(labels)
}

fn repair_empty_clusters(
    points: &[Vec<f64>],
    labels: &mut [usize],
    centroids: &[Vec<f64>],
    k: usize,
) {
    loop {
        let mut counts = vec![0usize; k];
        for &l in labels.iter() {
            counts[l] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let largest = (0..k).fold(0, |b, c| if counts[c] > counts[b] { c } else { b });
        let donor = (0..points.len())
            .filter(|&u| labels[u] == largest)
            .fold(None, |best: Option<(usize, f64)>, u| {
                let d = sq_dist(&points[u], &centroids[largest]);
                match best {
                    Some((_, bd)) if bd >= d => best,
                    _ => Some((u, d)),
                }
            })
            .map(|(u, _)| u)
            .expect("largest cluster is nonempty");
        labels[donor] = empty;
    }
}

/// Spectral K-means over the `k` leading adjacency eigenvectors. Each
/// community's influencer is its highest-scoring member (lower id on ties).
pub fn form_communities<R: Rng + ?Sized>(
    g: &SocialGraph,
    scores: &CentralityScores,
    k: usize,
    rng: &mut R,
) -> Result<CommunityAssignment> {
    let n = g.user_count();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("K = {k} outside 1..={n}")));
    }
    if scores.scores.len() != n {
        return Err(Error::invalid("centrality scores do not match the graph"));
    }
    let community_of = if k == 1 {
        vec![0; n]
    } else {
        let embedding = spectral_embedding(g, k)?;
        kmeans(&embedding, k, rng)?
    };
    let s = &scores.scores;
    let mut influencer_of = vec![usize::MAX; k];
    for u in 0..n {
        let c = community_of[u];
        let cur = influencer_of[c];
        if cur == usize::MAX || s[u] > s[cur] {
            influencer_of[c] = u;
        }
    }
    Ok(CommunityAssignment {
        community_of,
        influencer_of,
    })
}
