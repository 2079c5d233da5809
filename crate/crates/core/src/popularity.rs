//! Popularity matrix estimation.
//!
//! Ratings are per-(user, file) request counts. Pairs that were never
//! requested are missing, not zero. The estimator is the additive bias model
//! `r̄ + b_u + b_i`, optionally extended with rank-k latent factors
//! (regularized SVD), fit by stochastic gradient descent on the regularized
//! squared error over observed entries.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::workload::RequestTrace;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rating {
    pub user: usize,
    pub file: usize,
    pub value: f64,
}

/// Sparse user×file observations, sorted by (user, file), each pair at most once.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingMatrix {
    user_count: usize,
    file_count: usize,
    observed: Vec<Rating>,
}

impl RatingMatrix {
    pub fn new(user_count: usize, file_count: usize, mut observed: Vec<Rating>) -> Result<Self> {
        for r in &observed {
            if r.user >= user_count || r.file >= file_count {
                return Err(Error::invalid(format!(
                    "rating ({}, {}) outside {user_count}x{file_count}",
                    r.user, r.file
                )));
            }
            if !(r.value.is_finite() && r.value >= 0.0) {
                return Err(Error::invalid(format!(
                    "rating ({}, {}) = {} is not a finite nonnegative value",
                    r.user, r.file, r.value
                )));
            }
        }
        observed.sort_by_key(|r| (r.user, r.file));
        if observed
            .windows(2)
            .any(|w| (w[0].user, w[0].file) == (w[1].user, w[1].file))
        {
            return Err(Error::invalid("duplicate (user, file) pair"));
        }
        Ok(RatingMatrix {
            user_count,
            file_count,
            observed,
        })
    }

    pub fn user_count(&self) -> usize {
        self.user_count
    }

    pub fn file_count(&self) -> usize {
        self.file_count
    }

    pub fn observed(&self) -> &[Rating] {
        &self.observed
    }

    pub fn len(&self) -> usize {
        self.observed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observed.is_empty()
    }

    pub fn get(&self, user: usize, file: usize) -> Option<f64> {
        self.observed
            .binary_search_by_key(&(user, file), |r| (r.user, r.file))
            .ok()
            .map(|k| self.observed[k].value)
    }

    /// Keep only the ratings of the given users.
    pub fn restrict_users(&self, users: &[usize]) -> RatingMatrix {
        let mut keep = vec![false; self.user_count];
        for &u in users {
            if u < self.user_count {
                keep[u] = true;
            }
        }
        RatingMatrix {
            user_count: self.user_count,
            file_count: self.file_count,
            observed: self
                .observed
                .iter()
                .copied()
                .filter(|r| keep[r.user])
                .collect(),
        }
    }
}

/// Request counts per (user, file). Zero-count pairs are left unobserved.
pub fn build_ground_truth(
    trace: &RequestTrace,
    user_count: usize,
    file_count: usize,
) -> Result<RatingMatrix> {
    let mut counts = std::collections::BTreeMap::<(usize, usize), f64>::new();
    for e in &trace.entries {
        if e.user >= user_count || e.file >= file_count {
            return Err(Error::invalid(format!(
                "trace entry (user {}, file {}) outside {user_count}x{file_count}",
                e.user, e.file
            )));
        }
        *counts.entry((e.user, e.file)).or_insert(0.0) += 1.0;
    }
    let observed = counts
        .into_iter()
        .map(|((user, file), value)| Rating { user, file, value })
        .collect();
    RatingMatrix::new(user_count, file_count, observed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskSplit {
    pub train: RatingMatrix,
    pub test: RatingMatrix,
}

/// Moves a uniformly random subset of `round(fraction * |src|)` observations
/// into the test matrix.
pub fn mask_training<R: Rng + ?Sized>(
    src: &RatingMatrix,
    holdout_fraction: f64,
    rng: &mut R,
) -> Result<MaskSplit> {
    if !(0.0..=1.0).contains(&holdout_fraction) {
        return Err(Error::invalid(format!(
            "holdout fraction {holdout_fraction} outside [0, 1]"
        )));
    }
    let n = src.len();
    let held = (holdout_fraction * n as f64).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut in_test = vec![false; n];
    for &k in &order[..held] {
        in_test[k] = true;
    }
    let mut train = Vec::with_capacity(n - held);
    let mut test = Vec::with_capacity(held);
    for (r, &t) in src.observed.iter().zip(&in_test) {
        if t {
            test.push(*r);
        } else {
            train.push(*r);
        }
    }
    Ok(MaskSplit {
        train: RatingMatrix {
            user_count: src.user_count,
            file_count: src.file_count,
            observed: train,
        },
        test: RatingMatrix {
            user_count: src.user_count,
            file_count: src.file_count,
            observed: test,
        },
    })
}

/// Fitted predictor `r̂_ui = mean + b_u + b_i + <p_u, q_i>`.
#[derive(Debug, Clone, PartialEq)]
pub struct CfModel {
    pub global_mean: f64,
    pub user_bias: Vec<f64>,
    pub item_bias: Vec<f64>,
    pub latent_rank: usize,
    /// Row-major `user_count × latent_rank`.
    pub user_factors: Vec<f64>,
    /// Row-major `file_count × latent_rank`.
    pub item_factors: Vec<f64>,
    pub reg_weight: f64,
}

impl CfModel {
    /// A model that predicts `global_mean` everywhere.
    pub fn constant(user_count: usize, file_count: usize, global_mean: f64) -> Self {
        CfModel {
            global_mean,
            user_bias: vec![0.0; user_count],
            item_bias: vec![0.0; file_count],
            latent_rank: 0,
            user_factors: Vec::new(),
            item_factors: Vec::new(),
            reg_weight: 0.0,
        }
    }

    pub fn user_count(&self) -> usize {
        self.user_bias.len()
    }

    pub fn file_count(&self) -> usize {
        self.item_bias.len()
    }

    pub fn predict(&self, user: usize, file: usize) -> Result<f64> {
        if user >= self.user_count() || file >= self.file_count() {
            return Err(Error::invalid(format!(
                "({user}, {file}) outside {}x{}",
                self.user_count(),
                self.file_count()
            )));
        }
        Ok(self.predict_unchecked(user, file))
    }

    fn predict_unchecked(&self, user: usize, file: usize) -> f64 {
        let k = self.latent_rank;
        let dot: f64 = if k == 0 {
            0.0
        } else {
            let p = &self.user_factors[user * k..(user + 1) * k];
            let q = &self.item_factors[file * k..(file + 1) * k];
            p.iter().zip(q).map(|(a, b)| a * b).sum()
        };
        self.global_mean + self.user_bias[user] + self.item_bias[file] + dot
    }

    /// Regularized squared error over `train`:
    /// `Σ (r − r̂)² + λ (Σ b_u² + Σ b_i² + Σ ‖p_u‖² + Σ ‖q_i‖²)`.
    pub fn objective(&self, train: &RatingMatrix) -> f64 {
        let sq: f64 = train
            .observed
            .iter()
            .map(|r| (r.value - self.predict_unchecked(r.user, r.file)).powi(2))
            .sum();
        let reg: f64 = self
            .user_bias
            .iter()
            .chain(&self.item_bias)
            .chain(&self.user_factors)
            .chain(&self.item_factors)
            .map(|x| x * x)
            .sum();
        sq + self.reg_weight * reg
    }

    /// Full-batch gradient of [`CfModel::objective`] with respect to every
    /// trainable parameter. The global mean is fixed and not included.
    pub fn objective_gradient(&self, train: &RatingMatrix) -> CfGradient {
        let k = self.latent_rank;
        let lambda = self.reg_weight;
        let mut g = CfGradient {
            user_bias: self.user_bias.iter().map(|b| 2.0 * lambda * b).collect(),
            item_bias: self.item_bias.iter().map(|b| 2.0 * lambda * b).collect(),
            user_factors: self.user_factors.iter().map(|p| 2.0 * lambda * p).collect(),
            item_factors: self.item_factors.iter().map(|q| 2.0 * lambda * q).collect(),
        };
        for r in &train.observed {
            let e = r.value - self.predict_unchecked(r.user, r.file);
            g.user_bias[r.user] -= 2.0 * e;
            g.item_bias[r.file] -= 2.0 * e;
            for f in 0..k {
                let (pu, qi) = (r.user * k + f, r.file * k + f);
                g.user_factors[pu] -= 2.0 * e * self.item_factors[qi];
                g.item_factors[qi] -= 2.0 * e * self.user_factors[pu];
            }
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CfGradient {
    pub user_bias: Vec<f64>,
    pub item_bias: Vec<f64>,
    pub user_factors: Vec<f64>,
    pub item_factors: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfParams {
    pub rank: usize,
    pub reg_weight: f64,
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for CfParams {
    fn default() -> Self {
        CfParams {
            rank: 8,
            reg_weight: 0.02,
            learning_rate: 0.01,
            epochs: 200,
        }
    }
}

/// Result of an SGD fit with the objective recorded before the first epoch
/// and after every epoch (`epochs + 1` values).
#[derive(Debug, Clone)]
pub struct CfFit {
    pub model: CfModel,
    pub objective_history: Vec<f64>,
}

const FACTOR_INIT_SCALE: f64 = 0.05;

/// Stochastic gradient descent on the regularized squared error.
///
/// Rank 0 fits the pure bias model. Every epoch visits the observed ratings in
/// a fresh shuffle drawn from `rng`; latent factors are drawn from `rng` first
/// (users, then files), so rank 0 consumes exactly the same stream as the bias
/// fit. An epoch that increases the objective is discarded and the step size
/// halved. Users and files without training data are reset to zero after
/// fitting.
pub fn fit<R: Rng + ?Sized>(train: &RatingMatrix, params: CfParams, rng: &mut R) -> Result<CfFit> {
    let CfParams {
        rank: k,
        reg_weight: lambda,
        learning_rate: lr,
        epochs,
    } = params;
    if train.is_empty() {
        return Err(Error::EmptyData("training matrix has no observations".into()));
    }
    if !(lr.is_finite() && lr > 0.0) {
        return Err(Error::invalid(format!("learning rate must be positive, got {lr}")));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::invalid(format!(
            "regularization weight must be nonnegative, got {lambda}"
        )));
    }
    if epochs == 0 {
        return Err(Error::invalid("need at least one epoch"));
    }
    let (n, f) = (train.user_count, train.file_count);
    let mean = train.observed.iter().map(|r| r.value).sum::<f64>() / train.len() as f64;

    let mut init = |len: usize| -> Vec<f64> {
        (0..len)
            .map(|_| rng.gen_range(-FACTOR_INIT_SCALE..=FACTOR_INIT_SCALE))
            .collect()
    };
    let user_factors = init(n * k);
    let item_factors = init(f * k);
    let mut model = CfModel {
        global_mean: mean,
        user_bias: vec![0.0; n],
        item_bias: vec![0.0; f],
        latent_rank: k,
        user_factors,
        item_factors,
        reg_weight: lambda,
    };

    let mut history = Vec::with_capacity(epochs + 1);
    let mut current = model.objective(train);
    history.push(current);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut pu_old = vec![0.0; k];
    let mut step = lr;
    for _ in 0..epochs {
        let snapshot = model.clone();
        order.shuffle(rng);
        for &idx in &order {
            let r = train.observed[idx];
            let (u, i) = (r.user, r.file);
            let e = r.value - model.predict_unchecked(u, i);
            model.user_bias[u] += step * (e - lambda * model.user_bias[u]);
            model.item_bias[i] += step * (e - lambda * model.item_bias[i]);
            if k > 0 {
                let (pu, qi) = (u * k, i * k);
                pu_old.copy_from_slice(&model.user_factors[pu..pu + k]);
                for f in 0..k {
                    let q = model.item_factors[qi + f];
                    model.user_factors[pu + f] += step * (e * q - lambda * pu_old[f]);
                    model.item_factors[qi + f] += step * (e * pu_old[f] - lambda * q);
                }
            }
        }
        let obj = model.objective(train);
        // Bold driver: an epoch that raises the objective is rolled back and
        // the step size halved, so the recorded objective never increases.
        if obj.is_finite() && obj <= current {
            current = obj;
        } else {
            model = snapshot;
            step *= 0.5;
        }
        history.push(current);
    }

    // Cold start: entities with no training data predict the global mean.
    if k > 0 {
        let mut seen_user = vec![false; n];
        let mut seen_file = vec![false; f];
        for r in &train.observed {
            seen_user[r.user] = true;
            seen_file[r.file] = true;
        }
        for (u, _) in seen_user.iter().enumerate().filter(|(_, s)| !**s) {
            model.user_factors[u * k..(u + 1) * k].fill(0.0);
        }
        for (i, _) in seen_file.iter().enumerate().filter(|(_, s)| !**s) {
            model.item_factors[i * k..(i + 1) * k].fill(0.0);
        }
        if let Some(last) = history.last_mut() {
            *last = model.objective(train);
        }
    }

    Ok(CfFit {
        model,
        objective_history: history,
    })
}

pub fn fit_baseline<R: Rng + ?Sized>(
    train: &RatingMatrix,
    reg_weight: f64,
    learning_rate: f64,
    epochs: usize,
    rng: &mut R,
) -> Result<CfModel> {
    let params = CfParams {
        rank: 0,
        reg_weight,
        learning_rate,
        epochs,
    };
    fit(train, params, rng).map(|f| f.model)
}

pub fn fit_regularized_svd<R: Rng + ?Sized>(
    train: &RatingMatrix,
    rank: usize,
    reg_weight: f64,
    learning_rate: f64,
    epochs: usize,
    rng: &mut R,
) -> Result<CfModel> {
    let params = CfParams {
        rank,
        reg_weight,
        learning_rate,
        epochs,
    };
    fit(train, params, rng).map(|f| f.model)
}

/// Dense `user_count × file_count` matrix of predicted scores.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatedPopularity {
    user_count: usize,
    file_count: usize,
    values: Vec<f64>,
}

impl EstimatedPopularity {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let user_count = rows.len();
        let file_count = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != file_count) {
            return Err(Error::invalid("ragged popularity rows"));
        }
        let values: Vec<f64> = rows.into_iter().flatten().collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("popularity entries must be finite"));
        }
        Ok(EstimatedPopularity {
            user_count,
            file_count,
            values,
        })
    }

    pub fn user_count(&self) -> usize {
        self.user_count
    }

    pub fn file_count(&self) -> usize {
        self.file_count
    }

    pub fn get(&self, user: usize, file: usize) -> f64 {
        self.values[user * self.file_count + file]
    }

    pub fn row(&self, user: usize) -> &[f64] {
        &self.values[user * self.file_count..(user + 1) * self.file_count]
    }
}

pub fn estimate_matrix(model: &CfModel) -> EstimatedPopularity {
    let (n, f) = (model.user_count(), model.file_count());
    let mut values = Vec::with_capacity(n * f);
    for u in 0..n {
        for i in 0..f {
            values.push(model.predict_unchecked(u, i));
        }
    }
    EstimatedPopularity {
        user_count: n,
        file_count: f,
        values,
    }
}

pub fn rmse(model: &CfModel, test: &RatingMatrix) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::EmptyData("test matrix has no observations".into()));
    }
    let mut sum = 0.0;
    for r in &test.observed {
        let e = r.value - model.predict(r.user, r.file)?;
        sum += e * e;
    }
    Ok((sum / test.len() as f64).sqrt())
}
