//! Content catalog, ZipF popularity and timed request traces.

use rand::Rng;

use crate::error::{Error, Result};

/// File library shared by every cache node. All files have the same length
/// and playback bitrate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Catalog {
    pub file_count: usize,
    pub file_length_mbit: f64,
    pub bitrate_mbit_s: f64,
}

impl Catalog {
    pub fn new(file_count: usize, file_length_mbit: f64, bitrate_mbit_s: f64) -> Result<Self> {
        if file_count == 0 {
            return Err(Error::invalid("catalog needs at least one file"));
        }
        if !(file_length_mbit > 0.0 && file_length_mbit.is_finite()) {
            return Err(Error::invalid(format!(
                "file length must be positive, got {file_length_mbit}"
            )));
        }
        if !(bitrate_mbit_s > 0.0 && bitrate_mbit_s.is_finite()) {
            return Err(Error::invalid(format!(
                "bitrate must be positive, got {bitrate_mbit_s}"
            )));
        }
        Ok(Catalog {
            file_count,
            file_length_mbit,
            bitrate_mbit_s,
        })
    }

    /// Library size in megabits (the cache-size normalizer).
    pub fn total_mbit(&self) -> f64 {
        self.file_count as f64 * self.file_length_mbit
    }
}

/// Rank-based ZipF distribution. File id `k` has rank `k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZipfDist {
    exponent: f64,
    pmf: Vec<f64>,
    cdf: Vec<f64>,
}

impl ZipfDist {
    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn file_count(&self) -> usize {
        self.pmf.len()
    }

    /// Build a sampler from an arbitrary probability vector (used for the
    /// per-community distributions).
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("empty probability vector"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("weights must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::invalid("weights sum to zero"));
        }
        let pmf: Vec<f64> = weights.iter().map(|w| w / total).collect();
        Ok(Self::with_pmf(f64::NAN, pmf))
    }

    fn with_pmf(exponent: f64, pmf: Vec<f64>) -> Self {
        let mut cdf = Vec::with_capacity(pmf.len());
        let mut acc = 0.0;
        for p in &pmf {
            acc += p;
            cdf.push(acc);
        }
        // Rounding can leave the tail just under 1; the last bucket owns it.
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        ZipfDist { exponent, pmf, cdf }
    }

    /// Inverse-CDF lookup for one uniform draw in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> usize {
        // First bucket whose cdf exceeds u; zero-mass buckets are skipped.
        let k = self.cdf.partition_point(|&c| c <= u);
        k.min(self.cdf.len() - 1)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.quantile(rng.gen::<f64>())
    }
}

pub fn zipf_pmf(file_count: usize, exponent: f64) -> Result<ZipfDist> {
    if file_count == 0 {
        return Err(Error::invalid("zipf needs at least one file"));
    }
    if !(exponent >= 0.0 && exponent.is_finite()) {
        return Err(Error::invalid(format!(
            "zipf exponent must be finite and nonnegative, got {exponent}"
        )));
    }
    let weights: Vec<f64> = (1..=file_count)
        .map(|rank| (rank as f64).powf(-exponent))
        .collect();
    let norm: f64 = weights.iter().sum();
    let pmf = weights.into_iter().map(|w| w / norm).collect();
    Ok(ZipfDist::with_pmf(exponent, pmf))
}

pub fn sample_file<R: Rng + ?Sized>(dist: &ZipfDist, rng: &mut R) -> usize {
    dist.sample(rng)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Request {
    pub arrival_time_s: f64,
    pub user: usize,
    pub file: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RequestTrace {
    pub horizon_s: u32,
    pub entries: Vec<Request>,
}

impl RequestTrace {
    pub fn empty(horizon_s: u32) -> Self {
        RequestTrace {
            horizon_s,
            entries: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// FNV-1a over the exact bit patterns of every entry. Two runs consumed the
    /// same trace iff their digests agree.
    pub fn digest(&self) -> u64 {
        const PRIME: u64 = 0x0000_0100_0000_01B3;
        let mut h: u64 = 0xCBF2_9CE4_8422_2325;
        let mut feed = |word: u64| {
            for b in word.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(PRIME);
            }
        };
        feed(self.horizon_s as u64);
        for e in &self.entries {
            feed(e.arrival_time_s.to_bits());
            feed(e.user as u64);
            feed(e.file as u64);
        }
        h
    }
}

/// Draws `count` requests: arrival time uniform on `[0, horizon)`, user uniform
/// on `[0, user_count)`, then the file from `pick_file(user, rng)`. Draw order
/// per entry is time, user, file. The result is sorted by arrival time with
/// ties kept in draw order.
pub fn generate_trace_with<R, F>(
    count: usize,
    horizon_s: u32,
    user_count: usize,
    rng: &mut R,
    mut pick_file: F,
) -> Result<RequestTrace>
where
    R: Rng + ?Sized,
    F: FnMut(usize, &mut R) -> usize,
{
    if horizon_s == 0 {
        return Err(Error::invalid("horizon must be at least one second"));
    }
    if user_count == 0 {
        return Err(Error::invalid("need at least one user"));
    }
    let horizon = horizon_s as f64;
    let mut entries = Vec::with_capacity(count);
    for _ in 0..count {
        let mut t = rng.gen::<f64>() * horizon;
        if t >= horizon {
            t = horizon.next_down();
        }
        let user = rng.gen_range(0..user_count);
        let file = pick_file(user, rng);
        entries.push(Request {
            arrival_time_s: t,
            user,
            file,
        });
    }
    // Stable sort: equal times keep their draw index order.
    entries.sort_by(|a, b| a.arrival_time_s.total_cmp(&b.arrival_time_s));
    Ok(RequestTrace { horizon_s, entries })
}

pub fn generate_trace<R: Rng + ?Sized>(
    count: usize,
    horizon_s: u32,
    user_count: usize,
    dist: &ZipfDist,
    rng: &mut R,
) -> Result<RequestTrace> {
    generate_trace_with(count, horizon_s, user_count, rng, |_, r| dist.sample(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn uniform_when_exponent_zero() {
        let d = zipf_pmf(3, 0.0).unwrap();
        for p in d.pmf() {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn single_file_is_degenerate() {
        let d = zipf_pmf(1, 2.0).unwrap();
        assert_eq!(d.pmf(), &[1.0]);
        let mut rng = seed::rng(1);
        assert!((0..100).all(|_| d.sample(&mut rng) == 0));
    }

    #[test]
    fn harmonic_weights_for_exponent_one() {
        // 1/k normalized by H_4 = 25/12.
        let d = zipf_pmf(4, 1.0).unwrap();
        let expected = [0.48, 0.24, 0.16, 0.12];
        for (p, e) in d.pmf().iter().zip(expected) {
            assert!((p - e).abs() < 1e-12, "{p} vs {e}");
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(zipf_pmf(0, 1.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(zipf_pmf(4, -0.1), Err(Error::InvalidArgument(_))));
        assert!(matches!(zipf_pmf(4, f64::NAN), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn strictly_decreasing_for_positive_exponent() {
        for &a in &[0.01, 0.5, 1.0, 2.0] {
            let d = zipf_pmf(128, a).unwrap();
            assert!(d.pmf().windows(2).all(|w| w[0] > w[1]));
            assert!((d.pmf().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_sampling_frequencies_within_three_sigma() {
        let d = zipf_pmf(128, 0.0).unwrap();
        let n = 1_000_000usize;
        let mut counts = vec![0usize; 128];
        let mut rng = seed::rng(42);
        for _ in 0..n {
            counts[d.sample(&mut rng)] += 1;
        }
        let p = 1.0 / 128.0;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        for (k, c) in counts.into_iter().enumerate() {
            let freq = c as f64 / n as f64;
            assert!((freq - p).abs() <= 3.0 * sigma, "file {k}: {freq}");
        }
    }

    #[test]
    fn head_frequency_matches_pmf() {
        let d = zipf_pmf(4, 1.0).unwrap();
        let n = 1_000_000usize;
        let mut rng = seed::rng(9);
        let hits = (0..n).filter(|_| d.sample(&mut rng) == 0).count();
        let sigma = (0.48f64 * 0.52 / n as f64).sqrt();
        assert!((hits as f64 / n as f64 - 0.48).abs() <= 3.0 * sigma);
    }

    #[test]
    fn trace_frequencies_pass_chi_square() {
        let d = zipf_pmf(128, 0.8).unwrap();
        let mut rng = seed::rng(2024);
        let trace = generate_trace(100_000, 1024, 32, &d, &mut rng).unwrap();
        let mut counts = vec![0f64; 128];
        for e in &trace.entries {
            counts[e.file] += 1.0;
        }
        let n = trace.len() as f64;
        let stat: f64 = counts
            .iter()
            .zip(d.pmf())
            .map(|(o, p)| (o - n * p).powi(2) / (n * p))
            .sum();
        let critical = ChiSquared::new(127.0).unwrap().inverse_cdf(0.99);
        assert!(stat < critical, "chi2 {stat} >= {critical}");
    }

    #[test]
    fn trace_shapes() {
        let d = zipf_pmf(128, 1.0).unwrap();
        let mut rng = seed::rng(3);
        assert!(generate_trace(0, 1024, 32, &d, &mut rng).unwrap().is_empty());
        for r in [2048, 9464] {
            let t = generate_trace(r, 1024, 32, &d, &mut rng).unwrap();
            assert_eq!(t.len(), r);
            assert!(t
                .entries
                .iter()
                .all(|e| e.arrival_time_s >= 0.0 && e.arrival_time_s < 1024.0));
            assert!(t.entries.iter().all(|e| e.user < 32 && e.file < 128));
            assert!(t
                .entries
                .windows(2)
                .all(|w| w[0].arrival_time_s <= w[1].arrival_time_s));
        }
    }

    #[test]
    fn trace_is_reproducible() {
        let d = zipf_pmf(128, 0.6).unwrap();
        let a = generate_trace(500, 100, 8, &d, &mut seed::rng(77)).unwrap();
        let b = generate_trace(500, 100, 8, &d, &mut seed::rng(77)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.digest(), b.digest());
        let c = generate_trace(500, 100, 8, &d, &mut seed::rng(78)).unwrap();
        assert_ne!(a.digest(), c.digest());
    }

    #[test]
    fn zero_mass_buckets_are_never_sampled() {
        let d = ZipfDist::from_weights(&[0.0, 1.0, 0.0, 1.0]).unwrap();
        assert_eq!(d.quantile(0.0), 1);
        assert_eq!(d.quantile(0.49), 1);
        assert_eq!(d.quantile(0.5), 3);
        assert_eq!(d.quantile(0.999), 3);
    }
}
