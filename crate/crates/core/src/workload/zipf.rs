use rand::Rng;

use super::WorkloadError;

/// Zipf probability mass over ranks `0..universe_size`.
///
/// Rank `r` (zero-based) gets weight `(r + 1)^-alpha`, normalized to sum to 1.
pub fn zipf_pmf(universe_size: u64, alpha: f64) -> Result<Vec<f64>, WorkloadError> {
    if universe_size == 0 {
        return Err(WorkloadError::InvalidArgument(
            "universe_size must be at least 1".into(),
        ));
    }
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(WorkloadError::InvalidArgument(format!(
            "alpha must be a finite value >= 0, got {alpha}"
        )));
    }
    let mut pmf: Vec<f64> = (1..=universe_size)
        .map(|rank| (rank as f64).powf(-alpha))
        .collect();
    // Summing smallest-first keeps the normalization error well under 1e-9.
    let total: f64 = pmf.iter().rev().sum();
    for p in &mut pmf {
        *p /= total;
    }
    Ok(pmf)
}

/// Draws one rank from `pmf` by inverse-CDF over a single uniform variate.
///
/// Linear in `pmf.len()`; use [`ZipfSampler`] for repeated draws.
pub fn sample_item<R: Rng + ?Sized>(pmf: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (rank, p) in pmf.iter().enumerate() {
        acc += p;
        if u < acc {
            return rank;
        }
    }
    pmf.len().saturating_sub(1)
}

/// Precomputed cumulative distribution for fast inverse-CDF sampling.
#[derive(Debug, Clone)]
pub struct ZipfSampler {
    cdf: Vec<f64>,
}

impl ZipfSampler {
    pub fn new(universe_size: u64, alpha: f64) -> Result<Self, WorkloadError> {
        Ok(Self::from_pmf(&zipf_pmf(universe_size, alpha)?))
    }

    pub fn from_pmf(pmf: &[f64]) -> Self {
        let cdf = pmf
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        ZipfSampler { cdf }
    }

    pub fn len(&self) -> usize {
        self.cdf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cdf.is_empty()
    }

    /// Same result as [`sample_item`] on the originating pmf for the same
    /// variate, found by binary search.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.rank_for(u)
    }

    fn rank_for(&self, u: f64) -> usize {
        self.cdf
            .partition_point(|&c| c <= u)
            .min(self.cdf.len().saturating_sub(1))
    }
}
