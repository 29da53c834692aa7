use rayon::prelude::*;

use super::{
    mean_ewma_after, run_scenario, ConfigError, HarnessError, PolicyKind, Scenario, SweepRow,
    TenantConfig,
};
use crate::metrics::Requirement;
use crate::workload::TenantWorkload;

pub const DEFAULT_RESOLUTION: usize = 50;
pub const DEFAULT_TRIALS: u32 = 3;
/// Run length used when sizing dedicated partitions.
pub const DEFAULT_SIZING_TXNS: u64 = 200_000;

/// Capacity grid searched by [`min_slots_for_target`]: `lower`,
/// `lower + resolution`, ... capped at `upper`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBounds {
    pub lower: usize,
    pub upper: usize,
    pub resolution: usize,
    /// Independent seeds (`seed`, `seed + 1`, ...) that must all meet the target.
    pub trials: u32,
}

impl SearchBounds {
    pub fn new(lower: usize, upper: usize) -> Self {
        SearchBounds {
            lower,
            upper,
            resolution: DEFAULT_RESOLUTION,
            trials: DEFAULT_TRIALS,
        }
    }

    pub fn with_resolution(mut self, resolution: usize) -> Self {
        self.resolution = resolution;
        self
    }

    pub fn with_trials(mut self, trials: u32) -> Self {
        self.trials = trials;
        self
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.resolution == 0 {
            return Err(ConfigError::new("resolution", "must be at least 1"));
        }
        if self.trials == 0 {
            return Err(ConfigError::new("trials", "must be at least 1"));
        }
        if self.upper < self.lower {
            return Err(ConfigError::new(
                "bounds",
                format!("upper {} is below lower {}", self.upper, self.lower),
            ));
        }
        Ok(())
    }

    /// Capacities on the search grid, ascending.
    pub fn grid(&self) -> Vec<usize> {
        let mut out: Vec<usize> = (self.lower..self.upper)
            .step_by(self.resolution.max(1))
            .collect();
        out.push(self.upper);
        out
    }
}

/// Whether every tenant's mean EWMA over the final quarter of the run
/// reaches `target` under `policy` at `capacity`, for every trial seed.
pub fn meets_target(
    base: &Scenario,
    policy: PolicyKind,
    capacity: usize,
    target: f64,
    trials: u32,
) -> Result<bool, HarnessError> {
    let Ok(scenario) = base.with_capacity(capacity) else {
        // Smaller than the fixed dedicated regions: not a usable size.
        return Ok(false);
    };
    let scenario = scenario.for_policy(policy)?;
    let cutoff = scenario.total_txns - scenario.total_txns / 4;
    for trial in 0..trials {
        let s = scenario
            .clone()
            .with_seed(base.seed.wrapping_add(u64::from(trial)));
        let records = run_scenario(&s)?;
        let means = mean_ewma_after(&records, cutoff);
        if means.is_empty() || means.values().any(|&h| h < target) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Smallest capacity on the search grid meeting `target`, by binary search.
///
/// A target of zero or below is met by any capacity and returns `lower`.
pub fn min_slots_for_target(
    base: &Scenario,
    policy: PolicyKind,
    target: f64,
    bounds: &SearchBounds,
) -> Result<usize, HarnessError> {
    bounds.validate()?;
    if target.is_nan() || target >= 1.0 {
        return Err(ConfigError::new("target", format!("must be below 1, got {target}")).into());
    }
    if target <= 0.0 {
        return Ok(bounds.lower);
    }
    let grid = bounds.grid();
    let top = *grid.last().expect("grid is never empty");
    if !meets_target(base, policy, top, target, bounds.trials)? {
        return Err(HarnessError::Infeasible { target, upper: top });
    }
    // Invariant: grid[hi] meets the target; everything below lo does not.
    let (mut lo, mut hi) = (0, grid.len() - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if meets_target(base, policy, grid[mid], target, bounds.trials)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(grid[hi])
}

fn savings(policy_slots: Option<usize>, baseline: Option<usize>) -> Option<f64> {
    match (policy_slots, baseline) {
        (Some(p), Some(b)) if b > 0 => Some(1.0 - p as f64 / b as f64),
        _ => None,
    }
}

/// Minimal capacities for every (target, policy) pair, with savings relative
/// to global and static caching when those are part of `policies`.
///
/// Pairs are searched in parallel; infeasible pairs yield `min_slots = None`.
pub fn capacity_sweep(
    base: &Scenario,
    targets: &[f64],
    policies: &[PolicyKind],
    bounds: &SearchBounds,
) -> Result<Vec<SweepRow>, HarnessError> {
    base.validate()?;
    bounds.validate()?;
    for &p in policies {
        base.for_policy(p)?;
    }
    let pairs: Vec<(f64, PolicyKind)> = targets
        .iter()
        .flat_map(|&x| policies.iter().map(move |&p| (x, p)))
        .collect();
    let found: Vec<Option<usize>> = pairs
        .par_iter()
        .map(|&(x, p)| match min_slots_for_target(base, p, x, bounds) {
            Ok(n) => Ok(Some(n)),
            Err(HarnessError::Infeasible { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_, _>>()?;

    let lookup = |x: f64, p: PolicyKind| {
        pairs
            .iter()
            .position(|&(tx, tp)| tx == x && tp == p)
            .and_then(|i| found[i])
    };
    Ok(pairs
        .iter()
        .zip(&found)
        .map(|(&(x, p), &slots)| SweepRow {
            target: x,
            policy: p,
            min_slots: slots,
            savings_vs_global: savings(slots, lookup(x, PolicyKind::Global)),
            savings_vs_static: savings(slots, lookup(x, PolicyKind::Static)),
        })
        .collect())
}

/// Knobs for [`suggest_dc_size_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizingOptions {
    pub resolution: usize,
    pub trials: u32,
    pub total_txns: u64,
    pub seed: u64,
}

impl Default for SizingOptions {
    fn default() -> Self {
        SizingOptions {
            resolution: DEFAULT_RESOLUTION,
            trials: DEFAULT_TRIALS,
            total_txns: DEFAULT_SIZING_TXNS,
            seed: 0,
        }
    }
}

/// Dedicated partition size that lets a lone tenant with Zipf exponent
/// `alpha` reach hit rate `hard`.
pub fn suggest_dc_size(
    hard: f64,
    alpha: f64,
    universe: u64,
    resolution: usize,
) -> Result<usize, HarnessError> {
    suggest_dc_size_with(
        hard,
        alpha,
        universe,
        &SizingOptions {
            resolution,
            ..SizingOptions::default()
        },
    )
}

pub fn suggest_dc_size_with(
    hard: f64,
    alpha: f64,
    universe: u64,
    opts: &SizingOptions,
) -> Result<usize, HarnessError> {
    if hard.is_nan() || hard >= 1.0 {
        return Err(ConfigError::new("hard", format!("must lie in (0, 1), got {hard}")).into());
    }
    if universe == 0 {
        return Err(ConfigError::new("universe", "must be at least 1").into());
    }
    let requirement = Requirement::new(hard.max(0.0), hard.max(0.0))
        .map_err(|e| ConfigError::new("hard", e.to_string()))?;
    let tenant = TenantConfig::new(TenantWorkload::zipf(1, universe, alpha), requirement);
    let scenario = Scenario::new(
        universe as usize,
        PolicyKind::Global,
        vec![tenant],
        opts.total_txns,
    )
    .with_seed(opts.seed)
    .with_sample_every(100);
    scenario.validate()?;
    let upper = (universe as usize).max(opts.resolution);
    let bounds = SearchBounds::new(opts.resolution, upper)
        .with_resolution(opts.resolution)
        .with_trials(opts.trials);
    min_slots_for_target(&scenario, PolicyKind::Global, hard, &bounds)
}

/// Parses `start:end:step` (inclusive), a comma-separated list, or a single
/// value. Every target must lie in `[0, 1)`.
pub fn parse_targets(s: &str) -> Result<Vec<f64>, String> {
    let num = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|_| format!("not a number: {:?}", v.trim()))
    };
    let targets: Vec<f64> = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, step] = parts[..] else {
            return Err(format!("expected start:end:step, got {s:?}"));
        };
        let (a, b, step) = (num(a)?, num(b)?, num(step)?);
        if step <= 0.0 || !step.is_finite() {
            return Err(format!("step must be positive, got {step}"));
        }
        if b < a {
            return Err(format!("end {b} is below start {a}"));
        }
        let n = ((b - a) / step + 1e-9).floor() as u64;
        if n > 10_000 {
            return Err("too many targets".into());
        }
        (0..=n)
            .map(|k| ((a + k as f64 * step) * 1e9).round() / 1e9)
            .collect()
    } else {
        s.split(',').map(num).collect::<Result<_, _>>()?
    };
    if let Some(bad) = targets.iter().find(|x| !(0.0..1.0).contains(*x)) {
        return Err(format!("target {bad} is outside [0, 1)"));
    }
    if targets.is_empty() {
        return Err("no targets".into());
    }
    Ok(targets)
}
