//! Submartingale tail bounds and the empirical harness that checks them.

use rand::Rng;
use rayon::prelude::*;

use crate::rng::stream_rng;
use crate::Error;

/// Tail bound for a submartingale X_0 = 0, ..., X_N with per-step
/// conditional variance at most `var_bound` and per-step deviation above
/// the conditional mean at most `dev_bound`:
///
/// Pr(X_N >= m) <= exp(-m^2 / (2 (N var_bound + dev_bound m / 3)))
pub fn submartingale_tail_bound(
    steps: usize,
    var_bound: f64,
    dev_bound: f64,
    m: f64,
) -> Result<f64, Error> {
    if m.is_nan() || m < 0.0 {
        return Err(Error::InvalidArgument("tail offset m must be >= 0".into()));
    }
    if var_bound.is_nan() || var_bound < 0.0 || dev_bound.is_nan() || dev_bound <= 0.0 {
        return Err(Error::InvalidArgument(
            "need var_bound >= 0 and dev_bound > 0".into(),
        ));
    }
    let denom = 2.0 * (steps as f64 * var_bound + dev_bound * m / 3.0);
    if denom <= 0.0 {
        return Err(Error::InvalidArgument("bound denominator must be positive".into()));
    }
    Ok((-m * m / denom).exp())
}

/// Specialization to indicator events A_1..A_N with conditional
/// probability at most q each: Pr(at least qN + m events occur) <=
/// exp(-m^2 / (2 (N q + m / 3))). Equals the general bound with
/// `var_bound = q`, `dev_bound = 1`.
pub fn indicator_tail_bound(steps: usize, q: f64, m: f64) -> Result<f64, Error> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument("q must lie in [0,1]".into()));
    }
    submartingale_tail_bound(steps, q, 1.0, m)
}

/// Wilson score interval for `successes` out of `trials` at normal
/// quantile `z`. Suited to small success counts in tail regimes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilsonInterval {
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
}

pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> WilsonInterval {
    assert!(trials > 0, "wilson interval needs at least one trial");
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * ((p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()) / denom;
    WilsonInterval {
        estimate: p,
        lo: (center - half).max(0.0),
        hi: (center + half).min(1.0),
    }
}

/// An adaptive Bernoulli process: each step draws with probability
/// q_i <= q, where q_i may depend on the history of outcomes so far.
#[derive(Debug, Clone, PartialEq)]
pub enum EventModel {
    /// q_i = q for every step.
    Iid,
    /// Adversarial history dependence: q_i = q while the number of
    /// successes so far is even, q/2 when it is odd.
    SuccessParity,
    /// q_i = q * factors[(i-1) mod len], factors in [0,1].
    Schedule(Vec<f64>),
}

impl EventModel {
    fn step_prob(&self, q: f64, step: usize, successes_so_far: u64) -> f64 {
        match self {
            EventModel::Iid => q,
            EventModel::SuccessParity => {
                if successes_so_far.is_multiple_of(2) {
                    q
                } else {
                    q / 2.0
                }
            }
            EventModel::Schedule(factors) => q * factors[step % factors.len()],
        }
    }
}

#[derive(Debug, Clone)]
pub struct TailCheckReport {
    pub runs: u64,
    /// Runs with at least qN + m successes.
    pub exceedances: u64,
    pub empirical: f64,
    pub bound: f64,
    /// bound + 3 sqrt(bound / runs): the simulation-noise allowance.
    pub threshold: f64,
    pub within_bound: bool,
    pub wilson: WilsonInterval,
}

/// Run the process `runs` times and compare the frequency of "at least
/// qN + m successes" against the indicator bound.
pub fn empirical_tail_check(
    model: &EventModel,
    steps: usize,
    q: f64,
    m: f64,
    runs: u64,
    seed: u64,
) -> Result<TailCheckReport, Error> {
    if let EventModel::Schedule(factors) = model {
        if factors.is_empty() || factors.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(Error::InvalidArgument(
                "schedule factors must be nonempty and lie in [0,1]".into(),
            ));
        }
    }
    let bound = indicator_tail_bound(steps, q, m)?;
    let cutoff = q * steps as f64 + m;
    let exceedances: u64 = (0..runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = stream_rng(seed, run);
            let mut successes = 0u64;
            for step in 0..steps {
                let qi = model.step_prob(q, step, successes);
                if qi > 0.0 && rng.gen_bool(qi) {
                    successes += 1;
                }
            }
            (successes as f64 >= cutoff) as u64
        })
        .sum();
    let empirical = exceedances as f64 / runs as f64;
    let threshold = bound + 3.0 * (bound / runs as f64).sqrt();
    Ok(TailCheckReport {
        runs,
        exceedances,
        empirical,
        bound,
        threshold,
        within_bound: empirical <= threshold,
        wilson: wilson_interval(exceedances, runs, 1.96),
    })
}
