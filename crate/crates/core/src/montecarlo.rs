//! Seeded trajectory simulation of a [`RiskModel`] with Clopper–Pearson
//! intervals.
//!
//! Trial `t` of a run with seed `s` draws its noise from ChaCha8 seeded with
//! `s` on stream `t`. Results therefore do not depend on the number of
//! workers, and runs from different initial capitals with the same seed share
//! their noise path by path (common random numbers).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{Error, Result};
use crate::models::{RiskModel, State};

/// Confidence level of every reported interval.
pub const LEVEL: f64 = 0.95;

/// Header of validation tables.
pub const VALIDATION_HEADER: &str = "z,i,p_hat,lo,hi,N,trials,seed";

const HORIZON_START: usize = 16;
const HORIZON_CAP: usize = 1 << 20;

/// A Monte-Carlo frequency with its exact binomial interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub p_hat: f64,
    pub successes: usize,
    pub trials: usize,
    pub horizon: usize,
    pub level: f64,
    pub lo: f64,
    pub hi: f64,
    pub seed: u64,
}

impl McEstimate {
    pub fn from_counts(successes: usize, trials: usize, horizon: usize, seed: u64) -> Self {
        let (lo, hi) = clopper_pearson(successes, trials, LEVEL);
        Self {
            p_hat: successes as f64 / trials as f64,
            successes,
            trials,
            horizon,
            level: LEVEL,
            lo,
            hi,
            seed,
        }
    }

    /// Larger of the two one-sided interval widths.
    pub fn half_width(&self) -> f64 {
        (self.p_hat - self.lo).max(self.hi - self.p_hat)
    }

    pub fn csv_row(&self, z: f64, i: f64) -> String {
        format!(
            "{z},{i},{},{},{},{},{},{}",
            self.p_hat, self.lo, self.hi, self.horizon, self.trials, self.seed
        )
    }
}

/// Exact two-sided binomial interval for `k` successes out of `n`.
pub fn clopper_pearson(k: usize, n: usize, level: f64) -> (f64, f64) {
    assert!(n > 0 && k <= n, "need 0 <= k <= n, n > 0");
    let alpha = 1.0 - level;
    let (kf, nf) = (k as f64, n as f64);
    let lo = if k == 0 {
        0.0
    } else {
        Beta::new(kf, nf - kf + 1.0).unwrap().inverse_cdf(alpha / 2.0)
    };
    let hi = if k == n {
        1.0
    } else {
        Beta::new(kf + 1.0, nf - kf).unwrap().inverse_cdf(1.0 - alpha / 2.0)
    };
    (lo.min(kf / nf), hi.max(kf / nf))
}

/// How a simulated path ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Outcome {
    /// Surplus dropped below zero at this step.
    Ruined(usize),
    /// Surplus exceeded the upper barrier at this step.
    Escaped(usize),
    /// Neither event within the horizon.
    Censored,
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn run_path(model: &RiskModel, start: State, upper: Option<f64>, horizon: usize, rng: &mut ChaCha8Rng) -> Outcome {
    let crossed = |z: f64| upper.is_some_and(|y| z > y);
    if start.surplus < 0.0 {
        return Outcome::Ruined(0);
    }
    if crossed(start.surplus) {
        return Outcome::Escaped(0);
    }
    let mut state = start;
    for n in 1..=horizon {
        state = model.step(state, model.sample_noise(rng));
        if state.surplus < 0.0 {
            return Outcome::Ruined(n);
        }
        if crossed(state.surplus) {
            return Outcome::Escaped(n);
        }
    }
    Outcome::Censored
}

/// Outcome of every trial from `(z0, i0)`, with an optional upper barrier.
/// Trial `t` uses the same noise for every `z0`.
pub fn trial_outcomes(
    model: &RiskModel,
    z0: f64,
    i0: f64,
    upper: Option<f64>,
    horizon: usize,
    trials: usize,
    seed: u64,
) -> Vec<Outcome> {
    let start = State {
        surplus: z0,
        interest: i0,
    };
    (0..trials)
        .into_par_iter()
        .map(|t| run_path(model, start, upper, horizon, &mut trial_rng(seed, t)))
        .collect()
}

fn check_run(horizon: usize, trials: usize) -> Result<()> {
    if horizon == 0 || trials == 0 {
        return Err(Error::InvalidInput("need horizon >= 1 and trials >= 1".into()));
    }
    Ok(())
}

/// Frequency of `min_{n ≤ N} Z_n < 0`: an estimate of the `N`-step ruin
/// probability, a lower bound on `ψ(z0, i0)`.
pub fn estimate_ruin(
    model: &RiskModel,
    z0: f64,
    i0: f64,
    horizon: usize,
    trials: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_run(horizon, trials)?;
    let ruined = trial_outcomes(model, z0, i0, None, horizon, trials, seed)
        .iter()
        .filter(|o| matches!(o, Outcome::Ruined(_)))
        .count();
    Ok(McEstimate::from_counts(ruined, trials, horizon, seed))
}

/// Frequency of exceeding `y` strictly before dropping below zero within `N`
/// steps: an estimate of `w_N ≤ φ(z0, i0, y)`.
pub fn estimate_two_barrier(
    model: &RiskModel,
    z0: f64,
    i0: f64,
    y: f64,
    horizon: usize,
    trials: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_run(horizon, trials)?;
    let escaped = trial_outcomes(model, z0, i0, Some(y), horizon, trials, seed)
        .iter()
        .filter(|o| matches!(o, Outcome::Escaped(_)))
        .count();
    Ok(McEstimate::from_counts(escaped, trials, horizon, seed))
}

/// Smallest horizon `N` (doubling from 16) whose ruin estimate changes by less
/// than one interval half-width when the horizon is doubled.
pub fn horizon_sufficiency(model: &RiskModel, z0: f64, i0: f64, trials: usize, seed: u64) -> Result<usize> {
    let drift = model_drift(model)?;
    if drift <= 0.0 {
        return Err(Error::NoDrift { drift });
    }
    check_run(1, trials)?;
    // With a shared seed, the ruin time of each trial does not depend on the
    // horizon, so one simulation at the cap would answer every N; doubling
    // keeps the cost proportional to the answer instead.
    let mut n = HORIZON_START;
    let mut prev = estimate_ruin(model, z0, i0, n, trials, seed)?;
    while 2 * n <= HORIZON_CAP {
        let next = estimate_ruin(model, z0, i0, 2 * n, trials, seed)?;
        if (next.p_hat - prev.p_hat).abs() < next.half_width() {
            return Ok(n);
        }
        n *= 2;
        prev = next;
    }
    Err(Error::NonConvergent { cap: HORIZON_CAP })
}

fn model_drift(model: &RiskModel) -> Result<f64> {
    let mean = |d: &crate::models::Dist| {
        d.mean()
            .value()
            .ok_or_else(|| Error::InfiniteMoment(format!("mean of {}", d.name())))
    };
    match model {
        RiskModel::CramerLundberg { increment, .. } => mean(increment),
        RiskModel::InterestRate { premium, claim, .. } => Ok(mean(premium)? - mean(claim)?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Discrete, Dist, PointMass};
    use std::sync::Arc;

    fn walk(p_up: f64, up: f64, down: f64) -> RiskModel {
        let inc: Dist = Arc::new(Discrete::two_point(up, down, p_up).unwrap());
        RiskModel::cramer_lundberg(inc)
    }

    #[test]
    fn clopper_pearson_reference_values() {
        // Exact interval for 0/10 at 95%: upper = 1 − 0.025^{1/10}.
        let (lo, hi) = clopper_pearson(0, 10, 0.95);
        assert_eq!(lo, 0.0);
        assert!((hi - (1.0 - 0.025f64.powf(0.1))).abs() < 1e-9);
        let (lo, hi) = clopper_pearson(10, 10, 0.95);
        assert!((lo - 0.025f64.powf(0.1)).abs() < 1e-9);
        assert_eq!(hi, 1.0);
        // 5/10: symmetric.
        let (lo, hi) = clopper_pearson(5, 10, 0.95);
        assert!((lo + hi - 1.0).abs() < 1e-9);
        assert!((lo - 0.187086).abs() < 1e-5);
    }

    #[test]
    fn trivial_starts() {
        let m = walk(0.5, 1.0, -1.0);
        let e = estimate_ruin(&m, -1.0, 0.0, 10, 50, 1).unwrap();
        assert_eq!(e.p_hat, 1.0);
        assert_eq!(estimate_two_barrier(&m, 11.0, 0.0, 10.0, 10, 50, 1).unwrap().p_hat, 1.0);
        assert_eq!(estimate_two_barrier(&m, -0.5, 0.0, 10.0, 10, 50, 1).unwrap().p_hat, 0.0);
        assert!(estimate_ruin(&m, 0.0, 0.0, 0, 10, 1).is_err());
    }

    #[test]
    fn one_step_ruin() {
        let m = walk(0.9, 1.0, -2.0);
        let e = estimate_ruin(&m, 0.0, 0.0, 1, 20_000, 7).unwrap();
        assert!(e.lo <= 0.1 && 0.1 <= e.hi, "{e:?}");
    }

    #[test]
    fn fair_gambler() {
        let m = walk(0.5, 1.0, -1.0);
        // Barrier strictly between 9 and 10 gives "reach 10 before -1".
        let e = estimate_two_barrier(&m, 5.0, 0.0, 9.5, 10_000, 4000, 3).unwrap();
        let truth = 6.0 / 11.0;
        assert!(e.lo <= truth && truth <= e.hi, "{e:?}");
        // Classic absorption at 0 and 10 from 5, shifted by one half so the
        // strict crossings land on the absorbing states.
        let e = estimate_two_barrier(&m, 4.5, 0.0, 9.0, 10_000, 4000, 3).unwrap();
        assert!(e.lo <= 0.5 && 0.5 <= e.hi, "{e:?}");
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let m = walk(0.6, 1.0, -1.0);
        let a = estimate_ruin(&m, 2.0, 0.0, 200, 500, 42).unwrap();
        let b = estimate_ruin(&m, 2.0, 0.0, 200, 500, 42).unwrap();
        assert_eq!(a, b);
        let c = estimate_ruin(&m, 2.0, 0.0, 200, 500, 43).unwrap();
        assert_eq!(c.seed, 43);
    }

    #[test]
    fn common_random_numbers_are_pathwise_monotone() {
        let m = walk(0.55, 1.0, -1.3);
        let low = trial_outcomes(&m, 0.5, 0.0, None, 300, 400, 9);
        let high = trial_outcomes(&m, 2.5, 0.0, None, 300, 400, 9);
        for (a, b) in low.iter().zip(&high) {
            if matches!(b, Outcome::Ruined(_)) {
                assert!(matches!(a, Outcome::Ruined(_)));
            }
        }
    }

    #[test]
    fn horizon_search() {
        let m = walk(0.99, 1.0, -1.0);
        assert!(horizon_sufficiency(&m, 0.0, 0.0, 2000, 5).unwrap() <= 64);
        let up = RiskModel::cramer_lundberg(Arc::new(PointMass { value: 1.0 }));
        assert_eq!(estimate_ruin(&up, 1.0, 0.0, 1000, 100, 1).unwrap().p_hat, 0.0);
        assert_eq!(horizon_sufficiency(&up, 1.0, 0.0, 100, 1).unwrap(), HORIZON_START);
        let down = walk(0.4, 1.0, -1.0);
        assert!(matches!(horizon_sufficiency(&down, 1.0, 0.0, 100, 1), Err(Error::NoDrift { .. })));
    }

    #[test]
    fn coverage_on_the_gambler() {
        let m = walk(0.5, 1.0, -1.0);
        let truth = 6.0 / 11.0;
        let covered = (0..100u64)
            .filter(|&s| {
                let e = estimate_two_barrier(&m, 5.0, 0.0, 9.5, 5000, 200, s).unwrap();
                e.lo <= truth && truth <= e.hi
            })
            .count();
        assert!(covered >= 90, "{covered}");
    }
}
