//! Reachability and reach-avoid value iteration on finite chains, exact
//! least solutions by linear solves, and the `δ_m` contraction certificate.

mod grid;

pub use grid::{interest_bound_rhs, solve_interest_model, Grid2D, GridSolution};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::FiniteChain;

/// Value function at a fixed horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueVector {
    pub values: Vec<f64>,
    pub horizon: usize,
}

fn indicator(n: usize, set: &[usize]) -> Vec<bool> {
    let mut v = vec![false; n];
    for &i in set {
        v[i] = true;
    }
    v
}

fn as_f64(mask: &[bool]) -> Vec<f64> {
    mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
}

/// `v_n(·; A)`: probability of entering `target` within `n` steps.
pub fn reach_iterate(chain: &FiniteChain, target: &[usize], n: usize) -> ValueVector {
    let all: Vec<usize> = (0..chain.len()).collect();
    reachavoid_iterate(chain, &all, target, n)
}

/// `w_n(·; A, B)`: probability of entering `target` within `n` steps without
/// first leaving `allowed`.
pub fn reachavoid_iterate(
    chain: &FiniteChain,
    allowed: &[usize],
    target: &[usize],
    n: usize,
) -> ValueVector {
    let b = indicator(chain.len(), target);
    let a = indicator(chain.len(), allowed);
    let mut w = as_f64(&b);
    for _ in 0..n {
        let pw = chain.apply(&w);
        w = (0..chain.len())
            .map(|x| {
                if b[x] {
                    1.0
                } else if a[x] {
                    pw[x]
                } else {
                    0.0
                }
            })
            .collect();
    }
    ValueVector {
        values: w,
        horizon: n,
    }
}

/// `w(·; A, B)` at infinite horizon: the least fixpoint, computed by a
/// linear solve on the states of `A ∖ B` that can reach `B` inside `A`.
pub fn reachavoid_exact(chain: &FiniteChain, allowed: &[usize], target: &[usize]) -> Result<Vec<f64>> {
    let n = chain.len();
    let b = indicator(n, target);
    let a = indicator(n, allowed);
    // Backward search from B through A ∖ B.
    let mut can = b.clone();
    loop {
        let mut changed = false;
        for x in 0..n {
            if can[x] || !a[x] {
                continue;
            }
            if (0..n).any(|y| can[y] && chain.prob(x, y) > 0.0) {
                can[x] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let unknown: Vec<usize> = (0..n).filter(|&x| can[x] && !b[x]).collect();
    let mut out = as_f64(&b);
    if unknown.is_empty() {
        return Ok(out);
    }
    let m = unknown.len();
    let mat = DMatrix::from_fn(m, m, |i, j| {
        let p = chain.prob(unknown[i], unknown[j]);
        if i == j {
            1.0 - p
        } else {
            -p
        }
    });
    let rhs = DVector::from_iterator(
        m,
        unknown
            .iter()
            .map(|&x| (0..n).filter(|&y| b[y]).map(|y| chain.prob(x, y)).sum()),
    );
    let sol = mat.lu().solve(&rhs).ok_or(Error::SingularSystem)?;
    for (k, &x) in unknown.iter().enumerate() {
        out[x] = sol[k];
    }
    Ok(out)
}

/// `v(·; A)` at infinite horizon.
pub fn reach_exact(chain: &FiniteChain, target: &[usize]) -> Result<Vec<f64>> {
    let all: Vec<usize> = (0..chain.len()).collect();
    reachavoid_exact(chain, &all, target)
}

/// Uniform lower bound `δ_m` on the probability of absorption within `m`
/// steps, giving `w − w_n ≤ (m/δ_m)(1 − δ_m)^{⌊n/m⌋}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionCertificate {
    pub m: usize,
    pub delta: f64,
}

impl ContractionCertificate {
    pub fn error_bound(&self, n: usize) -> f64 {
        let k = (n / self.m) as i32;
        self.m as f64 / self.delta * (1.0 - self.delta).powi(k)
    }

    /// Smallest horizon `n` (a multiple of `m`) with `error_bound(n) ≤ eps`.
    pub fn horizon_for(&self, eps: f64) -> usize {
        let lead = self.m as f64 / self.delta;
        if lead <= eps {
            return 0;
        }
        if self.delta >= 1.0 {
            return self.m;
        }
        let k = ((eps / lead).ln() / (1.0 - self.delta).ln()).ceil().max(0.0);
        let mut k = if k.is_finite() && k < 1e15 { k as usize } else { usize::MAX / (2 * self.m) };
        while k > 0 && self.error_bound(self.m * (k - 1)) <= eps {
            k -= 1;
        }
        while self.error_bound(self.m * k) > eps {
            k += 1;
        }
        self.m * k
    }
}

/// Smallest `m ≤ m_max` with `δ_m = min_x v_m(x; absorbing) > 0`.
pub fn contraction_certificate(
    chain: &FiniteChain,
    absorbing: &[usize],
    m_max: usize,
) -> Result<ContractionCertificate> {
    let a = indicator(chain.len(), absorbing);
    let mut v = as_f64(&a);
    for m in 1..=m_max {
        let pv = chain.apply(&v);
        v = (0..chain.len()).map(|x| if a[x] { 1.0 } else { pv[x] }).collect();
        let delta = v.iter().copied().fold(f64::INFINITY, f64::min);
        if delta > 0.0 {
            return Ok(ContractionCertificate { m, delta });
        }
    }
    Err(Error::NoCertificate { m_max })
}
