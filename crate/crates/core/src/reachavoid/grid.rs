//! Grid solver for the two-barrier probability of the interest-rate model on
//! `[0, y] × {interest nodes}`.
//!
//! Surplus cells are represented by their midpoints. Transition masses come
//! from CDF differences between cell edges, so each row of the induced chain
//! (plus the absorbing ruin and target states) sums to one. The next interest
//! rate `α·i + W` is mapped to the nearest interest node; mass above the last
//! node's cell exits to the target.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use super::ContractionCertificate;
use crate::bounds::{interest_tail_term, TailBound};
use crate::error::{Error, Result};
use crate::models::{Dist, Law, RiskModel};

const ROW_DEFECT_LIMIT: f64 = 1e-6;
const M_MAX: usize = 4096;

/// Surplus cells on `[0, y]` times a set of interest nodes on `[0, j]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid2D {
    pub y: f64,
    pub cells: usize,
    pub interest: Vec<f64>,
    /// Interest rates above `j` exit to the target.
    pub j: f64,
}

impl Grid2D {
    /// `cells` surplus cells and the atoms of a finite interest law.
    pub fn from_atoms(y: f64, cells: usize, interest_law: &dyn Law) -> Result<Self> {
        let atoms = interest_law.atoms().ok_or_else(|| {
            Error::Unsupported("interest law has no finite support; supply a grid".into())
        })?;
        let mut nodes: Vec<f64> = atoms.iter().map(|a| a.0).collect();
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
        let j = *nodes.last().unwrap();
        Self::new(y, cells, nodes, j)
    }

    pub fn new(y: f64, cells: usize, interest: Vec<f64>, j: f64) -> Result<Self> {
        if !(y > 0.0) || cells == 0 || interest.is_empty() {
            return Err(Error::InvalidInput("grid needs y > 0, cells >= 1 and interest nodes".into()));
        }
        if interest.windows(2).any(|w| w[0] >= w[1]) || interest[0] < 0.0 || *interest.last().unwrap() > j {
            return Err(Error::InvalidInput(
                "interest nodes must be increasing within [0, j]".into(),
            ));
        }
        Ok(Self {
            y,
            cells,
            interest,
            j,
        })
    }

    pub fn width(&self) -> f64 {
        self.y / self.cells as f64
    }

    pub fn midpoints(&self) -> Vec<f64> {
        let h = self.width();
        (0..self.cells).map(|c| (c as f64 + 0.5) * h).collect()
    }

    pub fn edges(&self) -> Vec<f64> {
        let h = self.width();
        let mut e: Vec<f64> = (0..=self.cells).map(|c| c as f64 * h).collect();
        e[self.cells] = self.y;
        e
    }

    pub fn refined(&self) -> Self {
        Self {
            cells: 2 * self.cells,
            ..self.clone()
        }
    }

    /// Index of the interest node nearest to `i`.
    pub fn interest_index(&self, i: f64) -> usize {
        let k = self.interest.partition_point(|&v| v < i);
        if k == 0 {
            0
        } else if k == self.interest.len() {
            k - 1
        } else if i - self.interest[k - 1] <= self.interest[k] - i {
            k - 1
        } else {
            k
        }
    }
}

/// Two-barrier probability `w(z, i)` on a [`Grid2D`].
#[derive(Debug, Clone, Serialize)]
pub struct GridSolution {
    pub grid: Grid2D,
    /// `values[c · K + k]` for cell `c` and interest node `k`.
    pub values: Vec<f64>,
    pub certificate: ContractionCertificate,
    pub iterations: usize,
    /// Bound on the remaining iteration gap.
    pub iteration_error: f64,
    /// Largest row-sum defect of the discretised kernel.
    pub row_defect: f64,
    /// Richardson estimate from a grid with twice the cells, when computed.
    pub discretization_error: Option<f64>,
}

impl GridSolution {
    fn at(&self, c: usize, k: usize) -> f64 {
        self.values[c * self.grid.interest.len() + k]
    }

    /// `w(z, i)` by linear interpolation between cell midpoints, extended
    /// linearly to `0` and `y` from the outermost two cells and clamped to
    /// `[0, 1]`; 1 above `y`, 0 below zero.
    pub fn eval(&self, z: f64, i: f64) -> f64 {
        let g = &self.grid;
        if z < 0.0 {
            return 0.0;
        }
        if z > g.y {
            return 1.0;
        }
        let k = g.interest_index(i);
        if g.cells == 1 {
            return self.at(0, k);
        }
        let s = z / g.width() - 0.5;
        let c = (s.floor().max(0.0) as usize).min(g.cells - 2);
        let t = s - c as f64;
        ((1.0 - t) * self.at(c, k) + t * self.at(c + 1, k)).clamp(0.0, 1.0)
    }

    /// Iteration error plus discretisation estimate.
    pub fn solver_error(&self) -> f64 {
        self.iteration_error + self.discretization_error.unwrap_or(0.0)
    }

    /// CSV with columns `z,i,w,one_minus_w` at cell midpoints.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("z,i,w,one_minus_w\n");
        for (c, z) in self.grid.midpoints().iter().enumerate() {
            for (k, i) in self.grid.interest.iter().enumerate() {
                let w = self.at(c, k);
                let _ = writeln!(out, "{z},{i},{w},{}", 1.0 - w);
            }
        }
        out
    }

    pub fn metadata(&self) -> serde_json::Value {
        serde_json::json!({
            "y": self.grid.y,
            "cells": self.grid.cells,
            "interest": self.grid.interest,
            "j": self.grid.j,
            "certificate": self.certificate,
            "iterations": self.iterations,
            "iteration_error": self.iteration_error,
            "row_defect": self.row_defect,
            "discretization_error": self.discretization_error,
        })
    }
}

/// One-step law of the surplus from `(z, i)`: `P(Z' < a)` and `P(Z' ≤ a)`.
struct SurplusStep<'a> {
    premium: &'a Dist,
    claim: &'a Dist,
    g_atoms: Option<Vec<(f64, f64)>>,
    c_atoms: Option<Vec<(f64, f64)>>,
}

impl<'a> SurplusStep<'a> {
    fn new(premium: &'a Dist, claim: &'a Dist) -> Result<Self> {
        let g_atoms = premium.atoms();
        let c_atoms = if g_atoms.is_none() { claim.atoms() } else { None };
        if g_atoms.is_none() && c_atoms.is_none() {
            return Err(Error::Unsupported(
                "grid solver needs a finite discrete premium or claim law".into(),
            ));
        }
        Ok(Self {
            premium,
            claim,
            g_atoms,
            c_atoms,
        })
    }

    /// `P((z + G)(1 + i) − C < a)`.
    fn below(&self, z: f64, i: f64, a: f64) -> f64 {
        if let Some(atoms) = &self.g_atoms {
            atoms
                .iter()
                .map(|&(g, p)| p * self.claim.sf((z + g) * (1.0 + i) - a))
                .sum()
        } else {
            self.c_atoms
                .as_ref()
                .unwrap()
                .iter()
                .map(|&(c, q)| q * self.premium.cdf_left((a + c) / (1.0 + i) - z))
                .sum()
        }
    }

    /// `P((z + G)(1 + i) − C ≤ a)`.
    fn at_most(&self, z: f64, i: f64, a: f64) -> f64 {
        if let Some(atoms) = &self.g_atoms {
            atoms
                .iter()
                .map(|&(g, p)| p * (1.0 - self.claim.cdf_left((z + g) * (1.0 + i) - a)))
                .sum()
        } else {
            self.c_atoms
                .as_ref()
                .unwrap()
                .iter()
                .map(|&(c, q)| q * self.premium.cdf((a + c) / (1.0 + i) - z))
                .sum()
        }
    }
}

/// Discretised kernel: for each interest node `k`, the `cells × cells`
/// surplus transition block `q[k][c][d]` and target mass `t[k][c]`; and the
/// interest transition `pi[k][k']` with exit mass `pi_exit[k]`.
struct Kernel {
    q: Vec<Vec<Vec<f64>>>,
    target: Vec<Vec<f64>>,
    pi: Vec<Vec<f64>>,
    pi_exit: Vec<f64>,
    row_defect: f64,
}

fn build_kernel(model: &RiskModel, grid: &Grid2D) -> Result<Kernel> {
    let RiskModel::InterestRate {
        premium,
        claim,
        alpha,
        noise,
    } = model
    else {
        return Err(Error::Unsupported("grid solver expects the interest-rate model".into()));
    };
    let step = SurplusStep::new(premium, claim)?;
    let edges = grid.edges();
    let mids = grid.midpoints();
    let nk = grid.interest.len();
    let y = grid.y;

    let mut q = Vec::with_capacity(nk);
    let mut target = Vec::with_capacity(nk);
    let mut row_defect: f64 = 0.0;
    for &i in &grid.interest {
        let rows: Vec<(Vec<f64>, f64, f64)> = mids
            .par_iter()
            .map(|&z| {
                let below: Vec<f64> = edges[..grid.cells].iter().map(|&a| step.below(z, i, a)).collect();
                let le_y = step.at_most(z, i, y);
                let mut row = Vec::with_capacity(grid.cells);
                for d in 0..grid.cells {
                    let upper = if d + 1 < grid.cells { below[d + 1] } else { le_y };
                    row.push((upper - below[d]).max(0.0));
                }
                let tgt = 1.0 - le_y;
                let total: f64 = below[0] + row.iter().sum::<f64>() + tgt;
                (row, tgt, (total - 1.0).abs())
            })
            .collect();
        let mut block = Vec::with_capacity(grid.cells);
        let mut tg = Vec::with_capacity(grid.cells);
        for (row, t, defect) in rows {
            row_defect = row_defect.max(defect);
            block.push(row);
            tg.push(t);
        }
        q.push(block);
        target.push(tg);
    }

    // Interest transition: nearest node of α·i + W; above the last node's
    // cell (midpoint to j) exits.
    let nodes = &grid.interest;
    let mut bounds = Vec::with_capacity(nk + 1);
    bounds.push(f64::NEG_INFINITY);
    for w in nodes.windows(2) {
        bounds.push(0.5 * (w[0] + w[1]));
    }
    bounds.push(grid.j);
    let mut pi = Vec::with_capacity(nk);
    let mut pi_exit = Vec::with_capacity(nk);
    for &i in nodes {
        let shift = alpha * i;
        let noise_atoms = noise.atoms();
        let cdf = |x: f64| -> f64 {
            // P(α i + W ≤ x), exact on atoms.
            match &noise_atoms {
                Some(atoms) => atoms.iter().filter(|a| shift + a.0 <= x).map(|a| a.1).sum(),
                None => noise.cdf(x - shift),
            }
        };
        // Cells (b_k, b_{k+1}] with ties going to the lower node, except the
        // first, which starts at −∞.
        let mut row = Vec::with_capacity(nk);
        for k in 0..nk {
            let lo = if k == 0 { 0.0 } else { cdf(bounds[k]) };
            row.push((cdf(bounds[k + 1]) - lo).max(0.0));
        }
        let exit = 1.0 - cdf(grid.j);
        let total: f64 = row.iter().sum::<f64>() + exit;
        row_defect = row_defect.max((total - 1.0).abs());
        pi.push(row);
        pi_exit.push(exit.max(0.0));
    }
    if row_defect > ROW_DEFECT_LIMIT {
        return Err(Error::GridTooCoarse { defect: row_defect });
    }
    Ok(Kernel {
        q,
        target,
        pi,
        pi_exit,
        row_defect,
    })
}

impl Kernel {
    /// One application of the reach-avoid operator:
    /// `w'(c,k) = T(c,k) + Σ_d q_k(c,d) (π_exit(k) + Σ_k' π(k,k') w(d,k'))`,
    /// with `T` the target mass.
    fn apply(&self, w: &[f64], cells: usize) -> Vec<f64> {
        let nk = self.pi.len();
        let u: Vec<Vec<f64>> = (0..nk)
            .map(|k| {
                (0..cells)
                    .map(|d| {
                        let mut s = self.pi_exit[k];
                        for k2 in 0..nk {
                            s += self.pi[k][k2] * w[d * nk + k2];
                        }
                        s
                    })
                    .collect()
            })
            .collect();
        let mut out = vec![0.0; cells * nk];
        out.par_chunks_mut(nk).enumerate().for_each(|(c, chunk)| {
            for k in 0..nk {
                let row = &self.q[k][c];
                let s: f64 = row.iter().zip(&u[k]).map(|(a, b)| a * b).sum();
                chunk[k] = s + self.target[k][c];
            }
        });
        out
    }
}

/// Solves the two-barrier fixpoint for the interest model on `grid` by value
/// iteration, run until the contraction bound on the remaining gap is at most
/// `eps_iter`.
///
/// Absorption (ruin below zero, target above `y` or interest above `j`)
/// within `m` steps is at least `δ_m` from every cell; `m` is chosen to
/// minimise the number of iterations the bound requires.
pub fn solve_interest_model(
    model: &RiskModel,
    y: f64,
    grid: &Grid2D,
    eps_iter: f64,
) -> Result<GridSolution> {
    if (grid.y - y).abs() > 1e-12 * y.max(1.0) {
        return Err(Error::InvalidInput(format!(
            "grid covers [0, {}] but the barrier is {y}",
            grid.y
        )));
    }
    let kernel = build_kernel(model, grid)?;
    let cells = grid.cells;
    let nk = grid.interest.len();

    // Probability of staying in the grid for m steps: s_{m+1} = Q s_m, and
    // δ_m = 1 − max s_m.
    let mut survival = vec![1.0; cells * nk];
    let mut best: Option<(ContractionCertificate, usize)> = None;
    for m in 1..=M_MAX {
        survival = survive_step(&kernel, &survival, cells);
        let delta = 1.0 - survival.iter().copied().fold(0.0, f64::max);
        if delta > 0.0 {
            let cert = ContractionCertificate { m, delta };
            let n = cert.horizon_for(eps_iter);
            if best.map_or(true, |(_, bn)| n < bn) {
                best = Some((cert, n));
            }
        }
        if let Some((_, bn)) = best {
            if m >= bn {
                break;
            }
        }
    }
    let (certificate, horizon) = best.ok_or(Error::NoCertificate { m_max: M_MAX })?;

    let mut w = vec![0.0; cells * nk];
    for _ in 0..horizon {
        w = kernel.apply(&w, cells);
    }
    Ok(GridSolution {
        grid: grid.clone(),
        values: w,
        certificate,
        iterations: horizon,
        iteration_error: certificate.error_bound(horizon),
        row_defect: kernel.row_defect,
        discretization_error: None,
    })
}

/// `s'(c,k) = Σ_d q_k(c,d) Σ_k' π(k,k') s(d,k')`: probability of staying in
/// the grid one more step.
fn survive_step(kernel: &Kernel, s: &[f64], cells: usize) -> Vec<f64> {
    let nk = kernel.pi.len();
    let u: Vec<Vec<f64>> = (0..nk)
        .map(|k| {
            (0..cells)
                .map(|d| (0..nk).map(|k2| kernel.pi[k][k2] * s[d * nk + k2]).sum())
                .collect()
        })
        .collect();
    let mut out = vec![0.0; cells * nk];
    out.par_chunks_mut(nk).enumerate().for_each(|(c, chunk)| {
        for k in 0..nk {
            chunk[k] = kernel.q[k][c].iter().zip(&u[k]).map(|(a, b)| a * b).sum();
        }
    });
    out
}

impl GridSolution {
    /// Solves again on a grid with twice the cells and records
    /// `2·max |w_N − w_{2N}|` over the coarse cell edges and midpoints as the
    /// discretisation error estimate. The factor 2 is exact for a first-order
    /// scheme and conservative for higher orders.
    pub fn with_richardson(mut self, model: &RiskModel, eps_iter: f64) -> Result<Self> {
        let fine = solve_interest_model(model, self.grid.y, &self.grid.refined(), eps_iter)?;
        let h = self.grid.width();
        let probes: Vec<f64> = (0..=2 * self.grid.cells)
            .map(|k| (0.5 * h * k as f64).min(self.grid.y))
            .collect();
        let mut diff: f64 = 0.0;
        for &z in &probes {
            for &i in &self.grid.interest {
                diff = diff.max((self.eval(z, i) - fine.eval(z, i)).abs());
            }
        }
        self.discretization_error = Some(2.0 * diff + self.iteration_error + fine.iteration_error);
        Ok(self)
    }
}

/// `tb(y) + j^{−β} + F_G(y/j + m1·j^{β−1})`.
pub fn interest_bound_rhs(
    tb: &TailBound,
    y: f64,
    j: f64,
    beta: f64,
    premium: &dyn Law,
    m1: f64,
) -> Result<f64> {
    Ok(tb.evaluate(y) + interest_tail_term(y, j, beta, premium, m1)?)
}
