//! bound → barrier → solve → validate.

use std::fmt::Write as _;

use ruin_core::bounds::{
    barrier_for_precision, interest_tail_term, korshunov_bound, korshunov_constants,
    korshunov_constants_with_s1, lundberg_bound, lundberg_coefficient, npc_drift,
    KorshunovConstants, PremiumClaim, TailBound,
};
use ruin_core::fredholm::{refine_to_error, GridFunction, SolveReport};
use ruin_core::models::{Difference, Dist, RiskModel};
use ruin_core::montecarlo::{estimate_ruin, McEstimate, VALIDATION_HEADER};
use ruin_core::reachavoid::{solve_interest_model, Grid2D, GridSolution};
use ruin_core::{ApproximationCertificate, Error};
use serde::Serialize;

use crate::config::{BoundMethod, RunConfig, SolverKind};
use crate::error::{CliError, CliResult};

const LUNDBERG_TOL: f64 = 1e-12;

/// Selected tail bound and barrier.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    /// `E G − E C`.
    pub drift: f64,
    pub bound: TailBound,
    pub lambda: Option<f64>,
    pub korshunov: Option<KorshunovConstants>,
    pub y: f64,
    /// `bound(y)`.
    pub tail: f64,
    /// Whether `y` came from the configuration rather than `split · ε`.
    pub barrier_fixed: bool,
}

/// Increment law `η = G − C` and the premium/claim description of a model.
fn model_parts(model: &RiskModel) -> CliResult<(Dist, PremiumClaim)> {
    Ok(match model {
        RiskModel::CramerLundberg {
            increment,
            premium: Some(g),
            claim: Some(c),
        } => (increment.clone(), PremiumClaim::independent(g.clone(), c.clone())),
        RiskModel::CramerLundberg { increment, .. } => {
            (increment.clone(), PremiumClaim::split(increment.clone()))
        }
        RiskModel::InterestRate { premium, claim, .. } => (
            Difference::new(premium.clone(), claim.clone())?.into_dist(),
            PremiumClaim::independent(premium.clone(), claim.clone()),
        ),
    })
}

fn drift(model: &RiskModel, pc: &PremiumClaim) -> CliResult<f64> {
    let a = match model {
        RiskModel::CramerLundberg {
            premium: Some(g),
            claim: Some(c),
            ..
        }
        | RiskModel::InterestRate {
            premium: g,
            claim: c,
            ..
        } => npc_drift(g.as_ref(), c.as_ref())?,
        RiskModel::CramerLundberg { .. } => pc.drift()?,
    };
    if a <= 0.0 {
        return Err(Error::NoDrift { drift: a }.into());
    }
    Ok(a)
}

/// Rounds `y > 0` up to nine significant digits. Bounds are nonincreasing,
/// so this keeps `bound(y) ≤ split · ε` while removing floating-point dust
/// such as `49.999999999999986` for `50`.
fn round_up(y: f64) -> f64 {
    if !(y > 0.0 && y.is_finite()) {
        return y;
    }
    let scale = 10f64.powi(9 - y.log10().ceil() as i32);
    (y * scale).ceil() / scale
}

/// Net profit check, tail bound and barrier.
pub fn cmd_bound(cfg: &RunConfig) -> CliResult<BoundReport> {
    let model = cfg.model.build()?;
    let (increment, pc) = model_parts(&model)?;
    let drift = drift(&model, &pc)?;

    let korshunov = |gamma: f64, s1: Option<f64>| -> CliResult<KorshunovConstants> {
        Ok(match s1 {
            Some(s) => korshunov_constants_with_s1(&pc, gamma, s)?,
            None => korshunov_constants(&pc, gamma)?,
        })
    };
    let (bound, lambda, constants) = match cfg.bound {
        BoundMethod::ClosedForm { form } => (TailBound::closed_form(form), None, None),
        BoundMethod::Lundberg => {
            let l = lundberg_coefficient(increment.as_ref(), LUNDBERG_TOL)?;
            (lundberg_bound(l), Some(l), None)
        }
        BoundMethod::Korshunov { gamma, s1 } => {
            if !pc.claim_unbounded() {
                return Err(Error::BoundedClaimSupport.into());
            }
            let k = korshunov(gamma, s1)?;
            (korshunov_bound(&k), None, Some(k))
        }
        BoundMethod::Auto { gamma } => match lundberg_coefficient(increment.as_ref(), LUNDBERG_TOL) {
            Ok(l) => (lundberg_bound(l), Some(l), None),
            Err(Error::NoLundbergCoefficient | Error::ToleranceNotMet(_)) => {
                let k = korshunov(gamma, None)?;
                (korshunov_bound(&k), None, Some(k))
            }
            Err(e) => return Err(e.into()),
        },
    };
    let (y, barrier_fixed) = match cfg.barrier {
        Some(y) => (y, true),
        None => (
            round_up(barrier_for_precision(&bound, cfg.split * cfg.epsilon)?),
            false,
        ),
    };
    Ok(BoundReport {
        drift,
        tail: bound.evaluate(y),
        bound,
        lambda,
        korshunov: constants,
        y,
        barrier_fixed,
    })
}

/// A solved two-barrier problem.
#[derive(Debug, Clone)]
pub enum Solution {
    Fredholm {
        function: GridFunction,
        report: SolveReport,
    },
    Grid(GridSolution),
}

#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub config: RunConfig,
    pub model: RiskModel,
    pub bound: BoundReport,
    pub solution: Solution,
    pub certificate: ApproximationCertificate,
}

impl SolveOutput {
    /// `ψ̃(z, i) = 1 − φ(z, i, y)`.
    pub fn psi(&self, z: f64, i: f64) -> f64 {
        match &self.solution {
            Solution::Fredholm { function, .. } => function.ruin(z),
            Solution::Grid(g) => 1.0 - g.eval(z, i),
        }
    }

    /// Interest values reported in curves.
    pub fn interest_levels(&self) -> Vec<f64> {
        match &self.solution {
            Solution::Fredholm { .. } => vec![0.0],
            Solution::Grid(g) => g.grid.interest.clone(),
        }
    }

    pub fn curve_points(&self) -> Vec<f64> {
        let c = &self.config.curve;
        let z_max = c.z_max.unwrap_or(self.bound.y);
        (0..c.points)
            .map(|k| z_max * k as f64 / (c.points - 1) as f64)
            .collect()
    }

    /// `z,i,psi_tilde,lower,upper,tail_bound`: the solution, its certified
    /// band, and the tail bound itself as a function of `z`.
    pub fn curve_csv(&self) -> String {
        let eps = self.certificate.total;
        let mut out = String::from("z,i,psi_tilde,lower,upper,tail_bound\n");
        for i in self.interest_levels() {
            for z in self.curve_points() {
                let p = self.psi(z, i);
                let _ = writeln!(
                    out,
                    "{z},{i},{p},{},{},{}",
                    (p - eps).max(0.0),
                    (p + eps).min(1.0),
                    self.bound.bound.evaluate(z)
                );
            }
        }
        out
    }

    /// Solver-native table: Nyström values on the curve grid, or the grid
    /// solution at every cell.
    pub fn solution_csv(&self) -> String {
        match &self.solution {
            Solution::Fredholm { function, .. } => function.to_csv(&self.curve_points()),
            Solution::Grid(g) => g.to_csv(),
        }
    }

    pub fn metadata(&self) -> serde_json::Value {
        let solver = match &self.solution {
            Solution::Fredholm { function, report } => function.metadata(report),
            Solution::Grid(g) => g.metadata(),
        };
        serde_json::json!({
            "config": self.config,
            "bound": self.bound,
            "solver": solver,
            "certificate": self.certificate,
        })
    }
}

/// Budget for the solver term: what the tail leaves of `ε`, but never less
/// than `1e-4 ε` so that a tail using all of `ε` still gets a tight solve.
fn solver_budget(eps: f64, tail: f64) -> f64 {
    (eps - tail).max(1e-4 * eps)
}

/// Solves for `φ(·, y)` and assembles the certificate.
pub fn cmd_solve(cfg: &RunConfig) -> CliResult<SolveOutput> {
    let bound = cmd_bound(cfg)?;
    let model = cfg.model.build()?;
    let y = bound.y;
    let budget = solver_budget(cfg.epsilon, bound.tail);
    let (solution, certificate) = match cfg.solver {
        SolverKind::Fredholm => {
            let Some(inc) = model.increment() else {
                return Err(CliError::Config(
                    "the fredholm solver handles Cramer-Lundberg models; use --solver grid".into(),
                ));
            };
            let (function, report) =
                refine_to_error(
                    inc,
                    y,
                    cfg.fredholm.tolerance,
                    budget,
                    cfg.fredholm.nodes,
                    cfg.fredholm.max_nodes,
                )?;
            let cert = ApproximationCertificate::new(
                y,
                bound.bound,
                "fredholm",
                report.solver_error,
                cfg.epsilon,
                cfg.split,
            )
            .with_residual(report.residual);
            (Solution::Fredholm { function, report }, cert)
        }
        SolverKind::Grid => {
            let (grid_model, interest_term) = grid_model(cfg, &model, y)?;
            let grid = match &cfg.grid.interest {
                Some(nodes) => {
                    let j = cfg.grid.j.unwrap_or(*nodes.last().unwrap_or(&0.0));
                    Grid2D::new(y, cfg.grid.cells, nodes.clone(), j)?
                }
                None => match &grid_model {
                    RiskModel::InterestRate { alpha, noise, .. } if *alpha == 0.0 => {
                        Grid2D::from_atoms(y, cfg.grid.cells, noise.as_ref())?
                    }
                    _ => {
                        return Err(CliError::Config(
                            "interest persistence alpha > 0 needs explicit grid.interest nodes".into(),
                        ))
                    }
                },
            };
            let mut sol = solve_interest_model(&grid_model, y, &grid, cfg.grid.iteration_tolerance)?;
            if cfg.grid.richardson {
                sol = sol.with_richardson(&grid_model, cfg.grid.iteration_tolerance)?;
            }
            let cert = ApproximationCertificate::new(
                y,
                bound.bound,
                "grid",
                sol.solver_error(),
                cfg.epsilon,
                cfg.split,
            )
            .with_estimated(sol.discretization_error.unwrap_or(0.0))
            .with_interest_term(interest_term);
            (Solution::Grid(sol), cert)
        }
    };
    Ok(SolveOutput {
        config: cfg.clone(),
        model,
        bound,
        solution,
        certificate,
    })
}

/// The model the grid solver runs on, and the interest-truncation term of
/// the tail (zero when the interest nodes cover the interest support).
fn grid_model(cfg: &RunConfig, model: &RiskModel, y: f64) -> CliResult<(RiskModel, f64)> {
    match model {
        RiskModel::CramerLundberg {
            premium: Some(g),
            claim: Some(c),
            ..
        } => Ok((RiskModel::zero_interest(g.clone(), c.clone()), 0.0)),
        RiskModel::CramerLundberg { .. } => Err(CliError::Config(
            "the grid solver needs separate premium and claim laws".into(),
        )),
        RiskModel::InterestRate {
            premium,
            claim,
            alpha,
            noise,
        } => {
            let covered = match (cfg.grid.j, *alpha == 0.0) {
                (None, _) => true,
                (Some(j), true) => noise.support().1 <= j,
                (Some(_), false) => false,
            };
            if covered {
                return Ok((model.clone(), 0.0));
            }
            let j = cfg.grid.j.unwrap();
            let m1 = PremiumClaim::independent(premium.clone(), claim.clone())
                .expect(&|g, c| (g - c).abs(), &[0.0])
                .or_infinite("E|G - C|")?;
            let term = interest_tail_term(y, j, cfg.grid.beta, premium.as_ref(), m1)?;
            Ok((model.clone(), term))
        }
    }
}

/// One validation point.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationRow {
    pub z: f64,
    pub i: f64,
    pub estimate: McEstimate,
    pub psi_tilde: f64,
    pub band: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Validation {
    pub rows: Vec<ValidationRow>,
    pub passed: usize,
}

impl Validation {
    pub fn all_pass(&self) -> bool {
        self.passed == self.rows.len()
    }

    /// `z,i,p_hat,lo,hi,N,trials,seed` followed by the solver value, the
    /// certified band and the verdict.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{VALIDATION_HEADER},psi_tilde,band,pass\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.estimate.csv_row(r.z, r.i),
                r.psi_tilde,
                r.band,
                r.pass
            );
        }
        out
    }

    pub fn into_result(self) -> CliResult<Self> {
        if self.all_pass() {
            Ok(self)
        } else {
            Err(CliError::ValidationFailed {
                failed: self.rows.len() - self.passed,
                total: self.rows.len(),
            })
        }
    }
}

/// Monte-Carlo ruin estimates at the configured points. A point passes when
/// `ψ̃(z, i)` lies in `[lo − ε, hi + ε]`, with `ε` the certified total.
pub fn cmd_validate(solved: &SolveOutput) -> CliResult<Validation> {
    let v = &solved.config.validation;
    let band = solved.certificate.total;
    let mut rows = Vec::new();
    for &i in &v.interest {
        for &z in &v.points {
            let estimate = estimate_ruin(&solved.model, z, i, v.horizon, v.trials, v.seed)?;
            let psi_tilde = solved.psi(z, i);
            let pass = estimate.lo - band <= psi_tilde && psi_tilde <= estimate.hi + band;
            rows.push(ValidationRow {
                z,
                i,
                estimate,
                psi_tilde,
                band,
                pass,
            });
        }
    }
    let passed = rows.iter().filter(|r| r.pass).count();
    Ok(Validation { rows, passed })
}
