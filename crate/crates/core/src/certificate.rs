//! The error statement attached to every published approximation
//! `ψ̃(z) = 1 − φ(z, y)`.

use serde::Serialize;

use crate::bounds::TailBound;

/// `sup_z |ψ(z) − ψ̃(z)| ≤ total = tail + solver_error`.
///
/// `tail` bounds the barrier effect `|ψ − (1 − φ(·, y))|` and `solver_error`
/// bounds `|φ − φ̃|`, the numerical error in the two-barrier solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproximationCertificate {
    pub y: f64,
    pub bound: TailBound,
    pub bound_name: &'static str,
    /// `bound(y)` plus `interest_term`.
    pub tail: f64,
    /// Interest-truncation contribution to `tail` (zero for finite interest
    /// support or models without interest).
    pub interest_term: f64,
    pub solver: &'static str,
    pub solver_error: f64,
    /// Part of `solver_error` that is an estimate rather than a proof.
    pub estimated_error: f64,
    pub residual: Option<f64>,
    pub total: f64,
    /// Requested precision.
    pub epsilon: f64,
    /// Share of `epsilon` given to the tail term when choosing `y`.
    pub split: f64,
}

impl ApproximationCertificate {
    pub fn new(
        y: f64,
        bound: TailBound,
        solver: &'static str,
        solver_error: f64,
        epsilon: f64,
        split: f64,
    ) -> Self {
        let tail = bound.evaluate(y);
        Self {
            y,
            bound,
            bound_name: bound.name(),
            tail,
            interest_term: 0.0,
            solver,
            solver_error,
            estimated_error: 0.0,
            residual: None,
            total: tail + solver_error,
            epsilon,
            split,
        }
    }

    pub fn with_residual(mut self, residual: f64) -> Self {
        self.residual = Some(residual);
        self
    }

    pub fn with_interest_term(mut self, term: f64) -> Self {
        self.tail += term - self.interest_term;
        self.interest_term = term;
        self.total = self.tail + self.solver_error;
        self
    }

    pub fn with_estimated(mut self, estimated: f64) -> Self {
        self.estimated_error = estimated;
        self
    }

    /// Whether the certified total is within the requested precision.
    pub fn meets_epsilon(&self) -> bool {
        self.total <= self.epsilon
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::yang_bound;

    #[test]
    fn total_is_tail_plus_solver() {
        let c = ApproximationCertificate::new(4.5, yang_bound(), "fredholm", 1e-9, 0.011, 1.0);
        assert_eq!(c.total, c.tail + c.solver_error);
        assert!((c.tail - 0.0107038).abs() < 1e-6);
        assert!(c.meets_epsilon());
        assert_eq!(c.bound_name, "yang");
        let json = serde_json::to_value(&c).unwrap();
        assert_eq!(json["solver"], "fredholm");
        let d = c.clone().with_interest_term(1e-3);
        assert!((d.total - (c.total + 1e-3)).abs() < 1e-15);
    }
}
