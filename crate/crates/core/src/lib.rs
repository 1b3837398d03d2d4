//! Ruin probabilities for discrete-time Markov risk models.
//!
//! The ruin probability `ψ(z)` is approximated by `1 − φ(z, y)`, where `φ` is
//! the probability of climbing above a barrier `y` before the surplus drops
//! below zero. The two-barrier quantity solves a well-posed fixpoint equation,
//! and the approximation error is bounded by any upper bound on `ψ(y)`.
//!
//! Module map:
//!
//! - [`models`]: claim/premium/increment laws, risk models, finite chains.
//! - [`bounds`]: tail bounds on `ψ(y)` and barrier selection.
//! - [`fredholm`]: Nyström solver for the two-barrier integral equation.
//! - [`reachavoid`]: reachability / reach-avoid iterations, contraction
//!   certificates and the surplus × interest grid solver.
//! - [`montecarlo`]: seeded trajectory simulation used as an oracle.

pub mod bounds;
pub mod certificate;
pub mod error;
pub mod fredholm;
pub mod models;
pub mod montecarlo;
pub mod quadrature;
pub mod reachavoid;
pub mod tabulated;

pub use certificate::ApproximationCertificate;
pub use error::{Error, Result};
pub use models::{Dist, Law, Moment, RiskModel};
