//! Risk models and the probability laws that drive them.

mod case_study;
mod chain;
mod law;
mod laws;
mod risk;
mod spec;

pub use case_study::{
    binomial_interest_distribution, gig_claim_distribution, gig_increment_distribution,
    heavy_tail_cdf, heavytail_increment_distribution, Gig, HeavyTail, GIG_INCOME, GIG_K,
};
pub use chain::FiniteChain;
pub use law::{open_unit, Dist, Law, Moment};
pub use laws::{
    sample_by_quantile, Difference, Discrete, Exponential, Gaussian, Pareto, PointMass, Uniform,
};
pub use risk::{Noise, RiskModel, State};
pub use spec::{LawSpec, ModelSpec};
