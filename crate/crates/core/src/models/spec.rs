//! Declarative (JSON) descriptions of laws and models.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::case_study::{binomial_interest_distribution, Gig, HeavyTail};
use super::law::Dist;
use super::laws::{Discrete, Exponential, Gaussian, Pareto, PointMass, Uniform};
use super::risk::RiskModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum LawSpec {
    PointMass { value: f64 },
    TwoPoint { high: f64, low: f64, p_high: f64 },
    Discrete { values: Vec<f64>, probs: Vec<f64> },
    Exponential { rate: f64 },
    Uniform { low: f64, high: f64 },
    Gaussian { mean: f64, sd: f64 },
    Pareto { shape: f64, scale: f64 },
    Gig,
    HeavyTail,
    BinomialInterest,
}

impl LawSpec {
    pub fn build(&self) -> Result<Dist> {
        let positive = |what: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("{what} must be positive, got {v}")))
            }
        };
        Ok(match self {
            LawSpec::PointMass { value } => Arc::new(PointMass { value: *value }),
            LawSpec::TwoPoint { high, low, p_high } => {
                Arc::new(Discrete::two_point(*high, *low, *p_high)?)
            }
            LawSpec::Discrete { values, probs } => {
                Arc::new(Discrete::new(values.clone(), probs.clone())?)
            }
            LawSpec::Exponential { rate } => {
                positive("rate", *rate)?;
                Arc::new(Exponential { rate: *rate })
            }
            LawSpec::Uniform { low, high } => {
                if !(high > low) {
                    return Err(Error::InvalidInput("uniform needs low < high".into()));
                }
                Arc::new(Uniform { low: *low, high: *high })
            }
            LawSpec::Gaussian { mean, sd } => {
                positive("sd", *sd)?;
                Arc::new(Gaussian { mean: *mean, sd: *sd })
            }
            LawSpec::Pareto { shape, scale } => {
                positive("shape", *shape)?;
                positive("scale", *scale)?;
                Arc::new(Pareto { shape: *shape, scale: *scale })
            }
            LawSpec::Gig => Arc::new(Gig),
            LawSpec::HeavyTail => Arc::new(HeavyTail),
            LawSpec::BinomialInterest => Arc::new(binomial_interest_distribution()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Either `increment`, or both `premium` and `claim`.
    CramerLundberg {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        increment: Option<LawSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        premium: Option<LawSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        claim: Option<LawSpec>,
    },
    InterestRate {
        premium: LawSpec,
        claim: LawSpec,
        #[serde(default)]
        alpha: f64,
        noise: LawSpec,
    },
}

impl ModelSpec {
    pub fn build(&self) -> Result<RiskModel> {
        match self {
            ModelSpec::CramerLundberg {
                increment,
                premium,
                claim,
            } => match (increment, premium, claim) {
                (Some(inc), None, None) => Ok(RiskModel::cramer_lundberg(inc.build()?)),
                (None, Some(g), Some(c)) => RiskModel::cramer_lundberg_pair(g.build()?, c.build()?),
                _ => Err(Error::InvalidInput(
                    "cramer_lundberg needs either `increment` or both `premium` and `claim`"
                        .into(),
                )),
            },
            ModelSpec::InterestRate {
                premium,
                claim,
                alpha,
                noise,
            } => RiskModel::interest_rate(premium.build()?, claim.build()?, *alpha, noise.build()?),
        }
    }
}
