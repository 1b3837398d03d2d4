use std::sync::Arc;

use rand::RngCore;

use super::law::Dist;
use super::laws::{Difference, PointMass};
use crate::error::{Error, Result};

/// A discrete-time risk process `Z_{n+1} = g(Z_n, θ_n, ξ_n)`.
///
/// The parameter process never reads the surplus and the surplus map is
/// nondecreasing in the current surplus for fixed noise.
#[derive(Debug, Clone)]
pub enum RiskModel {
    /// `Z_{n+1} = Z_n + G_n − C_n`; `θ` is unused.
    CramerLundberg {
        increment: Dist,
        premium: Option<Dist>,
        claim: Option<Dist>,
    },
    /// `Z_{n+1} = (Z_n + G_n)(1 + I_n) − C_n`, `I_{n+1} = α I_n + W_n`.
    InterestRate {
        premium: Dist,
        claim: Dist,
        alpha: f64,
        noise: Dist,
    },
}

/// State `(z, θ)`; `interest` is zero for the Cramer–Lundberg variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub surplus: f64,
    pub interest: f64,
}

/// One draw of the driving noise. For a Cramer–Lundberg model given by its
/// increment alone, `premium` carries the increment and `claim` is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Noise {
    pub premium: f64,
    pub claim: f64,
    pub shock: f64,
}

impl RiskModel {
    pub fn cramer_lundberg(increment: Dist) -> Self {
        RiskModel::CramerLundberg {
            increment,
            premium: None,
            claim: None,
        }
    }

    /// Cramer–Lundberg model from independent premium and claim laws (one of
    /// them finite discrete).
    pub fn cramer_lundberg_pair(premium: Dist, claim: Dist) -> Result<Self> {
        let increment = Difference::new(premium.clone(), claim.clone())?.into_dist();
        Ok(RiskModel::CramerLundberg {
            increment,
            premium: Some(premium),
            claim: Some(claim),
        })
    }

    pub fn interest_rate(premium: Dist, claim: Dist, alpha: f64, noise: Dist) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidInput(format!("alpha = {alpha} not in [0, 1)")));
        }
        if noise.support().0 < 0.0 {
            return Err(Error::InvalidInput(
                "interest noise must be supported on [0, inf)".into(),
            ));
        }
        Ok(RiskModel::InterestRate {
            premium,
            claim,
            alpha,
            noise,
        })
    }

    /// Interest model with the interest rate collapsed to zero.
    pub fn zero_interest(premium: Dist, claim: Dist) -> Self {
        RiskModel::InterestRate {
            premium,
            claim,
            alpha: 0.0,
            noise: Arc::new(PointMass { value: 0.0 }),
        }
    }

    /// The one-step surplus increment when the model has no interest.
    pub fn increment(&self) -> Option<&Dist> {
        match self {
            RiskModel::CramerLundberg { increment, .. } => Some(increment),
            RiskModel::InterestRate { .. } => None,
        }
    }

    pub fn step(&self, state: State, noise: Noise) -> State {
        match self {
            RiskModel::CramerLundberg { .. } => State {
                surplus: state.surplus + noise.premium - noise.claim,
                interest: state.interest,
            },
            RiskModel::InterestRate { alpha, .. } => State {
                surplus: (state.surplus + noise.premium) * (1.0 + state.interest) - noise.claim,
                interest: alpha * state.interest + noise.shock,
            },
        }
    }

    pub fn sample_noise(&self, rng: &mut dyn RngCore) -> Noise {
        match self {
            RiskModel::CramerLundberg { increment, .. } => Noise {
                premium: increment.sample(rng),
                claim: 0.0,
                shock: 0.0,
            },
            RiskModel::InterestRate {
                premium,
                claim,
                noise,
                ..
            } => Noise {
                premium: premium.sample(rng),
                claim: claim.sample(rng),
                shock: noise.sample(rng),
            },
        }
    }
}
