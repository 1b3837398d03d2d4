//! Elementary laws: point masses, finite discrete, exponential, uniform,
//! Gaussian, Pareto, and the difference `G − C` of two independent laws.

use std::sync::Arc;

use rand::RngCore;
use statrs::function::erf::{erfc, erfc_inv};

use super::law::{default_expect, open_unit, Dist, Law, Moment};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PointMass {
    pub value: f64,
}

impl Law for PointMass {
    fn name(&self) -> String {
        format!("point_mass({})", self.value)
    }
    fn support(&self) -> (f64, f64) {
        (self.value, self.value)
    }
    fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        Some(vec![(self.value, 1.0)])
    }
    fn cdf(&self, x: f64) -> f64 {
        if x >= self.value {
            1.0
        } else {
            0.0
        }
    }
    fn cdf_left(&self, x: f64) -> f64 {
        if x > self.value {
            1.0
        } else {
            0.0
        }
    }
    fn sf(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }
    fn quantile(&self, _u: f64) -> f64 {
        self.value
    }
    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        // Consume one draw so every law advances the stream identically.
        let _ = rng.next_u64();
        self.value
    }
}

/// Finite discrete law. Values are kept sorted; zero-probability atoms are
/// retained so supports stay as declared.
#[derive(Debug, Clone, PartialEq)]
pub struct Discrete {
    values: Vec<f64>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Discrete {
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(Error::InvalidInput(
                "discrete law needs equally many values and probabilities".into(),
            ));
        }
        if probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::InvalidInput("probabilities must lie in [0, 1]".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        let mut pairs: Vec<(f64, f64)> = values.into_iter().zip(probs).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (values, probs): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self {
            values,
            probs,
            cumulative,
        })
    }

    pub fn two_point(high: f64, low: f64, p_high: f64) -> Result<Self> {
        Self::new(vec![high, low], vec![p_high, 1.0 - p_high])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

impl Law for Discrete {
    fn name(&self) -> String {
        format!("discrete({} atoms)", self.values.len())
    }
    fn support(&self) -> (f64, f64) {
        (self.values[0], *self.values.last().unwrap())
    }
    fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        Some(self.values.iter().copied().zip(self.probs.iter().copied()).collect())
    }
    fn cdf(&self, x: f64) -> f64 {
        let i = self.values.partition_point(|&v| v <= x);
        if i == 0 {
            0.0
        } else {
            self.cumulative[i - 1].min(1.0)
        }
    }
    fn cdf_left(&self, x: f64) -> f64 {
        let i = self.values.partition_point(|&v| v < x);
        if i == 0 {
            0.0
        } else {
            self.cumulative[i - 1].min(1.0)
        }
    }
    fn sf(&self, x: f64) -> f64 {
        let i = self.values.partition_point(|&v| v <= x);
        self.probs[i..].iter().sum()
    }
    fn quantile(&self, u: f64) -> f64 {
        let i = self.cumulative.partition_point(|&c| c < u);
        self.values[i.min(self.values.len() - 1)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exponential {
    pub rate: f64,
}

impl Law for Exponential {
    fn name(&self) -> String {
        format!("exponential({})", self.rate)
    }
    fn support(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
    fn core_range(&self) -> (f64, f64) {
        (0.0, 40.0 / self.rate)
    }
    fn has_density(&self) -> bool {
        true
    }
    fn density(&self, x: f64) -> Option<f64> {
        Some(if x < 0.0 { 0.0 } else { self.rate * (-self.rate * x).exp() })
    }
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-self.rate * x).exp_m1()
        }
    }
    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            (-self.rate * x).exp()
        }
    }
    fn quantile(&self, u: f64) -> f64 {
        -(-u).ln_1p() / self.rate
    }
    fn raw_moment(&self, k: u32) -> Moment {
        let fact: f64 = (1..=k).map(f64::from).product();
        Moment::Finite(fact / self.rate.powi(k as i32))
    }
    fn exp_moment(&self, s: f64) -> Moment {
        if s < self.rate {
            Moment::Finite(self.rate / (self.rate - s))
        } else {
            Moment::Infinite
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Uniform {
    pub low: f64,
    pub high: f64,
}

impl Law for Uniform {
    fn name(&self) -> String {
        format!("uniform({}, {})", self.low, self.high)
    }
    fn support(&self) -> (f64, f64) {
        (self.low, self.high)
    }
    fn has_density(&self) -> bool {
        true
    }
    fn density(&self, x: f64) -> Option<f64> {
        Some(if x < self.low || x > self.high {
            0.0
        } else {
            1.0 / (self.high - self.low)
        })
    }
    fn cdf(&self, x: f64) -> f64 {
        ((x - self.low) / (self.high - self.low)).clamp(0.0, 1.0)
    }
    fn quantile(&self, u: f64) -> f64 {
        self.low + u * (self.high - self.low)
    }
    fn raw_moment(&self, k: u32) -> Moment {
        let k1 = k as i32 + 1;
        Moment::Finite(
            (self.high.powi(k1) - self.low.powi(k1)) / (k1 as f64 * (self.high - self.low)),
        )
    }
    fn exp_moment(&self, s: f64) -> Moment {
        if s == 0.0 {
            return Moment::Finite(1.0);
        }
        Moment::Finite(
            ((s * self.high).exp() - (s * self.low).exp()) / (s * (self.high - self.low)),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    pub mean: f64,
    pub sd: f64,
}

impl Law for Gaussian {
    fn name(&self) -> String {
        format!("gaussian({}, {})", self.mean, self.sd)
    }
    fn support(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
    fn core_range(&self) -> (f64, f64) {
        (self.mean - 12.0 * self.sd, self.mean + 12.0 * self.sd)
    }
    fn has_density(&self) -> bool {
        true
    }
    fn density(&self, x: f64) -> Option<f64> {
        let u = (x - self.mean) / self.sd;
        Some((-0.5 * u * u).exp() / (self.sd * (2.0 * std::f64::consts::PI).sqrt()))
    }
    fn cdf(&self, x: f64) -> f64 {
        0.5 * erfc(-(x - self.mean) / (self.sd * std::f64::consts::SQRT_2))
    }
    fn sf(&self, x: f64) -> f64 {
        0.5 * erfc((x - self.mean) / (self.sd * std::f64::consts::SQRT_2))
    }
    fn quantile(&self, u: f64) -> f64 {
        self.mean - self.sd * std::f64::consts::SQRT_2 * erfc_inv(2.0 * u)
    }
    fn exp_moment(&self, s: f64) -> Moment {
        Moment::Finite((s * self.mean + 0.5 * s * s * self.sd * self.sd).exp())
    }
}

/// Pareto law with tail `P(X > x) = (scale/x)^shape` for `x ≥ scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pareto {
    pub shape: f64,
    pub scale: f64,
}

impl Law for Pareto {
    fn name(&self) -> String {
        format!("pareto({}, {})", self.shape, self.scale)
    }
    fn support(&self) -> (f64, f64) {
        (self.scale, f64::INFINITY)
    }
    fn core_range(&self) -> (f64, f64) {
        (self.scale, 64.0 * self.scale)
    }
    fn has_density(&self) -> bool {
        true
    }
    fn density(&self, x: f64) -> Option<f64> {
        Some(if x < self.scale {
            0.0
        } else {
            self.shape * self.scale.powf(self.shape) / x.powf(self.shape + 1.0)
        })
    }
    fn cdf(&self, x: f64) -> f64 {
        1.0 - self.sf(x)
    }
    fn sf(&self, x: f64) -> f64 {
        if x <= self.scale {
            1.0
        } else {
            (self.scale / x).powf(self.shape)
        }
    }
    fn quantile(&self, u: f64) -> f64 {
        self.scale * (1.0 - u).powf(-1.0 / self.shape)
    }
    fn raw_moment(&self, k: u32) -> Moment {
        let kf = f64::from(k);
        if kf < self.shape {
            Moment::Finite(self.shape * self.scale.powf(kf) / (self.shape - kf))
        } else {
            Moment::Infinite
        }
    }
    fn exp_moment(&self, s: f64) -> Moment {
        if s > 0.0 {
            Moment::Infinite
        } else {
            default_expect(self, &|x| (s * x).exp(), &[])
        }
    }
}

/// The law of `G − C` for independent `G`, `C`, at least one of which is
/// finite discrete. This is the one-step surplus increment of the
/// Cramer–Lundberg model.
#[derive(Debug, Clone)]
pub struct Difference {
    premium: Dist,
    claim: Dist,
    side: DiscreteSide,
}

#[derive(Debug, Clone)]
enum DiscreteSide {
    Premium(Vec<(f64, f64)>),
    Claim(Vec<(f64, f64)>),
}

impl Difference {
    pub fn new(premium: Dist, claim: Dist) -> Result<Self> {
        let side = if let Some(a) = premium.atoms() {
            DiscreteSide::Premium(a)
        } else if let Some(a) = claim.atoms() {
            DiscreteSide::Claim(a)
        } else {
            return Err(Error::Unsupported(
                "increment G - C needs a finite discrete premium or claim law".into(),
            ));
        };
        Ok(Self {
            premium,
            claim,
            side,
        })
    }

    pub fn into_dist(self) -> Dist {
        Arc::new(self)
    }
}

impl Law for Difference {
    fn name(&self) -> String {
        format!("{} - {}", self.premium.name(), self.claim.name())
    }
    fn support(&self) -> (f64, f64) {
        let (g0, g1) = self.premium.support();
        let (c0, c1) = self.claim.support();
        (g0 - c1, g1 - c0)
    }
    fn core_range(&self) -> (f64, f64) {
        let (g0, g1) = self.premium.core_range();
        let (c0, c1) = self.claim.core_range();
        (g0 - c1, g1 - c0)
    }
    fn has_density(&self) -> bool {
        match &self.side {
            DiscreteSide::Premium(_) => self.claim.has_density(),
            DiscreteSide::Claim(_) => self.premium.has_density(),
        }
    }
    fn density(&self, t: f64) -> Option<f64> {
        match &self.side {
            DiscreteSide::Premium(atoms) => {
                let mut s = 0.0;
                for &(g, p) in atoms {
                    s += p * self.claim.density(g - t)?;
                }
                Some(s)
            }
            DiscreteSide::Claim(atoms) => {
                let mut s = 0.0;
                for &(c, q) in atoms {
                    s += q * self.premium.density(t + c)?;
                }
                Some(s)
            }
        }
    }
    fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        let g = self.premium.atoms()?;
        let c = self.claim.atoms()?;
        let mut out = Vec::with_capacity(g.len() * c.len());
        for &(gv, gp) in &g {
            for &(cv, cp) in &c {
                out.push((gv - cv, gp * cp));
            }
        }
        Some(out)
    }
    fn cdf(&self, t: f64) -> f64 {
        match &self.side {
            DiscreteSide::Premium(atoms) => atoms
                .iter()
                .map(|&(g, p)| p * self.claim_survival_closed(g - t))
                .sum(),
            DiscreteSide::Claim(atoms) => {
                atoms.iter().map(|&(c, q)| q * self.premium.cdf(t + c)).sum()
            }
        }
    }
    fn cdf_left(&self, t: f64) -> f64 {
        match &self.side {
            DiscreteSide::Premium(atoms) => atoms
                .iter()
                .map(|&(g, p)| p * self.claim.sf(g - t))
                .sum(),
            DiscreteSide::Claim(atoms) => atoms
                .iter()
                .map(|&(c, q)| q * self.premium.cdf_left(t + c))
                .sum(),
        }
    }
    fn sf(&self, t: f64) -> f64 {
        match &self.side {
            DiscreteSide::Premium(atoms) => atoms
                .iter()
                .map(|&(g, p)| p * self.claim.cdf_left(g - t))
                .sum(),
            DiscreteSide::Claim(atoms) => {
                atoms.iter().map(|&(c, q)| q * self.premium.sf(t + c)).sum()
            }
        }
    }
    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        let g = self.premium.sample(rng);
        let c = self.claim.sample(rng);
        g - c
    }
    fn quantile(&self, u: f64) -> f64 {
        super::law::bisect_quantile(self, u)
    }
    fn expect(&self, h: &dyn Fn(f64) -> f64, breaks: &[f64]) -> Moment {
        let mut total = 0.0;
        match &self.side {
            DiscreteSide::Premium(atoms) => {
                for &(g, p) in atoms {
                    let mapped: Vec<f64> = breaks.iter().map(|b| g - b).collect();
                    match self.claim.expect(&|c| h(g - c), &mapped) {
                        Moment::Finite(v) => total += p * v,
                        Moment::Infinite => return Moment::Infinite,
                    }
                }
            }
            DiscreteSide::Claim(atoms) => {
                for &(c, q) in atoms {
                    let mapped: Vec<f64> = breaks.iter().map(|b| b + c).collect();
                    match self.premium.expect(&|g| h(g - c), &mapped) {
                        Moment::Finite(v) => total += q * v,
                        Moment::Infinite => return Moment::Infinite,
                    }
                }
            }
        }
        Moment::Finite(total)
    }
    fn exp_moment(&self, s: f64) -> Moment {
        match (self.premium.exp_moment(s), self.claim.exp_moment(-s)) {
            (Moment::Finite(a), Moment::Finite(b)) => Moment::Finite(a * b),
            _ => Moment::Infinite,
        }
    }
}

impl Difference {
    /// `P(C ≥ x)`.
    fn claim_survival_closed(&self, x: f64) -> f64 {
        1.0 - self.claim.cdf_left(x)
    }
}

/// Draw from a law through its quantile with a fresh uniform.
pub fn sample_by_quantile(law: &dyn Law, rng: &mut dyn RngCore) -> f64 {
    law.quantile(open_unit(rng))
}
