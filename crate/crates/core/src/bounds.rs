//! Upper bounds on `ψ*(y) = sup_{z ≥ y} ψ(z)` and barrier selection.
//!
//! Light tails use the Lundberg bound `e^{−λy}`; heavy tails the moment
//! bound `c·y^{1−γ}`; known closed forms (e.g. Yang's bound for the GIG
//! example) can be supplied directly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Dist, Law, Moment};

/// Named closed-form bounds `y ↦ bound(y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClosedForm {
    /// `(1 + 0.1y)^{−0.1} e^{−y}`.
    Yang,
    /// `coefficient · e^{−rate·y}`.
    Exponential { coefficient: f64, rate: f64 },
    /// `c · y^{1−gamma}`.
    Power { c: f64, gamma: f64 },
}

impl ClosedForm {
    fn eval(&self, y: f64) -> f64 {
        match *self {
            ClosedForm::Yang => (1.0 + 0.1 * y).powf(-0.1) * (-y).exp(),
            ClosedForm::Exponential { coefficient, rate } => coefficient * (-rate * y).exp(),
            ClosedForm::Power { c, gamma } => c * y.powf(1.0 - gamma),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailBoundKind {
    Lundberg { lambda: f64 },
    Korshunov { c: f64, gamma: f64 },
    ClosedForm { form: ClosedForm },
}

/// An evaluable, nonincreasing upper bound on `ψ*(y)`, clamped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub kind: TailBoundKind,
}

impl TailBound {
    pub fn closed_form(form: ClosedForm) -> Self {
        Self {
            kind: TailBoundKind::ClosedForm { form },
        }
    }

    pub fn evaluate(&self, y: f64) -> f64 {
        let v = match self.kind {
            TailBoundKind::Lundberg { lambda } => (-lambda * y).exp(),
            TailBoundKind::Korshunov { c, gamma } => c * y.powf(1.0 - gamma),
            TailBoundKind::ClosedForm { form } => form.eval(y),
        };
        if v.is_nan() {
            1.0
        } else {
            v.clamp(0.0, 1.0)
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            TailBoundKind::Lundberg { .. } => "lundberg",
            TailBoundKind::Korshunov { .. } => "korshunov",
            TailBoundKind::ClosedForm {
                form: ClosedForm::Yang,
            } => "yang",
            TailBoundKind::ClosedForm { .. } => "closed_form",
        }
    }
}

/// How the premium `G` and claim `C` of one period are specified.
#[derive(Debug, Clone)]
pub enum PremiumClaim {
    /// Independent `G` and `C`; the premium is optionally capped at
    /// `min(G, premium_cap)`.
    Independent {
        premium: Dist,
        claim: Dist,
        premium_cap: Option<f64>,
    },
    /// Only the increment `η` is given; take `G = η⁺`, `C = η⁻`.
    IncrementSplit { increment: Dist },
}

impl PremiumClaim {
    pub fn independent(premium: Dist, claim: Dist) -> Self {
        PremiumClaim::Independent {
            premium,
            claim,
            premium_cap: None,
        }
    }

    pub fn split(increment: Dist) -> Self {
        PremiumClaim::IncrementSplit { increment }
    }

    /// `E h(G, C)`. `kinks` lists values of `G − C` at which `h` is not
    /// smooth.
    pub fn expect(&self, h: &dyn Fn(f64, f64) -> f64, kinks: &[f64]) -> Moment {
        match self {
            PremiumClaim::IncrementSplit { increment } => {
                let mut breaks = kinks.to_vec();
                breaks.push(0.0);
                increment.expect(&|x| h(x.max(0.0), (-x).max(0.0)), &breaks)
            }
            PremiumClaim::Independent {
                premium,
                claim,
                premium_cap,
            } => {
                let cap = premium_cap.unwrap_or(f64::INFINITY);
                let hg = |g: f64, c: f64| h(g.min(cap), c);
                if let Some(atoms) = premium.atoms() {
                    let mut total = 0.0;
                    for (g, p) in atoms {
                        let gc = g.min(cap);
                        let b: Vec<f64> = kinks.iter().map(|k| gc - k).collect();
                        match claim.expect(&|c| hg(g, c), &b) {
                            Moment::Finite(v) => total += p * v,
                            Moment::Infinite => return Moment::Infinite,
                        }
                    }
                    Moment::Finite(total)
                } else if let Some(atoms) = claim.atoms() {
                    let mut total = 0.0;
                    for (c, q) in atoms {
                        let mut b: Vec<f64> = kinks.iter().map(|k| k + c).collect();
                        if cap.is_finite() {
                            b.push(cap);
                        }
                        match premium.expect(&|g| hg(g, c), &b) {
                            Moment::Finite(v) => total += q * v,
                            Moment::Infinite => return Moment::Infinite,
                        }
                    }
                    Moment::Finite(total)
                } else {
                    let outer_breaks: Vec<f64> = if cap.is_finite() { vec![cap] } else { vec![] };
                    premium.expect(
                        &|g| {
                            let gc = g.min(cap);
                            let b: Vec<f64> = kinks.iter().map(|k| gc - k).collect();
                            claim.expect(&|c| hg(g, c), &b).value().unwrap_or(f64::INFINITY)
                        },
                        &outer_breaks,
                    )
                }
            }
        }
    }

    /// `a = E G − E C`; infinite when `E G` is.
    pub fn drift(&self) -> Result<f64> {
        match self {
            PremiumClaim::IncrementSplit { increment } => {
                increment.mean().or_infinite("E eta")
            }
            PremiumClaim::Independent {
                premium,
                claim,
                premium_cap,
            } => {
                let ec = claim.mean().or_infinite("E C")?;
                let eg = match premium_cap {
                    Some(k) => capped_mean(premium.as_ref(), *k),
                    None => premium.mean(),
                };
                Ok(match eg {
                    Moment::Finite(g) => g - ec,
                    Moment::Infinite => f64::INFINITY,
                })
            }
        }
    }

    /// Whether `F_C(x) < 1` for every `x > 0`, as the moment bound assumes.
    pub fn claim_unbounded(&self) -> bool {
        match self {
            PremiumClaim::IncrementSplit { increment } => increment.support().0 == f64::NEG_INFINITY,
            PremiumClaim::Independent { claim, .. } => claim.support().1 == f64::INFINITY,
        }
    }
}

fn capped_mean(g: &dyn Law, k: f64) -> Moment {
    g.expect(&|x| x.min(k), &[k])
}

/// `a = E G − E C`.
pub fn npc_drift(premium: &dyn Law, claim: &dyn Law) -> Result<f64> {
    let g = premium.mean().or_infinite("E G")?;
    let c = claim.mean().or_infinite("E C")?;
    Ok(g - c)
}

/// The positive root `λ` of `m(t) = E e^{−tη} = 1`.
pub fn lundberg_coefficient(inc: &dyn Law, tol: f64) -> Result<f64> {
    let a = inc.mean().or_infinite("E eta")?;
    if a <= 0.0 {
        return Err(Error::NoDrift { drift: a });
    }
    let m = |t: f64| inc.mgf(t);
    let mut lo = 2f64.powi(-30);
    if !m(lo).is_finite() {
        return Err(Error::NoLundbergCoefficient);
    }
    // m'(0) = −a < 0, so m < 1 just right of zero.
    match m(lo) {
        Moment::Finite(v) if v < 1.0 => {}
        _ => {
            return Err(Error::ToleranceNotMet(
                "m(t) >= 1 arbitrarily close to t = 0".into(),
            ))
        }
    }
    let mut t = lo;
    let (hi, hi_v);
    loop {
        t *= 2.0;
        if t > 2f64.powi(64) {
            return Err(Error::ToleranceNotMet(
                "m(t) stays below 1; no finite root bracketed".into(),
            ));
        }
        match m(t) {
            Moment::Finite(v) if v < 1.0 => lo = t,
            Moment::Finite(v) => {
                hi = t;
                hi_v = v;
                break;
            }
            Moment::Infinite => {
                // Locate the edge of finiteness between lo and t.
                let mut inf = t;
                let mut found = None;
                while inf - lo > 1e-13 * inf {
                    let mid = 0.5 * (lo + inf);
                    match m(mid) {
                        Moment::Infinite => inf = mid,
                        Moment::Finite(v) if v >= 1.0 => {
                            found = Some((mid, v));
                            break;
                        }
                        Moment::Finite(_) => lo = mid,
                    }
                }
                match found {
                    Some((h, v)) => {
                        hi = h;
                        hi_v = v;
                        break;
                    }
                    None => {
                        return Err(Error::ToleranceNotMet(format!(
                            "m(t) < 1 up to t = {lo} where it becomes infinite; no root to bracket"
                        )))
                    }
                }
            }
        }
    }
    let lo_v = m(lo).value().unwrap_or(f64::NAN);
    // Illinois false position on m(t) − 1, bisecting when it stalls.
    let (mut a_t, mut a_f) = (lo, lo_v - 1.0);
    let (mut b_t, mut b_f) = (hi, hi_v - 1.0);
    if b_f.abs() <= tol {
        return Ok(b_t);
    }
    let mut side = 0;
    for _ in 0..500 {
        let mut x = (a_t * b_f - b_t * a_f) / (b_f - a_f);
        if !(x > a_t && x < b_t) {
            x = 0.5 * (a_t + b_t);
        }
        let fx = match m(x) {
            Moment::Finite(v) => v - 1.0,
            Moment::Infinite => f64::INFINITY,
        };
        if fx.abs() <= tol {
            return Ok(x);
        }
        if fx < 0.0 {
            a_t = x;
            a_f = fx;
            if side == -1 {
                b_f *= 0.5;
            }
            side = -1;
        } else {
            b_t = x;
            b_f = if fx.is_finite() { fx } else { b_f };
            if side == 1 {
                a_f *= 0.5;
            }
            side = 1;
        }
        if b_t - a_t <= 4.0 * f64::EPSILON * b_t {
            break;
        }
    }
    Err(Error::ToleranceNotMet(format!(
        "root search stalled with |m - 1| = {:.3e} > {tol:.3e}",
        a_f.abs().min(b_f.abs())
    )))
}

pub fn lundberg_bound(lambda: f64) -> TailBound {
    TailBound {
        kind: TailBoundKind::Lundberg { lambda },
    }
}

/// The constants of the moment bound `|ψ − (1 − φ(·, y))| ≤ c·y^{1−γ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KorshunovConstants {
    pub a: f64,
    pub gamma: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub c1: f64,
    pub c2: f64,
    pub c: f64,
    /// Premium cap `k` used when `E|C − G|^γ` is infinite for the raw premium.
    pub truncation: Option<f64>,
}

const S1_GRID: f64 = 1e-3;

fn truncated_mean_diff(pc: &PremiumClaim, s: f64) -> Result<f64> {
    pc.expect(&|g, c| (g - c).min(s), &[s])
        .or_infinite("E min(G - C, s)")
}

/// Korshunov constants with `s1` the smallest multiple of `1e-3` satisfying
/// `E min(G − C, s1) ≥ (2/3) a`.
pub fn korshunov_constants(pc: &PremiumClaim, gamma: f64) -> Result<KorshunovConstants> {
    korshunov_impl(pc, gamma, None)
}

/// As [`korshunov_constants`] with a caller-chosen `s1`, which must satisfy
/// `E min(G − C, s1) ≥ (2/3) a`.
pub fn korshunov_constants_with_s1(
    pc: &PremiumClaim,
    gamma: f64,
    s1: f64,
) -> Result<KorshunovConstants> {
    korshunov_impl(pc, gamma, Some(s1))
}

fn korshunov_impl(pc: &PremiumClaim, gamma: f64, s1: Option<f64>) -> Result<KorshunovConstants> {
    if !(gamma >= 2.0) {
        return Err(Error::InvalidInput(format!("gamma = {gamma} must be >= 2")));
    }
    let a = pc.drift()?;
    if a <= 0.0 {
        return Err(Error::NoDrift { drift: a });
    }
    let abs_gamma = pc.expect(&|g, c| (c - g).abs().powf(gamma), &[0.0]);
    if abs_gamma.is_finite() && a.is_finite() {
        return korshunov_finite(pc, gamma, a, s1, None);
    }
    // Cap the premium when only its moments are to blame.
    if let PremiumClaim::Independent { premium, claim, .. } = pc {
        let claim_moment = claim.expect(&|c| c.abs().powf(gamma), &[0.0]);
        if claim_moment.is_finite() {
            let k = truncation_level(premium.as_ref(), claim.as_ref())?;
            let capped = PremiumClaim::Independent {
                premium: premium.clone(),
                claim: claim.clone(),
                premium_cap: Some(k),
            };
            let a = capped.drift()?;
            let abs_gamma = capped.expect(&|g, c| (c - g).abs().powf(gamma), &[0.0]);
            if abs_gamma.is_finite() && a > 0.0 {
                return korshunov_finite(&capped, gamma, a, s1, Some(k));
            }
        }
    }
    Err(Error::InfiniteMoment(format!("E|C - G|^{gamma}")))
}

fn korshunov_finite(
    pc: &PremiumClaim,
    gamma: f64,
    a: f64,
    s1: Option<f64>,
    truncation: Option<f64>,
) -> Result<KorshunovConstants> {
    let target = 2.0 / 3.0 * a;
    let s1 = match s1 {
        Some(s) => {
            let v = truncated_mean_diff(pc, s)?;
            if v < target {
                return Err(Error::InvalidInput(format!(
                    "s1 = {s} gives E min(G - C, s1) = {v:.6} < 2a/3 = {target:.6}"
                )));
            }
            s
        }
        None => smallest_s1(pc, target)?,
    };
    let second = pc
        .expect(&|g, c| (g - c) * (g - c), &[])
        .or_infinite("E (G - C)^2")?;
    let s2 = 2f64.powf(gamma - 1.0) * (gamma - 1.0) / a * second;
    let s3 = s1.max(s2);
    let c1 = gamma * (gamma - 1.0) * 2f64.powf(gamma - 3.0)
        * pc.expect(&|g, c| c.powf(gamma - 2.0) * (g - c) * (g - c), &[])
            .or_infinite("E C^(gamma-2) (G - C)^2")?;
    let c2 = gamma
        * pc.expect(&|_, c| (s3 + c).powf(gamma - 1.0) * c, &[])
            .or_infinite("E (s3 + C)^(gamma-1) C")?;
    let c = 3.0 * c1.max(c2) / (a * gamma) + 0.5 * s3.powf(gamma - 1.0);
    Ok(KorshunovConstants {
        a,
        gamma,
        s1,
        s2,
        s3,
        c1,
        c2,
        c,
        truncation,
    })
}

/// Smallest `s = k·1e-3` with `E min(G − C, s) ≥ target`; the left side is
/// nondecreasing in `s`.
fn smallest_s1(pc: &PremiumClaim, target: f64) -> Result<f64> {
    let ok = |k: u64| -> Result<bool> { Ok(truncated_mean_diff(pc, k as f64 * S1_GRID)? >= target) };
    let mut hi = 1u64;
    while !ok(hi)? {
        hi *= 2;
        if hi > 1 << 50 {
            return Err(Error::ToleranceNotMet("s1 search did not terminate".into()));
        }
    }
    let mut lo = 0u64;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi as f64 * S1_GRID)
}

pub fn korshunov_bound(k: &KorshunovConstants) -> TailBound {
    TailBound {
        kind: TailBoundKind::Korshunov {
            c: k.c,
            gamma: k.gamma,
        },
    }
}

/// Smallest premium cap `k` on a doubling grid with
/// `E min(k, G) − E C ≥ ½ (E G − E C)`.
///
/// The grid is `u·2^j`, with `u` the upper end of the premium support when
/// finite and 1 otherwise. When `E G` is infinite the target drift is 1.
pub fn truncation_level(premium: &dyn Law, claim: &dyn Law) -> Result<f64> {
    let ec = claim.mean().or_infinite("E C")?;
    let target = match premium.mean() {
        Moment::Finite(eg) => {
            let a = eg - ec;
            if a <= 0.0 {
                return Err(Error::NoDrift { drift: a });
            }
            0.5 * a
        }
        Moment::Infinite => 1.0,
    };
    let upper = premium.support().1;
    let u = if upper.is_finite() && upper > 0.0 { upper } else { 1.0 };
    for j in -30..=200 {
        let k = u * 2f64.powi(j);
        let m = capped_mean(premium, k).or_infinite("E min(k, G)")?;
        if m - ec >= target {
            return Ok(k);
        }
    }
    Err(Error::ToleranceNotMet("no truncation level found".into()))
}

/// Barrier `y` with `b.evaluate(y) ≤ eps_tail`.
pub fn barrier_for_precision(b: &TailBound, eps_tail: f64) -> Result<f64> {
    if !(eps_tail > 0.0 && eps_tail < 1.0) {
        return Err(Error::InvalidInput(format!("eps_tail = {eps_tail} not in (0, 1)")));
    }
    Ok(match b.kind {
        TailBoundKind::Lundberg { lambda } => -eps_tail.ln() / lambda,
        TailBoundKind::Korshunov { c, gamma } => (c / eps_tail).powf(1.0 / (gamma - 1.0)),
        TailBoundKind::ClosedForm { .. } => {
            if b.evaluate(0.0) <= eps_tail {
                return Ok(0.0);
            }
            let mut hi = 1.0;
            while b.evaluate(hi) > eps_tail {
                hi *= 2.0;
                if hi > 1e300 {
                    return Err(Error::ToleranceNotMet(
                        "closed-form bound does not fall below eps_tail".into(),
                    ));
                }
            }
            let mut lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
            while hi - lo > 1e-12 * hi {
                let mid = 0.5 * (lo + hi);
                if b.evaluate(mid) <= eps_tail {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi
        }
    })
}

/// `ψ(z) ≤ (1 + 0.1z)^{−0.1} e^{−z}` for the GIG example.
pub fn yang_bound() -> TailBound {
    TailBound::closed_form(ClosedForm::Yang)
}

/// `j^{−β} + F_G(y/j + m1·j^{β−1})`: the interest-truncation part of the
/// bound for the interest model; `m1 = E|G − C|`.
pub fn interest_tail_term(y: f64, j: f64, beta: f64, premium: &dyn Law, m1: f64) -> Result<f64> {
    let mass = premium.cdf(0.0);
    if mass > 0.0 {
        return Err(Error::PositiveMassAtZeroPremium { mass });
    }
    if !(beta > 0.0 && beta < 1.0) || !(j > 0.0) {
        return Err(Error::InvalidInput("need j > 0 and beta in (0, 1)".into()));
    }
    Ok(j.powf(-beta) + premium.cdf(y / j + m1 * j.powf(beta - 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{
        gig_claim_distribution, gig_increment_distribution, heavytail_increment_distribution,
        Difference, Discrete, Exponential, Gaussian, Pareto, PointMass,
    };
    use approx::assert_abs_diff_eq;
    use std::sync::Arc;

    fn pm(v: f64) -> Dist {
        Arc::new(PointMass { value: v })
    }

    #[test]
    fn drift_examples() {
        let a = npc_drift(&PointMass { value: 1.3035 }, gig_claim_distribution().as_ref()).unwrap();
        assert!(a > 0.0);
        assert_abs_diff_eq!(a, 1.3035 - 0.814, epsilon = 5e-3);
        assert_eq!(npc_drift(&PointMass { value: 1.0 }, &PointMass { value: 1.0 }).unwrap(), 0.0);
        let h = heavytail_increment_distribution();
        assert_abs_diff_eq!(PremiumClaim::split(h).drift().unwrap(), 1.0, epsilon = 1e-6);
        let p = Pareto { shape: 0.9, scale: 1.0 };
        assert!(matches!(npc_drift(&p, &PointMass { value: 0.5 }), Err(Error::InfiniteMoment(_))));
    }

    #[test]
    fn lundberg_examples() {
        let two = Discrete::two_point(1.0, -1.0, 0.6).unwrap();
        let l = lundberg_coefficient(&two, 1e-12).unwrap();
        assert_abs_diff_eq!(l, 1.5f64.ln(), epsilon = 1e-10);
        let g = Gaussian { mean: 1.0, sd: 1.0 };
        assert_abs_diff_eq!(lundberg_coefficient(&g, 1e-12).unwrap(), 2.0, epsilon = 1e-10);
        let h = heavytail_increment_distribution();
        assert_eq!(lundberg_coefficient(h.as_ref(), 1e-10), Err(Error::NoLundbergCoefficient));
        // Constant income 2, exponential(1) claims: m(t) = e^{−2t}/(1−t).
        let inc = Difference::new(pm(2.0), Arc::new(Exponential { rate: 1.0 })).unwrap();
        let l = lundberg_coefficient(&inc, 1e-12).unwrap();
        assert_abs_diff_eq!((-2.0 * l).exp() / (1.0 - l), 1.0, epsilon = 1e-12);
        let neg = Discrete::two_point(1.0, -1.0, 0.4).unwrap();
        assert!(matches!(lundberg_coefficient(&neg, 1e-10), Err(Error::NoDrift { .. })));
    }

    #[test]
    fn gig_has_no_cramer_root() {
        // m(t) < 1 on (0, 1] and infinite beyond: the adjustment equation has
        // no root.
        let inc = gig_increment_distribution();
        assert!(inc.mgf(1.0).value().unwrap() < 1.0);
        assert!(matches!(
            lundberg_coefficient(inc.as_ref(), 1e-10),
            Err(Error::ToleranceNotMet(_))
        ));
    }

    #[test]
    fn lundberg_bound_values() {
        assert_eq!(lundberg_bound(1.0).evaluate(0.0), 1.0);
        assert_abs_diff_eq!(lundberg_bound(1.0).evaluate(100f64.ln()), 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(lundberg_bound(0.405465).evaluate(10.0), 0.01734, epsilon = 1e-5);
    }

    #[test]
    fn korshunov_bound_values() {
        let k = |c| TailBound {
            kind: TailBoundKind::Korshunov { c, gamma: 2.0 },
        };
        assert_abs_diff_eq!(k(5.0).evaluate(50.0), 0.1, epsilon = 1e-15);
        assert_eq!(k(1.0).evaluate(1.0), 1.0);
        assert_abs_diff_eq!(k(5.0).evaluate(500.0), 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(barrier_for_precision(&k(5.0), 0.1).unwrap(), 50.0, epsilon = 1e-12);
    }

    #[test]
    fn two_point_korshunov_constants() {
        let inc: Dist = Arc::new(Discrete::two_point(1.0, -1.0, 0.75).unwrap());
        let pc = PremiumClaim::split(inc);
        assert!(!pc.claim_unbounded());
        let k = korshunov_constants(&pc, 2.0).unwrap();
        assert_abs_diff_eq!(k.a, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(k.s2, 4.0, epsilon = 1e-14);
        // E min(η, s) = 0.75 min(1, s) − 0.25 ≥ 1/3 first at s = 7/9.
        assert_abs_diff_eq!(k.s1, 0.778, epsilon = 1e-12);
        assert_abs_diff_eq!(k.c1, 1.0, epsilon = 1e-14);
        // C = η⁻ ∈ {0, 1}: E (4 + C) C = 0.25 · 5.
        assert_abs_diff_eq!(k.c2, 2.0 * 1.25, epsilon = 1e-14);
        assert_abs_diff_eq!(k.c, 3.0 * 2.5 / 1.0 + 0.5 * 4.0, epsilon = 1e-13);
    }

    #[test]
    fn two_point_premium_with_unbounded_claims() {
        // G ∈ {1, 3} equally likely, C ~ Exp(1): a = 1, E(G−C)² by hand.
        let g: Dist = Arc::new(Discrete::two_point(3.0, 1.0, 0.5).unwrap());
        let c: Dist = Arc::new(Exponential { rate: 1.0 });
        let pc = PremiumClaim::independent(g, c);
        let k = korshunov_constants(&pc, 2.0).unwrap();
        assert_abs_diff_eq!(k.a, 1.0, epsilon = 1e-12);
        // E(G−C)² = E G² − 2 E G E C + E C² = 5 − 4 + 2 = 3.
        assert_abs_diff_eq!(k.s2, 2.0 * 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(k.c1, 3.0, epsilon = 1e-9);
        // E (s3 + C) C = s3 + 2.
        assert_abs_diff_eq!(k.c2, 2.0 * (k.s3 + 2.0), epsilon = 1e-9);
        assert_eq!(k.s3, k.s1.max(k.s2));
        assert_abs_diff_eq!(k.c, 3.0 * k.c1.max(k.c2) / 2.0 + 0.5 * k.s3, epsilon = 1e-12);
        let v = truncated_mean_diff(&pc, k.s1).unwrap();
        assert!(v >= 2.0 / 3.0);
        assert!(truncated_mean_diff(&pc, k.s1 - S1_GRID).unwrap() < 2.0 / 3.0);
    }

    #[test]
    fn heavy_tail_constants() {
        let pc = PremiumClaim::split(heavytail_increment_distribution());
        let k = korshunov_constants(&pc, 2.0).unwrap();
        assert_abs_diff_eq!(k.a, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(k.s2, 4.0, epsilon = 1e-5);
        assert_abs_diff_eq!(k.s3, 4.0, epsilon = 1e-5);
        assert_abs_diff_eq!(k.c1, 2.0, epsilon = 1e-5);
        assert_abs_diff_eq!(k.c, 5.0, epsilon = 1e-5);
        assert!(k.c2 < k.c1);
        assert!(k.s1 > 1.0 && k.s1 < 1.1, "s1 = {}", k.s1);
        let k107 = korshunov_constants_with_s1(&pc, 2.0, 1.07).unwrap();
        assert_eq!(k107.c, k.c);
        assert!(korshunov_constants_with_s1(&pc, 2.0, 0.5).is_err());
        assert!(matches!(korshunov_constants(&pc, 3.0), Err(Error::InfiniteMoment(_))));
    }

    #[test]
    fn truncation_examples() {
        let g = Discrete::new(vec![0.5, 2.0], vec![0.5, 0.5]).unwrap();
        let k = truncation_level(&g, &PointMass { value: 0.5 }).unwrap();
        assert!(k <= 2.0);
        let k = truncation_level(&PointMass { value: 1.3035 }, gig_claim_distribution().as_ref())
            .unwrap();
        assert_abs_diff_eq!(k, 1.3035, epsilon = 1e-15);
        let p = Pareto { shape: 1.5, scale: 1.0 };
        let k = truncation_level(&p, &PointMass { value: 0.5 }).unwrap();
        let m = capped_mean(&p, k).value().unwrap();
        assert!(m - 0.5 >= 0.5 * 2.5);
        assert!(capped_mean(&p, k / 2.0).value().unwrap() - 0.5 < 0.5 * 2.5);
        // Closed form E min(k, G) = 3 − 2/√k.
        assert_abs_diff_eq!(m, 3.0 - 2.0 / k.sqrt(), epsilon = 1e-8);
        let bad = truncation_level(&PointMass { value: 0.1 }, &PointMass { value: 0.5 });
        assert!(matches!(bad, Err(Error::NoDrift { .. })));
    }

    #[test]
    fn truncation_enables_korshunov_for_heavy_premiums() {
        // E G² = ∞ for Pareto(1.5) but E C² < ∞: the premium is capped at the
        // truncation level, here E min(k, G) = 3 − 2/√k ≥ 1 + 1 → k = 4.
        let g: Dist = Arc::new(Pareto { shape: 1.5, scale: 1.0 });
        let c: Dist = Arc::new(Exponential { rate: 1.0 });
        let pc = PremiumClaim::independent(g, c);
        let k = korshunov_constants(&pc, 2.0).unwrap();
        assert_eq!(k.truncation, Some(4.0));
        assert_abs_diff_eq!(k.a, 2.0 - 1.0, epsilon = 1e-8);
        assert!(k.c.is_finite() && k.c > 0.0);
        let heavy_claims = PremiumClaim::independent(
            Arc::new(PointMass { value: 5.0 }),
            Arc::new(Pareto { shape: 1.5, scale: 1.0 }),
        );
        assert!(matches!(korshunov_constants(&heavy_claims, 2.0), Err(Error::InfiniteMoment(_))));
    }

    #[test]
    fn barriers() {
        let l = lundberg_bound(1.0);
        assert_abs_diff_eq!(barrier_for_precision(&l, 0.01).unwrap(), 100f64.ln(), epsilon = 1e-12);
        let y = barrier_for_precision(&yang_bound(), 0.011).unwrap();
        assert!(y <= 4.5);
        assert!(yang_bound().evaluate(y) <= 0.011);
        assert!(yang_bound().evaluate(y * (1.0 - 1e-9)) > 0.011);
    }

    #[test]
    fn yang_values() {
        let b = yang_bound();
        assert_eq!(b.evaluate(0.0), 1.0);
        assert_abs_diff_eq!(b.evaluate(4.5), 0.0107, epsilon = 1e-4);
        assert_abs_diff_eq!(b.evaluate(10.0), 2f64.powf(-0.1) * (-10.0f64).exp(), epsilon = 1e-18);
        assert_abs_diff_eq!(b.evaluate(10.0), 4.24e-5, epsilon = 1e-7);
    }

    #[test]
    fn interest_tail_examples() {
        let g = PointMass { value: 1.3035 };
        let j = 1e6;
        let t = interest_tail_term(4.5, j, 0.5, &g, 1.0).unwrap();
        assert_eq!(t, j.powf(-0.5));
        assert_abs_diff_eq!(interest_tail_term(4.5, 1e4, 0.5, &g, 1.0).unwrap(), 0.01, epsilon = 1e-15);
        let e = Exponential { rate: 1.0 };
        let mut prev = f64::INFINITY;
        for &jj in &[1e3, 2e3, 4e3, 8e3, 1.6e4] {
            let v = interest_tail_term(5.0, jj, 0.5, &e, 0.9).unwrap();
            let by_hand = jj.powf(-0.5) + 1.0 - (-(5.0 / jj + 0.9 / jj.sqrt())).exp();
            assert_abs_diff_eq!(v, by_hand, epsilon = 1e-15);
            assert!(v < prev);
            prev = v;
        }
        let atom = Discrete::two_point(1.0, 0.0, 0.9).unwrap();
        assert!(matches!(
            interest_tail_term(5.0, 1e3, 0.5, &atom, 1.0),
            Err(Error::PositiveMassAtZeroPremium { .. })
        ));
    }

    #[test]
    fn bounds_are_nonincreasing_and_vanish() {
        let bounds = [
            lundberg_bound(0.3),
            korshunov_bound(&KorshunovConstants {
                a: 1.0,
                gamma: 2.0,
                s1: 1.0,
                s2: 4.0,
                s3: 4.0,
                c1: 2.0,
                c2: 0.8,
                c: 5.0,
                truncation: None,
            }),
            yang_bound(),
        ];
        for b in &bounds {
            let mut prev = 1.0;
            for k in 0..=10 {
                let v = b.evaluate(2f64.powi(k));
                assert!(v <= prev && (0.0..=1.0).contains(&v));
                prev = v;
            }
            assert!(b.evaluate(1e12) < 1e-5);
            for &eps in &[0.5, 0.1, 0.011, 1e-4] {
                let y = barrier_for_precision(b, eps).unwrap();
                assert!(b.evaluate(y) <= eps * (1.0 + 1e-12));
            }
        }
    }
}
