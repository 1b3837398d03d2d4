//! The laws of the two worked examples: a Generalized Inverse Gaussian claim
//! law with constant income, and a polynomial-tailed increment law; plus the
//! binomial i.i.d. interest rate.

use std::f64::consts::{PI, SQRT_2};
use std::sync::{Arc, OnceLock};

use rand::RngCore;

use super::law::{expect_density_integrand, open_unit, Law, Moment};
use super::laws::{Difference, Discrete, PointMass};
use super::Dist;
use crate::quadrature::integrate_adaptive;
use crate::tabulated::{chebyshev_nodes, TabulatedCdf};

/// Normalising constant of the GIG claim density.
pub const GIG_K: f64 = 0.139866;
/// Constant per-period income of the GIG example.
pub const GIG_INCOME: f64 = 1.3035;

const GIG_TABLE_UPPER: f64 = 25.0;
const GIG_TABLE_NODES: usize = 2048;

/// Claim law with density `(1/2k) x^{-2} exp(-x - 1/x)` on `x ≥ 0`.
///
/// The CDF is tabulated once (adaptive quadrature per cell between Chebyshev
/// nodes, monotone Hermite interpolation) and shared by all instances.
#[derive(Debug, Clone, Copy, Default)]
pub struct Gig;

fn gig_density(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let e = (-x - 1.0 / x).exp();
    if e == 0.0 {
        0.0
    } else {
        e / (2.0 * GIG_K * x * x)
    }
}

struct GigTable {
    cdf: TabulatedCdf,
    /// Mass beyond the last node.
    beyond: f64,
}

fn gig_table() -> &'static GigTable {
    static TABLE: OnceLock<GigTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let xs = chebyshev_nodes(0.0, GIG_TABLE_UPPER, GIG_TABLE_NODES);
        let mut fs = Vec::with_capacity(xs.len());
        let mut acc = 0.0;
        fs.push(0.0);
        for w in xs.windows(2) {
            acc += integrate_adaptive(gig_density, w[0], w[1], 1e-18, 1e-14).value;
            fs.push(acc);
        }
        let ds = xs.iter().map(|&x| gig_density(x)).collect();
        GigTable {
            cdf: TabulatedCdf::new(xs, fs, ds),
            beyond: gig_far_tail(GIG_TABLE_UPPER),
        }
    })
}

/// `P(C > x)` for `x` beyond the table, by direct quadrature.
fn gig_far_tail(x: f64) -> f64 {
    integrate_adaptive(gig_density, x, x + 80.0, 1e-300, 1e-12).value
}

impl Law for Gig {
    fn name(&self) -> String {
        "gig".into()
    }
    fn support(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
    fn core_range(&self) -> (f64, f64) {
        (0.0, 40.0)
    }
    fn has_density(&self) -> bool {
        true
    }
    fn density(&self, x: f64) -> Option<f64> {
        Some(gig_density(x))
    }
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else if x <= GIG_TABLE_UPPER {
            gig_table().cdf.eval(x)
        } else {
            let t = gig_table();
            t.cdf.total() + t.beyond - gig_far_tail(x)
        }
    }
    fn sf(&self, x: f64) -> f64 {
        if x <= GIG_TABLE_UPPER {
            1.0 - self.cdf(x)
        } else {
            gig_far_tail(x)
        }
    }
    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        let t = gig_table();
        // Normalise so the table's own total mass maps to probability one.
        let p = open_unit(rng) * (t.cdf.total() + t.beyond);
        match t.cdf.inverse(p) {
            Some(x) => x,
            None => super::law::bisect_quantile(self, p),
        }
    }
    fn exp_moment(&self, s: f64) -> Moment {
        if s > 1.0 {
            return Moment::Infinite;
        }
        // Combine the exponentials so e^{sx} never overflows on its own.
        let g = |x: f64| {
            if x <= 0.0 {
                0.0
            } else {
                ((s - 1.0) * x - 1.0 / x).exp() / (2.0 * GIG_K * x * x)
            }
        };
        expect_density_integrand(&g, self.support(), self.core_range(), &[])
    }
}

pub fn gig_claim_distribution() -> Dist {
    Arc::new(Gig)
}

/// Increment `η = 1.3035 − C` of the first example.
pub fn gig_increment_distribution() -> Dist {
    Difference::new(Arc::new(PointMass { value: GIG_INCOME }), gig_claim_distribution())
        .expect("point-mass premium is discrete")
        .into_dist()
}

const HEAVY_SERIES_FROM: f64 = 4.0;
const HEAVY_TABLE_HALF_WIDTH: f64 = 1e4;
const HEAVY_TABLE_NODES: usize = 4097;

/// Increment law with density `√2 / (π (1 + (t−1)^4))`.
///
/// Moments of order three and above are infinite and the moment generating
/// function is infinite for every nonzero argument.
#[derive(Debug, Clone, Copy, Default)]
pub struct HeavyTail;

/// `∫_s^∞ √2 / (π (1 + u^4)) du` for `s ≥ 4`, by the convergent series in
/// `s^{-4}`.
fn heavy_tail_series(s: f64) -> f64 {
    let r = 1.0 / (s * s * s * s);
    let mut term = 1.0 / (s * s * s);
    let mut sum = 0.0;
    for k in 0..40 {
        let add = term / (4 * k + 3) as f64;
        sum += if k % 2 == 0 { add } else { -add };
        if add < 1e-18 * sum.abs() {
            break;
        }
        term *= r;
    }
    SQRT_2 / PI * sum
}

/// CDF of `η` in the closed form (arctan + arctanh), with the far tails
/// taken from the series to avoid cancellation.
pub fn heavy_tail_cdf(x: f64) -> f64 {
    let u = x - 1.0;
    if u <= -HEAVY_SERIES_FROM {
        return heavy_tail_series(-u);
    }
    if u >= HEAVY_SERIES_FROM {
        return 1.0 - heavy_tail_series(u);
    }
    let num = PI - (1.0 + SQRT_2 - x * SQRT_2).atan()
        + (1.0 - SQRT_2 + x * SQRT_2).atan()
        + (SQRT_2 * u / (1.0 + u * u)).atanh();
    num / (2.0 * PI)
}

fn heavy_density(t: f64) -> f64 {
    let u = t - 1.0;
    let u2 = u * u;
    SQRT_2 / (PI * (1.0 + u2 * u2))
}

fn heavy_table() -> &'static TabulatedCdf {
    static TABLE: OnceLock<TabulatedCdf> = OnceLock::new();
    TABLE.get_or_init(|| {
        let tau_max = (HEAVY_TABLE_HALF_WIDTH / 2.0).asinh();
        let n = HEAVY_TABLE_NODES;
        let xs: Vec<f64> = (0..n)
            .map(|i| {
                let tau = -tau_max + 2.0 * tau_max * i as f64 / (n - 1) as f64;
                1.0 + 2.0 * tau.sinh()
            })
            .collect();
        let fs = xs.iter().map(|&x| heavy_tail_cdf(x)).collect();
        let ds = xs.iter().map(|&x| heavy_density(x)).collect();
        TabulatedCdf::new(xs, fs, ds)
    })
}

/// Inverse of the far tail: the `s ≥ 4` with `heavy_tail_series(s) = p`.
fn heavy_tail_series_inverse(p: f64) -> f64 {
    let mut s = (SQRT_2 / (3.0 * PI * p)).cbrt();
    for _ in 0..4 {
        let f = heavy_tail_series(s) - p;
        let d = heavy_density(s + 1.0);
        s += f / d;
    }
    s
}

impl Law for HeavyTail {
    fn name(&self) -> String {
        "heavy_tail".into()
    }
    fn support(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
    fn core_range(&self) -> (f64, f64) {
        (-20.0, 22.0)
    }
    fn has_density(&self) -> bool {
        true
    }
    fn density(&self, t: f64) -> Option<f64> {
        Some(heavy_density(t))
    }
    fn cdf(&self, x: f64) -> f64 {
        heavy_tail_cdf(x)
    }
    fn sf(&self, x: f64) -> f64 {
        heavy_tail_cdf(2.0 - x)
    }
    fn quantile(&self, u: f64) -> f64 {
        let t = heavy_table();
        if u < t.first() {
            1.0 - heavy_tail_series_inverse(u)
        } else if u > t.total() {
            1.0 + heavy_tail_series_inverse(1.0 - u)
        } else {
            t.inverse(u).unwrap_or(1.0)
        }
    }
    fn raw_moment(&self, k: u32) -> Moment {
        if k >= 3 {
            Moment::Infinite
        } else {
            super::law::default_expect(self, &|x| x.powi(k as i32), &[0.0, 1.0])
        }
    }
    fn exp_moment(&self, s: f64) -> Moment {
        if s == 0.0 {
            Moment::Finite(1.0)
        } else {
            Moment::Infinite
        }
    }
}

pub fn heavytail_increment_distribution() -> Dist {
    Arc::new(HeavyTail)
}

/// `I = 0.01·b` with `b ~ Binomial(10, 1/2)`.
pub fn binomial_interest_distribution() -> Discrete {
    let mut probs = Vec::with_capacity(11);
    let mut c = 1.0;
    for k in 0..=10u32 {
        probs.push(c / 1024.0);
        c = c * f64::from(10 - k) / f64::from(k + 1);
    }
    let values = (0..=10).map(|k| 0.01 * k as f64).collect();
    Discrete::new(values, probs).expect("binomial probabilities are exact")
}
