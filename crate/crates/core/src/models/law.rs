use std::fmt;
use std::sync::Arc;

use rand::RngCore;

use crate::error::{Error, Result};
use crate::quadrature::integrate_with_breaks;

/// Shared handle to a probability law.
pub type Dist = Arc<dyn Law>;

/// An expectation that is either finite or flagged as divergent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Moment {
    Finite(f64),
    Infinite,
}

impl Moment {
    pub fn value(self) -> Option<f64> {
        match self {
            Moment::Finite(v) => Some(v),
            Moment::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Moment::Finite(_))
    }

    pub fn or_infinite(self, what: impl Into<String>) -> Result<f64> {
        self.value().ok_or_else(|| Error::InfiniteMoment(what.into()))
    }

    pub fn map(self, f: impl FnOnce(f64) -> f64) -> Moment {
        match self {
            Moment::Finite(v) => Moment::Finite(f(v)),
            Moment::Infinite => Moment::Infinite,
        }
    }
}

impl fmt::Display for Moment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Moment::Finite(v) => write!(f, "{v}"),
            Moment::Infinite => write!(f, "inf"),
        }
    }
}

/// A real-valued probability law: CDF, optional density, sampler and
/// moments.
///
/// Implementations are immutable and shareable across threads; samplers take
/// the random state explicitly.
pub trait Law: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    /// Closed support interval (endpoints may be infinite).
    fn support(&self) -> (f64, f64);

    /// A finite interval carrying essentially all of the mass. Tails outside
    /// it are integrated by interval doubling.
    fn core_range(&self) -> (f64, f64) {
        self.support()
    }

    fn density(&self, _x: f64) -> Option<f64> {
        None
    }

    fn has_density(&self) -> bool {
        false
    }

    /// Atoms `(value, probability)` for finite discrete laws.
    fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        None
    }

    /// `P(X ≤ x)`.
    fn cdf(&self, x: f64) -> f64;

    /// `P(X < x)`.
    fn cdf_left(&self, x: f64) -> f64 {
        self.cdf(x)
    }

    /// `P(X > x)`.
    fn sf(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }

    fn quantile(&self, u: f64) -> f64 {
        bisect_quantile(self, u)
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        self.quantile(open_unit(rng))
    }

    /// `E h(X)`; `breaks` lists points where `h` is not smooth.
    fn expect(&self, h: &dyn Fn(f64) -> f64, breaks: &[f64]) -> Moment {
        default_expect(self, h, breaks)
    }

    fn raw_moment(&self, k: u32) -> Moment {
        self.expect(&|x| x.powi(k as i32), &[0.0])
    }

    /// `E e^{sX}`.
    fn exp_moment(&self, s: f64) -> Moment {
        self.expect(&|x| (s * x).exp(), &[])
    }

    /// `m(t) = E e^{−tX}`.
    fn mgf(&self, t: f64) -> Moment {
        self.exp_moment(-t)
    }

    fn mean(&self) -> Moment {
        self.raw_moment(1)
    }
}

/// Uniform draw on the open interval `(0, 1)`.
pub fn open_unit(rng: &mut dyn RngCore) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

pub(crate) fn bisect_quantile<L: Law + ?Sized>(law: &L, u: f64) -> f64 {
    let (slo, shi) = law.support();
    let (clo, chi) = law.core_range();
    let mut lo = clo;
    let mut hi = chi;
    let mut width = (chi - clo).max(1.0);
    while law.cdf(lo) > u && lo > slo {
        lo = (lo - width).max(slo);
        width *= 2.0;
        if !lo.is_finite() {
            return lo;
        }
    }
    width = (chi - clo).max(1.0);
    while law.cdf(hi) < u && hi < shi {
        hi = (hi + width).min(shi);
        width *= 2.0;
        if !hi.is_finite() {
            return hi;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if law.cdf(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

const CORE_ABS_TOL: f64 = 1e-16;
const CORE_REL_TOL: f64 = 1e-13;

/// Expectation for laws with atoms or a density: atoms are summed; densities
/// are integrated adaptively over the core range, and each unbounded tail by
/// successive doubling intervals. A tail whose contributions stop shrinking,
/// or whose integrand rebounds far out, is flagged as divergent.
pub(crate) fn default_expect<L: Law + ?Sized>(
    law: &L,
    h: &dyn Fn(f64) -> f64,
    breaks: &[f64],
) -> Moment {
    if let Some(atoms) = law.atoms() {
        let mut total = 0.0;
        for (x, p) in atoms {
            if p == 0.0 {
                continue;
            }
            let v = h(x);
            if !v.is_finite() {
                return Moment::Infinite;
            }
            total += p * v;
        }
        return Moment::Finite(total);
    }
    if !law.has_density() {
        return Moment::Infinite;
    }
    let g = |x: f64| {
        let d = law.density(x).unwrap_or(0.0);
        if d == 0.0 {
            0.0
        } else {
            h(x) * d
        }
    };
    expect_density_integrand(&g, law.support(), law.core_range(), breaks)
}

/// Integrates `g` (already multiplied by the density) over `support`.
pub(crate) fn expect_density_integrand(
    g: &dyn Fn(f64) -> f64,
    support: (f64, f64),
    core: (f64, f64),
    breaks: &[f64],
) -> Moment {
    let (lo, hi) = support;
    let a = core.0.max(lo);
    let b = core.1.min(hi);
    let core_val = if b > a {
        let r = integrate_with_breaks(g, a, b, breaks, CORE_ABS_TOL, CORE_REL_TOL);
        if !r.value.is_finite() {
            return Moment::Infinite;
        }
        r.value
    } else {
        0.0
    };
    let width = (b - a).max(1.0);
    let mut total = core_val;
    if hi > b {
        match tail_integral(g, b, hi, width, 1.0, breaks, core_val) {
            Some(v) => total += v,
            None => return Moment::Infinite,
        }
    }
    if lo < a {
        match tail_integral(g, a, lo, width, -1.0, breaks, core_val) {
            Some(v) => total += v,
            None => return Moment::Infinite,
        }
    }
    Moment::Finite(total)
}

fn tail_integral(
    g: &dyn Fn(f64) -> f64,
    start: f64,
    bound: f64,
    width: f64,
    dir: f64,
    breaks: &[f64],
    core_val: f64,
) -> Option<f64> {
    let mut total = 0.0;
    let mut from = start;
    let mut w = width;
    let mut prev: Option<f64> = None;
    let mut non_shrinking = 0;
    let mut last_ratio = 1.0;
    for step in 0..4000 {
        let mut to = from + dir * w;
        let at_bound = if dir > 0.0 { to >= bound } else { to <= bound };
        if at_bound {
            to = bound;
        }
        if !to.is_finite() || to.abs() > 1e250 {
            // Ran out of representable range while still shrinking slowly:
            // close the tail with the geometric remainder of the last ratio.
            let p = prev?;
            return if last_ratio < 1.0 {
                Some(total + p * last_ratio / (1.0 - last_ratio))
            } else {
                None
            };
        }
        let (x0, x1) = if dir > 0.0 { (from, to) } else { (to, from) };
        let r = integrate_with_breaks(g, x0, x1, breaks, 1e-300, 1e-12);
        let c = r.value;
        if !c.is_finite() {
            return None;
        }
        total += c;
        if at_bound {
            return Some(total);
        }
        if let Some(p) = prev {
            last_ratio = if p != 0.0 { (c / p).abs() } else { 0.0 };
            if c.abs() > 0.0 && c.abs() >= 0.999 * p.abs() {
                non_shrinking += 1;
            } else {
                non_shrinking = 0;
            }
        }
        if non_shrinking >= 4 {
            return None;
        }
        let scale = core_val.abs() + total.abs();
        if step >= 2 && c.abs() <= 1e-17 * scale.max(1e-300) {
            if rebounds(g, to, dir) {
                return None;
            }
            return Some(total);
        }
        prev = Some(c);
        from = to;
        w *= 2.0;
    }
    None
}

/// Probes `|g(x)·x|` on a geometric sequence beyond `x0`; true if it grows
/// past its value at `x0` (an exponentially growing integrand hiding behind a
/// polynomially decaying density).
fn rebounds(g: &dyn Fn(f64) -> f64, x0: f64, dir: f64) -> bool {
    let base = (g(x0) * x0).abs();
    let mut x = if x0 != 0.0 { x0 } else { dir };
    for _ in 0..2000 {
        x *= 2.0;
        if dir > 0.0 && x < 0.0 || dir < 0.0 && x > 0.0 {
            x = -x;
        }
        if !x.is_finite() || x.abs() > 1e300 {
            return false;
        }
        let v = (g(x) * x).abs();
        if v.is_nan() {
            continue;
        }
        if v.is_infinite() || (v > 10.0 * base && v > 1e-280) {
            return true;
        }
    }
    false
}
