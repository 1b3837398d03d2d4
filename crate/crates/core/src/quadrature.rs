//! Gauss–Legendre rules (fixed and composite) and an adaptive Gauss–Kronrod
//! integrator.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi's initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, d)
}

/// A quadrature rule on an interval `[a, b]`: strictly increasing nodes with
/// positive weights summing to `b − a`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct QuadratureRule {
    pub lower: f64,
    pub upper: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Polynomials up to this degree are integrated exactly on every panel.
    pub degree: usize,
}

impl QuadratureRule {
    /// Composite Gauss–Legendre rule with `panels` equal panels of
    /// `points` nodes each.
    pub fn composite_gauss_legendre(lower: f64, upper: f64, panels: usize, points: usize) -> Self {
        assert!(upper > lower && panels >= 1 && points >= 1);
        let gl = GaussLegendre::new(points);
        let width = (upper - lower) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * points);
        let mut weights = Vec::with_capacity(panels * points);
        for p in 0..panels {
            let a = lower + width * p as f64;
            let mid = a + 0.5 * width;
            for (x, w) in gl.nodes.iter().zip(&gl.weights) {
                nodes.push(mid + 0.5 * width * x);
                weights.push(0.5 * width * w);
            }
        }
        Self {
            lower,
            upper,
            nodes,
            weights,
            degree: 2 * points - 1,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

/// Globally adaptive 15-point Gauss–Kronrod quadrature on a finite interval.
///
/// Stops once the summed error estimate is below `max(abs_tol, rel_tol·|I|)`
/// or after 4000 bisections. Non-finite integrand values propagate into the
/// returned value.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Integral {
    if a == b {
        return Integral {
            value: 0.0,
            error: 0.0,
        };
    }
    if b < a {
        let r = integrate_adaptive(f, b, a, abs_tol, rel_tol);
        return Integral {
            value: -r.value,
            error: r.error,
        };
    }
    let (v, e) = gk15(&f, a, b);
    if !v.is_finite() {
        return Integral { value: v, error: e };
    }
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        a,
        b,
        value: v,
        error: e,
    });
    let mut total = v;
    let mut total_err = e;
    for _ in 0..4000 {
        if total_err <= abs_tol.max(rel_tol * total.abs()) {
            break;
        }
        let Some(seg) = heap.pop() else { break };
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            heap.push(seg);
            break;
        }
        let (v1, e1) = gk15(&f, seg.a, mid);
        let (v2, e2) = gk15(&f, mid, seg.b);
        if !(v1.is_finite() && v2.is_finite()) {
            return Integral {
                value: v1 + v2,
                error: f64::INFINITY,
            };
        }
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.error;
        heap.push(Segment {
            a: seg.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: seg.b,
            value: v2,
            error: e2,
        });
    }
    // Re-sum to shed accumulated cancellation in the running totals.
    let value = heap.iter().map(|s| s.value).sum();
    let error = heap.iter().map(|s| s.error).sum();
    Integral { value, error }
}

/// Adaptive integral split at interior breakpoints.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Integral {
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut edges = Vec::with_capacity(pts.len() + 2);
    edges.push(a);
    edges.extend(pts);
    edges.push(b);
    let mut out = Integral {
        value: 0.0,
        error: 0.0,
    };
    for w in edges.windows(2) {
        let r = integrate_adaptive(&f, w[0], w[1], abs_tol, rel_tol);
        out.value += r.value;
        out.error += r.error;
    }
    out
}
