//! Tabulated CDFs with monotone cubic Hermite interpolation.
//!
//! Used for laws whose CDF has no closed form (or is costly) and as the
//! backbone of inverse-transform samplers.

/// Chebyshev–Lobatto points on `[a, b]`, increasing.
pub fn chebyshev_nodes(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut xs: Vec<f64> = (0..n)
        .map(|i| mid - half * (std::f64::consts::PI * i as f64 / (n - 1) as f64).cos())
        .collect();
    xs[0] = a;
    xs[n - 1] = b;
    xs
}

#[derive(Debug, Clone)]
pub struct TabulatedCdf {
    xs: Vec<f64>,
    fs: Vec<f64>,
    ds: Vec<f64>,
}

impl TabulatedCdf {
    /// `xs` strictly increasing, `fs` nondecreasing CDF values, `ds` the
    /// density at each node. Slopes are limited (Fritsch–Carlson) so the
    /// interpolant stays monotone.
    pub fn new(xs: Vec<f64>, fs: Vec<f64>, mut ds: Vec<f64>) -> Self {
        assert!(xs.len() >= 2 && xs.len() == fs.len() && xs.len() == ds.len());
        for d in ds.iter_mut() {
            *d = d.max(0.0);
        }
        for i in 0..xs.len() - 1 {
            let h = xs[i + 1] - xs[i];
            let delta = (fs[i + 1] - fs[i]) / h;
            if delta <= 0.0 {
                ds[i] = 0.0;
                ds[i + 1] = 0.0;
                continue;
            }
            let alpha = ds[i] / delta;
            let beta = ds[i + 1] / delta;
            let r = alpha * alpha + beta * beta;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                ds[i] = tau * alpha * delta;
                ds[i + 1] = tau * beta * delta;
            }
        }
        Self { xs, fs, ds }
    }

    pub fn lower(&self) -> f64 {
        self.xs[0]
    }

    pub fn upper(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    /// CDF value at the last node.
    pub fn total(&self) -> f64 {
        *self.fs.last().unwrap()
    }

    pub fn first(&self) -> f64 {
        self.fs[0]
    }

    fn cell(&self, x: f64) -> usize {
        let i = self.xs.partition_point(|&v| v <= x);
        i.saturating_sub(1).min(self.xs.len() - 2)
    }

    fn hermite(&self, i: usize, x: f64) -> f64 {
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.fs[i] + h10 * h * self.ds[i] + h01 * self.fs[i + 1] + h11 * h * self.ds[i + 1]
    }

    fn hermite_slope(&self, i: usize, x: f64) -> f64 {
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let d00 = (6.0 * t2 - 6.0 * t) / h;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = (-6.0 * t2 + 6.0 * t) / h;
        let d11 = 3.0 * t2 - 2.0 * t;
        d00 * self.fs[i] + d10 * self.ds[i] + d01 * self.fs[i + 1] + d11 * self.ds[i + 1]
    }

    /// Interpolated CDF; clamps to the end values outside the table.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.xs[0] {
            return self.fs[0];
        }
        if x >= self.upper() {
            return self.total();
        }
        let i = self.cell(x);
        self.hermite(i, x).clamp(self.fs[i], self.fs[i + 1])
    }

    /// Inverse of the interpolant. `None` when `p` lies outside the tabulated
    /// range of CDF values.
    pub fn inverse(&self, p: f64) -> Option<f64> {
        if !(p >= self.fs[0] && p <= self.total()) {
            return None;
        }
        let j = self.fs.partition_point(|&v| v < p);
        if j == 0 {
            return Some(self.xs[0]);
        }
        let i = (j - 1).min(self.xs.len() - 2);
        let (mut lo, mut hi) = (self.xs[i], self.xs[i + 1]);
        let span = self.fs[i + 1] - self.fs[i];
        if span <= 0.0 {
            return Some(lo);
        }
        let mut x = lo + (hi - lo) * (p - self.fs[i]) / span;
        for _ in 0..40 {
            let g = self.hermite(i, x) - p;
            if g > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let d = self.hermite_slope(i, x);
            let mut next = if d > 0.0 { x - g / d } else { 0.5 * (lo + hi) };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 1e-15 * (1.0 + x.abs()) {
                return Some(next);
            }
            x = next;
        }
        Some(x)
    }
}
