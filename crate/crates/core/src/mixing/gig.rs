use alloc::vec::Vec;

use num_traits::Float;

use super::Gig;
use crate::specfun::ln_bessel_k_unchecked;

const GL_NODES: [f64; 4] = [0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363];
const GL_WEIGHTS: [f64; 4] = [0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763];

// Log-density drop (relative to the mode) beyond which mass is ignored.
const TAIL_DROP: f64 = 60.0;

/// GIG law viewed through `Y = ln Z`, whose log-density
/// `h(y) = λy - (a²e^{-y} + b²e^{y})/2 - ln(2 (a/b)^λ K_λ(ab))` is concave.
#[derive(Debug, Clone)]
pub struct GigShape {
    lambda: f64,
    a2: f64,
    b2: f64,
    ln_norm: f64,
    mode: f64,
    sigma: f64,
    lo: f64,
    hi: f64,
}

impl GigShape {
    pub fn new(gig: &Gig) -> Self {
        let (lambda, a, b) = (gig.lambda(), gig.a(), gig.b());
        let a2 = a * a;
        let b2 = b * b;
        let ln_norm = core::f64::consts::LN_2 + lambda * (a.ln() - b.ln()) + ln_bessel_k_unchecked(lambda, a * b);
        // Root of b²u² - 2λu - a² = 0, u = e^y, in the cancellation-free form.
        let root = (lambda * lambda + a2 * b2).sqrt();
        let u = if lambda >= 0.0 { (lambda + root) / b2 } else { a2 / (root - lambda) };
        let mode = u.ln();
        let mut shape = GigShape { lambda, a2, b2, ln_norm, mode, sigma: 0.0, lo: mode, hi: mode };
        shape.sigma = 1.0 / shape.curvature(mode).sqrt();
        let floor = shape.kernel(mode) - TAIL_DROP;
        shape.lo = shape.level_crossing(floor, -1.0);
        shape.hi = shape.level_crossing(floor, 1.0);
        shape
    }

    /// Unnormalized log-density of `ln Z`.
    pub fn kernel(&self, y: f64) -> f64 {
        self.lambda * y - 0.5 * (self.a2 * (-y).exp() + self.b2 * y.exp())
    }

    /// `-h''(y)`.
    fn curvature(&self, y: f64) -> f64 {
        0.5 * (self.a2 * (-y).exp() + self.b2 * y.exp())
    }

    /// `h'(y)`.
    pub fn kernel_slope(&self, y: f64) -> f64 {
        self.lambda + 0.5 * (self.a2 * (-y).exp() - self.b2 * y.exp())
    }

    /// Log of the normalizing constant `2 (a/b)^λ K_λ(ab)`.
    pub fn ln_norm(&self) -> f64 {
        self.ln_norm
    }

    /// Mode of the log-density of `ln Z`.
    pub fn mode(&self) -> f64 {
        self.mode
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Point on the given side of the mode where the kernel equals `level`.
    pub fn level_crossing(&self, level: f64, direction: f64) -> f64 {
        let mut step = self.sigma;
        let mut inner = self.mode;
        let mut outer = self.mode + direction * step;
        while self.kernel(outer) > level {
            inner = outer;
            step *= 2.0;
            outer = self.mode + direction * step;
        }
        for _ in 0..200 {
            let mid = 0.5 * (inner + outer);
            if mid == inner || mid == outer {
                break;
            }
            if self.kernel(mid) > level {
                inner = mid;
            } else {
                outer = mid;
            }
        }
        0.5 * (inner + outer)
    }

    fn log_density(&self, y: f64) -> f64 {
        self.kernel(y) - self.ln_norm
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if !(x > 0.0) || x == f64::INFINITY {
            return 0.0;
        }
        let y = x.ln();
        (self.log_density(y) - y).exp()
    }

    fn panel_width(&self, y: f64) -> f64 {
        0.25 * self.sigma.min(1.0 / self.curvature(y).sqrt())
    }

    /// `∫_{y0}^{y1}` of the density of `ln Z`, composite 8-point Gauss-Legendre.
    fn integrate(&self, y0: f64, y1: f64) -> f64 {
        let mut total = 0.0;
        let mut y = y0;
        while y < y1 {
            let mut width = self.panel_width(y);
            width = width.min(self.panel_width(y + width)).min(y1 - y);
            let half = 0.5 * width;
            let centre = y + half;
            let mut panel = 0.0;
            for (&node, &weight) in GL_NODES.iter().zip(&GL_WEIGHTS) {
                panel += weight * ((self.log_density(centre - half * node)).exp() + (self.log_density(centre + half * node)).exp());
            }
            total += half * panel;
            y += width;
        }
        total
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return 0.0;
        }
        let y = x.ln();
        if y <= self.lo {
            0.0
        } else if y >= self.hi {
            1.0
        } else if y <= self.mode {
            self.integrate(self.lo, y).clamp(0.0, 1.0)
        } else {
            (1.0 - self.integrate(y, self.hi)).clamp(0.0, 1.0)
        }
    }

    /// CDF at ascending points via one cumulative pass.
    pub fn cdf_sorted(&self, xs: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(xs.len());
        let mut last = self.lo;
        let mut acc = 0.0;
        for &x in xs {
            let y = if x > 0.0 { x.ln() } else { f64::NEG_INFINITY };
            if y <= self.lo {
                out.push(0.0);
                continue;
            }
            let target = y.min(self.hi);
            if target > last {
                acc += self.integrate(last, target);
                last = target;
            }
            out.push(acc.clamp(0.0, 1.0));
        }
        out
    }
}
