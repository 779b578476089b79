//! GIG quantities by direct quadrature of the unnormalized density
//! `x^{λ-1} exp(-(a²/x + b²x)/2)`; no Bessel functions involved.

use crate::quad;

#[derive(Debug, Clone, Copy)]
pub struct GigOracle {
    pub lambda: f64,
    pub a: f64,
    pub b: f64,
    centre: f64,
    ln_mass: f64,
}

impl GigOracle {
    pub fn new(lambda: f64, a: f64, b: f64) -> Self {
        let centre = ((lambda + (lambda * lambda + a * a * b * b).sqrt()) / (b * b)).ln();
        let mut oracle = GigOracle { lambda, a, b, centre, ln_mass: 0.0 };
        let shift = oracle.ln_kernel_y(centre);
        let mass = oracle.integrate_y(|_| 1.0, shift);
        oracle.ln_mass = shift + mass.ln();
        oracle
    }

    /// Log of the unnormalized density of `ln Z`.
    fn ln_kernel_y(&self, y: f64) -> f64 {
        self.lambda * y - 0.5 * (self.a * self.a * (-y).exp() + self.b * self.b * y.exp())
    }

    /// `∫ g(e^y) exp(ln_kernel_y(y) - shift) dy` over the real line.
    fn integrate_y<G: Fn(f64) -> f64>(&self, g: G, shift: f64) -> f64 {
        let c = self.centre;
        let integrand = |y: f64| g(y.exp()) * (self.ln_kernel_y(y) - shift).exp();
        quad::integrate_to_infinity(|t| integrand(c + t) + integrand(c - t), 0.0, 1.0, 1e-13)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let y = x.ln();
        (self.ln_kernel_y(y) - self.ln_mass - y).exp()
    }

    /// `E g(Z)` by quadrature.
    pub fn expect<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        self.integrate_y(g, self.ln_mass)
    }

    pub fn laplace(&self, s: f64) -> f64 {
        self.expect(|x| (-s * x).exp())
    }

    pub fn mean(&self) -> f64 {
        self.expect(|x| x)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.expect(|x| (x - m) * (x - m))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let y = x.ln();
        let integrand = |u: f64| (self.ln_kernel_y(u) - self.ln_mass).exp();
        if y <= self.centre {
            quad::integrate_to_infinity(|t| integrand(y - t), 0.0, 1.0, 1e-13)
        } else {
            1.0 - quad::integrate_to_infinity(|t| integrand(y + t), 0.0, 1.0, 1e-13)
        }
    }

    /// Whether `E e^{-sZ}` is finite: the log-integrand `-sx + ln f(x)` must
    /// fall without bound far in the tail.
    pub fn laplace_is_finite(&self, s: f64) -> bool {
        let far = 1e12;
        let ln_integrand = |x: f64| -s * x + (self.lambda - 1.0) * x.ln() - 0.5 * (self.a * self.a / x + self.b * self.b * x);
        ln_integrand(2.0 * far) < ln_integrand(far) - 1.0
    }

    /// Convergence abscissa of the Laplace transform by bisection on
    /// [`laplace_is_finite`](Self::laplace_is_finite).
    pub fn integrability_number(&self) -> f64 {
        let mut lo = -1.0;
        while self.laplace_is_finite(lo) {
            lo *= 2.0;
        }
        let mut hi = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.laplace_is_finite(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}
