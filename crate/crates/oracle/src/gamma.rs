//! Gamma-family densities by quadrature, independent of series methods.

use crate::quad;

/// `Γ(α)` as `∫_0^∞ t^{α-1} e^{-t} dt`.
pub fn gamma_function(alpha: f64) -> f64 {
    quad::integrate(|t| t.powf(alpha - 1.0) * (-t).exp(), 0.0, 1.0, 1e-14)
        + quad::integrate_to_infinity(|t| t.powf(alpha - 1.0) * (-t).exp(), 1.0, 1.0, 1e-14)
}

/// Density of `Gamma(alpha, scale beta)`.
pub fn gamma_pdf(alpha: f64, beta: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    (x / beta).powf(alpha - 1.0) * (-x / beta).exp() / (beta * gamma_function(alpha))
}

/// Density of `Σ Gamma(α_i, β_i)` at `x` by nested convolution integrals.
pub fn convolution_pdf(components: &[(f64, f64)], x: f64) -> f64 {
    let norms: Vec<f64> = components.iter().map(|&(alpha, beta)| beta * gamma_function(alpha)).collect();
    convolve(components, &norms, x)
}

fn convolve(components: &[(f64, f64)], norms: &[f64], x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let (alpha, beta) = components[0];
    let own = |t: f64| (t / beta).powf(alpha - 1.0) * (-t / beta).exp() / norms[0];
    if components.len() == 1 {
        return own(x);
    }
    quad::integrate(|t| own(t) * convolve(&components[1..], &norms[1..], x - t), 0.0, x, 1e-11)
}
