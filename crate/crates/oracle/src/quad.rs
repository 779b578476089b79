//! Tanh-sinh quadrature with level doubling.

use std::f64::consts::FRAC_PI_2;

/// Integral of `f` over the finite interval `[a, b]`.
///
/// Endpoint singularities of integrable type (`x^{α-1}`, `ln x`) are fine:
/// abscissas are formed from their distance to the nearer endpoint, so `f` is
/// never evaluated exactly at `a` or `b`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    assert!(b > a, "empty interval");
    let half = 0.5 * (b - a);
    let t_max = 6.5;
    let eval = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let cosh_u = u.cosh();
        let w = half * FRAC_PI_2 * t.cosh() / (cosh_u * cosh_u);
        if w == 0.0 {
            return 0.0;
        }
        // distance from the nearer endpoint: half * (1 - tanh|u|) = half * 2 / (1 + e^{2|u|})
        let d = half * 2.0 / (1.0 + (2.0 * u.abs()).exp());
        let x = if u >= 0.0 { b - d } else { a + d };
        if d <= 0.0 {
            return 0.0;
        }
        let v = f(x);
        if v.is_finite() { w * v } else { 0.0 }
    };

    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    while (k as f64) * h <= t_max {
        let t = k as f64 * h;
        sum += eval(t) + eval(-t);
        k += 1;
    }
    let mut estimate = sum * h;
    for _level in 0..14 {
        h *= 0.5;
        let mut k = 1;
        while (k as f64) * h <= t_max {
            let t = k as f64 * h;
            sum += eval(t) + eval(-t);
            k += 2;
        }
        let next = sum * h;
        let converged = (next - estimate).abs() <= rel_tol * next.abs().max(f64::MIN_POSITIVE);
        estimate = next;
        if converged {
            break;
        }
    }
    estimate
}

/// Integral of `f` over `[a, ∞)` through `x = a + scale * u / (1 - u)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, scale: f64, rel_tol: f64) -> f64 {
    integrate(
        |u| {
            let one_minus = 1.0 - u;
            let x = a + scale * u / one_minus;
            let v = f(x) * scale / (one_minus * one_minus);
            if v.is_finite() { v } else { 0.0 }
        },
        0.0,
        1.0,
        rel_tol,
    )
}

/// Integral over `[a, ∞)` split at `a + split` so that both the bulk and the
/// tail are resolved.
pub fn integrate_split<F: Fn(f64) -> f64>(f: F, a: f64, split: f64, rel_tol: f64) -> f64 {
    integrate(&f, a, a + split, rel_tol) + integrate_to_infinity(&f, a + split, split, rel_tol)
}
