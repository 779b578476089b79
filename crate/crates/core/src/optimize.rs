//! Derivative-free one-dimensional minimization.

/// Outcome of [`minimize_bracketed`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
    /// Final bracket `[lo, hi]` containing `x`.
    pub lo: f64,
    pub hi: f64,
}

const GOLDEN: f64 = 0.381_966_011_250_105_1;

/// Brent's method: golden-section search with parabolic steps on `[lo, hi]`.
///
/// `f` may return `+∞`; parabolic interpolation is skipped whenever one of the
/// three interpolation values is not finite.
pub fn minimize_bracketed<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> Minimum {
    let (mut a, mut b) = (lo, hi);
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    let mut iterations = 0;
    while iterations < max_iter {
        let mid = 0.5 * (a + b);
        let tol1 = tol + 1e-15 * x.abs();
        let tol2 = 2.0 * tol1;
        if (x - mid).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        iterations += 1;
        let mut golden = true;
        if e.abs() > tol1 && fx.is_finite() && fw.is_finite() && fv.is_finite() {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if mid >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= mid { a - x } else { b - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + if d >= 0.0 { tol1 } else { -tol1 } };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Minimum { x, value: fx, iterations, lo: a, hi: b }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic() {
        let m = minimize_bracketed(|x| (x - 0.3) * (x - 0.3) + 1.0, -2.0, 2.0, 1e-10, 200);
        assert!((m.x - 0.3).abs() < 1e-9);
        assert!(m.lo <= m.x && m.x <= m.hi);
    }

    #[test]
    fn infinite_walls() {
        let f = |x: f64| if x <= -1.0 { f64::INFINITY } else { (x + 0.9).exp() - 2.0 * x };
        let m = minimize_bracketed(f, -1.0, 3.0, 1e-10, 200);
        assert!((m.x - (2.0f64.ln() - 0.9)).abs() < 1e-8);
    }

    #[test]
    fn boundary_minimum_converges_to_end() {
        let m = minimize_bracketed(|x| x, 0.0, 1.0, 1e-10, 200);
        assert!(m.x < 1e-8);
    }
}
