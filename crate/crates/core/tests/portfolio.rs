//! Portfolio operations against explicit-inverse, analytic-derivative,
//! dense-grid and Monte-Carlo oracles.

mod common;

use common::*;
use ggc_core::mixing::MixingLaw;
use ggc_core::portfolio::*;
use ggc_core::sampling::mc_expected_utility;
use ggc_core::ExtendedReal;
use ggc_oracle::{linalg, roots};
use proptest::prelude::*;

fn gh_model() -> NmvmModel {
    NmvmModel::new(
        vec![0.05, 0.08],
        vec![0.1, -0.05],
        vec![vec![0.2, 0.05], vec![0.05, 0.3]],
        gig_law(1.0, 1.0, 2.0),
    )
    .unwrap()
}

fn market() -> MarketSpec {
    MarketSpec::new(0.01, 1.0, 1.0).unwrap()
}

fn scalar_gamma_model() -> NmvmModel {
    NmvmModel::new(vec![1.1], vec![1.0], vec![vec![2.0]], fgc_law(0.0, &[(2.0, 1.0)])).unwrap()
}

fn spd_matrix() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (0.1f64..1.0, 0.1f64..1.0, -0.5f64..0.5).prop_map(|(d1, d2, off)| {
        let off = off * (d1 * d2).sqrt();
        vec![vec![d1, off], vec![off, d2]]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn constants_match_explicit_inverse(
        a in spd_matrix(),
        mu in prop::array::uniform2(-0.5f64..0.5),
        gamma in prop::array::uniform2(-0.5f64..0.5),
        r_f in 0.0f64..0.05,
    ) {
        let model = NmvmModel::new(mu.to_vec(), gamma.to_vec(), a.clone(), gig_law(1.0, 1.0, 2.0)).unwrap();
        let market = MarketSpec::new(r_f, 1.0, 1.0).unwrap();
        let c = model_constants(&model, &market).unwrap();
        let sigma = linalg::mat_mul(&a, &a);
        let inv = linalg::inverse(&sigma);
        let m: Vec<f64> = mu.iter().map(|v| v - r_f).collect();
        let inv_g = linalg::mat_vec(&inv, &gamma);
        let inv_m = linalg::mat_vec(&inv, &m);
        let scale = |v: f64| v.abs().max(1.0);
        prop_assert!((c.skew_skew - linalg::dot(&gamma, &inv_g)).abs() < 1e-9 * scale(c.skew_skew));
        prop_assert!((c.skew_excess - linalg::dot(&gamma, &inv_m)).abs() < 1e-9 * scale(c.skew_excess));
        prop_assert!((c.excess_excess - linalg::dot(&m, &inv_m)).abs() < 1e-9 * scale(c.excess_excess));
        prop_assert!((c.theta_hat.powi(2) * c.excess_excess - (c.skew_skew - 2.0 * c.s_hat)).abs() < 1e-10 * scale(c.skew_skew - 2.0 * c.s_hat));
    }

    #[test]
    fn q_is_strictly_convex_with_interior_minimum(law in any_law()) {
        let model = NmvmModel::new(gh_model().mu().to_vec(), gh_model().gamma().to_vec(), gh_model().a_matrix().clone(), law.clone()).unwrap();
        let c = model_constants(&model, &market()).unwrap();
        let q: Vec<f64> = (1..=512)
            .map(|j| q_objective(&c, &law, -c.theta_hat * j as f64 / 513.0).to_f64())
            .collect();
        for w in q.windows(3) {
            if w.iter().all(|v| v.is_finite()) {
                prop_assert!(w[0] - 2.0 * w[1] + w[2] > 0.0);
            }
        }
        let found = minimize_q(&c, &law, DEFAULT_Q_TOLERANCE);
        if let Ok(found) = found {
            prop_assert!(found.q_min < 0.0 && found.q_min > -c.theta_hat);
            let h = 1e-6f64.min(0.25 * (found.q_min + c.theta_hat)).min(-0.25 * found.q_min);
            let slope = (q_objective(&c, &law, found.q_min + h).to_f64() - q_objective(&c, &law, found.q_min - h).to_f64()) / (2.0 * h);
            prop_assert!(slope.abs() <= 1e-5 * found.q_value.max(1.0), "slope {slope} h {h}");
        } else {
            // only GIG laws with λ < 0 keep Q finite at -θ̂
            prop_assert!(matches!(&law, MixingLaw::Gig(g) if g.lambda() < 0.0), "{found:?}");
        }
    }

    #[test]
    fn optimum_beats_random_portfolios(x in prop::array::uniform2(-5.0f64..5.0)) {
        let model = gh_model();
        let sol = optimal_portfolio(&model, &market()).unwrap();
        let best = expected_utility(&model, &market(), &sol.x_star).unwrap().to_f64();
        let other = expected_utility(&model, &market(), &x).unwrap().to_f64();
        prop_assert!(best >= other - 1e-12);
    }
}

#[test]
fn scalar_example_constants() {
    let c = model_constants(&scalar_gamma_model(), &MarketSpec::new(0.1, 1.0, 1.0).unwrap()).unwrap();
    assert!((c.skew_skew - 0.25).abs() < 1e-15);
    assert!((c.skew_excess - 0.25).abs() < 1e-15);
    assert!((c.excess_excess - 0.25).abs() < 1e-15);
}

#[test]
fn q_for_gamma_mixing_matches_closed_form() {
    let model = scalar_gamma_model();
    let c = model_constants(&model, &MarketSpec::new(0.1, 1.0, 1.0).unwrap()).unwrap();
    let theta: f64 = -0.5;
    let s = 0.125 - theta * theta * 0.25 / 2.0;
    let expected = (0.25 * theta).exp() * (1.0 + s).powf(-2.0);
    let value = q_objective(&c, model.law(), theta).to_f64();
    assert!(rel_err(value, expected) < 1e-14);
    let edge = q_objective(&c, model.law(), c.theta_hat);
    assert_eq!(edge, ExtendedReal::PosInf);
}

#[test]
fn gamma_q_min_matches_analytic_root() {
    let model = scalar_gamma_model();
    let market = MarketSpec::new(0.1, 1.0, 1.0).unwrap();
    let c = model_constants(&model, &market).unwrap();
    let (alpha, beta) = (2.0, 1.0);
    let (ca, cc) = (c.skew_skew, c.excess_excess);
    // d/dθ [Cθ - α ln(1 + β(𝒜/2 - θ²C/2))]
    let derivative = |t: f64| cc + alpha * beta * t * cc / (1.0 + beta * (ca / 2.0 - t * t * cc / 2.0));
    let root = roots::bisect(derivative, -c.theta_hat * (1.0 - 1e-12), -1e-12, 200);
    let found = minimize_q(&c, model.law(), DEFAULT_Q_TOLERANCE).unwrap();
    assert!((found.q_min - root).abs() < 1e-8, "{} vs {root}", found.q_min);

    let sol = optimal_portfolio(&model, &market).unwrap();
    let by_hand = (1.0 / 4.0 * 1.0 - root * (1.0 / 4.0) * 1.0) / 1.0;
    assert!((sol.x_star[0] - by_hand).abs() < 1e-8);
}

#[test]
fn zero_skew_minimum_matches_dense_grid() {
    let model = NmvmModel::new(vec![0.06, 0.02], vec![0.0, 0.0], gh_model().a_matrix().clone(), gig_law(0.5, 1.0, 1.5))
        .unwrap();
    let c = model_constants(&model, &market()).unwrap();
    assert_eq!((c.skew_skew, c.skew_excess), (0.0, 0.0));
    let found = minimize_q(&c, model.law(), DEFAULT_Q_TOLERANCE).unwrap();
    let spacing = c.theta_hat / 10_001.0;
    let best = (1..=10_000)
        .map(|j| -spacing * j as f64)
        .min_by(|a, b| {
            let qa = ln_q_objective(&c, model.law(), *a).to_f64();
            let qb = ln_q_objective(&c, model.law(), *b).to_f64();
            qa.total_cmp(&qb)
        })
        .unwrap();
    assert!(found.q_min > -c.theta_hat && found.q_min < 0.0);
    assert!((found.q_min - best).abs() <= spacing);
}

#[test]
fn market_scaling() {
    let model = gh_model();
    let base = optimal_portfolio(&model, &market()).unwrap();
    let doubled = optimal_portfolio(&model, &MarketSpec::new(0.01, 2.0, 1.0).unwrap()).unwrap();
    assert_eq!(base.q_min, doubled.q_min);
    for (a, b) in base.x_star.iter().zip(&doubled.x_star) {
        assert_eq!(*b, a / 2.0);
    }
    let other = optimal_portfolio(&model, &MarketSpec::new(0.01, 0.7, 3.3).unwrap()).unwrap();
    assert_eq!(base.q_min, other.q_min);
    for (a, b) in base.x_star.iter().zip(&other.x_star) {
        assert!(rel_err(*b, a / (0.7 * 3.3)) < 1e-14);
    }
}

#[test]
fn optimum_is_a_local_maximum() {
    let model = gh_model();
    let sol = optimal_portfolio(&model, &market()).unwrap();
    assert!(sol.regular);
    let best = expected_utility(&model, &market(), &sol.x_star).unwrap().to_f64();
    for i in 0..2 {
        for step in [-1e-2, 1e-2] {
            let mut x = sol.x_star.clone();
            x[i] += step;
            assert!(expected_utility(&model, &market(), &x).unwrap().to_f64() < best);
        }
    }
}

#[test]
fn expected_utility_matches_monte_carlo() {
    let model = gh_model();
    let x = [1.3, -0.4];
    let exact = expected_utility(&model, &market(), &x).unwrap().to_f64();
    let (estimate, stderr) = mc_expected_utility(&model, &market(), &x, 1_000_000, 11).unwrap();
    assert!((estimate - exact).abs() <= 3.0 * stderr, "{estimate} ± {stderr} vs {exact}");

    let scalar = scalar_gamma_model();
    let m = MarketSpec::new(0.1, 1.0, 1.0).unwrap();
    let x = [0.05];
    let exact = expected_utility(&scalar, &m, &x).unwrap().to_f64();
    let (estimate, stderr) = mc_expected_utility(&scalar, &m, &x, 1_000_000, 5).unwrap();
    assert!((estimate - exact).abs() <= 3.0 * stderr, "{estimate} ± {stderr} vs {exact}");
}

#[test]
fn divergent_portfolios_are_signalled() {
    let model = NmvmModel::new(vec![0.05], vec![0.0], vec![vec![1.0]], fgc_law(0.0, &[(1.0, 1.0)])).unwrap();
    let market = market();
    // Laplace argument -x²/2 < ŝ = -1 for |x| > √2.
    let x = [2.0];
    assert_eq!(expected_utility(&model, &market, &x).unwrap(), ExtendedReal::NegInf);
    let (estimate, stderr) = mc_expected_utility(&model, &market, &x, 100_000, 3).unwrap();
    let sol = optimal_portfolio(&model, &market).unwrap();
    let (good, good_err) = mc_expected_utility(&model, &market, &sol.x_star, 100_000, 3).unwrap();
    assert!(stderr / estimate.abs() > 0.05, "relative stderr {}", stderr / estimate.abs());
    assert!(good_err / good.abs() < 0.01);
}

#[test]
fn gig_negative_index_can_attract_to_the_boundary() {
    // L(ŝ) < ∞ for λ < 0; strong skew pushes the minimizer onto -θ̂.
    let model = NmvmModel::new(vec![0.2], vec![-3.0], vec![vec![0.1]], gig_law(-3.0, 0.2, 0.3)).unwrap();
    let sol = optimal_portfolio(&model, &market()).unwrap();
    let c = &sol.constants;
    let found = minimize_q(c, model.law(), DEFAULT_Q_TOLERANCE);
    match found {
        Err(ggc_core::Error::BoundaryAttraction { .. }) => {
            assert!(!sol.regular);
            assert!(sol.diagnostics.boundary_attraction);
        }
        Ok(found) => panic!("expected boundary attraction, got {found:?}"),
        Err(e) => panic!("{e}"),
    }
}
