//! Exponential-utility optimal portfolio for normal mean-variance mixtures
//! `X = μ + γZ + √Z A N`.

use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, Cholesky, Matrix};
use crate::mixing::MixingLaw;
use crate::optimize::minimize_bracketed;
use crate::{Error, ExtendedReal, Result};

/// Return model `X = μ + γZ + √Z A N` with `N` standard normal in `ℝ^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNmvmModel")]
pub struct NmvmModel {
    mu: Vec<f64>,
    gamma: Vec<f64>,
    a_matrix: Matrix,
    law: MixingLaw,
}

#[derive(Deserialize)]
struct RawNmvmModel {
    mu: Vec<f64>,
    gamma: Vec<f64>,
    a_matrix: Matrix,
    law: MixingLaw,
}

impl TryFrom<RawNmvmModel> for NmvmModel {
    type Error = Error;

    fn try_from(raw: RawNmvmModel) -> Result<Self> {
        NmvmModel::new(raw.mu, raw.gamma, raw.a_matrix, raw.law)
    }
}

impl NmvmModel {
    /// Validates dimensions, finiteness, symmetry (to 1e-12 relative) and
    /// positive definiteness of `A`.
    pub fn new(mu: Vec<f64>, gamma: Vec<f64>, a_matrix: Matrix, law: MixingLaw) -> Result<Self> {
        let d = mu.len();
        if d == 0 {
            return Err(Error::DimensionMismatch("mu must be nonempty"));
        }
        if gamma.len() != d {
            return Err(Error::DimensionMismatch("gamma must have the length of mu"));
        }
        if !linalg::is_square(&a_matrix, d) {
            return Err(Error::DimensionMismatch("a_matrix must be d x d with d = len(mu)"));
        }
        if mu.iter().chain(&gamma).chain(a_matrix.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("model", "entries must be finite"));
        }
        if linalg::asymmetry(&a_matrix) > 1e-12 {
            return Err(Error::invalid("a_matrix", "must be symmetric"));
        }
        Cholesky::factor(&a_matrix, "a_matrix")?;
        Ok(NmvmModel { mu, gamma, a_matrix, law })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn a_matrix(&self) -> &Matrix {
        &self.a_matrix
    }

    pub fn law(&self) -> &MixingLaw {
        &self.law
    }

    /// `Σ = A Aᵀ`.
    pub fn sigma(&self) -> Matrix {
        linalg::gram(&self.a_matrix)
    }

    /// `μ - r_f 1`.
    pub fn excess_mean(&self, r_f: f64) -> Vec<f64> {
        self.mu.iter().map(|m| m - r_f).collect()
    }
}

/// Risk-free rate, exponential risk aversion `a` and initial wealth `W₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMarketSpec")]
pub struct MarketSpec {
    r_f: f64,
    a: f64,
    w0: f64,
}

#[derive(Deserialize)]
struct RawMarketSpec {
    r_f: f64,
    a: f64,
    w0: f64,
}

impl TryFrom<RawMarketSpec> for MarketSpec {
    type Error = Error;

    fn try_from(raw: RawMarketSpec) -> Result<Self> {
        MarketSpec::new(raw.r_f, raw.a, raw.w0)
    }
}

impl MarketSpec {
    pub fn new(r_f: f64, a: f64, w0: f64) -> Result<Self> {
        if !r_f.is_finite() {
            return Err(Error::invalid("r_f", "must be finite"));
        }
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::invalid("a", "must be finite and positive"));
        }
        if !(w0 > 0.0) || !w0.is_finite() {
            return Err(Error::invalid("w0", "must be finite and positive"));
        }
        Ok(MarketSpec { r_f, a, w0 })
    }

    pub fn r_f(&self) -> f64 {
        self.r_f
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn w0(&self) -> f64 {
        self.w0
    }

    /// `a W₀`.
    pub fn scaled_aversion(&self) -> f64 {
        self.a * self.w0
    }
}

/// Quadratic forms of the model under `Σ⁻¹`, with `m = μ - r_f 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConstants {
    /// `γᵀΣ⁻¹γ`.
    pub skew_skew: f64,
    /// `γᵀΣ⁻¹m`.
    pub skew_excess: f64,
    /// `mᵀΣ⁻¹m`.
    pub excess_excess: f64,
    /// Integrability number `ŝ` of the mixing law.
    pub s_hat: f64,
    /// `θ̂ = √((γᵀΣ⁻¹γ - 2ŝ) / mᵀΣ⁻¹m)`.
    pub theta_hat: f64,
    /// `Σ⁻¹γ`.
    pub precision_skew: Vec<f64>,
    /// `Σ⁻¹m`.
    pub precision_excess: Vec<f64>,
}

pub fn model_constants(model: &NmvmModel, market: &MarketSpec) -> Result<ModelConstants> {
    let excess = model.excess_mean(market.r_f);
    if excess.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroExcessReturn);
    }
    let chol = Cholesky::factor(&model.sigma(), "sigma = A A^T")?;
    let precision_skew = chol.solve(&model.gamma);
    let precision_excess = chol.solve(&excess);
    let skew_skew = linalg::dot(&model.gamma, &precision_skew);
    let skew_excess = linalg::dot(&model.gamma, &precision_excess);
    let excess_excess = linalg::dot(&excess, &precision_excess);
    if !(excess_excess > 0.0) {
        return Err(Error::ZeroExcessReturn);
    }
    let s_hat = model.law.integrability_number();
    let theta_hat = ((skew_skew - 2.0 * s_hat) / excess_excess).sqrt();
    Ok(ModelConstants { skew_skew, skew_excess, excess_excess, s_hat, theta_hat, precision_skew, precision_excess })
}

/// `ln Q(θ) = 𝒞θ + ln L_Z(𝒜/2 - θ²𝒞/2)`.
pub fn ln_q_objective(constants: &ModelConstants, law: &MixingLaw, theta: f64) -> ExtendedReal {
    let c = constants.excess_excess;
    let s = 0.5 * constants.skew_skew - 0.5 * theta * theta * c;
    law.ln_laplace(s).map(|l| c * theta + l)
}

/// `Q(θ) = e^{𝒞θ} L_Z(𝒜/2 - θ²𝒞/2)`.
pub fn q_objective(constants: &ModelConstants, law: &MixingLaw, theta: f64) -> ExtendedReal {
    ln_q_objective(constants, law, theta).exp()
}

/// Minimizer of `Q` over `(-θ̂, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QMinimum {
    pub q_min: f64,
    pub q_value: f64,
    pub iterations: usize,
    /// Final optimizer bracket.
    pub bracket_lo: f64,
    pub bracket_hi: f64,
}

const MAX_ITERATIONS: usize = 500;

/// Default absolute tolerance on `q_min`.
pub const DEFAULT_Q_TOLERANCE: f64 = 1e-10;

/// Brent minimization of `ln Q` on `[-θ̂(1 - 1e-9), -1e-12]`.
///
/// Fails with [`Error::BoundaryAttraction`] when the minimizer ends within the
/// tolerance of `-θ̂` with `Q` still decreasing towards it.
pub fn minimize_q(constants: &ModelConstants, law: &MixingLaw, tol: f64) -> Result<QMinimum> {
    if !(constants.theta_hat > 0.0) {
        return Err(Error::Precondition("theta_hat must be positive for a nonempty search interval"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be positive"));
    }
    let lo = -constants.theta_hat * (1.0 - 1e-9);
    let hi = -1e-12;
    let objective = |theta: f64| ln_q_objective(constants, law, theta).to_f64();
    let found = minimize_bracketed(objective, lo, hi, tol, MAX_ITERATIONS);
    let near = 4.0 * (tol + 1e-15 * lo.abs());
    if found.x - lo <= near && objective(lo) <= objective(lo + near) {
        return Err(Error::BoundaryAttraction { q: found.x, boundary: -constants.theta_hat });
    }
    Ok(QMinimum {
        q_min: found.x,
        q_value: found.value.exp(),
        iterations: found.iterations,
        bracket_lo: found.lo,
        bracket_hi: found.hi,
    })
}

/// Optimizer record attached to a [`PortfolioSolution`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortfolioDiagnostics {
    pub iterations: usize,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub boundary_attraction: bool,
    /// `𝒜/2 - q_min²𝒞/2`, the Laplace argument at the optimum.
    pub laplace_argument: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortfolioSolution {
    pub q_min: f64,
    pub x_star: Vec<f64>,
    pub q_value: f64,
    pub regular: bool,
    pub constants: ModelConstants,
    pub diagnostics: PortfolioDiagnostics,
}

/// `x(q) = (Σ⁻¹γ - q Σ⁻¹m) / (a W₀)`.
pub fn portfolio_for(constants: &ModelConstants, market: &MarketSpec, q: f64) -> Vec<f64> {
    let scale = market.scaled_aversion();
    constants.precision_skew.iter().zip(&constants.precision_excess).map(|(g, m)| (g - q * m) / scale).collect()
}

/// Optimal portfolio `x* = x(q_min)`.
///
/// A minimizer attracted to `-θ̂` yields `regular = false` with the boundary
/// point as `q_min`.
pub fn optimal_portfolio(model: &NmvmModel, market: &MarketSpec) -> Result<PortfolioSolution> {
    let constants = model_constants(model, market)?;
    let (found, attracted) = match minimize_q(&constants, &model.law, DEFAULT_Q_TOLERANCE) {
        Ok(found) => (found, false),
        Err(Error::BoundaryAttraction { q, .. }) => {
            let value = q_objective(&constants, &model.law, q).to_f64();
            (QMinimum { q_min: q, q_value: value, iterations: 0, bracket_lo: q, bracket_hi: q }, true)
        }
        Err(e) => return Err(e),
    };
    let laplace_argument = 0.5 * constants.skew_skew - 0.5 * found.q_min * found.q_min * constants.excess_excess;
    let interior = !attracted && found.q_min > -constants.theta_hat && found.q_min < 0.0;
    let regular = interior && found.q_value.is_finite() && model.law.laplace(laplace_argument).is_finite();
    Ok(PortfolioSolution {
        q_min: found.q_min,
        x_star: portfolio_for(&constants, market, found.q_min),
        q_value: found.q_value,
        regular,
        diagnostics: PortfolioDiagnostics {
            iterations: found.iterations,
            bracket_lo: found.bracket_lo,
            bracket_hi: found.bracket_hi,
            boundary_attraction: attracted,
            laplace_argument,
        },
        constants,
    })
}

/// `E[-e^{-a W(x)}]` with `W(x) = W₀(1 + r_f) + W₀ xᵀ(X - r_f 1)`, in closed form:
/// `-exp(-aW₀(1+r_f) - aW₀ xᵀm) · L_Z(aW₀ xᵀγ - (aW₀)² xᵀΣx / 2)`.
///
/// `NegInf` signals a divergent Laplace transform.
pub fn expected_utility(model: &NmvmModel, market: &MarketSpec, x: &[f64]) -> Result<ExtendedReal> {
    if x.len() != model.dim() {
        return Err(Error::DimensionMismatch("portfolio length must equal the model dimension"));
    }
    let aw = market.scaled_aversion();
    let excess = model.excess_mean(market.r_f);
    let ax = linalg::mat_vec(&transpose(&model.a_matrix), x);
    let variance = linalg::dot(&ax, &ax);
    let s = aw * linalg::dot(x, &model.gamma) - 0.5 * aw * aw * variance;
    let lead = -aw * (1.0 + market.r_f) - aw * linalg::dot(x, &excess);
    Ok(match model.law.ln_laplace(s) {
        ExtendedReal::Finite(l) => ExtendedReal::Finite(-(lead + l).exp()),
        _ => ExtendedReal::NegInf,
    })
}

fn transpose(m: &[Vec<f64>]) -> Matrix {
    let n = m.len();
    (0..n).map(|j| (0..n).map(|i| m[i][j]).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixing::FiniteGammaConvolution;
    use alloc::vec;

    fn scalar_model(law: MixingLaw) -> NmvmModel {
        NmvmModel::new(vec![1.1], vec![1.0], vec![vec![2.0]], law).unwrap()
    }

    fn gamma(alpha: f64, beta: f64) -> MixingLaw {
        FiniteGammaConvolution::gamma(alpha, beta).unwrap().into()
    }

    #[test]
    fn scalar_constants() {
        let market = MarketSpec::new(0.1, 1.0, 1.0).unwrap();
        let c = model_constants(&scalar_model(gamma(2.0, 1.0)), &market).unwrap();
        assert!((c.skew_skew - 0.25).abs() < 1e-15);
        assert!((c.skew_excess - 0.25).abs() < 1e-15);
        assert!((c.excess_excess - 0.25).abs() < 1e-15);
        assert!((c.theta_hat * c.theta_hat * c.excess_excess - (c.skew_skew - 2.0 * c.s_hat)).abs() < 1e-10);
    }

    #[test]
    fn zero_skew_constants() {
        let model = NmvmModel::new(vec![1.1], vec![0.0], vec![vec![2.0]], gamma(2.0, 1.0)).unwrap();
        let c = model_constants(&model, &MarketSpec::new(0.1, 1.0, 1.0).unwrap()).unwrap();
        assert_eq!((c.skew_skew, c.skew_excess), (0.0, 0.0));
    }

    #[test]
    fn zero_excess_return_is_rejected() {
        let model = scalar_model(gamma(2.0, 1.0));
        assert_eq!(model_constants(&model, &MarketSpec::new(1.1, 1.0, 1.0).unwrap()), Err(Error::ZeroExcessReturn));
    }

    #[test]
    fn q_at_zero_is_laplace() {
        let law = gamma(2.0, 1.0);
        let c = model_constants(&scalar_model(law.clone()), &MarketSpec::new(0.1, 1.0, 1.0).unwrap()).unwrap();
        assert_eq!(q_objective(&c, &law, 0.0), law.laplace(0.125));
        assert_eq!(q_objective(&c, &law, -c.theta_hat), ExtendedReal::PosInf);
    }

    #[test]
    fn riskless_utility() {
        let model = scalar_model(gamma(2.0, 1.0));
        let market = MarketSpec::new(0.1, 2.0, 3.0).unwrap();
        let eu = expected_utility(&model, &market, &[0.0]).unwrap();
        assert_eq!(eu, ExtendedReal::Finite(-(-6.0f64 * 1.1).exp()));
    }

    #[test]
    fn rejects_bad_models() {
        let law = gamma(1.0, 1.0);
        assert!(NmvmModel::new(vec![0.0, 0.0], vec![0.0], vec![vec![1.0]], law.clone()).is_err());
        assert!(NmvmModel::new(vec![0.0; 2], vec![0.0; 2], vec![vec![1.0, 2.0], vec![2.0, 1.0]], law.clone()).is_err());
        assert!(NmvmModel::new(vec![0.0; 2], vec![0.0; 2], vec![vec![1.0, 0.1], vec![0.0, 1.0]], law).is_err());
        assert!(MarketSpec::new(0.0, 0.0, 1.0).is_err());
    }
}
