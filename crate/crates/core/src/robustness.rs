//! Convergent model sequences and checks of the resulting convergence of
//! means, integrability numbers, Laplace transforms, distances and portfolios.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::distances::{distance_report, DensityGridSpec, DistanceReport};
use crate::linalg::{self, Matrix};
use crate::mixing::{FiniteGammaConvolution, GammaComponent, Gig, MixingLaw, ThorinAtom, ThorinPair};
use crate::portfolio::{optimal_portfolio, MarketSpec, NmvmModel, PortfolioSolution};
use crate::{Error, Result};

/// How the mixing law moves towards the true law; `w = decay^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LawPath {
    /// `β_i (1 + w c_i)` for gamma components, `t_i / (1 + w c_i)` for atoms.
    ScaleDrift { coefficients: Vec<f64> },
    /// `α_i (1 + w c_i)` for gamma components, `w_i (1 + w c_i)` for atoms.
    ShapeDrift { coefficients: Vec<f64> },
    /// `τ + w c`.
    DriftShift { coefficient: f64 },
    /// `(λ + w c_λ, a (1 + w c_a), b (1 + w c_b))`.
    GigPath { lambda: f64, a: f64, b: f64 },
    /// The listed paths applied in order.
    Mixed { paths: Vec<LawPath> },
}

impl LawPath {
    /// The law at weight `w`; `w = 0` returns the target law.
    pub fn law_at(&self, target: &MixingLaw, w: f64) -> Result<MixingLaw> {
        match (self, target) {
            (LawPath::Mixed { paths }, _) => {
                paths.iter().try_fold(target.clone(), |law, path| path.law_at(&law, w))
            }
            (LawPath::GigPath { lambda, a, b }, MixingLaw::Gig(gig)) => Ok(Gig::new(
                gig.lambda() + w * lambda,
                gig.a() * (1.0 + w * a),
                gig.b() * (1.0 + w * b),
            )?
            .into()),
            (LawPath::GigPath { .. }, _) => Err(Error::UnsupportedLaw { operation: "gig_path", law: target.kind_name() }),
            (_, MixingLaw::Gig(_)) => Err(Error::UnsupportedLaw { operation: "gamma parameter paths", law: "gig" }),
            (LawPath::DriftShift { coefficient }, MixingLaw::FiniteGammaConvolution(conv)) => {
                Ok(FiniteGammaConvolution::new(conv.tau() + w * coefficient, conv.components().to_vec())?.into())
            }
            (LawPath::DriftShift { coefficient }, MixingLaw::AtomicGgc { generator }) => {
                Ok(ThorinPair::new(generator.tau() + w * coefficient, generator.atoms().to_vec())?.into())
            }
            (LawPath::ScaleDrift { coefficients } | LawPath::ShapeDrift { coefficients }, _) => {
                let scale = matches!(self, LawPath::ScaleDrift { .. });
                self.drift_parameters(target, coefficients, w, scale)
            }
        }
    }

    fn drift_parameters(&self, target: &MixingLaw, coefficients: &[f64], w: f64, scale: bool) -> Result<MixingLaw> {
        let factor = |i: usize| 1.0 + w * coefficients[i];
        match target {
            MixingLaw::FiniteGammaConvolution(conv) => {
                check_len(coefficients, conv.components().len())?;
                let parts = conv
                    .components()
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        if scale {
                            GammaComponent { alpha: c.alpha, beta: c.beta * factor(i) }
                        } else {
                            GammaComponent { alpha: c.alpha * factor(i), beta: c.beta }
                        }
                    })
                    .collect();
                Ok(FiniteGammaConvolution::new(conv.tau(), parts)?.into())
            }
            MixingLaw::AtomicGgc { generator } => {
                check_len(coefficients, generator.atoms().len())?;
                let atoms = generator
                    .atoms()
                    .iter()
                    .enumerate()
                    .map(|(i, a)| {
                        if scale {
                            ThorinAtom { location: a.location / factor(i), weight: a.weight }
                        } else {
                            ThorinAtom { location: a.location, weight: a.weight * factor(i) }
                        }
                    })
                    .collect();
                Ok(ThorinPair::new(generator.tau(), atoms)?.into())
            }
            MixingLaw::Gig(_) => unreachable!("handled by law_at"),
        }
    }
}

fn check_len(coefficients: &[f64], expected: usize) -> Result<()> {
    if coefficients.len() != expected {
        return Err(Error::DimensionMismatch("law path needs one coefficient per component"));
    }
    Ok(())
}

/// Perturbation directions of a schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Directions {
    pub dmu: Vec<f64>,
    pub dgamma: Vec<f64>,
    /// Symmetrized before use.
    pub d_a: Matrix,
    pub law_path: LawPath,
}

/// Models `n = 1..=steps` with every parameter moved by `decay^n` times its direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSchedule {
    pub steps: usize,
    pub decay: f64,
    pub directions: Directions,
    pub seed: u64,
}

/// The perturbed models, step `n` at index `n - 1`.
pub fn make_schedule(model: &NmvmModel, spec: &PerturbationSchedule) -> Result<Vec<NmvmModel>> {
    if spec.steps == 0 {
        return Err(Error::invalid("schedule.steps", "must be at least 1"));
    }
    if !(spec.decay > 0.0 && spec.decay < 1.0) {
        return Err(Error::invalid("schedule.decay", "must lie in (0, 1)"));
    }
    let d = model.dim();
    let dirs = &spec.directions;
    if dirs.dmu.len() != d || dirs.dgamma.len() != d || !linalg::is_square(&dirs.d_a, d) {
        return Err(Error::DimensionMismatch("perturbation directions must match the model dimension"));
    }
    let d_a = linalg::symmetrize(&dirs.d_a);
    (1..=spec.steps)
        .map(|n| {
            let w = spec.decay.powi(n as i32);
            let shift = |base: &[f64], dir: &[f64]| base.iter().zip(dir).map(|(b, v)| b + w * v).collect::<Vec<_>>();
            let a: Matrix = model.a_matrix().iter().zip(&d_a).map(|(row, drow)| shift(row, drow)).collect();
            let invalid = |e: Error| Error::InvalidStep { step: n, reason: e.to_string() };
            let law = dirs.law_path.law_at(model.law(), w).map_err(invalid)?;
            NmvmModel::new(shift(model.mu(), &dirs.dmu), shift(model.gamma(), &dirs.dgamma), a, law).map_err(invalid)
        })
        .collect()
}

/// Limit quantities of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub mean: f64,
    pub s_hat: f64,
    pub laplace: Vec<f64>,
    pub solution: PortfolioSolution,
}

/// One step of a sweep. `laplace` holds `+∞` where the transform diverges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub n: usize,
    pub mean: f64,
    pub s_hat: f64,
    pub laplace: Vec<f64>,
    pub distances: Option<DistanceReport>,
    pub solution: Option<PortfolioSolution>,
    /// `|x*_n - x*|`, present for regular steps only.
    pub x_error: Option<f64>,
    /// Why a field is missing.
    pub note: Option<String>,
}

impl StepRecord {
    pub fn regular(&self) -> bool {
        self.x_error.is_some()
    }

    pub fn q_min(&self) -> Option<f64> {
        self.solution.as_ref().filter(|s| s.regular).map(|s| s.q_min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub probes: Vec<f64>,
    pub truth: TruthRecord,
    pub steps: Vec<StepRecord>,
}

/// Sweep settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Laplace probe points; `None` uses `[ŝ/2, 1]` of the true law.
    pub probes: Option<Vec<f64>>,
    pub grid: DensityGridSpec,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { probes: None, grid: DensityGridSpec::default() }
    }
}

/// Everything a sweep step compares against, computed once.
#[derive(Debug, Clone)]
pub struct SweepContext {
    true_model: NmvmModel,
    market: MarketSpec,
    grid: DensityGridSpec,
    probes: Vec<f64>,
    truth: TruthRecord,
}

impl SweepContext {
    pub fn new(true_model: &NmvmModel, market: &MarketSpec, options: &SweepOptions) -> Result<Self> {
        let law = true_model.law();
        let solution = optimal_portfolio(true_model, market)?;
        if !solution.regular {
            return Err(Error::IrregularTrueModel);
        }
        let s_hat = law.integrability_number();
        let probes = options.probes.clone().unwrap_or_else(|| vec![0.5 * s_hat, 1.0]);
        let laplace = probes.iter().map(|&s| law.laplace(s).to_f64()).collect();
        Ok(SweepContext {
            true_model: true_model.clone(),
            market: *market,
            grid: options.grid,
            probes,
            truth: TruthRecord { mean: law.mean(), s_hat, laplace, solution },
        })
    }

    pub fn truth(&self) -> &TruthRecord {
        &self.truth
    }

    /// Record for step `n`; independent of every other step.
    pub fn step(&self, n: usize, model: &NmvmModel) -> StepRecord {
        let law = model.law();
        let mut notes: Vec<String> = Vec::new();
        let distances = match distance_report(law, self.true_model.law(), &self.grid) {
            Ok(report) => Some(report),
            Err(e) => {
                notes.push(format!("distances: {e}"));
                None
            }
        };
        let solution = match optimal_portfolio(model, &self.market) {
            Ok(solution) => Some(solution),
            Err(e) => {
                notes.push(format!("portfolio: {e}"));
                None
            }
        };
        let x_error = match &solution {
            Some(s) if s.regular => Some(euclidean(&s.x_star, &self.truth.solution.x_star)),
            Some(_) => {
                notes.push("portfolio: irregular solution skipped".to_string());
                None
            }
            None => None,
        };
        StepRecord {
            n,
            mean: law.mean(),
            s_hat: law.integrability_number(),
            laplace: self.probes.iter().map(|&s| law.laplace(s).to_f64()).collect(),
            distances,
            solution,
            x_error,
            note: if notes.is_empty() { None } else { Some(notes.join("; ")) },
        }
    }

    pub fn into_report(self, steps: Vec<StepRecord>) -> RobustnessReport {
        RobustnessReport { probes: self.probes, truth: self.truth, steps }
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Runs every step of `schedule` (step `n` at index `n - 1`) against the true model.
pub fn run_sweep(
    true_model: &NmvmModel,
    market: &MarketSpec,
    schedule: &[NmvmModel],
    options: &SweepOptions,
) -> Result<RobustnessReport> {
    let context = SweepContext::new(true_model, market, options)?;
    let steps = schedule.iter().enumerate().map(|(i, model)| context.step(i + 1, model)).collect();
    Ok(context.into_report(steps))
}

/// Tolerances of [`check_convergence`]; defaults are calibrated on the
/// built-in sweeps at 12 steps with decay 0.5.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToleranceSpec {
    pub tol_mean: f64,
    pub tol_in: f64,
    pub tol_lap: f64,
    pub tol_dist: f64,
    pub tol_port: f64,
    pub tol_qmin: f64,
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        ToleranceSpec { tol_mean: 1e-4, tol_in: 1e-6, tol_lap: 1e-4, tol_dist: 1e-2, tol_port: 1e-3, tol_qmin: 1e-4 }
    }
}

impl ToleranceSpec {
    pub fn zero() -> Self {
        ToleranceSpec { tol_mean: 0.0, tol_in: 0.0, tol_lap: 0.0, tol_dist: 0.0, tol_port: 0.0, tol_qmin: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Mean,
    IntegrabilityNumber,
    Laplace,
    Distances,
    Portfolio,
}

impl Check {
    pub const ALL: [Check; 5] = [Check::Mean, Check::IntegrabilityNumber, Check::Laplace, Check::Distances, Check::Portfolio];

    pub fn label(self) -> &'static str {
        match self {
            Check::Mean => "(i) mean",
            Check::IntegrabilityNumber => "(ii) integrability number",
            Check::Laplace => "(iii) laplace",
            Check::Distances => "(iv) distances",
            Check::Portfolio => "(v) portfolio",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub check: Check,
    pub passed: bool,
    /// Final-step errors compared against the tolerances.
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSummary {
    pub outcomes: Vec<CheckOutcome>,
}

impl ConvergenceSummary {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn failed(&self) -> Vec<Check> {
        self.outcomes.iter().filter(|o| !o.passed).map(|o| o.check).collect()
    }

    pub fn outcome(&self, check: Check) -> &CheckOutcome {
        self.outcomes.iter().find(|o| o.check == check).expect("every check is reported")
    }
}

fn nonincreasing_tail(errors: &[f64], len: usize) -> bool {
    let tail = &errors[errors.len().saturating_sub(len)..];
    tail.windows(2).all(|w| w[1] <= w[0])
}

/// Evaluates the five convergence claims on the final steps of `report`.
pub fn check_convergence(report: &RobustnessReport, tol: &ToleranceSpec) -> ConvergenceSummary {
    let truth = &report.truth;
    let steps = &report.steps;
    let last = steps.last();
    let mut outcomes = Vec::with_capacity(5);

    let mean_errors: Vec<f64> = steps.iter().map(|s| (s.mean - truth.mean).abs()).collect();
    let final_mean = mean_errors.last().copied().unwrap_or(f64::INFINITY);
    outcomes.push(CheckOutcome {
        check: Check::Mean,
        passed: final_mean <= tol.tol_mean && nonincreasing_tail(&mean_errors, 3),
        detail: format!("|EZ_n - EZ| = {final_mean:e} (tol {:e}), last 3 nonincreasing", tol.tol_mean),
    });

    let final_in = last.map_or(f64::INFINITY, |s| (s.s_hat - truth.s_hat).abs());
    outcomes.push(CheckOutcome {
        check: Check::IntegrabilityNumber,
        passed: final_in <= tol.tol_in,
        detail: format!("|s_n - s| = {final_in:e} (tol {:e})", tol.tol_in),
    });

    let final_lap = last.map_or(f64::INFINITY, |s| {
        s.laplace.iter().zip(&truth.laplace).map(|(a, b)| if a == b { 0.0 } else { (a - b).abs() }).fold(0.0, f64::max)
    });
    let final_lap = if final_lap.is_nan() { f64::INFINITY } else { final_lap };
    outcomes.push(CheckOutcome {
        check: Check::Laplace,
        passed: final_lap <= tol.tol_lap,
        detail: format!("max probe |L_n - L| = {final_lap:e} (tol {:e})", tol.tol_lap),
    });

    let (tv, kol) = last.and_then(|s| s.distances.as_ref()).map_or((f64::INFINITY, f64::INFINITY), |d| (d.total_variation, d.kolmogorov));
    outcomes.push(CheckOutcome {
        check: Check::Distances,
        passed: tv <= tol.tol_dist && kol <= tol.tol_dist,
        detail: format!("d_TV = {tv:e}, d_Kol = {kol:e} (tol {:e})", tol.tol_dist),
    });

    let x_errors: Vec<f64> = steps.iter().map(|s| s.x_error.unwrap_or(f64::INFINITY)).collect();
    let final_x = x_errors.last().copied().unwrap_or(f64::INFINITY);
    let final_q = last.and_then(|s| s.q_min()).map_or(f64::INFINITY, |q| (q - truth.solution.q_min).abs());
    outcomes.push(CheckOutcome {
        check: Check::Portfolio,
        passed: final_x <= tol.tol_port && nonincreasing_tail(&x_errors, 3) && final_q <= tol.tol_qmin,
        detail: format!(
            "|x*_n - x*| = {final_x:e} (tol {:e}), last 3 nonincreasing, |q_n - q| = {final_q:e} (tol {:e})",
            tol.tol_port, tol.tol_qmin
        ),
    });

    ConvergenceSummary { outcomes }
}

/// `g_n(δ) = ∫_(0,δ] ν_n(dt)/t` per law, and `g(δ)` of the true law.
pub fn partial_mean_diagnostic(laws: &[MixingLaw], true_law: &MixingLaw, delta: f64) -> Result<(Vec<f64>, f64)> {
    let per_step = laws.iter().map(|law| law.thorin_partial_mean(delta)).collect::<Result<Vec<_>>>()?;
    Ok((per_step, true_law.thorin_partial_mean(delta)?))
}

/// Non-convergent schedule: step `n` replaces the mixing law by `Gamma(1, scale n)`.
pub fn scale_blowup_schedule(model: &NmvmModel, steps: usize) -> Result<Vec<NmvmModel>> {
    (1..=steps)
        .map(|n| {
            let law = FiniteGammaConvolution::gamma(1.0, n as f64)?.into();
            NmvmModel::new(model.mu().to_vec(), model.gamma().to_vec(), model.a_matrix().clone(), law)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gamma_model(alpha: f64, beta: f64) -> NmvmModel {
        let law = FiniteGammaConvolution::gamma(alpha, beta).unwrap().into();
        NmvmModel::new(vec![0.05, 0.08], vec![0.1, -0.05], vec![vec![0.2, 0.05], vec![0.05, 0.3]], law).unwrap()
    }

    fn schedule(path: LawPath) -> PerturbationSchedule {
        PerturbationSchedule {
            steps: 3,
            decay: 0.5,
            directions: Directions { dmu: vec![1.0, 0.0], dgamma: vec![0.0; 2], d_a: vec![vec![0.0; 2]; 2], law_path: path },
            seed: 0,
        }
    }

    #[test]
    fn geometric_mu_offsets() {
        let model = gamma_model(2.0, 1.0);
        let models = make_schedule(&model, &schedule(LawPath::Mixed { paths: vec![] })).unwrap();
        let offsets: Vec<f64> = models.iter().map(|m| m.mu()[0] - 0.05).collect();
        for (o, e) in offsets.iter().zip([0.5, 0.25, 0.125]) {
            assert!((o - e).abs() < 1e-15);
        }
    }

    #[test]
    fn nonsymmetric_direction_is_symmetrized() {
        let model = gamma_model(2.0, 1.0);
        let mut spec = schedule(LawPath::Mixed { paths: vec![] });
        spec.directions.d_a = vec![vec![0.0, 0.2], vec![0.0, 0.0]];
        let models = make_schedule(&model, &spec).unwrap();
        assert_eq!(models[0].a_matrix()[0][1], 0.05 + 0.5 * 0.1);
        assert_eq!(models[0].a_matrix()[1][0], models[0].a_matrix()[0][1]);
    }

    #[test]
    fn indefinite_step_is_named() {
        let model = gamma_model(2.0, 1.0);
        let mut spec = schedule(LawPath::Mixed { paths: vec![] });
        spec.directions.d_a = vec![vec![-1.0, 0.0], vec![0.0, 0.0]];
        assert!(matches!(make_schedule(&model, &spec), Err(Error::InvalidStep { step: 1, .. })));
    }

    #[test]
    fn gig_path_integrability_numbers() {
        let law: MixingLaw = Gig::new(1.0, 1.0, 2.0).unwrap().into();
        let path = LawPath::GigPath { lambda: 0.0, a: 0.0, b: 1.0 };
        for n in 1..6 {
            let w = 0.5f64.powi(n);
            let b = 2.0 * (1.0 + w);
            assert_eq!(path.law_at(&law, w).unwrap().integrability_number(), -b * b / 2.0);
        }
    }

    #[test]
    fn partial_mean_of_drifting_atom() {
        let delta = 1.0;
        let laws: Vec<MixingLaw> = (1..5)
            .map(|n| {
                let t = delta * (1.0 - 0.5f64.powi(n + 1));
                ThorinPair::new(0.0, vec![ThorinAtom { location: t, weight: 1.0 }]).unwrap().into()
            })
            .collect();
        let truth: MixingLaw = ThorinPair::new(0.0, vec![ThorinAtom { location: 2.0, weight: 1.0 }]).unwrap().into();
        let (g, g_true) = partial_mean_diagnostic(&laws, &truth, delta).unwrap();
        for (n, v) in g.iter().enumerate() {
            assert_eq!(*v, 1.0 / (delta * (1.0 - 0.5f64.powi(n as i32 + 2))));
        }
        assert_eq!(g_true, 0.0);
    }
}
