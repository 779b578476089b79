//! Command dispatch: one report table, a JSON document and a summary per run.

use std::fmt::Write as _;
use std::io;
use std::path::PathBuf;

use ggc_core::distances::distance_report;
use ggc_core::portfolio::{expected_utility, optimal_portfolio, NmvmModel};
use ggc_core::robustness::{check_convergence, make_schedule, scale_blowup_schedule, Check, SweepOptions};
use ggc_core::ExtendedReal;
use serde_json::{json, Value};

use crate::config::{Command, ConfigErrors, Format, RunConfig, SampleTarget, ScheduleSection};
use crate::output::{write_atomic, Cell, Table};
use crate::parallel;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Config(#[from] ConfigErrors),
    #[error("{0}")]
    Domain(#[from] ggc_core::Error),
    #[error("{context}: {source}")]
    Io { context: String, source: io::Error },
}

impl RunError {
    /// 2 for configuration problems, 1 for everything that fails while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Domain(_) | RunError::Io { .. } => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config_error",
            RunError::Domain(_) => "domain_error",
            RunError::Io { .. } => "io_error",
        }
    }
}

/// What a command computed, before encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub table: Table,
    pub document: Value,
    /// `key=value` pairs for the stdout summary line.
    pub summary: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub path: PathBuf,
    pub summary: String,
}

/// Runs the configured command and writes its output file atomically.
pub fn run(config: &RunConfig) -> Result<Outcome, RunError> {
    let report = execute(config)?;
    let bytes = encode(&report, config.output.format)
        .map_err(|source| RunError::Io { context: "encoding output".into(), source })?;
    let path = config.output_path();
    write_atomic(&path, &bytes).map_err(|source| RunError::Io { context: format!("writing {}", path.display()), source })?;
    let mut summary = format!("command={} status=ok out={}", config.command.name(), path.display());
    for (key, value) in &report.summary {
        let _ = write!(summary, " {key}={value}");
    }
    Ok(Outcome { path, summary })
}

pub fn encode(report: &Report, format: Format) -> io::Result<Vec<u8>> {
    match format {
        Format::Csv => report.table.to_csv(),
        Format::Text => {
            let mut bytes = serde_json::to_vec_pretty(&report.document)?;
            bytes.push(b'\n');
            Ok(bytes)
        }
    }
}

/// The report of the configured command, without touching the filesystem.
pub fn execute(config: &RunConfig) -> Result<Report, RunError> {
    match config.command {
        Command::Laplace => laplace(config),
        Command::Mean => mean(config),
        Command::Density => density(config),
        Command::Distance => distance(config),
        Command::Optimize => optimize(config),
        Command::Sweep => sweep(config),
        Command::Sample => sample(config),
    }
}

fn law(config: &RunConfig) -> &ggc_core::MixingLaw {
    config.law.as_ref().expect("validated config carries the law")
}

fn model(config: &RunConfig) -> NmvmModel {
    config.nmvm_model().expect("validated config carries a consistent model")
}

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn extended(v: ExtendedReal) -> f64 {
    v.to_f64()
}

fn laplace(config: &RunConfig) -> Result<Report, RunError> {
    let law = law(config);
    let mut table = Table::new(["s", "laplace", "ln_laplace"]);
    for &s in config.laplace.as_deref().unwrap_or_default() {
        table.push(vec![s.into(), extended(law.laplace(s)).into(), extended(law.ln_laplace(s)).into()]);
    }
    let s_hat = law.integrability_number();
    let document = json!({ "command": "laplace", "integrability_number": s_hat, "rows": table.to_json_rows() });
    let summary = vec![("rows".into(), table.rows.len().to_string()), ("integrability_number".into(), real(s_hat))];
    Ok(Report { table, document, summary })
}

fn mean(config: &RunConfig) -> Result<Report, RunError> {
    let law = law(config);
    let mut table = Table::new(["mean", "variance", "integrability_number", "support_start"]);
    table.push(vec![
        law.mean().into(),
        law.variance().into(),
        law.integrability_number().into(),
        law.support_start().into(),
    ]);
    let document = json!({ "command": "mean", "rows": table.to_json_rows() });
    let summary = vec![("mean".into(), real(law.mean()))];
    Ok(Report { table, document, summary })
}

fn density(config: &RunConfig) -> Result<Report, RunError> {
    let law = law(config);
    let evaluator = law.evaluator()?;
    let mut table = Table::new(["x", "density", "cdf"]);
    for &x in config.density.as_deref().unwrap_or_default() {
        table.push(vec![x.into(), evaluator.pdf(x).into(), evaluator.cdf(x).into()]);
    }
    let document = json!({ "command": "density", "rows": table.to_json_rows() });
    let summary = vec![("rows".into(), table.rows.len().to_string())];
    Ok(Report { table, document, summary })
}

fn distance(config: &RunConfig) -> Result<Report, RunError> {
    let section = config.distance.as_ref().expect("validated config carries [distance]");
    let r = distance_report(law(config), &section.other, &section.grid)?;
    let mut table =
        Table::new(["kolmogorov", "total_variation", "fm_lower", "fm_upper", "error_bound", "window_lo", "window_hi"]);
    table.push(vec![
        r.kolmogorov.into(),
        r.total_variation.into(),
        r.fm_lower.into(),
        r.fm_upper.into(),
        r.error_bound.into(),
        r.lo.into(),
        r.hi.into(),
    ]);
    let document = json!({ "command": "distance", "report": r });
    let summary = vec![
        ("kolmogorov".into(), real(r.kolmogorov)),
        ("total_variation".into(), real(r.total_variation)),
        ("error_bound".into(), real(r.error_bound)),
    ];
    Ok(Report { table, document, summary })
}

fn optimize(config: &RunConfig) -> Result<Report, RunError> {
    let model = model(config);
    let market = config.market.expect("validated config carries [market]");
    let solution = optimal_portfolio(&model, &market)?;
    let utility = extended(expected_utility(&model, &market, &solution.x_star)?);
    let mut header: Vec<String> = [
        "q_min",
        "q_value",
        "regular",
        "theta_hat",
        "s_hat",
        "laplace_argument",
        "iterations",
        "expected_utility",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((1..=model.dim()).map(|i| format!("x_{i}")));
    let mut table = Table::new(header);
    let mut row: Vec<Cell> = vec![
        solution.q_min.into(),
        solution.q_value.into(),
        solution.regular.into(),
        solution.constants.theta_hat.into(),
        solution.constants.s_hat.into(),
        solution.diagnostics.laplace_argument.into(),
        solution.diagnostics.iterations.into(),
        utility.into(),
    ];
    row.extend(solution.x_star.iter().map(|&x| Cell::from(x)));
    table.push(row);
    let document = json!({ "command": "optimize", "solution": solution, "expected_utility": table.to_json_rows()[0]["expected_utility"] });
    let summary = vec![
        ("q_min".into(), real(solution.q_min)),
        ("regular".into(), solution.regular.to_string()),
        ("x_star".into(), solution.x_star.iter().map(|&x| real(x)).collect::<Vec<_>>().join(",")),
    ];
    Ok(Report { table, document, summary })
}

fn check_key(check: Check) -> &'static str {
    match check {
        Check::Mean => "mean",
        Check::IntegrabilityNumber => "integrability_number",
        Check::Laplace => "laplace",
        Check::Distances => "distances",
        Check::Portfolio => "portfolio",
    }
}

fn sweep(config: &RunConfig) -> Result<Report, RunError> {
    let true_model = model(config);
    let market = config.market.expect("validated config carries [market]");
    let steps = match config.schedule.as_ref().expect("validated config carries [schedule]") {
        ScheduleSection::Perturbation(spec) => {
            let mut spec = spec.clone();
            spec.seed = config.seed;
            make_schedule(&true_model, &spec)?
        }
        ScheduleSection::ScaleBlowup { steps } => scale_blowup_schedule(&true_model, *steps)?,
    };
    let options = match &config.sweep {
        Some(s) => SweepOptions { probes: s.probes.clone(), grid: s.grid },
        None => SweepOptions::default(),
    };
    let report = parallel::run_sweep(&true_model, &market, &steps, &options)?;
    let convergence = check_convergence(&report, &config.tolerances);

    let truth = &report.truth;
    let mut header: Vec<String> = ["n", "mean", "mean_error", "s_hat", "s_hat_error"].iter().map(|s| s.to_string()).collect();
    header.extend((1..=report.probes.len()).map(|k| format!("laplace_{k}")));
    header.extend(
        ["laplace_error", "total_variation", "kolmogorov", "fm_lower", "fm_upper", "distance_error_bound", "q_min", "regular", "x_error"]
            .iter()
            .map(|s| s.to_string()),
    );
    header.extend((1..=true_model.dim()).map(|i| format!("x_{i}")));
    header.push("note".into());
    let mut table = Table::new(header);
    for step in &report.steps {
        let mut row: Vec<Cell> = vec![
            step.n.into(),
            step.mean.into(),
            (step.mean - truth.mean).abs().into(),
            step.s_hat.into(),
            (step.s_hat - truth.s_hat).abs().into(),
        ];
        row.extend(step.laplace.iter().map(|&v| Cell::from(v)));
        let lap_error = step
            .laplace
            .iter()
            .zip(&truth.laplace)
            .map(|(a, b)| if a == b { 0.0 } else { (a - b).abs() })
            .fold(0.0, f64::max);
        row.push(lap_error.into());
        let d = step.distances.as_ref();
        row.extend([
            d.map(|d| d.total_variation).into(),
            d.map(|d| d.kolmogorov).into(),
            d.map(|d| d.fm_lower).into(),
            d.map(|d| d.fm_upper).into(),
            d.map(|d| d.error_bound).into(),
            step.q_min().into(),
            step.regular().into(),
            step.x_error.into(),
        ]);
        match &step.solution {
            Some(s) => row.extend(s.x_star.iter().map(|&x| Cell::from(x))),
            None => row.extend((0..true_model.dim()).map(|_| Cell::Empty)),
        }
        row.push(step.note.clone().map_or(Cell::Empty, Cell::Text));
        table.push(row);
    }
    let failed: Vec<&str> = convergence.failed().into_iter().map(check_key).collect();
    let document = json!({ "command": "sweep", "report": report, "convergence": convergence });
    let summary = vec![
        ("steps".into(), report.steps.len().to_string()),
        ("passed".into(), convergence.passed().to_string()),
        ("failed".into(), if failed.is_empty() { "none".to_string() } else { failed.join(",") }),
    ];
    Ok(Report { table, document, summary })
}

fn sample(config: &RunConfig) -> Result<Report, RunError> {
    let section = config.sample.as_ref().expect("validated config carries [sample]");
    match section.target {
        SampleTarget::Mixing => {
            let batch = parallel::sample_mixing(law(config), section.n, config.seed)?;
            let mut table = Table::new(["index", "z"]);
            for (i, &z) in batch.values.iter().enumerate() {
                table.push(vec![i.into(), z.into()]);
            }
            let mean = batch.values.iter().sum::<f64>() / batch.values.len() as f64;
            let document = json!({
                "command": "sample",
                "seed": config.seed,
                "acceptance_rate": batch.acceptance_rate,
                "values": batch.values,
            });
            let mut summary = vec![("n".into(), section.n.to_string()), ("sample_mean".into(), real(mean))];
            if let Some(rate) = batch.acceptance_rate {
                summary.push(("acceptance_rate".into(), real(rate)));
            }
            Ok(Report { table, document, summary })
        }
        SampleTarget::Returns => {
            let model = model(config);
            let draws = parallel::sample_returns(&model, section.n, config.seed)?;
            let mut header = vec!["index".to_string()];
            header.extend((1..=draws.dim()).map(|i| format!("x_{i}")));
            let mut table = Table::new(header);
            for (i, row) in draws.rows().enumerate() {
                let mut cells = vec![Cell::from(i)];
                cells.extend(row.iter().map(|&x| Cell::from(x)));
                table.push(cells);
            }
            let rows: Vec<&[f64]> = draws.rows().collect();
            let document = json!({ "command": "sample", "seed": config.seed, "returns": rows });
            let summary = vec![("n".into(), section.n.to_string()), ("dim".into(), draws.dim().to_string())];
            Ok(Report { table, document, summary })
        }
    }
}
