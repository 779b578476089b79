//! Run configuration: TOML in, validated [`RunConfig`] out, and back.
//!
//! Parsing walks the document by hand so that every problem is reported with
//! its field path in one pass, and unknown keys are rejected.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;

use ggc_core::distances::DensityGridSpec;
use ggc_core::mixing::{FiniteGammaConvolution, GammaComponent, Gig, MixingLaw, ThorinAtom, ThorinPair};
use ggc_core::portfolio::{MarketSpec, NmvmModel};
use ggc_core::robustness::{Directions, LawPath, PerturbationSchedule, ToleranceSpec};
use serde::Serialize;
use toml::{Table, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Laplace,
    Mean,
    Density,
    Distance,
    Optimize,
    Sweep,
    Sample,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Laplace,
        Command::Mean,
        Command::Density,
        Command::Distance,
        Command::Optimize,
        Command::Sweep,
        Command::Sample,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Laplace => "laplace",
            Command::Mean => "mean",
            Command::Density => "density",
            Command::Distance => "distance",
            Command::Optimize => "optimize",
            Command::Sweep => "sweep",
            Command::Sample => "sample",
        }
    }

    fn parse(name: &str) -> Option<Command> {
        Command::ALL.into_iter().find(|c| c.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Text,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Text => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    /// `None` writes `ggc-<command>.<ext>` in the working directory.
    pub path: Option<PathBuf>,
    pub format: Format,
}

/// Matrix and vectors of the return model; the mixing law lives in `[law]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSection {
    pub mu: Vec<f64>,
    pub gamma: Vec<f64>,
    pub a: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleSection {
    Perturbation(PerturbationSchedule),
    /// Step `n` uses the mixing law `Gamma(1, n)`.
    ScaleBlowup { steps: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleTarget {
    Mixing,
    Returns,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSection {
    pub n: usize,
    pub target: SampleTarget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSection {
    pub other: MixingLaw,
    pub grid: DensityGridSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSection {
    pub probes: Option<Vec<f64>>,
    pub grid: DensityGridSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub output: OutputSpec,
    pub market: Option<MarketSpec>,
    pub model: Option<ModelSection>,
    pub law: Option<MixingLaw>,
    pub schedule: Option<ScheduleSection>,
    pub tolerances: ToleranceSpec,
    /// Points `s` for `laplace`.
    pub laplace: Option<Vec<f64>>,
    /// Points `x` for `density`.
    pub density: Option<Vec<f64>>,
    pub distance: Option<DistanceSection>,
    pub sweep: Option<SweepSection>,
    pub sample: Option<SampleSection>,
}

impl RunConfig {
    /// The return model built from `[model]` and `[law]`.
    pub fn nmvm_model(&self) -> Option<NmvmModel> {
        let m = self.model.as_ref()?;
        NmvmModel::new(m.mu.clone(), m.gamma.clone(), m.a.clone(), self.law.clone()?).ok()
    }

    pub fn output_path(&self) -> PathBuf {
        self.output
            .path
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("ggc-{}.{}", self.command.name(), self.output.format.extension())))
    }
}

/// One problem in a configuration document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// Dotted field path, empty for document-level problems.
    pub path: String,
    pub message: String,
    /// 1-based line and column of syntax errors.
    pub position: Option<(usize, usize)>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.position, self.path.is_empty()) {
            (Some((line, col)), _) => write!(f, "syntax error at line {line}, column {col}: {}", self.message),
            (None, true) => write!(f, "{}", self.message),
            (None, false) => write!(f, "{}: {}", self.path, self.message),
        }
    }
}

/// All problems found in a document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

impl ConfigErrors {
    pub fn paths(&self) -> Vec<&str> {
        self.0.iter().map(|e| e.path.as_str()).collect()
    }
}

pub fn parse_config(document: &str) -> Result<RunConfig, ConfigErrors> {
    let table: Table = toml::from_str(document).map_err(|e| {
        let position = e.span().map(|span| line_column(document, span.start));
        ConfigErrors(vec![ConfigError { path: String::new(), message: e.message().trim().to_string(), position }])
    })?;
    let mut errors = Errors::default();
    let config = build(&table, &mut errors);
    match config {
        Some(config) if errors.0.is_empty() => Ok(config),
        _ => Err(ConfigErrors(errors.0)),
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

#[derive(Default)]
struct Errors(Vec<ConfigError>);

impl Errors {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.0.push(ConfigError { path: path.into(), message: message.into(), position: None });
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

/// A table being consumed; keys never taken are reported as unknown.
struct Section<'a> {
    path: String,
    table: &'a Table,
    taken: BTreeSet<&'a str>,
}

impl<'a> Section<'a> {
    fn new(path: impl Into<String>, table: &'a Table) -> Self {
        Section { path: path.into(), table, taken: BTreeSet::new() }
    }

    fn at(&self, key: &str) -> String {
        join(&self.path, key)
    }

    fn raw(&mut self, key: &str) -> Option<&'a Value> {
        let (k, v) = self.table.get_key_value(key)?;
        self.taken.insert(k.as_str());
        Some(v)
    }

    fn required(&mut self, key: &str, errors: &mut Errors) -> Option<&'a Value> {
        let value = self.raw(key);
        if value.is_none() {
            errors.push(self.at(key), "missing required field");
        }
        value
    }

    fn f64_opt(&mut self, key: &str, errors: &mut Errors) -> Option<f64> {
        let path = self.at(key);
        self.raw(key).and_then(|v| number(v, &path, errors))
    }

    fn f64_req(&mut self, key: &str, errors: &mut Errors) -> Option<f64> {
        let path = self.at(key);
        self.required(key, errors).and_then(|v| number(v, &path, errors))
    }

    fn count(&mut self, key: &str, required: bool, errors: &mut Errors) -> Option<usize> {
        let path = self.at(key);
        let value = if required { self.required(key, errors) } else { self.raw(key) }?;
        match value.as_integer() {
            Some(n) if n >= 1 => Some(n as usize),
            Some(_) => {
                errors.push(path, "must be at least 1");
                None
            }
            None => {
                errors.push(path, "expected an integer");
                None
            }
        }
    }

    fn string(&mut self, key: &str, required: bool, errors: &mut Errors) -> Option<&'a str> {
        let path = self.at(key);
        let value = if required { self.required(key, errors) } else { self.raw(key) }?;
        let s = value.as_str();
        if s.is_none() {
            errors.push(path, "expected a string");
        }
        s
    }

    fn vector(&mut self, key: &str, required: bool, errors: &mut Errors) -> Option<Vec<f64>> {
        let path = self.at(key);
        let value = if required { self.required(key, errors) } else { self.raw(key) }?;
        vector(value, &path, errors)
    }

    fn matrix(&mut self, key: &str, errors: &mut Errors) -> Option<Vec<Vec<f64>>> {
        let path = self.at(key);
        let value = self.required(key, errors)?;
        let Some(rows) = value.as_array() else {
            errors.push(path, "expected a list of rows");
            return None;
        };
        let rows: Vec<Option<Vec<f64>>> =
            rows.iter().enumerate().map(|(i, row)| vector(row, &format!("{path}[{i}]"), errors)).collect();
        rows.into_iter().collect()
    }

    fn table(&mut self, key: &str, required: bool, errors: &mut Errors) -> Option<Section<'a>> {
        let path = self.at(key);
        let value = if required { self.required(key, errors) } else { self.raw(key) }?;
        match value.as_table() {
            Some(table) => Some(Section::new(path, table)),
            None => {
                errors.push(path, "expected a table");
                None
            }
        }
    }

    fn array_of_tables(&mut self, key: &str, errors: &mut Errors) -> Option<Vec<Section<'a>>> {
        let path = self.at(key);
        let value = self.required(key, errors)?;
        let Some(items) = value.as_array() else {
            errors.push(path, "expected a list of tables");
            return None;
        };
        if items.is_empty() {
            errors.push(path, "must not be empty");
            return None;
        }
        let mut sections = Vec::with_capacity(items.len());
        for (i, item) in items.iter().enumerate() {
            match item.as_table() {
                Some(table) => sections.push(Section::new(format!("{path}[{i}]"), table)),
                None => errors.push(format!("{path}[{i}]"), "expected a table"),
            }
        }
        (sections.len() == items.len()).then_some(sections)
    }

    /// Reports keys that were never taken.
    fn finish(self, errors: &mut Errors) {
        for key in self.table.keys() {
            if !self.taken.contains(key.as_str()) {
                errors.push(join(&self.path, key), "unknown key");
            }
        }
    }
}

fn number(value: &Value, path: &str, errors: &mut Errors) -> Option<f64> {
    match value {
        Value::Float(v) => Some(*v),
        Value::Integer(v) => Some(*v as f64),
        _ => {
            errors.push(path, "expected a number");
            None
        }
    }
}

fn vector(value: &Value, path: &str, errors: &mut Errors) -> Option<Vec<f64>> {
    let Some(items) = value.as_array() else {
        errors.push(path, "expected a list of numbers");
        return None;
    };
    let parsed: Vec<Option<f64>> =
        items.iter().enumerate().map(|(i, v)| number(v, &format!("{path}[{i}]"), errors)).collect();
    parsed.into_iter().collect()
}

fn check(ok: bool, path: String, message: &str, errors: &mut Errors) -> bool {
    if !ok {
        errors.push(path, message);
    }
    ok
}

fn positive(section: &mut Section, key: &str, errors: &mut Errors) -> Option<f64> {
    let v = section.f64_req(key, errors)?;
    check(v.is_finite() && v > 0.0, section.at(key), "must be finite and positive", errors).then_some(v)
}

fn finite(section: &mut Section, key: &str, errors: &mut Errors) -> Option<f64> {
    let v = section.f64_req(key, errors)?;
    check(v.is_finite(), section.at(key), "must be finite", errors).then_some(v)
}

fn drift(section: &mut Section, errors: &mut Errors) -> Option<f64> {
    let tau = section.f64_opt("tau", errors).unwrap_or(0.0);
    check(tau.is_finite() && tau >= 0.0, section.at("tau"), "must be finite and nonnegative", errors).then_some(tau)
}

fn parse_law(mut s: Section, errors: &mut Errors) -> Option<MixingLaw> {
    let kind = s.string("kind", true, errors);
    let law = match kind {
        Some("finite_gamma_convolution") => {
            let tau = drift(&mut s, errors);
            let parts = s.array_of_tables("components", errors).map(|parts| {
                parts
                    .into_iter()
                    .map(|mut p| {
                        let alpha = positive(&mut p, "alpha", errors);
                        let beta = positive(&mut p, "beta", errors);
                        p.finish(errors);
                        Some(GammaComponent { alpha: alpha?, beta: beta? })
                    })
                    .collect::<Vec<_>>()
            });
            let components: Option<Vec<_>> = parts?.into_iter().collect();
            FiniteGammaConvolution::new(tau?, components?).ok().map(MixingLaw::from)
        }
        Some("gig") => {
            let lambda = finite(&mut s, "lambda", errors);
            let a = positive(&mut s, "a", errors);
            let b = positive(&mut s, "b", errors);
            Gig::new(lambda?, a?, b?).ok().map(MixingLaw::from)
        }
        Some("atomic_ggc") => {
            let tau = drift(&mut s, errors);
            let atoms = s.array_of_tables("atoms", errors).map(|atoms| {
                atoms
                    .into_iter()
                    .map(|mut p| {
                        let location = positive(&mut p, "location", errors);
                        let weight = positive(&mut p, "weight", errors);
                        p.finish(errors);
                        Some(ThorinAtom { location: location?, weight: weight? })
                    })
                    .collect::<Vec<_>>()
            });
            let atoms: Option<Vec<_>> = atoms?.into_iter().collect();
            ThorinPair::new(tau?, atoms?).ok().map(MixingLaw::from)
        }
        Some(other) => {
            errors.push(s.at("kind"), format!("unknown law kind `{other}` (expected finite_gamma_convolution, gig or atomic_ggc)"));
            // Only `kind` can be judged without knowing the law.
            return None;
        }
        None => return None,
    };
    s.finish(errors);
    law
}

fn parse_law_path(mut s: Section, errors: &mut Errors) -> Option<LawPath> {
    let kind = s.string("kind", true, errors);
    let path = match kind {
        Some("scale_drift") => s.vector("coefficients", true, errors).map(|c| LawPath::ScaleDrift { coefficients: c }),
        Some("shape_drift") => s.vector("coefficients", true, errors).map(|c| LawPath::ShapeDrift { coefficients: c }),
        Some("drift_shift") => s.f64_req("coefficient", errors).map(|c| LawPath::DriftShift { coefficient: c }),
        Some("gig_path") => {
            let lambda = s.f64_req("lambda", errors);
            let a = s.f64_req("a", errors);
            let b = s.f64_req("b", errors);
            Some(LawPath::GigPath { lambda: lambda?, a: a?, b: b? })
        }
        Some("mixed") => {
            let paths: Option<Vec<LawPath>> = s
                .array_of_tables("paths", errors)
                .map(|paths| paths.into_iter().map(|p| parse_law_path(p, errors)).collect::<Vec<_>>())
                .and_then(|paths| paths.into_iter().collect());
            paths.map(|paths| LawPath::Mixed { paths })
        }
        Some(other) => {
            errors.push(
                s.at("kind"),
                format!("unknown law path `{other}` (expected scale_drift, shape_drift, drift_shift, gig_path or mixed)"),
            );
            return None;
        }
        None => return None,
    };
    s.finish(errors);
    path
}

fn parse_market(mut s: Section, errors: &mut Errors) -> Option<MarketSpec> {
    let r_f = finite(&mut s, "r_f", errors);
    let a = positive(&mut s, "a", errors);
    let w0 = positive(&mut s, "w0", errors);
    s.finish(errors);
    MarketSpec::new(r_f?, a?, w0?).ok()
}

fn parse_model(mut s: Section, errors: &mut Errors) -> Option<ModelSection> {
    let mu = s.vector("mu", true, errors);
    let gamma = s.vector("gamma", true, errors);
    let a = s.matrix("a", errors);
    s.finish(errors);
    Some(ModelSection { mu: mu?, gamma: gamma?, a: a? })
}

fn parse_schedule(mut s: Section, errors: &mut Errors) -> Option<ScheduleSection> {
    let kind = s.string("kind", false, errors).unwrap_or("perturbation");
    let steps = s.count("steps", true, errors);
    let section = match kind {
        "perturbation" => {
            let decay = s.f64_req("decay", errors);
            if let Some(d) = decay {
                check(d > 0.0 && d < 1.0, s.at("decay"), "must lie in (0, 1)", errors);
            }
            let dmu = s.vector("dmu", true, errors);
            let dgamma = s.vector("dgamma", true, errors);
            let d_a = s.matrix("d_a", errors);
            let path = s.table("law_path", true, errors).and_then(|p| parse_law_path(p, errors));
            Some(ScheduleSection::Perturbation(PerturbationSchedule {
                steps: steps?,
                decay: decay?,
                directions: Directions { dmu: dmu?, dgamma: dgamma?, d_a: d_a?, law_path: path? },
                seed: 0,
            }))
        }
        "scale_blowup" => Some(ScheduleSection::ScaleBlowup { steps: steps? }),
        other => {
            errors.push(s.at("kind"), format!("unknown schedule kind `{other}` (expected perturbation or scale_blowup)"));
            return None;
        }
    };
    s.finish(errors);
    section
}

fn parse_tolerances(mut s: Section, errors: &mut Errors) -> ToleranceSpec {
    let mut tol = ToleranceSpec::default();
    for (key, slot) in [
        ("tol_mean", &mut tol.tol_mean),
        ("tol_in", &mut tol.tol_in),
        ("tol_lap", &mut tol.tol_lap),
        ("tol_dist", &mut tol.tol_dist),
        ("tol_port", &mut tol.tol_port),
        ("tol_qmin", &mut tol.tol_qmin),
    ] {
        if let Some(v) = s.f64_opt(key, errors) {
            if check(v.is_finite() && v >= 0.0, s.at(key), "must be finite and nonnegative", errors) {
                *slot = v;
            }
        }
    }
    s.finish(errors);
    tol
}

/// Grid settings are optional keys of the section that uses them.
fn parse_grid(s: &mut Section, errors: &mut Errors) -> DensityGridSpec {
    let mut grid = DensityGridSpec::default();
    if let Some(cells) = s.count("cells", false, errors) {
        if check(cells >= 4, s.at("cells"), "must be at least 4", errors) {
            grid.cells = cells;
        }
    }
    for (key, slot) in
        [("tail_density", &mut grid.tail_density), ("tail_mass", &mut grid.tail_mass), ("max_error", &mut grid.max_error)]
    {
        if let Some(v) = s.f64_opt(key, errors) {
            if check(v.is_finite() && v > 0.0, s.at(key), "must be finite and positive", errors) {
                *slot = v;
            }
        }
    }
    grid
}

fn parse_output(mut s: Section, errors: &mut Errors) -> OutputSpec {
    let path = s.string("path", false, errors).map(PathBuf::from);
    let format = match s.string("format", false, errors) {
        None | Some("csv") => Format::Csv,
        Some("text") => Format::Text,
        Some(other) => {
            errors.push(s.at("format"), format!("unknown format `{other}` (expected csv or text)"));
            Format::Csv
        }
    };
    s.finish(errors);
    OutputSpec { path, format }
}

fn build(table: &Table, errors: &mut Errors) -> Option<RunConfig> {
    let mut root = Section::new("", table);
    let command = match root.string("command", true, errors) {
        Some(name) => {
            let command = Command::parse(name);
            if command.is_none() {
                let known: Vec<&str> = Command::ALL.iter().map(|c| c.name()).collect();
                errors.push("command", format!("unknown command `{name}` (expected one of {})", known.join(", ")));
            }
            command
        }
        None => None,
    };
    let seed = match root.raw("seed") {
        None => 0,
        Some(v) => match v.as_integer() {
            Some(n) if n >= 0 => n as u64,
            _ => {
                errors.push("seed", "expected a nonnegative integer");
                0
            }
        },
    };
    let output = root
        .table("output", false, errors)
        .map(|s| parse_output(s, errors))
        .unwrap_or(OutputSpec { path: None, format: Format::Csv });
    let market = root.table("market", false, errors).and_then(|s| parse_market(s, errors));
    let model_present = root.table.contains_key("model");
    let model = root.table("model", false, errors).and_then(|s| parse_model(s, errors));
    let law_present = root.table.contains_key("law");
    let law = root.table("law", false, errors).and_then(|s| parse_law(s, errors));
    let schedule = root.table("schedule", false, errors).and_then(|s| parse_schedule(s, errors));
    let tolerances = root.table("tolerances", false, errors).map(|s| parse_tolerances(s, errors)).unwrap_or_default();
    let laplace = root.table("laplace", false, errors).and_then(|mut s| {
        let points = s.vector("s", true, errors);
        s.finish(errors);
        points
    });
    let density = root.table("density", false, errors).and_then(|mut s| {
        let points = s.vector("x", true, errors);
        s.finish(errors);
        points
    });
    let distance = root.table("distance", false, errors).and_then(|mut s| {
        let other = s.table("other", true, errors).and_then(|o| parse_law(o, errors));
        let grid = parse_grid(&mut s, errors);
        s.finish(errors);
        Some(DistanceSection { other: other?, grid })
    });
    let sweep = root.table("sweep", false, errors).map(|mut s| {
        let probes = s.vector("probes", false, errors);
        let grid = parse_grid(&mut s, errors);
        s.finish(errors);
        SweepSection { probes, grid }
    });
    let sample = root.table("sample", false, errors).and_then(|mut s| {
        let n = s.count("n", true, errors);
        let target = match s.string("target", false, errors) {
            None | Some("mixing") => Some(SampleTarget::Mixing),
            Some("returns") => Some(SampleTarget::Returns),
            Some(other) => {
                errors.push(s.at("target"), format!("unknown sample target `{other}` (expected mixing or returns)"));
                None
            }
        };
        s.finish(errors);
        Some(SampleSection { n: n?, target: target? })
    });
    root.finish(errors);

    let command = command?;
    // Sections each command needs; absent ones are reported, invalid ones already were.
    let needs: &[(&str, bool)] = match command {
        Command::Laplace => &[("law", law_present), ("laplace", root_has(table, "laplace"))],
        Command::Mean => &[("law", law_present)],
        Command::Density => &[("law", law_present), ("density", root_has(table, "density"))],
        Command::Distance => &[("law", law_present), ("distance", root_has(table, "distance"))],
        Command::Optimize => &[("market", root_has(table, "market")), ("model", model_present), ("law", law_present)],
        Command::Sweep => &[
            ("market", root_has(table, "market")),
            ("model", model_present),
            ("law", law_present),
            ("schedule", root_has(table, "schedule")),
        ],
        Command::Sample => &[("law", law_present), ("sample", root_has(table, "sample"))],
    };
    for (section, present) in needs {
        if !present {
            errors.push(*section, format!("section required by the `{}` command is missing", command.name()));
        }
    }
    if command == Command::Sample && sample.as_ref().is_some_and(|s| s.target == SampleTarget::Returns) && !model_present {
        errors.push("model", "section required by `sample` with target = \"returns\" is missing");
    }

    let config = RunConfig {
        command,
        seed,
        output,
        market,
        model,
        law,
        schedule,
        tolerances,
        laplace,
        density,
        distance,
        sweep,
        sample,
    };
    // Cross-section checks, once the sections themselves are valid.
    if errors.0.is_empty() {
        if let (Some(m), Some(law)) = (&config.model, &config.law) {
            if let Err(e) = NmvmModel::new(m.mu.clone(), m.gamma.clone(), m.a.clone(), law.clone()) {
                errors.push("model", e.to_string());
            }
        }
    }
    Some(config)
}

fn root_has(table: &Table, key: &str) -> bool {
    table.contains_key(key)
}

// ---------------------------------------------------------------------------
// Canonical form

#[derive(Serialize)]
struct CanonicalDocument<'a> {
    command: &'a str,
    seed: u64,
    output: CanonicalOutput,
    #[serde(skip_serializing_if = "Option::is_none")]
    market: Option<CanonicalMarket>,
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<&'a ModelSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    law: Option<CanonicalLaw>,
    #[serde(skip_serializing_if = "Option::is_none")]
    schedule: Option<CanonicalSchedule<'a>>,
    tolerances: &'a ToleranceSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    laplace: Option<CanonicalPoints<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    density: Option<CanonicalDensity<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    distance: Option<CanonicalDistance>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<CanonicalSweep<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sample: Option<CanonicalSample>,
}

#[derive(Serialize)]
struct CanonicalOutput {
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<String>,
    format: Format,
}

#[derive(Serialize)]
struct CanonicalMarket {
    r_f: f64,
    a: f64,
    w0: f64,
}

#[derive(Serialize)]
struct CanonicalComponent {
    alpha: f64,
    beta: f64,
}

#[derive(Serialize)]
struct CanonicalAtom {
    location: f64,
    weight: f64,
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum CanonicalLaw {
    FiniteGammaConvolution { tau: f64, components: Vec<CanonicalComponent> },
    Gig { lambda: f64, a: f64, b: f64 },
    AtomicGgc { tau: f64, atoms: Vec<CanonicalAtom> },
}

impl From<&MixingLaw> for CanonicalLaw {
    fn from(law: &MixingLaw) -> Self {
        match law {
            MixingLaw::FiniteGammaConvolution(c) => CanonicalLaw::FiniteGammaConvolution {
                tau: c.tau(),
                components: c.components().iter().map(|p| CanonicalComponent { alpha: p.alpha, beta: p.beta }).collect(),
            },
            MixingLaw::Gig(g) => CanonicalLaw::Gig { lambda: g.lambda(), a: g.a(), b: g.b() },
            MixingLaw::AtomicGgc { generator } => CanonicalLaw::AtomicGgc {
                tau: generator.tau(),
                atoms: generator.atoms().iter().map(|a| CanonicalAtom { location: a.location, weight: a.weight }).collect(),
            },
        }
    }
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum CanonicalSchedule<'a> {
    Perturbation {
        steps: usize,
        decay: f64,
        dmu: &'a [f64],
        dgamma: &'a [f64],
        d_a: &'a [Vec<f64>],
        law_path: &'a LawPath,
    },
    ScaleBlowup {
        steps: usize,
    },
}

#[derive(Serialize)]
struct CanonicalPoints<'a> {
    s: &'a [f64],
}

#[derive(Serialize)]
struct CanonicalDensity<'a> {
    x: &'a [f64],
}

#[derive(Serialize)]
struct CanonicalDistance {
    cells: usize,
    tail_density: f64,
    tail_mass: f64,
    max_error: f64,
    other: CanonicalLaw,
}

#[derive(Serialize)]
struct CanonicalSweep<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    probes: Option<&'a [f64]>,
    cells: usize,
    tail_density: f64,
    tail_mass: f64,
    max_error: f64,
}

#[derive(Serialize)]
struct CanonicalSample {
    n: usize,
    target: SampleTarget,
}

/// The canonical TOML text of `config`: every default filled in, laws in
/// canonical component order, fixed section order.
pub fn serialize_config(config: &RunConfig) -> String {
    let document = CanonicalDocument {
        command: config.command.name(),
        seed: config.seed,
        output: CanonicalOutput {
            path: config.output.path.as_ref().map(|p| p.to_string_lossy().into_owned()),
            format: config.output.format,
        },
        market: config.market.map(|m| CanonicalMarket { r_f: m.r_f(), a: m.a(), w0: m.w0() }),
        model: config.model.as_ref(),
        law: config.law.as_ref().map(CanonicalLaw::from),
        schedule: config.schedule.as_ref().map(|s| match s {
            ScheduleSection::Perturbation(p) => CanonicalSchedule::Perturbation {
                steps: p.steps,
                decay: p.decay,
                dmu: &p.directions.dmu,
                dgamma: &p.directions.dgamma,
                d_a: &p.directions.d_a,
                law_path: &p.directions.law_path,
            },
            ScheduleSection::ScaleBlowup { steps } => CanonicalSchedule::ScaleBlowup { steps: *steps },
        }),
        tolerances: &config.tolerances,
        laplace: config.laplace.as_deref().map(|s| CanonicalPoints { s }),
        density: config.density.as_deref().map(|x| CanonicalDensity { x }),
        distance: config.distance.as_ref().map(|d| CanonicalDistance {
            cells: d.grid.cells,
            tail_density: d.grid.tail_density,
            tail_mass: d.grid.tail_mass,
            max_error: d.grid.max_error,
            other: CanonicalLaw::from(&d.other),
        }),
        sweep: config.sweep.as_ref().map(|s| CanonicalSweep {
            probes: s.probes.as_deref(),
            cells: s.grid.cells,
            tail_density: s.grid.tail_density,
            tail_mass: s.grid.tail_mass,
            max_error: s.grid.max_error,
        }),
        sample: config.sample.as_ref().map(|s| CanonicalSample { n: s.n, target: s.target }),
    };
    toml::to_string(&document).expect("configuration values are always representable in TOML")
}
