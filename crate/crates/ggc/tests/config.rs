use ggc::config::{Command, Format, SampleTarget, ScheduleSection};
use ggc::{parse_config, serialize_config};
use ggc_core::mixing::MixingLaw;

const MODEL: &str = r#"
[market]
r_f = 0.01
a = 1.0
w0 = 1.0
[model]
mu = [0.05, 0.08]
gamma = [0.1, -0.05]
a = [[0.2, 0.05], [0.05, 0.3]]
[law]
kind = "gig"
lambda = 1.0
a = 1.0
b = 2.0
"#;

fn examples() -> Vec<(String, String)> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("examples");
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    files.sort();
    files.into_iter().map(|p| (p.display().to_string(), std::fs::read_to_string(&p).unwrap())).collect()
}

#[test]
fn minimal_optimize_config_gets_defaults() {
    let config = parse_config(&format!("command = \"optimize\"\n{MODEL}")).unwrap();
    assert_eq!(config.command, Command::Optimize);
    assert_eq!(config.seed, 0);
    assert_eq!(config.output.format, Format::Csv);
    assert_eq!(config.output_path(), std::path::PathBuf::from("ggc-optimize.csv"));
    assert!(matches!(config.law, Some(MixingLaw::Gig(_))));
    assert_eq!(config.tolerances, Default::default());
    assert!(config.nmvm_model().is_some());
}

#[test]
fn every_bad_field_is_reported_with_its_path() {
    let text = r#"
command = "mean"
[law]
kind = "finite_gamma_convolution"
tau = -1.0
components = [{ alpha = -1.0, beta = 1.0 }, { alpha = 1.0, beta = 0.0 }]
[tolerances]
tol_mean = -0.5
"#;
    let errors = parse_config(text).unwrap_err();
    let paths = errors.paths();
    for expected in ["law.tau", "law.components[0].alpha", "law.components[1].beta", "tolerances.tol_mean"] {
        assert!(paths.contains(&expected), "missing {expected} in {paths:?}");
    }
}

#[test]
fn unknown_keys_are_rejected() {
    let text = format!("command = \"optimize\"\ncolour = 3\n{MODEL}\n[market.extra]\nx = 1\n");
    let errors = parse_config(&text).unwrap_err();
    assert!(errors.paths().contains(&"colour"), "{errors}");
    assert!(errors.paths().iter().any(|p| p.starts_with("market.extra")), "{errors}");
}

#[test]
fn unknown_command_is_rejected() {
    let errors = parse_config(&format!("command = \"frobnicate\"\n{MODEL}")).unwrap_err();
    assert_eq!(errors.paths(), vec!["command"]);
}

#[test]
fn missing_sections_are_reported() {
    let errors = parse_config("command = \"sweep\"\n").unwrap_err();
    let paths = errors.paths();
    for expected in ["market", "model", "law", "schedule"] {
        assert!(paths.contains(&expected), "missing {expected} in {paths:?}");
    }
}

#[test]
fn syntax_errors_carry_line_and_column() {
    let errors = parse_config("command = \"mean\"\n[law]\nkind = \n").unwrap_err();
    assert_eq!(errors.0.len(), 1);
    let (line, col) = errors.0[0].position.expect("position");
    assert_eq!(line, 3);
    assert!(col >= 1);
}

#[test]
fn dimension_mismatch_is_a_model_error() {
    let text = format!("command = \"optimize\"\n{MODEL}").replace("gamma = [0.1, -0.05]", "gamma = [0.1]");
    let errors = parse_config(&text).unwrap_err();
    assert!(errors.paths().iter().any(|p| p.starts_with("model")), "{errors}");
}

#[test]
fn examples_are_canonical() {
    for (name, text) in examples() {
        let config = parse_config(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(serialize_config(&config), text, "{name}");
    }
}

#[test]
fn serialization_round_trips() {
    for (name, text) in examples() {
        let config = parse_config(&text).unwrap();
        assert_eq!(parse_config(&serialize_config(&config)).unwrap(), config, "{name}");
    }
}

#[test]
fn example_sections_parse_into_the_expected_shapes() {
    let all = examples();
    let find = |stem: &str| {
        let (_, text) = all.iter().find(|(n, _)| n.ends_with(&format!("/{stem}.toml"))).unwrap();
        parse_config(text).unwrap()
    };
    assert!(matches!(find("sweep").schedule, Some(ScheduleSection::Perturbation(_))));
    assert!(matches!(find("sweep_blowup").schedule, Some(ScheduleSection::ScaleBlowup { steps: 12 })));
    assert_eq!(find("sample").sample.unwrap().target, SampleTarget::Returns);
    assert_eq!(find("laplace").laplace.unwrap().len(), 6);
}
