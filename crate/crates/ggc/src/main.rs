use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ggc::config::{ConfigError, ConfigErrors, Format};
use ggc::{parse_config, run, RunError};

/// Generalized gamma convolution mixing laws and exponential-utility portfolios.
#[derive(Debug, Parser)]
#[command(name = "ggc", version)]
struct Args {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the configured output format.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = std::fs::read_to_string(&args.config)
        .map_err(|e| {
            RunError::Config(ConfigErrors(vec![ConfigError {
                path: String::new(),
                message: format!("cannot read {}: {e}", args.config.display()),
                position: None,
            }]))
        })
        .and_then(|text| parse_config(&text).map_err(RunError::from))
        .and_then(|mut config| {
            if let Some(seed) = args.seed {
                config.seed = seed;
            }
            if let Some(out) = args.out {
                config.output.path = Some(out);
            }
            if let Some(format) = args.format {
                config.output.format = format;
            }
            run(&config)
        });
    match result {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            let errors = match &e {
                RunError::Config(list) => list.0.len(),
                _ => 1,
            };
            println!("status={} errors={errors}", e.kind());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
