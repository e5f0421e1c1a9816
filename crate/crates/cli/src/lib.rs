//! `macroreal` experiment runner: configs, presets, file formats and the
//! five commands.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod presets;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;

use config::{CommandConfig, CommandKind};
use error::{CliError, EXIT_NUMERICAL, EXIT_OK};
use output::{summarize, RunInfo};

#[derive(Debug, Parser)]
#[command(name = "macroreal", version, about = "Coarse-grained macrorealism experiments on spin-j systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<CommandKind>,
    /// JSON config for the command
    #[arg(long, global = true, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Named preset: fig1, cat-lgi, two-level-lgi, rotation-classical, circuit-scaling
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Quadrature oversampling for commands that use a sphere grid
    #[arg(long, global = true)]
    pub oversample: Option<u32>,
    /// Worker threads for parameter scans
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Reserved; recorded in the manifest, unused by the deterministic paths
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub manifest: PathBuf,
    pub exit_code: u8,
    pub contract_failures: usize,
}

/// Resolves the command and its config from the flags.
pub fn resolve(cli: &Cli) -> Result<CommandConfig, CliError> {
    let mut config = match (&cli.config, &cli.preset) {
        (Some(path), _) => {
            let kind = cli.command.ok_or_else(|| CliError::Config("--config needs a command".into()))?;
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            kind.parse(&text)?
        }
        (None, Some(name)) => {
            let c = presets::preset(name)?;
            if let Some(kind) = cli.command.filter(|k| *k != c.kind()) {
                return Err(CliError::Config(format!("preset {name} belongs to {}, not {}", c.kind().name(), kind.name())));
            }
            c
        }
        (None, None) => {
            let kind = cli.command.ok_or_else(|| CliError::Config("give a command or --preset".into()))?;
            presets::default_for(kind)
        }
    };
    if let Some(k) = cli.oversample {
        config.set_oversample(k)?;
    }
    Ok(config)
}

pub fn run(cli: &Cli) -> Result<RunOutcome, CliError> {
    let config = resolve(cli)?;
    if cli.threads == Some(0) {
        return Err(CliError::Config("--threads must be >= 1".into()));
    }
    run_config(&config, cli.preset.as_deref(), &cli.out, cli.threads, cli.seed)
}

pub fn run_config(
    config: &CommandConfig,
    preset: Option<&str>,
    out: &Path,
    threads: Option<usize>,
    seed: Option<u64>,
) -> Result<RunOutcome, CliError> {
    let start = Instant::now();
    let artifacts = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?
            .install(|| commands::execute(config))?,
        None => commands::execute(config)?,
    };
    let info = RunInfo {
        kind: config.kind(),
        preset,
        config,
        seed,
        threads,
        duration_seconds: start.elapsed().as_secs_f64(),
    };
    let manifest = output::write_run(out, &info, &artifacts)?;
    let contract_failures = summarize(&artifacts.checks).contract_failures;
    Ok(RunOutcome { manifest, exit_code: exit_code_for(&artifacts.checks), contract_failures })
}

/// 2 when a contract check failed; expectation failures do not change the code.
pub fn exit_code_for(checks: &[output::Check]) -> u8 {
    if summarize(checks).contract_failures > 0 {
        EXIT_NUMERICAL
    } else {
        EXIT_OK
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use output::Check;

    #[test]
    fn exit_codes() {
        let ok = Check::contract("a", true, String::new());
        let missed = Check::expectation("b", false, String::new());
        let broken = Check::contract("c", false, String::new());
        assert_eq!(exit_code_for(&[ok.clone(), missed.clone()]), EXIT_OK);
        assert_eq!(exit_code_for(&[ok, missed, broken]), EXIT_NUMERICAL);
        assert_eq!(exit_code_for(&[]), EXIT_OK);
    }

    #[test]
    fn flag_resolution() {
        let parse = |args: &[&str]| Cli::try_parse_from(std::iter::once("macroreal").chain(args.iter().copied()));
        let c = resolve(&parse(&["--preset", "fig1"]).unwrap()).unwrap();
        assert_eq!(c.kind(), CommandKind::QpfRender);
        let c = resolve(&parse(&["qpf-render", "--oversample", "3"]).unwrap()).unwrap();
        assert!(matches!(c, CommandConfig::QpfRender(ref q) if q.oversample == 3));
        assert!(resolve(&parse(&["lgi-scan", "--preset", "fig1"]).unwrap()).is_err());
        assert!(resolve(&parse(&["lgi-scan", "--oversample", "3"]).unwrap()).is_err());
        assert!(resolve(&parse(&[]).unwrap()).is_err());
        assert!(resolve(&parse(&["--config", "x.json"]).unwrap()).is_err());
        assert!(parse(&["classify", "--config", "a.json", "--preset", "fig1"]).is_err());
    }
}
