//! `kolmo`: experiments on homogeneous groups of Kolmogorov type.
//!
//! Exit status: 0 when every check passes, 1 when a check fails (the
//! failing rows go to stderr), 2 for configuration errors.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kolmo::harness::{
    cmd_compare_bonfiglioli, cmd_connect_demo, cmd_converge, cmd_group_info, cmd_holder_scan,
    cmd_taylor_eval, render, ConfigError, ExperimentConfig, HarnessError, OutputFormat, Report,
    EXIT_CONFIG, EXIT_FAIL, EXIT_PASS,
};

/// Directory searched for relative `--config` paths and for
/// `<subcommand>.toml` when `--config` is omitted.
const CONFIG_DIR_ENV: &str = "KOLMO_CONFIG_DIR";

#[derive(Parser, Debug)]
#[command(name = "kolmo", version, about = "Intrinsic Taylor expansions on Kolmogorov-type groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override the config's random seed.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Write the report here instead of stdout (overrides `[output] path`).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Report format (overrides `[output] format`).
    #[arg(long, global = true, value_name = "csv|json")]
    format: Option<OutputFormat>,

    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    jobs: usize,

    /// Default directory for configs.
    #[arg(long, global = true, env = CONFIG_DIR_ENV, value_name = "DIR", hide_env_values = true)]
    config_dir: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Dimensions, layers, exponents, powers of B and pivot sets.
    GroupInfo,
    /// Remainder decay of Taylor polynomials and fitted orders.
    Converge,
    /// Compare T_n with the symmetrized polynomial P_n on the prototype group.
    CompareBonfiglioli,
    /// Waypoints of the switching paths joining ζ to ζ + (0, y).
    ConnectDemo,
    /// Sampled intrinsic Hölder quotients per δ.
    HolderScan,
    /// Taylor polynomials of every order up to `[taylor] order` at one point.
    TaylorEval,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::GroupInfo => "group-info",
            Command::Converge => "converge",
            Command::CompareBonfiglioli => "compare-bonfiglioli",
            Command::ConnectDemo => "connect-demo",
            Command::HolderScan => "holder-scan",
            Command::TaylorEval => "taylor-eval",
        }
    }
}

fn resolve_config(cli: &Cli) -> Option<PathBuf> {
    match (&cli.config, &cli.config_dir) {
        (Some(path), Some(dir)) if path.is_relative() && !path.exists() => Some(dir.join(path)),
        (Some(path), _) => Some(path.clone()),
        (None, Some(dir)) => {
            let candidate = dir.join(format!("{}.toml", cli.command.name()));
            candidate.exists().then_some(candidate)
        }
        (None, None) => None,
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    let mut config = match resolve_config(cli) {
        Some(path) => ExperimentConfig::load(&path)?,
        None => ExperimentConfig::prototype_defaults(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(format) = cli.format {
        config.format = format;
    }
    if let Some(out) = &cli.out {
        config.output_path = Some(out.display().to_string());
    }
    Ok(config)
}

fn run(command: Command, config: &ExperimentConfig, jobs: usize) -> Result<Box<dyn Report>, HarnessError> {
    Ok(match command {
        Command::GroupInfo => Box::new(cmd_group_info(config)?),
        Command::Converge => Box::new(cmd_converge(config, jobs)?),
        Command::CompareBonfiglioli => Box::new(cmd_compare_bonfiglioli(config, jobs)?),
        Command::ConnectDemo => Box::new(cmd_connect_demo(config)?),
        Command::HolderScan => Box::new(cmd_holder_scan(config, jobs)?),
        Command::TaylorEval => Box::new(cmd_taylor_eval(config)?),
    })
}

fn write_output(path: Option<&str>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => {
            if let Some(parent) = Path::new(p).parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(p, text)
        }
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("kolmo: config error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };

    let report = match run(cli.command, &config, cli.jobs) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("kolmo {}: {e}", cli.command.name());
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };

    if let Err(e) = write_output(config.output_path.as_deref(), &render(report.as_ref(), config.format)) {
        eprintln!("kolmo: cannot write report: {e}");
        return ExitCode::from(EXIT_CONFIG as u8);
    }
    eprintln!("{}", report.summary());

    if report.passed() {
        ExitCode::from(EXIT_PASS as u8)
    } else {
        for line in report.failures() {
            eprintln!("FAIL {line}");
        }
        ExitCode::from(EXIT_FAIL as u8)
    }
}
