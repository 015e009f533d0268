//! Command-line driver.
//!
//! Exit codes: 0 on success, 1 on configuration errors, 2 when an optimizer
//! failed to converge and `--strict` was given.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use deepdeal_cli::config::{ExperimentConfig, ExperimentKind};
use deepdeal_cli::experiment::run_experiment;
use deepdeal_cli::report::write_outputs;

#[derive(Parser)]
#[command(
    name = "deepdeal",
    about = "Distortion-aware energy-efficiency experiments for massive-MIMO OFDM downlink",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat key=value config file; CLI flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for results.csv and friends.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// RNG seed for random drops and the Monte-Carlo validator.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Amplifier class: classb or perfect.
    #[arg(long, global = true, value_name = "CLASS")]
    pa_class: Option<String>,

    /// Antenna count for the REF-E / fixed-antenna baselines
    /// (mandatory in drops mode).
    #[arg(long, global = true, value_name = "M")]
    baseline_m: Option<u32>,

    /// Exit with code 2 if any optimizer run hits its iteration cap.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Two-user homogeneous path-loss sweep with baselines.
    Sweep2,
    /// Two-user heterogeneous path-loss grid.
    Grid2,
    /// Random user drops in a circular cell (CDFs + median gains).
    Drops,
    /// Monte-Carlo validation of the amplifier statistics.
    Validate,
    /// One scenario from an explicit path-loss list.
    Single {
        /// Comma-separated per-user path losses in dB, e.g. "80,100".
        betas: Option<String>,
    },
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, String> {
    let kind = match &cli.command {
        Command::Sweep2 => ExperimentKind::Sweep2,
        Command::Grid2 => ExperimentKind::Grid2,
        Command::Drops => ExperimentKind::Drops,
        Command::Validate => ExperimentKind::Validate,
        Command::Single { .. } => ExperimentKind::Single,
    };
    let mut cfg = ExperimentConfig::defaults(kind);

    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        cfg.apply_text(&text).map_err(|e| e.to_string())?;
    }
    if let Command::Single { betas: Some(list) } = &cli.command {
        cfg.beta_db = list
            .split(',')
            .map(|v| {
                v.trim()
                    .parse()
                    .map_err(|e| format!("cannot parse path loss `{v}`: {e}"))
            })
            .collect::<Result<_, String>>()?;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(class) = &cli.pa_class {
        cfg.pa_class = class.parse().map_err(|e| format!("{e}"))?;
    }
    if let Some(m) = cli.baseline_m {
        cfg.baseline_m = Some(m);
    }
    if cli.strict {
        cfg.strict = true;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };

    let output = run_experiment(&cfg);
    if let Err(e) = write_outputs(&cfg.out_dir, &output) {
        eprintln!(
            "error: cannot write outputs to {}: {e}",
            cfg.out_dir.display()
        );
        return ExitCode::from(1);
    }
    print!("{}", output.summary);
    println!("outputs written to {}", cfg.out_dir.display());

    if cfg.strict && !output.all_converged {
        eprintln!("error: at least one optimizer run did not converge (strict mode)");
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}
