//! Batch CLI: resonance tracing, bound-state tables, efficiency sweeps,
//! validity maps, and optimal-distance reports.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use bic_shg::cli::{
    cmd_bound_states, cmd_efficiency, cmd_optimal, cmd_trace, cmd_validity, exit_code,
};
use bic_shg::config::RunConfig;
use bic_shg::error::Error;

#[derive(Parser)]
#[command(
    name = "bic-shg",
    about = "Bound states in the continuum and second-harmonic conversion for a double cylinder array",
    version
)]
struct Args {
    #[command(subcommand)]
    command: Command,

    /// Flat key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override a config key (repeatable): --set key=value.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format for tabular commands.
    #[arg(long, global = true, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,
}

#[derive(Subcommand)]
enum Command {
    /// Resonance curves k_r(h) and widths per parity branch.
    Trace,
    /// Bound states h_b(n), k_b(n) on the symmetric branch.
    BoundStates,
    /// Conversion-efficiency sweep over radius or kx.
    Efficiency,
    /// Validity region tau_+ + tau_- >= 0 over a (nu, h) grid.
    Validity,
    /// Optimal inter-array distance report (JSON).
    Optimal,
}

fn load_config(args: &Args) -> Result<RunConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
                location: path.display().to_string(),
                message: e.to_string(),
            })?;
            RunConfig::parse(&text, &path.display().to_string())?
        }
        None => RunConfig::default(),
    };
    for assignment in &args.set {
        cfg.set(assignment)?;
    }
    Ok(cfg)
}

fn run(args: &Args) -> Result<String, Error> {
    let cfg = load_config(args)?;
    let rendered = match args.command {
        Command::Trace => render(cmd_trace(&cfg)?, &args.format),
        Command::BoundStates => render(cmd_bound_states(&cfg)?, &args.format),
        Command::Efficiency => render(cmd_efficiency(&cfg)?, &args.format),
        Command::Validity => render(cmd_validity(&cfg)?, &args.format),
        Command::Optimal => cmd_optimal(&cfg)?,
    };
    Ok(rendered)
}

fn render(table: bic_shg::output::Table, format: &str) -> String {
    match format {
        "json" => table.to_json(),
        _ => table.to_csv(),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(text) => {
            match &args.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &text) {
                        eprintln!("bic-shg: cannot write {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
                None => print!("{text}"),
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("bic-shg: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
