//! Command-line front end: `hawkmass simulate | verify | sweep`.
//!
//! The binary is a thin shell over [`hawkmass::sim`]: it loads the config
//! file (defaults when none is given), applies the few flag overrides, runs
//! the command, prints a deterministic account to stdout, and exits with the
//! command's code. All numerical work and artifact layout live in the
//! library so tests can drive them directly.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use hawkmass::config::{parse_config, parse_sweep_spec, RunConfig};
use hawkmass::sim::{cmd_simulate, cmd_sweep, cmd_verify};
use hawkmass::Result;

#[derive(Parser)]
#[command(
    name = "hawkmass",
    version,
    about = "Hawking-mass monotonicity experiments along coupled Ricci / mean curvature flow"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the coupled flow, tracking spheres and writing traces + summary.
    Simulate(SimulateArgs),
    /// Run the oracle suite (scalar-flatness, identities, fixed point,
    /// gauge residual, convergence order) against the configured grid.
    Verify(VerifyArgs),
    /// Re-run the experiment across one or two parameter ranges.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Config file (key = value lines); defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the output directory from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also emit SVG plots (mass vs time, rate vs radius).
    #[arg(long)]
    svg: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Config file (key = value lines); defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Debug aid: flip the radial sectional curvature sign inside the
    /// dm/dr identity check to demonstrate that the check pins it.
    #[arg(long)]
    flip_radial_curvature_sign: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Config file (key = value lines); defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the output directory from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Range spec "key=start:stop:n" (repeat once for a 2-D sweep).
    #[arg(long = "sweep", required = true)]
    sweeps: Vec<String>,
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|source| hawkmass::Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

fn apply_out(config: &mut RunConfig, out: Option<PathBuf>) {
    if let Some(dir) = out {
        config.output_dir = dir.display().to_string();
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Simulate(args) => {
            let mut config = load_config(args.config.as_deref())?;
            apply_out(&mut config, args.out);
            if args.svg {
                config.emit_svg = true;
            }
            let outcome = cmd_simulate(&config)?;
            for trace in &outcome.traces {
                println!(
                    "sphere {} r(0) = {}: status {}, samples {}",
                    trace.sphere_index,
                    trace.initial_radius,
                    trace.status.as_str(),
                    trace.samples.len()
                );
            }
            match outcome.report.as_ref().and_then(|r| r.r0) {
                Some(r0) => println!("r0 = {r0}"),
                None => println!("r0 = none"),
            }
            println!("artifacts in {}", config.output_dir);
            Ok(outcome.exit_code)
        }
        Command::Verify(args) => {
            let config = load_config(args.config.as_deref())?;
            let outcome = cmd_verify(&config, args.flip_radial_curvature_sign)?;
            for check in &outcome.checks {
                println!(
                    "CHECK {}: {} ({})",
                    check.name,
                    check.status.as_str(),
                    check.detail
                );
            }
            println!(
                "verify: {}",
                if outcome.exit_code == 0 { "ok" } else { "failed" }
            );
            Ok(outcome.exit_code)
        }
        Command::Sweep(args) => {
            let mut config = load_config(args.config.as_deref())?;
            apply_out(&mut config, args.out);
            let specs = args
                .sweeps
                .iter()
                .map(|s| parse_sweep_spec(s))
                .collect::<Result<Vec<_>>>()?;
            let outcome = cmd_sweep(&config, &specs)?;
            for row in &outcome.rows {
                let params: Vec<String> = row
                    .params
                    .iter()
                    .map(|(k, v)| format!("{k} = {v}"))
                    .collect();
                println!(
                    "{}: r0 = {}, status {}",
                    params.join(", "),
                    row.r0.map(|v| v.to_string()).unwrap_or_else(|| "none".into()),
                    row.status
                );
            }
            println!("wrote {}/sweep.csv ({} rows)", config.output_dir, outcome.rows.len());
            Ok(outcome.exit_code)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.exit_code());
        }
    }
}
