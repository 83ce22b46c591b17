//! Batch front door: run any toolkit operation from a JSON config and emit
//! JSON/CSV artifacts.
//!
//! Every command reads one JSON document (defaults apply for missing keys),
//! lets flags override top-level scalars, validates, computes, and only then
//! writes artifacts — a rejected config never leaves partial output on disk.
//! Stochastic commands are deterministic functions of (seed, paths, dt);
//! artifacts embed the fully-resolved config echo and the crate version.
//!
//! Exit codes: 0 ok, 2 config error, 3 numeric failure, 4 statistical
//! invalidation (swallowed-path fraction, underpowered ensemble).

mod commands;

use clap::{Args, Parser, Subcommand};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "loewner", version, about = "Loewner evolutions, Grunsky operators and SLE martingale diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON config file; omitted keys take documented defaults.
    #[arg(long)]
    config: Option<String>,
    /// Output directory for artifacts.
    #[arg(long, default_value = "out")]
    out: String,
    /// Worker threads (1 = serial; results are thread-count invariant).
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Override a top-level config scalar, e.g. --set paths=1000.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Shorthand for --set kappa=...
    #[arg(long)]
    kappa: Option<String>,
    /// Shorthand for --set n=...
    #[arg(long)]
    n: Option<usize>,
    /// Shorthand for --set t_end=...
    #[arg(long)]
    t_end: Option<f64>,
    /// Shorthand for --set dt=...
    #[arg(long)]
    dt: Option<f64>,
    /// Shorthand for --set paths=...
    #[arg(long)]
    paths: Option<usize>,
    /// Shorthand for --set seed=...
    #[arg(long)]
    seed: Option<u64>,
    /// Shorthand for --set weight=...
    #[arg(long)]
    weight: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Truncated series arithmetic (mul, div, log, exp, derivative,
    /// compose, reversion, invert_at_infinity, reciprocal, schwarzian,
    /// debranges).
    Series(Common),
    /// Grunsky matrices of a map or a complementary pair.
    Grunsky(Common),
    /// Faber polynomials of a pair.
    Faber(Common),
    /// Period-map embedding and Siegel-disc check.
    Embed(Common),
    /// Circle analysis: hilbert, j, bracket, omega, kahler, polyakov.
    Circle(Common),
    /// Witt/Virasoro operator actions and commutators on a weight window.
    Virasoro(Common),
    /// Exact kernel basis of the lifted generator.
    Kernel(Common),
    /// Radial Loewner flow driven by a Herglotz measure.
    Radial(Common),
    /// Chordal SLE trace polyline.
    SleTrace(Common),
    /// Coefficient-hierarchy sample path.
    SleCoeff(Common),
    /// Kernel martingale suite (drift tests + perturbed detection).
    Martingale(Common),
    /// Radon-Nikodym boundary-factor report.
    Report(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common): (&str, &Common) = match &cli.command {
        Command::Series(c) => ("series", c),
        Command::Grunsky(c) => ("grunsky", c),
        Command::Faber(c) => ("faber", c),
        Command::Embed(c) => ("embed", c),
        Command::Circle(c) => ("circle", c),
        Command::Virasoro(c) => ("virasoro", c),
        Command::Kernel(c) => ("kernel", c),
        Command::Radial(c) => ("radial", c),
        Command::SleTrace(c) => ("sle-trace", c),
        Command::SleCoeff(c) => ("sle-coeff", c),
        Command::Martingale(c) => ("martingale", c),
        Command::Report(c) => ("report", c),
    };
    match commands::run(name, common) {
        Ok(artifacts) => {
            if let Err(e) = commands::write_artifacts(&common.out, &artifacts) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            for (file, _) in &artifacts {
                println!("wrote {}/{}", common.out, file);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
