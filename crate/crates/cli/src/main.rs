//! `relframe`: runs the algebra suites, integrations and frame switches of
//! the relational three-body library and writes schema-versioned JSON and
//! CSV artifacts. Exit code 0 when every check passes, 1 on any failure,
//! 2 on a usage or config error.

mod classical;
mod config;
mod error;
mod output;
mod quantum;
mod report;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use config::Config;
use error::CliError;
use output::{all_pass, OutDir};

#[derive(Parser)]
#[command(name = "relframe", version, about = "Relational three-body reference frames: checks and frame switches")]
struct Cli {
    /// JSON config with sections tolerances, grids, potential, seeds, suites.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides seeds.base.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for artifacts.
    #[arg(long, global = true, default_value = "relframe-out")]
    out: PathBuf,
    /// Restricts verify-algebra to the named suites (repeatable).
    #[arg(long, global = true)]
    suite: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SwitchKind {
    Classical,
    Quantum,
}

#[derive(Subcommand)]
enum Command {
    /// Structural identity suites; writes verify_algebra.json.
    VerifyAlgebra,
    /// Gauge-orbit dimension of a phase-space point; writes classify.json.
    Classify {
        /// Phase-space point as JSON {"q": [[x,y,z],..], "p": [..]}.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Reduced and gauge-fixed integration; writes trajectory CSVs and evolve.json.
    Evolve,
    /// Frame switch of a classical chart or a quantum state.
    Switch {
        #[arg(long, value_enum, default_value_t = SwitchKind::Classical)]
        kind: SwitchKind,
        /// Input state file; defaults to the state in the config.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Quantum reduction chain on random Gaussians; writes quantum_reduce.json and expectations.csv.
    QuantumReduce,
    /// Quantum frame switch round trip; writes quantum_switch.json.
    QuantumSwitch {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Aggregates earlier artifacts into report.md and report.csv.
    Report,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("RELFRAME_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("RELFRAME_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Failed(e.to_string()))
}

fn verify_algebra(config: &Config, out: &OutDir) -> Result<bool, CliError> {
    let names = &config.suites.verify_algebra;
    suites::validate_names(names)?;
    let results = names
        .par_iter()
        .map(|name| {
            log::info!("suite {name}");
            suites::run(name, config).map(|checks| (name, checks))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut pass = true;
    let mut entries = Vec::new();
    for (name, checks) in &results {
        let ok = all_pass(checks);
        pass &= ok;
        println!("verify-algebra: {name:<18} {}", if ok { "pass" } else { "FAIL" });
        for c in checks.iter().filter(|c| !c.pass) {
            println!("    {}: {:e} > {:e}", c.name, c.max_residual, c.tolerance);
        }
        entries.push(json!({ "name": name, "checks": checks, "pass": ok }));
    }
    out.write_report(
        "verify_algebra.json",
        "verify-algebra",
        json!({ "seed": config.seeds.base, "samples": config.suites.samples, "suites": entries, "pass": pass }),
    )?;
    Ok(pass)
}

fn run(cli: Cli) -> Result<bool, CliError> {
    configure_threads()?;
    let mut config = Config::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        config.seeds.base = seed;
    }
    if !cli.suite.is_empty() {
        config.suites.verify_algebra = cli.suite;
    }
    suites::validate_names(&config.suites.verify_algebra)?;
    let out = OutDir::create(&cli.out)?;
    match cli.command {
        Command::VerifyAlgebra => verify_algebra(&config, &out),
        Command::Classify { input } => classical::classify(&config, input.as_deref(), &out),
        Command::Evolve => classical::evolve(&config, &out),
        Command::Switch { kind: SwitchKind::Classical, input } => classical::switch(&config, input.as_deref(), &out),
        Command::Switch { kind: SwitchKind::Quantum, input } | Command::QuantumSwitch { input } => {
            quantum::quantum_switch(&config, input.as_deref(), &out)
        }
        Command::QuantumReduce => quantum::quantum_reduce(&config, &out),
        Command::Report => report::report(&out),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("relframe: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
