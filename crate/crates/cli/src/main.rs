// SPDX-License-Identifier: Apache-2.0

//! `cpgate`: run the controlled-phase gate simulator from the command line.
//!
//! Exit status: 0 success, 1 validation failure, 2 configuration error,
//! 3 numerical failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cpgate::experiments::{
    physical_units_report, run, run_validation_suite, Mode, RunConfig, SweepResult, UnitsRequest,
};
use cpgate::Error;

#[derive(Parser)]
#[command(name = "cpgate", version, about = "Single-step multi-target controlled-phase gate simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one gate at the configured parameters.
    Single(Common),
    /// Lossless fidelity over the (delta1, delta) grid.
    Fig2(Common),
    /// Lossy fidelity along the uniform-gamma curve.
    Fig3(Common),
    /// Run every invariant check and emit a JSON report.
    Validate(Common),
    /// Refine the Fock cutoff and tolerance until the fidelity settles.
    Converge(Common),
    /// Convert the configured gate to laboratory units.
    Units {
        #[command(flatten)]
        common: Common,
        /// Control coupling mu1 / 2pi in Hz.
        #[arg(long, default_value_t = 85e6)]
        mu1_hz: f64,
        /// Cavity frequency omega_c / 2pi in Hz.
        #[arg(long, default_value_t = 5.09e9)]
        cavity_hz: f64,
        /// Cavity decay rate in units of mu1.
        #[arg(long, default_value_t = 0.01)]
        kappa: f64,
        /// Qutrit decoherence rate in units of mu1.
        #[arg(long, default_value_t = 2e-4)]
        gamma: f64,
    },
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; defaults for the subcommand when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (CSV or JSON); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for parameter scans.
    #[arg(long)]
    jobs: Option<usize>,
    /// Reserved; nothing in the simulator is stochastic.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, short)]
    verbose: bool,
}

enum Failure {
    Validation,
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

fn load_config(common: &Common, mode: Mode) -> Result<RunConfig, Error> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            RunConfig::from_toml(&text)?
        }
        None => RunConfig::for_mode(mode),
    };
    // the subcommand decides what runs; the remaining keys are shared
    cfg.mode = mode;
    if let Some(jobs) = common.jobs {
        cfg.jobs = jobs;
    }
    if let Some(out) = &common.out {
        cfg.out = Some(out.display().to_string());
    }
    cfg.validate()?;
    if common.verbose {
        if let Some(seed) = common.seed {
            eprintln!("seed {seed} accepted (unused)");
        }
        eprintln!("{}", cfg.emit());
    }
    Ok(cfg)
}

fn write_output(path: Option<&str>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("{p}: {e}"))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn sidecar(path: &str, suffix: &str) -> String {
    let p = Path::new(path);
    let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    p.with_file_name(format!("{stem}{suffix}")).display().to_string()
}

fn emit_sweep(cfg: &RunConfig, result: &SweepResult, verbose: bool) -> Result<(), Error> {
    write_output(cfg.out.as_deref(), &result.table.to_csv())?;
    if let Some(matrix) = &result.matrix {
        let path = cfg.matrix_out.clone().or_else(|| cfg.out.as_deref().map(|o| sidecar(o, "_matrix.csv")));
        if let Some(path) = path {
            write_output(Some(&path), &matrix.to_csv())?;
        }
    }
    let meta = result.metadata_json();
    match &cfg.out {
        Some(out) => write_output(Some(&sidecar(out, ".meta.json")), &meta)?,
        None if verbose => eprintln!("{meta}"),
        None => {}
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Single(c) => sweep(&c, Mode::Single),
        Command::Fig2(c) => sweep(&c, Mode::Fig2Sweep),
        Command::Fig3(c) => sweep(&c, Mode::Fig3Curve),
        Command::Converge(c) => {
            let cfg = load_config(&c, Mode::Converge)?;
            let result = run(&cfg)?;
            emit_sweep(&cfg, &result, c.verbose)?;
            if result.metadata.summary["converged"].is_null() {
                return Err(Failure::Validation);
            }
            Ok(())
        }
        Command::Validate(c) => {
            let cfg = load_config(&c, Mode::Validate)?;
            let report = run_validation_suite(&cfg);
            write_output(cfg.out.as_deref(), &(report.to_json() + "\n"))?;
            for f in report.failures() {
                eprintln!("FAIL {}: measured {:e}, threshold {:e} {}", f.check, f.measured, f.threshold, f.detail);
            }
            if report.passed {
                Ok(())
            } else {
                Err(Failure::Validation)
            }
        }
        Command::Units { common, mu1_hz, cavity_hz, kappa, gamma } => {
            let cfg = load_config(&common, Mode::Single)?;
            let params = cfg.params()?;
            let req = UnitsRequest { mu1_hz, cavity_hz, kappa, gamma, mu: params.mu, gate_time: params.derive()?.gate_time };
            let report = physical_units_report(req)?;
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            write_output(cfg.out.as_deref(), &(json + "\n"))?;
            if report.checks.iter().all(|c| c.passed()) {
                Ok(())
            } else {
                Err(Failure::Validation)
            }
        }
    }
}

fn sweep(common: &Common, mode: Mode) -> Result<(), Failure> {
    let cfg = load_config(common, mode)?;
    let result = run(&cfg)?;
    emit_sweep(&cfg, &result, common.verbose)?;
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation) => ExitCode::from(1),
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
