// Copyright 2026 nlbath Contributors
// SPDX-License-Identifier: Apache-2.0

//! Command-line driver for the non-linear-bath decoherence experiments.
//!
//! Each subcommand runs one experiment and writes a CSV plus a JSON
//! sidecar (resolved config + derived scalars) next to it. Identical
//! configurations (including the seed) produce identical bytes, for
//! any thread count (set `RAYON_NUM_THREADS` to pin the pool size).
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical
//! failure.

// Validation uses `!(x > 0.0)` so that NaN fails closed.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{resolve, Experiment, FileConfig, FlagOverrides};

#[derive(Parser)]
#[command(
    name = "nlbath",
    version,
    about = "Desk-scale decoherence experiments against non-linear thermal baths"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bath spectra I(omega, T) of the double-well Langevin oscillator.
    ClassicalSpectrum(RunArgs),
    /// Zero-frequency intensity I(0,T), K(0,T) = I(0,T)/T and t_c per temperature.
    IzeroScan(RunArgs),
    /// Probe coherence decay C(t) and its fitted dephasing rate.
    ClassicalCoherence(RunArgs),
    /// Probe coherence against the spin-boson bath (Lindblad evolution).
    SpinbosonCoherence(RunArgs),
    /// Closed-form spin-boson bath spectral function.
    SpinbosonSpectrum(RunArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Config file (TOML, or the JSON sidecar of a previous run); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Rescaled damping of the classical bath.
    #[arg(long)]
    gamma1: Option<f64>,
    /// Comma-separated bath temperatures (classical experiments).
    #[arg(long, value_delimiter = ',')]
    temps: Option<Vec<f64>>,
    /// Probe coupling.
    #[arg(long)]
    eps: Option<f64>,
    /// Ensemble size.
    #[arg(long)]
    n: Option<usize>,
    /// Integration step.
    #[arg(long)]
    dt: Option<f64>,
    /// Record length (defaults: 200 classical, 4.2/Gamma_d quantum).
    #[arg(long = "t-max")]
    t_max: Option<f64>,
    /// Record every k-th step (classical experiments).
    #[arg(long = "record-stride")]
    record_stride: Option<usize>,
    /// Variance-reduced autocorrelation: average over every time origin.
    #[arg(long = "time-average")]
    time_average: bool,
    /// Frequency grid half-extent.
    #[arg(long = "omega-max")]
    omega_max: Option<f64>,
    /// Frequency grid step.
    #[arg(long = "omega-step")]
    omega_step: Option<f64>,
    /// Spin-boson bath decay coefficient.
    #[arg(long = "gamma-b")]
    gamma_b: Option<f64>,
    /// Comma-separated rescaled temperatures (spin-boson experiments).
    #[arg(long, value_delimiter = ',')]
    ttilde: Option<Vec<f64>>,
    /// Tunneling splitting of the spin-boson bath.
    #[arg(long)]
    delta: Option<f64>,
    /// Master seed for the ensemble RNG streams.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path (sidecar goes next to it as .json).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self) -> FlagOverrides {
        FlagOverrides {
            gamma1: self.gamma1,
            temps: self.temps.clone(),
            eps: self.eps,
            n: self.n,
            dt: self.dt,
            t_max: self.t_max,
            record_stride: self.record_stride,
            time_average: self.time_average,
            omega_max: self.omega_max,
            omega_step: self.omega_step,
            gamma_b: self.gamma_b,
            ttilde: self.ttilde.clone(),
            delta: self.delta,
            seed: self.seed,
            out: self.out.clone(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let (experiment, args) = match &cli.command {
        Command::ClassicalSpectrum(a) => (Experiment::ClassicalSpectrum, a),
        Command::IzeroScan(a) => (Experiment::IzeroScan, a),
        Command::ClassicalCoherence(a) => (Experiment::ClassicalCoherence, a),
        Command::SpinbosonCoherence(a) => (Experiment::SpinbosonCoherence, a),
        Command::SpinbosonSpectrum(a) => (Experiment::SpinbosonSpectrum, a),
    };

    let file = match &args.config {
        Some(path) => match FileConfig::load(path) {
            Ok(f) => f,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        },
        None => FileConfig::default(),
    };
    let cfg = match resolve(experiment, args.overrides(), file) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };

    let result = match experiment {
        Experiment::ClassicalSpectrum => experiments::classical_spectrum(&cfg),
        Experiment::IzeroScan => experiments::izero_scan(&cfg),
        Experiment::ClassicalCoherence => experiments::classical_coherence(&cfg),
        Experiment::SpinbosonCoherence => experiments::spinboson_coherence(&cfg),
        Experiment::SpinbosonSpectrum => experiments::spinboson_spectrum(&cfg),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
