// Copyright 2026 nlbath Contributors
// SPDX-License-Identifier: Apache-2.0

//! Experiment configuration: CLI flags merged over an optional config
//! file (TOML or JSON), with documented defaults filling the gaps. The
//! fully resolved configuration is serialized into the JSON sidecar of
//! every run; feeding that sidecar back through `--config` reproduces
//! the run byte for byte.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    ClassicalSpectrum,
    IzeroScan,
    ClassicalCoherence,
    SpinbosonCoherence,
    SpinbosonSpectrum,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::ClassicalSpectrum => "classical-spectrum",
            Experiment::IzeroScan => "izero-scan",
            Experiment::ClassicalCoherence => "classical-coherence",
            Experiment::SpinbosonCoherence => "spinboson-coherence",
            Experiment::SpinbosonSpectrum => "spinboson-spectrum",
        }
    }
}

/// Partial configuration as read from a file; every field optional so a
/// file may pin any subset. Field names match the CLI flags.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub gamma1: Option<f64>,
    pub temps: Option<Vec<f64>>,
    pub eps: Option<f64>,
    pub n: Option<usize>,
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    pub record_stride: Option<usize>,
    pub time_average: Option<bool>,
    pub omega_max: Option<f64>,
    pub omega_step: Option<f64>,
    pub gamma_b: Option<f64>,
    pub ttilde: Option<Vec<f64>>,
    pub delta: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        // Sidecars are JSON ({"config": ..., "derived": ...}); accept both
        // a bare config object and a sidecar.
        if path.extension().is_some_and(|e| e == "json") {
            #[derive(Deserialize)]
            struct Sidecar {
                config: ResolvedConfig,
            }
            if let Ok(sidecar) = serde_json::from_str::<Sidecar>(&text) {
                return Ok(sidecar.config.into_file_config());
            }
            let cfg: FileConfig = serde_json::from_str(&text)?;
            Ok(cfg)
        } else {
            let cfg: FileConfig = toml::from_str(&text)?;
            Ok(cfg)
        }
    }
}

/// Fully resolved configuration of one run; every run writes this into
/// its sidecar.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub experiment: Experiment,
    pub gamma1: f64,
    pub temps: Vec<f64>,
    pub eps: f64,
    pub n: usize,
    pub dt: f64,
    /// Classical record length; spin-boson runs pick 4.2/Γ_d per point
    /// when no explicit value is given.
    pub t_max: Option<f64>,
    pub record_stride: usize,
    pub time_average: bool,
    pub omega_max: f64,
    pub omega_step: f64,
    pub gamma_b: f64,
    pub ttilde: Vec<f64>,
    pub delta: f64,
    pub seed: u64,
    pub out: PathBuf,
}

impl ResolvedConfig {
    fn into_file_config(self) -> FileConfig {
        FileConfig {
            gamma1: Some(self.gamma1),
            temps: Some(self.temps),
            eps: Some(self.eps),
            n: Some(self.n),
            dt: Some(self.dt),
            t_max: self.t_max,
            record_stride: Some(self.record_stride),
            time_average: Some(self.time_average),
            omega_max: Some(self.omega_max),
            omega_step: Some(self.omega_step),
            gamma_b: Some(self.gamma_b),
            ttilde: Some(self.ttilde),
            delta: Some(self.delta),
            seed: Some(self.seed),
            out: Some(self.out),
        }
    }

    pub fn sidecar_path(&self) -> PathBuf {
        self.out.with_extension("json")
    }
}

/// Flag values straight from clap (None = not given on the command line).
#[derive(Debug, Clone, Default)]
pub struct FlagOverrides {
    pub gamma1: Option<f64>,
    pub temps: Option<Vec<f64>>,
    pub eps: Option<f64>,
    pub n: Option<usize>,
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    pub record_stride: Option<usize>,
    pub time_average: bool,
    pub omega_max: Option<f64>,
    pub omega_step: Option<f64>,
    pub gamma_b: Option<f64>,
    pub ttilde: Option<Vec<f64>>,
    pub delta: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// Merge precedence: flags > config file > defaults.
pub fn resolve(
    experiment: Experiment,
    flags: FlagOverrides,
    file: FileConfig,
) -> anyhow::Result<ResolvedConfig> {
    let is_quantum = matches!(
        experiment,
        Experiment::SpinbosonCoherence | Experiment::SpinbosonSpectrum
    );
    let eps_default = match experiment {
        Experiment::ClassicalCoherence | Experiment::SpinbosonCoherence => 0.05,
        _ => 0.0,
    };
    let gamma_b = flags.gamma_b.or(file.gamma_b).unwrap_or(1.0);
    let eps = flags.eps.or(file.eps).unwrap_or(eps_default);
    let delta = flags.delta.or(file.delta).unwrap_or(20.0);
    let dt_default = if is_quantum {
        1e-3 / gamma_b.max(eps).max(1.0)
    } else {
        0.01
    };
    // The closed-form bath spectrum peaks at ±Δ; widen the default grid
    // to cover it.
    let (omega_max_default, omega_step_default) = if experiment == Experiment::SpinbosonSpectrum {
        (1.5 * delta, delta / 1000.0)
    } else {
        (3.0, 0.005)
    };

    let cfg = ResolvedConfig {
        experiment,
        gamma1: flags.gamma1.or(file.gamma1).unwrap_or(0.4),
        temps: flags
            .temps
            .or(file.temps)
            .unwrap_or_else(|| vec![0.25, 0.5, 1.0, 2.0]),
        eps,
        n: flags.n.or(file.n).unwrap_or(5000),
        dt: flags.dt.or(file.dt).unwrap_or(dt_default),
        t_max: flags
            .t_max
            .or(file.t_max)
            .or((!is_quantum).then_some(200.0)),
        record_stride: flags.record_stride.or(file.record_stride).unwrap_or(10),
        time_average: flags.time_average || file.time_average.unwrap_or(false),
        omega_max: flags.omega_max.or(file.omega_max).unwrap_or(omega_max_default),
        omega_step: flags
            .omega_step
            .or(file.omega_step)
            .unwrap_or(omega_step_default),
        gamma_b,
        ttilde: flags
            .ttilde
            .or(file.ttilde)
            .unwrap_or_else(|| vec![0.5, 2.0, 80.0]),
        delta,
        seed: flags.seed.or(file.seed).unwrap_or(42),
        out: flags
            .out
            .or(file.out)
            .unwrap_or_else(|| PathBuf::from(format!("{}.csv", experiment.name()))),
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &ResolvedConfig) -> anyhow::Result<()> {
    let quantum = matches!(
        cfg.experiment,
        Experiment::SpinbosonCoherence | Experiment::SpinbosonSpectrum
    );
    if quantum {
        if cfg.ttilde.is_empty() {
            anyhow::bail!("empty rescaled-temperature list");
        }
        if cfg.ttilde.iter().any(|&t| t < 0.0) {
            anyhow::bail!("rescaled temperatures must be non-negative");
        }
        if !(cfg.gamma_b > 0.0) {
            anyhow::bail!("gamma-b must be positive, got {}", cfg.gamma_b);
        }
        if !(cfg.delta > 0.0) {
            anyhow::bail!("delta must be positive, got {}", cfg.delta);
        }
        if cfg.experiment == Experiment::SpinbosonCoherence && cfg.eps == 0.0 && cfg.t_max.is_none()
        {
            anyhow::bail!("eps = 0 never decoheres; give an explicit --t-max");
        }
    } else {
        if cfg.temps.is_empty() {
            anyhow::bail!("empty temperature list");
        }
        if cfg.temps.iter().any(|&t| !(t > 0.0)) {
            anyhow::bail!("classical experiment temperatures must be positive");
        }
        if !(cfg.gamma1 > 0.0) {
            anyhow::bail!("gamma1 must be positive, got {}", cfg.gamma1);
        }
        let t_max = cfg.t_max.expect("classical t_max defaulted");
        if !(t_max > cfg.dt) {
            anyhow::bail!("t-max must exceed dt");
        }
    }
    if !(cfg.eps >= 0.0) {
        anyhow::bail!("eps must be non-negative, got {}", cfg.eps);
    }
    if cfg.n == 0 {
        anyhow::bail!("need at least one realization");
    }
    if !(cfg.dt > 0.0) {
        anyhow::bail!("dt must be positive, got {}", cfg.dt);
    }
    if cfg.record_stride == 0 {
        anyhow::bail!("record-stride must be at least 1");
    }
    if !(cfg.omega_step > 0.0) || !(cfg.omega_max > 0.0) {
        anyhow::bail!("omega grid must have positive extent and step");
    }
    Ok(())
}
