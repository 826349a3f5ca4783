// Copyright 2026 nlbath Contributors
// SPDX-License-Identifier: Apache-2.0

//! Langevin dynamics in the rescaled double-well potential.
//!
//! The working equation is the dimensionless second-order SDE
//!
//! ```text
//! x'' = x - x³ - γ x' + sqrt(2 γ T) η(t),   <η(t)η(t')> = δ(t-t')
//! ```
//!
//! obtained from the laboratory-units equation
//! m x'' = -V'(x) - m γ̄ x' + sqrt(2D) η with V(x) = -a x²/2 + b x⁴/4 and
//! D = γ̄ m k_B T by the rescaling x → (a/b)^½ x, t → (m/a)^½ t,
//! T → a²/(b k_B) T ([`PhysicalParams::rescale`]).
//!
//! Trajectories start from Boltzmann equilibrium ([`sample_equilibrium`])
//! and advance with a stochastic Heun step: predictor-corrector on the
//! deterministic drift, Euler-Maruyama treatment of the additive noise
//! ([`step`]). A probe phase 2ε∫x dt is accumulated alongside with the
//! trapezoid of the pre/post positions, so dephasing estimates do not
//! depend on the recording stride.
//!
//! Each realization of an ensemble draws from its own ChaCha stream
//! (`stream = realization index`, seeded by the master seed), which makes
//! [`simulate_ensemble`] a pure function of its arguments: parallel and
//! serial execution produce identical bytes.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::{Error, Result};

/// Rescaled double-well potential V(x) = -x²/2 + x⁴/4.
pub fn potential(x: f64) -> f64 {
    -0.5 * x * x + 0.25 * x * x * x * x
}

/// Force -dV/dx = x - x³.
pub fn force(x: f64) -> f64 {
    x - x * x * x
}

/// Particle and bath parameters in laboratory units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Particle mass m (mass units).
    pub mass: f64,
    /// Quadratic potential coefficient a > 0 (energy/length²); V = -a x²/2 + b x⁴/4.
    pub quadratic: f64,
    /// Quartic potential coefficient b > 0 (energy/length⁴).
    pub quartic: f64,
    /// Dissipation coefficient γ̄ (1/time).
    pub damping: f64,
    /// Bath temperature (kelvin).
    pub temperature: f64,
    /// Boltzmann constant (energy/kelvin); 1 for natural units.
    pub boltzmann: f64,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mass must be positive, got {}",
                self.mass
            )));
        }
        if !(self.quadratic > 0.0) || !(self.quartic > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "potential coefficients must be positive, got a = {}, b = {}",
                self.quadratic, self.quartic
            )));
        }
        if !(self.damping >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "damping must be non-negative, got {}",
                self.damping
            )));
        }
        if !(self.temperature >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "temperature must be non-negative, got {}",
                self.temperature
            )));
        }
        if !(self.boltzmann > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Boltzmann constant must be positive, got {}",
                self.boltzmann
            )));
        }
        Ok(())
    }

    /// Diffusion coefficient D = γ̄ m k_B T from the fluctuation-dissipation theorem.
    pub fn diffusion(&self) -> f64 {
        self.damping * self.mass * self.boltzmann * self.temperature
    }

    /// Map to the dimensionless equation of motion:
    /// γ = γ̄ (m/a)^½, T_rescaled = b k_B T / a². The probe is left
    /// uncoupled (ε = 0, Ω = 0).
    pub fn rescale(&self) -> Result<ClassicalBathParams> {
        self.validate()?;
        Ok(ClassicalBathParams {
            damping: self.damping * (self.mass / self.quadratic).sqrt(),
            temperature: self.quartic * self.boltzmann * self.temperature
                / (self.quadratic * self.quadratic),
            probe_coupling: 0.0,
            probe_frequency: 0.0,
        })
    }
}

/// Dimensionless bath and probe parameters of the rescaled equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalBathParams {
    /// Rescaled dissipation coefficient γ > 0.
    pub damping: f64,
    /// Rescaled temperature T ≥ 0.
    pub temperature: f64,
    /// Probe coupling ε ≥ 0; the probe phase is 2ε∫x dt.
    pub probe_coupling: f64,
    /// Probe bare frequency Ω; the dephasing model assumes Ω = 0.
    pub probe_frequency: f64,
}

impl ClassicalBathParams {
    pub fn new(damping: f64, temperature: f64) -> Result<Self> {
        let params = Self {
            damping,
            temperature,
            probe_coupling: 0.0,
            probe_frequency: 0.0,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_probe_coupling(mut self, coupling: f64) -> Result<Self> {
        self.probe_coupling = coupling;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "damping must be positive, got {}",
                self.damping
            )));
        }
        if !(self.temperature >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "temperature must be non-negative, got {}",
                self.temperature
            )));
        }
        if !(self.probe_coupling >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "probe coupling must be non-negative, got {}",
                self.probe_coupling
            )));
        }
        Ok(())
    }

    /// Closed-form hopping rate R = (√2 π γ)⁻¹ exp[-1/(4 γ T)].
    ///
    /// Returns 0 in the T → 0 limit.
    pub fn kramers_rate(&self) -> f64 {
        if self.temperature == 0.0 {
            return 0.0;
        }
        (-1.0 / (4.0 * self.damping * self.temperature)).exp()
            / (std::f64::consts::SQRT_2 * std::f64::consts::PI * self.damping)
    }

    /// Whether the exponential rate law for the probe coherence applies,
    /// given a measured bath correlation time: requires 2ε t_c < 1.
    pub fn rate_law_valid(&self, correlation_time: f64) -> bool {
        2.0 * self.probe_coupling * correlation_time < 1.0
    }
}

/// Instantaneous state of one realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryState {
    pub x: f64,
    pub v: f64,
    /// Accumulated probe phase 2ε∫₀ᵗ x dt'.
    pub phase: f64,
    pub t: f64,
}

impl TrajectoryState {
    pub fn new(x: f64, v: f64) -> Self {
        Self {
            x,
            v,
            phase: 0.0,
            t: 0.0,
        }
    }

    /// Mechanical energy v²/2 + V(x).
    pub fn energy(&self) -> f64 {
        0.5 * self.v * self.v + potential(self.x)
    }
}

/// One stochastic Heun step of size `dt` with a standard Gaussian draw.
///
/// The predictor is an Euler-Maruyama step; the corrector averages the
/// drift at the initial and predicted points. The noise increment
/// sqrt(2 γ T dt)·noise enters both stages identically (additive noise),
/// and is exactly zero at T = 0. The probe phase advances by the
/// trapezoid 2ε (x_pre + x_post)/2 dt.
pub fn step(
    state: &TrajectoryState,
    params: &ClassicalBathParams,
    dt: f64,
    noise: f64,
) -> TrajectoryState {
    let kick = (2.0 * params.damping * params.temperature * dt).sqrt() * noise;

    let ax = state.v;
    let av = force(state.x) - params.damping * state.v;
    let x_pred = state.x + ax * dt;
    let v_pred = state.v + av * dt + kick;

    let ax_pred = v_pred;
    let av_pred = force(x_pred) - params.damping * v_pred;

    let x = state.x + 0.5 * (ax + ax_pred) * dt;
    let v = state.v + 0.5 * (av + av_pred) * dt + kick;
    let phase = state.phase + params.probe_coupling * (state.x + x) * dt;

    TrajectoryState {
        x,
        v,
        phase,
        t: state.t + dt,
    }
}

/// Draw an equilibrium initial condition: x from the Boltzmann density
/// ∝ exp(-V(x)/T) by rejection against a uniform proposal on [-3, 3],
/// v from N(0, T). The proposal window is wide enough that the clipped
/// tail weight is negligible for T ≤ 5.
///
/// At T = 0 the draw degenerates to x = ±1 (equal probability), v = 0.
pub fn sample_equilibrium<R: Rng + ?Sized>(
    params: &ClassicalBathParams,
    rng: &mut R,
) -> TrajectoryState {
    if params.temperature == 0.0 {
        let x = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        return TrajectoryState::new(x, 0.0);
    }
    // exp(-(V - V_min)/T) <= 1 on the proposal window; V_min = V(±1) = -1/4.
    let t = params.temperature;
    let x = loop {
        let cand = rng.gen_range(-3.0..3.0);
        let accept = (-(potential(cand) + 0.25) / t).exp();
        if rng.gen::<f64>() < accept {
            break cand;
        }
    };
    let v = t.sqrt() * rng.sample::<f64, _>(StandardNormal);
    TrajectoryState::new(x, v)
}

/// Controls for [`simulate_ensemble`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleConfig {
    pub n_realizations: usize,
    /// Integration step.
    pub dt: f64,
    /// Trajectory length; rounded to a whole number of steps.
    pub t_max: f64,
    /// Record every `record_stride`-th step (1 = every step).
    pub record_stride: usize,
    /// Also record the accumulated probe phase.
    pub record_phase: bool,
    pub master_seed: u64,
    /// Upper bound on the recorded grid size in bytes.
    pub memory_budget: usize,
}

impl EnsembleConfig {
    pub const DEFAULT_MEMORY_BUDGET: usize = 1 << 30; // 1 GiB

    pub fn new(n_realizations: usize, dt: f64, t_max: f64, master_seed: u64) -> Self {
        Self {
            n_realizations,
            dt,
            t_max,
            record_stride: 1,
            record_phase: false,
            master_seed,
            memory_budget: Self::DEFAULT_MEMORY_BUDGET,
        }
    }

    pub fn record_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }

    pub fn record_phase(mut self, record: bool) -> Self {
        self.record_phase = record;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_realizations == 0 {
            return Err(Error::InvalidParameter(
                "need at least one realization".into(),
            ));
        }
        if !(self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.t_max < self.dt {
            return Err(Error::InvalidParameter(format!(
                "t_max = {} is shorter than one step dt = {}",
                self.t_max, self.dt
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidParameter("record_stride must be >= 1".into()));
        }
        Ok(())
    }

    fn n_steps(&self) -> usize {
        ((self.t_max / self.dt).round() as usize).max(1)
    }

    fn n_recorded(&self) -> usize {
        self.n_steps() / self.record_stride + 1
    }
}

/// Recorded grids of an ensemble of independent realizations.
#[derive(Debug, Clone)]
pub struct TrajectoryEnsemble {
    pub params: ClassicalBathParams,
    /// Integration step used to produce the records.
    pub dt: f64,
    pub master_seed: u64,
    /// Recorded times, uniform with spacing dt * record_stride.
    pub times: Vec<f64>,
    /// Positions, shape (n_realizations, times.len()).
    pub positions: Array2<f64>,
    /// Probe phases on the same grid, if recorded.
    pub phases: Option<Array2<f64>>,
}

impl TrajectoryEnsemble {
    pub fn n_realizations(&self) -> usize {
        self.positions.nrows()
    }

    pub fn t_max(&self) -> f64 {
        *self.times.last().expect("non-empty grid")
    }

    /// Spacing of the recorded grid.
    pub fn record_dt(&self) -> f64 {
        if self.times.len() > 1 {
            self.times[1] - self.times[0]
        } else {
            self.dt
        }
    }
}

fn run_realization(
    params: &ClassicalBathParams,
    cfg: &EnsembleConfig,
    index: usize,
) -> (Vec<f64>, Option<Vec<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.master_seed);
    rng.set_stream(index as u64);

    let n_steps = cfg.n_steps();
    let n_rec = cfg.n_recorded();
    let mut xs = Vec::with_capacity(n_rec);
    let mut phases = cfg.record_phase.then(|| Vec::with_capacity(n_rec));

    let mut state = sample_equilibrium(params, &mut rng);
    xs.push(state.x);
    if let Some(p) = phases.as_mut() {
        p.push(state.phase);
    }
    for s in 1..=n_steps {
        let noise: f64 = rng.sample(StandardNormal);
        state = step(&state, params, cfg.dt, noise);
        if s % cfg.record_stride == 0 {
            xs.push(state.x);
            if let Some(p) = phases.as_mut() {
                p.push(state.phase);
            }
        }
    }
    (xs, phases)
}

/// Simulate `cfg.n_realizations` independent equilibrium-initialized
/// trajectories and record them on the uniform grid.
///
/// Realizations run in parallel; realization `i` is a pure function of
/// (master_seed, i, params, cfg), so the output is identical for any
/// thread count. Fails up front (no partial output) if the recorded
/// grid would exceed the memory budget.
pub fn simulate_ensemble(
    params: &ClassicalBathParams,
    cfg: &EnsembleConfig,
) -> Result<TrajectoryEnsemble> {
    params.validate()?;
    cfg.validate()?;

    let n_rec = cfg.n_recorded();
    let grids = 1 + cfg.record_phase as usize;
    let bytes = cfg
        .n_realizations
        .saturating_mul(n_rec)
        .saturating_mul(8 * grids);
    if bytes > cfg.memory_budget {
        return Err(Error::CapacityExceeded {
            n_realizations: cfg.n_realizations,
            points: n_rec,
            bytes,
            budget: cfg.memory_budget,
        });
    }

    let rows: Vec<(Vec<f64>, Option<Vec<f64>>)> = (0..cfg.n_realizations)
        .into_par_iter()
        .map(|i| run_realization(params, cfg, i))
        .collect();

    let mut positions = Array2::zeros((cfg.n_realizations, n_rec));
    let mut phases = cfg
        .record_phase
        .then(|| Array2::zeros((cfg.n_realizations, n_rec)));
    for (i, (xs, ph)) in rows.into_iter().enumerate() {
        positions
            .row_mut(i)
            .iter_mut()
            .zip(xs)
            .for_each(|(dst, x)| *dst = x);
        if let (Some(all), Some(row)) = (phases.as_mut(), ph) {
            all.row_mut(i)
                .iter_mut()
                .zip(row)
                .for_each(|(dst, p)| *dst = p);
        }
    }

    let record_dt = cfg.dt * cfg.record_stride as f64;
    let times = (0..n_rec).map(|k| k as f64 * record_dt).collect();

    Ok(TrajectoryEnsemble {
        params: *params,
        dt: cfg.dt,
        master_seed: cfg.master_seed,
        times,
        positions,
        phases,
    })
}

/// Measured well-hopping rate: hysteresis-filtered crossing count / 2 / time,
/// averaged over realizations. A crossing is registered when a trajectory
/// last seen beyond one threshold (|x| > `threshold`) reaches beyond the
/// opposite one, which suppresses intra-well noise counts.
pub fn hopping_rate(ensemble: &TrajectoryEnsemble, threshold: f64) -> f64 {
    let t_span = ensemble.t_max();
    if t_span <= 0.0 {
        return 0.0;
    }
    let mut total: u64 = 0;
    for row in ensemble.positions.rows() {
        let mut side = 0i8;
        for &x in row {
            if x > threshold {
                if side == -1 {
                    total += 1;
                }
                side = 1;
            } else if x < -threshold {
                if side == 1 {
                    total += 1;
                }
                side = -1;
            }
        }
    }
    total as f64 / (2.0 * t_span * ensemble.n_realizations() as f64)
}
