// Copyright 2026 nlbath Contributors
// SPDX-License-Identifier: Apache-2.0

//! Quantum non-linear bath: a two-level system (B) relaxing under a
//! Lindblad master equation, exchanging excitations with a resonant
//! two-level probe (A).
//!
//! B alone obeys
//!
//! ```text
//! dρ_B/dt = -i (Δ/2)[σ¹, ρ_B] + L ρ_B,
//! L ρ = -γ_b n̄ [σ⁻σ⁺ρ + ρσ⁻σ⁺ - 2σ⁺ρσ⁻] - γ_b (n̄+1)[σ⁺σ⁻ρ + ρσ⁺σ⁻ - 2σ⁻ρσ⁺],
//! ```
//!
//! with σ± = (σ² ± iσ³)/2 (ladder operators of the σ¹ eigenbasis, taken
//! verbatim, no basis conversion) and n̄ = [exp(1/T̃) - 1]⁻¹ at the
//! rescaled temperature T̃. The equilibrium two-time correlation of the
//! coupling operator σ³ follows from the quantum regression theorem and
//! has the closed form
//!
//! ```text
//! <σ³(0) σ³(t)> = e^{-|t|/τ_c} [n_↑ e^{-iΔt} + n_↓ e^{+iΔt}],
//! τ_c = [(2n̄+1)γ_b]⁻¹ = tanh(1/(2T̃))/γ_b,
//! ```
//!
//! whose transform is a pair of Lorentzians at ±Δ. The resonant peak
//! weight 2τ_c n_↓ *shrinks* as T̃ grows: the spectral depletion that
//! makes the probe decoherence rate Γ_d = ε²τ_c a decreasing function
//! of temperature.
//!
//! With the probe attached (resonant, Ω = Δ) and both bare Hamiltonians
//! removed in the rotating frame, the coupled pair obeys the flip-flop
//! master equation
//!
//! ```text
//! dρ/dt = -iε [σ⁺_A σ⁻_B + σ⁻_A σ⁺_B, ρ] + L ρ   (L acting on slot B),
//! ```
//!
//! valid for ε ≪ 1/τ_c ≪ Δ. In that regime the probe state admits the
//! closed-form relaxation [`analytic_probe_state`]: its σ² and σ³
//! components decay at Γ_d, its σ¹ component at 2Γ_d, toward the thermal
//! state (I - tanh(1/(2T̃)) σ¹)/2.

use ndarray::Array2;
use num_complex::Complex64;

use crate::quantum::{
    commutator, identity, integrate_master, partial_trace_b, pauli, propagate_linear,
    purity_coherence, sigma_minus, sigma_plus, tensor, trace, DensityMatrix, MasterTrajectory,
    TimeGrid,
};
use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Parameters of the spin-boson bath and its resonant probe.
///
/// Temperatures are rescaled by the tunneling splitting (T̃ = T/Δ), so n̄
/// and all derived quantities depend on T̃ alone; Δ itself only enters
/// the validity conditions and the absolute peak positions of the
/// spectral function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinBosonParams {
    /// Tunneling splitting Δ > 0 between the two lowest levels (ħ = 1).
    pub tunneling: f64,
    /// Bath-induced decay coefficient γ_b > 0.
    pub bath_rate: f64,
    /// Probe coupling ε ≥ 0; the probe is resonant (Ω = Δ).
    pub probe_coupling: f64,
    /// Rescaled temperature T̃ = T/Δ ≥ 0.
    pub temperature: f64,
}

/// Rotating-wave validity indicators (reported, never enforced).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidityFlags {
    /// Δ τ_c ≥ 10: the bath master equation's own RWA.
    pub bath_rwa_ok: bool,
    /// ε τ_c ≤ 0.1: the probe-coupling RWA and the adiabatic solution.
    pub coupling_rwa_ok: bool,
}

impl SpinBosonParams {
    pub fn new(tunneling: f64, bath_rate: f64, probe_coupling: f64, temperature: f64) -> Result<Self> {
        let p = Self {
            tunneling,
            bath_rate,
            probe_coupling,
            temperature,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tunneling > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tunneling splitting must be positive, got {}",
                self.tunneling
            )));
        }
        if !(self.bath_rate > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bath rate must be positive, got {}",
                self.bath_rate
            )));
        }
        if !(self.probe_coupling >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "probe coupling must be non-negative, got {}",
                self.probe_coupling
            )));
        }
        if !(self.temperature >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "temperature must be non-negative, got {}",
                self.temperature
            )));
        }
        Ok(())
    }

    /// Mean boson occupation n̄ = [exp(1/T̃) - 1]⁻¹ at the splitting; 0 at T̃ = 0.
    pub fn thermal_occupation(&self) -> f64 {
        if self.temperature == 0.0 {
            return 0.0;
        }
        1.0 / ((1.0 / self.temperature).exp_m1())
    }

    /// Bath correlation time τ_c = [(2n̄+1)γ_b]⁻¹ = tanh(1/(2T̃))/γ_b.
    pub fn correlation_time(&self) -> f64 {
        self.equilibrium_coherence() / self.bath_rate
    }

    /// Excited-level weight n_↑ = e^{-1/(2T̃)} / (2 cosh(1/(2T̃))).
    pub fn excited_population(&self) -> f64 {
        if self.temperature == 0.0 {
            return 0.0;
        }
        1.0 / ((1.0 / self.temperature).exp() + 1.0)
    }

    /// Ground-level weight n_↓ = 1 - n_↑.
    pub fn ground_population(&self) -> f64 {
        1.0 - self.excited_population()
    }

    /// tanh(1/(2T̃)): the equilibrium purity coherence of a thermalized
    /// two-level system, and the population asymmetry n_↓ - n_↑.
    pub fn equilibrium_coherence(&self) -> f64 {
        if self.temperature == 0.0 {
            1.0
        } else {
            (1.0 / (2.0 * self.temperature)).tanh()
        }
    }

    /// Probe decoherence rate Γ_d = ε² τ_c = ε² tanh(1/(2T̃))/γ_b.
    pub fn decoherence_rate(&self) -> f64 {
        self.probe_coupling * self.probe_coupling * self.correlation_time()
    }

    pub fn validity(&self) -> ValidityFlags {
        let tau_c = self.correlation_time();
        ValidityFlags {
            bath_rwa_ok: self.tunneling * tau_c >= 10.0,
            coupling_rwa_ok: self.probe_coupling * tau_c <= 0.1,
        }
    }

    /// Analytic steady state of the bath master equation: populations
    /// n_↑, n_↓ on the σ¹ eigenstates, no coherences, i.e.
    /// (I - tanh(1/(2T̃)) σ¹)/2. The probe thermalizes to the same state.
    pub fn steady_state(&self) -> DensityMatrix {
        let m = -self.equilibrium_coherence();
        let half = Complex64::new(0.5, 0.0);
        let mat = (identity(2) + pauli(1).unwrap() * Complex64::new(m, 0.0)) * half;
        DensityMatrix::new(mat).expect("valid by construction")
    }
}

/// Thermal dissipator L ρ for a 2×2 bath state.
pub fn dissipator(rho: &Array2<Complex64>, params: &SpinBosonParams) -> Array2<Complex64> {
    dissipator_with(rho, &sigma_plus(), &sigma_minus(), params)
}

/// Dissipator built from explicit ladder operators (used as-is for B alone,
/// or with pre-tensored operators when B is one slot of a larger register).
fn dissipator_with(
    rho: &Array2<Complex64>,
    sp: &Array2<Complex64>,
    sm: &Array2<Complex64>,
    params: &SpinBosonParams,
) -> Array2<Complex64> {
    let n_bar = params.thermal_occupation();
    let g_up = Complex64::new(params.bath_rate * n_bar, 0.0);
    let g_down = Complex64::new(params.bath_rate * (n_bar + 1.0), 0.0);
    let two = Complex64::new(2.0, 0.0);

    let sm_sp = sm.dot(sp);
    let sp_sm = sp.dot(sm);

    let absorb = sm_sp.dot(rho) + rho.dot(&sm_sp) - sp.dot(rho).dot(sm) * two;
    let emit = sp_sm.dot(rho) + rho.dot(&sp_sm) - sm.dot(rho).dot(sp) * two;
    absorb * (-g_up) + emit * (-g_down)
}

/// Full bath generator: -i(Δ/2)[σ¹, ρ] + Lρ.
pub fn master_rhs_b(rho: &Array2<Complex64>, params: &SpinBosonParams) -> Array2<Complex64> {
    let h = pauli(1).unwrap() * Complex64::new(params.tunneling / 2.0, 0.0);
    commutator(&h, rho) * (-I) + dissipator(rho, params)
}

/// Closed-form equilibrium correlation
/// <σ³(0)σ³(t)> = e^{-t/τ_c} [n_↑ e^{-iΔt} + n_↓ e^{+iΔt}], t ≥ 0.
pub fn correlation_closed_form(params: &SpinBosonParams, t: f64) -> Complex64 {
    let tau_c = params.correlation_time();
    let envelope = (-t.abs() / tau_c).exp();
    let phase = Complex64::from_polar(1.0, -params.tunneling * t);
    let n_up = Complex64::new(params.excited_population(), 0.0);
    let n_down = Complex64::new(params.ground_population(), 0.0);
    (phase * n_up + phase.conj() * n_down) * envelope
}

/// Two-time correlation <σ³(0)σ³(t)> by the quantum regression theorem:
/// the operator ρ_ss σ³ is propagated under the bath generator with the
/// linear master-equation integrator (no eigendecomposition, no state
/// projections; the initial operator is not Hermitian) and contracted
/// with σ³ at the recorded times. t = 0 gives exactly Tr ρ_ss = 1.
pub fn two_time_correlation(
    params: &SpinBosonParams,
    grid: &TimeGrid,
) -> Result<(Vec<f64>, Vec<Complex64>)> {
    params.validate()?;
    let s3 = pauli(3).unwrap();
    let op0 = params.steady_state().matrix().dot(&s3);
    let rhs = |rho: &Array2<Complex64>| master_rhs_b(rho, params);
    let (times, ops) = propagate_linear(rhs, &op0, grid);
    let values = ops.iter().map(|op| trace(&s3.dot(op))).collect();
    Ok((times, values))
}

/// Bath spectral function: two Lorentzians of widths 1/τ_c and weights
/// 2τ_c n_↑ and 2τ_c n_↓, centered at +Δ and -Δ respectively.
pub fn spectral_function(params: &SpinBosonParams, omegas: &[f64]) -> Vec<f64> {
    let tau_c = params.correlation_time();
    let n_up = params.excited_population();
    let n_down = params.ground_population();
    let delta = params.tunneling;
    omegas
        .iter()
        .map(|&w| {
            let up = (w - delta) * tau_c;
            let down = (w + delta) * tau_c;
            2.0 * tau_c * n_up / (1.0 + up * up) + 2.0 * tau_c * n_down / (1.0 + down * down)
        })
        .collect()
}

/// Height of the temperature-depleted resonant peak, 2τ_c n_↓ =
/// (e^{1/T̃} - 1) / (2 γ_b cosh²(1/(2T̃))): 2/γ_b at T̃ → 0, → 0 at T̃ → ∞.
pub fn resonant_peak_height(params: &SpinBosonParams) -> f64 {
    2.0 * params.correlation_time() * params.ground_population()
}

/// Rotating-frame generator of the coupled probe-bath pair:
/// -iε[σ⁺_A σ⁻_B + σ⁻_A σ⁺_B, ρ] + (L on slot B)ρ.
pub fn coupled_rhs(rho: &Array2<Complex64>, params: &SpinBosonParams) -> Array2<Complex64> {
    let sp_b = tensor(&identity(2), &sigma_plus());
    let sm_b = tensor(&identity(2), &sigma_minus());
    let sp_a = tensor(&sigma_plus(), &identity(2));
    let sm_a = tensor(&sigma_minus(), &identity(2));

    let flip_flop = sp_a.dot(&sm_b) + sm_a.dot(&sp_b);
    let eps = Complex64::new(params.probe_coupling, 0.0);
    commutator(&flip_flop, rho) * (-I * eps) + dissipator_with(rho, &sp_b, &sm_b, params)
}

/// Probe coherence along a coupled integration.
#[derive(Debug, Clone)]
pub struct ProbeCoherence {
    pub times: Vec<f64>,
    /// Purity coherence of the reduced probe state.
    pub coherence: Vec<f64>,
    /// σ¹ expectation of the reduced probe state (relaxes at 2Γ_d).
    pub sigma1_mean: Vec<f64>,
    /// Integration diagnostics (trace/Hermiticity drifts, min eigenvalue).
    pub max_trace_drift: f64,
    pub max_hermiticity_drift: f64,
    pub min_eigenvalue: f64,
}

/// Integrate the coupled pair from tensor(ρ_A0, ρ_ss(T̃)) and record the
/// probe coherence C(t) and σ¹ expectation on the grid.
pub fn simulate_probe_coherence(
    params: &SpinBosonParams,
    rho_a0: &DensityMatrix,
    grid: &TimeGrid,
) -> Result<ProbeCoherence> {
    params.validate()?;
    if rho_a0.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: rho_a0.dim(),
        });
    }
    let rho0 = DensityMatrix::new(tensor(rho_a0.matrix(), params.steady_state().matrix()))?;
    let rhs = |rho: &Array2<Complex64>| coupled_rhs(rho, params);
    let traj: MasterTrajectory = integrate_master(rhs, &rho0, grid)?;

    let s1 = pauli(1).unwrap();
    let mut coherence = Vec::with_capacity(traj.states.len());
    let mut sigma1_mean = Vec::with_capacity(traj.states.len());
    for state in &traj.states {
        let reduced_mat = partial_trace_b(state)?;
        let m = trace(&reduced_mat.dot(&s1)).re;
        let reduced = DensityMatrix::new(reduced_mat)?;
        coherence.push(purity_coherence(&reduced));
        sigma1_mean.push(m);
    }
    Ok(ProbeCoherence {
        times: traj.times,
        coherence,
        sigma1_mean,
        max_trace_drift: traj.max_trace_drift,
        max_hermiticity_drift: traj.max_hermiticity_drift,
        min_eigenvalue: traj.min_eigenvalue,
    })
}

/// Expansion coefficients of the reduced probe state over the Pauli basis,
/// c_k = Tr[(ρ_A0 - ρ_th) σᵏ]/2, together with the decay rate they carry:
/// the σ¹ component relaxes at 2Γ_d, the σ² and σ³ components at Γ_d.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticSolutionCoeffs {
    pub sigma1_coeff: f64,
    pub sigma2_coeff: f64,
    pub sigma3_coeff: f64,
    pub decoherence_rate: f64,
}

pub fn analytic_coeffs(params: &SpinBosonParams, rho_a0: &DensityMatrix) -> AnalyticSolutionCoeffs {
    let deviation = rho_a0.matrix() - params.steady_state().matrix();
    let coeff = |k: usize| trace(&deviation.dot(&pauli(k).unwrap())).re / 2.0;
    AnalyticSolutionCoeffs {
        sigma1_coeff: coeff(1),
        sigma2_coeff: coeff(2),
        sigma3_coeff: coeff(3),
        decoherence_rate: params.decoherence_rate(),
    }
}

/// Adiabatic closed-form probe state in the regime ε ≪ 1/τ_c:
///
/// ρ_A(t) = ρ_th + e^{-Γ_d t}(c₂σ² + c₃σ³) + e^{-2Γ_d t} c₁σ¹,
///
/// exact at t = 0 (the Pauli expansion is complete) and → ρ_th at t → ∞.
pub fn analytic_probe_state(
    params: &SpinBosonParams,
    rho_a0: &DensityMatrix,
    t: f64,
) -> Result<DensityMatrix> {
    let c = analytic_coeffs(params, rho_a0);
    let gamma = c.decoherence_rate;
    let slow = (-gamma * t).exp();
    let fast = (-2.0 * gamma * t).exp();
    let mat = params.steady_state().matrix()
        + pauli(1).unwrap() * Complex64::new(fast * c.sigma1_coeff, 0.0)
        + pauli(2).unwrap() * Complex64::new(slow * c.sigma2_coeff, 0.0)
        + pauli(3).unwrap() * Complex64::new(slow * c.sigma3_coeff, 0.0);
    DensityMatrix::new(mat)
}
