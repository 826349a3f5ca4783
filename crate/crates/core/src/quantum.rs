// Copyright 2026 nlbath Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex matrix kernel for small Hilbert spaces (d ∈ {2, 4}).
//!
//! Pauli operators are built in the basis {|-1⟩, |1⟩} with σ³ diagonal,
//! σ³|±1⟩ = ±|±1⟩ (so σ³ = diag(-1, +1) with |-1⟩ first). The ladder
//! operators used by the bath model are σ± = (σ² ± iσ³)/2, which raise
//! and lower between the σ¹ eigenstates, the energy eigenbasis of a
//! bare Hamiltonian ∝ σ¹. All formulas stay in the σ³ basis; no change
//! of basis is performed anywhere.
//!
//! The master-equation integrator is classical fixed-step RK4. Because
//! the generator is linear and time independent, the RK4 update is the
//! fixed polynomial I + hL + (hL)²/2 + (hL)³/6 + (hL)⁴/24 applied to the
//! vectorized state; the integrator builds that one-step matrix once and
//! then advances by matrix-vector products, re-Hermitizing and
//! renormalizing the trace after every step. Positivity is verified on
//! the recorded grid with a cyclic Jacobi eigensolver.

use ndarray::Array2;
use num_complex::Complex64;

use crate::{Error, Result};

/// Tolerances for valid density matrices.
pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-9;
/// Invariant drift beyond which an integration aborts.
pub const BREACH_TOL: f64 = 1e-6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// d × d identity.
pub fn identity(d: usize) -> Array2<Complex64> {
    Array2::from_diag_elem(d, ONE)
}

/// Single-qubit Pauli matrix σ^k, k ∈ {1, 2, 3}, in the {|-1⟩, |1⟩} basis:
/// σ¹ swaps the basis states, σ³ = diag(-1, +1), and σ² = iσ³σ¹ closes the
/// algebra σᵃσᵇ = iσᶜ (cyclic).
pub fn pauli(k: usize) -> Result<Array2<Complex64>> {
    let m = match k {
        1 => ndarray::array![[ZERO, ONE], [ONE, ZERO]],
        2 => ndarray::array![[ZERO, I], [-I, ZERO]],
        3 => ndarray::array![[-ONE, ZERO], [ZERO, ONE]],
        _ => {
            return Err(Error::InvalidParameter(format!(
                "Pauli axis must be 1, 2 or 3, got {k}"
            )))
        }
    };
    Ok(m)
}

/// σ^k acting on one slot of an `n_slots`-qubit register (identity on the
/// others); slot 0 is the leftmost (slowest) tensor factor.
pub fn pauli_in_slot(k: usize, slot: usize, n_slots: usize) -> Result<Array2<Complex64>> {
    if slot >= n_slots {
        return Err(Error::InvalidParameter(format!(
            "slot {slot} out of range for {n_slots} slots"
        )));
    }
    let single = pauli(k)?;
    let mut out = if slot == 0 { single.clone() } else { identity(2) };
    for s in 1..n_slots {
        let factor = if s == slot { &single } else { &identity(2) };
        out = tensor(&out, factor);
    }
    Ok(out)
}

/// Raising operator σ⁺ = (σ² + iσ³)/2 between the σ¹ eigenstates.
pub fn sigma_plus() -> Array2<Complex64> {
    let half = Complex64::new(0.5, 0.0);
    (pauli(2).unwrap() + pauli(3).unwrap() * I) * half
}

/// Lowering operator σ⁻ = (σ² - iσ³)/2.
pub fn sigma_minus() -> Array2<Complex64> {
    let half = Complex64::new(0.5, 0.0);
    (pauli(2).unwrap() - pauli(3).unwrap() * I) * half
}

/// Kronecker product with slot order (a, b): a indexes the slower axis.
pub fn tensor(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::from_elem((ra * rb, ca * cb), ZERO);
    for ia in 0..ra {
        for ja in 0..ca {
            let s = a[(ia, ja)];
            if s == ZERO {
                continue;
            }
            for ib in 0..rb {
                for jb in 0..cb {
                    out[(ia * rb + ib, ja * cb + jb)] = s * b[(ib, jb)];
                }
            }
        }
    }
    out
}

/// Conjugate transpose.
pub fn dagger(m: &Array2<Complex64>) -> Array2<Complex64> {
    m.t().mapv(|z| z.conj())
}

/// a·b - b·a.
pub fn commutator(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    a.dot(b) - b.dot(a)
}

pub fn trace(m: &Array2<Complex64>) -> Complex64 {
    m.diag().sum()
}

/// Trace out the second (fast) slot of a two-qubit operator: 4×4 → 2×2.
/// Exact on products: partial_trace_b(tensor(a, ρ)) = a · Tr ρ.
pub fn partial_trace_b(m: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    if m.dim() != (4, 4) {
        return Err(Error::DimensionMismatch {
            expected: 4,
            actual: m.nrows(),
        });
    }
    let mut out = Array2::from_elem((2, 2), ZERO);
    for i in 0..2 {
        for j in 0..2 {
            out[(i, j)] = m[(2 * i, 2 * j)] + m[(2 * i + 1, 2 * j + 1)];
        }
    }
    Ok(out)
}

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations, sorted
/// ascending. Sized for the d ≤ 4 matrices used here (works for any small d).
pub fn hermitian_eigenvalues(m: &Array2<Complex64>) -> Result<Vec<f64>> {
    let d = m.nrows();
    if m.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: m.ncols(),
        });
    }
    // Work on the Hermitian part; callers pass states that are Hermitian
    // to rounding.
    let mut a = Array2::from_shape_fn((d, d), |(i, j)| {
        (m[(i, j)] + m[(j, i)].conj()) * Complex64::new(0.5, 0.0)
    });
    let scale = a.iter().map(|z| z.norm()).fold(0.0_f64, f64::max).max(1.0);
    for _sweep in 0..60 {
        let mut off = 0.0_f64;
        for p in 0..d {
            for q in (p + 1)..d {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[(p, q)];
                if apq.norm() <= 1e-18 * scale {
                    continue;
                }
                // Unitary 2x2 rotation zeroing the (p, q) element:
                // diagonalize [[app, |g|], [|g|, aqq]] and fold in the
                // phase of g.
                let phase = apq / apq.norm();
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * apq.norm());
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let cs = Complex64::new(c, 0.0);
                let sn = phase * s;
                // Columns: [vp, vq] <- [c vp + s* vq_phase, ...]
                for r in 0..d {
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    a[(r, p)] = arp * cs - arq * sn.conj();
                    a[(r, q)] = arp * sn + arq * cs;
                }
                for r in 0..d {
                    let apr = a[(p, r)];
                    let aqr = a[(q, r)];
                    a[(p, r)] = apr * cs - aqr * sn;
                    a[(q, r)] = apr * sn.conj() + aqr * cs;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..d).map(|i| a[(i, i)].re).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(eigs)
}

/// A d × d complex matrix validated as a quantum state: Hermitian, unit
/// trace, positive semidefinite (within [`HERMITICITY_TOL`], [`TRACE_TOL`],
/// [`POSITIVITY_TOL`]).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: Array2<Complex64>,
}

impl DensityMatrix {
    pub fn new(mat: Array2<Complex64>) -> Result<Self> {
        Self::check(&mat)?;
        Ok(Self { mat })
    }

    /// Validate the state invariants without taking ownership.
    pub fn check(mat: &Array2<Complex64>) -> Result<()> {
        let d = mat.nrows();
        if mat.ncols() != d || (d != 2 && d != 4) {
            return Err(Error::DimensionMismatch {
                expected: 2,
                actual: mat.ncols().max(mat.nrows()),
            });
        }
        let mut herm: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                herm = herm.max((mat[(i, j)] - mat[(j, i)].conj()).norm());
            }
        }
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidParameter(format!(
                "not Hermitian: max |ρ - ρ†| = {herm:.3e}"
            )));
        }
        let tr = trace(mat);
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::InvalidParameter(format!(
                "trace must be 1, got {tr}"
            )));
        }
        let min_eig = hermitian_eigenvalues(mat)?[0];
        if min_eig < -POSITIVITY_TOL {
            return Err(Error::InvalidParameter(format!(
                "not positive semidefinite: min eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(())
    }

    /// Projector onto a normalized pure state with the given amplitudes.
    pub fn from_pure(amplitudes: &[Complex64]) -> Result<Self> {
        let norm2: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if norm2 <= 0.0 {
            return Err(Error::InvalidParameter("zero state vector".into()));
        }
        let d = amplitudes.len();
        let mat = Array2::from_shape_fn((d, d), |(i, j)| {
            amplitudes[i] * amplitudes[j].conj() / norm2
        });
        Self::new(mat)
    }

    /// The equal superposition (|-1⟩ + |1⟩)/√2: the σ¹ = +1 eigenstate,
    /// used as the default probe preparation.
    pub fn equal_superposition() -> Self {
        Self::from_pure(&[ONE, ONE]).expect("valid by construction")
    }

    pub fn maximally_mixed(d: usize) -> Result<Self> {
        if d != 2 && d != 4 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                actual: d,
            });
        }
        Ok(Self {
            mat: Array2::from_diag_elem(d, Complex64::new(1.0 / d as f64, 0.0)),
        })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.mat
    }

    pub fn into_matrix(self) -> Array2<Complex64> {
        self.mat
    }
}

/// Basis-independent qubit coherence √(2 Tr ρ² - 1): 1 on pure states,
/// 0 on the maximally mixed state. Roundoff below 0 is clamped.
pub fn purity_coherence(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    let tr2: f64 = m.dot(m).diag().iter().map(|z| z.re).sum();
    (2.0 * tr2 - 1.0).max(0.0).sqrt()
}

/// Uniform integration grid: fixed step `dt` up to `t_max`, recording
/// every `record_stride`-th step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub t_max: f64,
    pub record_stride: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, t_max: f64, record_stride: usize) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {dt}"
            )));
        }
        if t_max < dt {
            return Err(Error::InvalidParameter(format!(
                "t_max = {t_max} shorter than one step dt = {dt}"
            )));
        }
        if record_stride == 0 {
            return Err(Error::InvalidParameter("record_stride must be >= 1".into()));
        }
        Ok(Self {
            dt,
            t_max,
            record_stride,
        })
    }

    pub fn n_steps(&self) -> usize {
        ((self.t_max / self.dt).round() as usize).max(1)
    }

    /// Default step for spin-boson integrations.
    pub fn default_quantum_dt(bath_rate: f64, probe_coupling: f64) -> f64 {
        1e-3 / bath_rate.max(probe_coupling).max(1.0)
    }
}

/// Recorded master-equation trajectory with invariant diagnostics.
#[derive(Debug, Clone)]
pub struct MasterTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Array2<Complex64>>,
    /// Max |Tr ρ - 1| observed before each renormalization.
    pub max_trace_drift: f64,
    /// Max Hermiticity defect observed before each re-Hermitization.
    pub max_hermiticity_drift: f64,
    /// Min eigenvalue over the recorded states.
    pub min_eigenvalue: f64,
}

/// Vectorize row-major: w[i*d + j] = m[(i, j)].
fn to_vec(m: &Array2<Complex64>) -> Vec<Complex64> {
    m.iter().copied().collect()
}

fn to_mat(w: &[Complex64], d: usize) -> Array2<Complex64> {
    Array2::from_shape_vec((d, d), w.to_vec()).expect("length d*d")
}

/// Build the matrix of the (linear) superoperator by applying it to the
/// matrix units.
fn superoperator_matrix<F>(rhs: &F, d: usize) -> Vec<Complex64>
where
    F: Fn(&Array2<Complex64>) -> Array2<Complex64>,
{
    let n = d * d;
    let mut s = vec![ZERO; n * n];
    for col in 0..n {
        let mut unit = Array2::from_elem((d, d), ZERO);
        unit[(col / d, col % d)] = ONE;
        let image = rhs(&unit);
        for (row, val) in image.iter().enumerate() {
            s[row * n + col] = *val;
        }
    }
    s
}

fn mat_mul(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![ZERO; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == ZERO {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

/// One-step RK4 update matrix R(hL) = I + hL + (hL)²/2 + (hL)³/6 + (hL)⁴/24
/// via Horner's scheme.
fn rk4_step_matrix(s: &[Complex64], n: usize, dt: f64) -> Vec<Complex64> {
    let hs: Vec<Complex64> = s.iter().map(|v| v * dt).collect();
    let mut m: Vec<Complex64> = hs.iter().map(|v| v / 4.0).collect();
    for divisor in [3.0, 2.0, 1.0] {
        for i in 0..n {
            m[i * n + i] += ONE;
        }
        m = mat_mul(&hs, &m, n);
        for v in m.iter_mut() {
            *v /= divisor;
        }
    }
    for i in 0..n {
        m[i * n + i] += ONE;
    }
    m
}

fn mat_vec(m: &[Complex64], v: &[Complex64], out: &mut [Complex64], n: usize) {
    for i in 0..n {
        let mut acc = ZERO;
        let row = &m[i * n..(i + 1) * n];
        for (a, b) in row.iter().zip(v.iter()) {
            acc += a * b;
        }
        out[i] = acc;
    }
}

/// Fixed-step RK4 integration of a linear master equation dρ/dt = rhs(ρ).
///
/// Each step re-Hermitizes (ρ ← (ρ + ρ†)/2) and renormalizes the trace;
/// the pre-projection drifts are tracked and any drift beyond
/// [`BREACH_TOL`] aborts with the offending time, as does a recorded
/// state whose minimum eigenvalue falls below -[`BREACH_TOL`].
pub fn integrate_master<F>(rhs: F, rho0: &DensityMatrix, grid: &TimeGrid) -> Result<MasterTrajectory>
where
    F: Fn(&Array2<Complex64>) -> Array2<Complex64>,
{
    let d = rho0.dim();
    let n = d * d;
    let s = superoperator_matrix(&rhs, d);
    let step = rk4_step_matrix(&s, n, grid.dt);

    let mut w = to_vec(rho0.matrix());
    let mut next = vec![ZERO; n];
    let n_steps = grid.n_steps();
    let n_rec = n_steps / grid.record_stride + 1;

    let mut times = Vec::with_capacity(n_rec);
    let mut states = Vec::with_capacity(n_rec);
    let mut max_trace_drift = 0.0_f64;
    let mut max_herm_drift = 0.0_f64;
    let mut min_eig = f64::INFINITY;

    let record = |w: &[Complex64],
                      t: f64,
                      times: &mut Vec<f64>,
                      states: &mut Vec<Array2<Complex64>>,
                      min_eig: &mut f64|
     -> Result<()> {
        let state = to_mat(w, d);
        let low = hermitian_eigenvalues(&state)?[0];
        if low < -BREACH_TOL {
            return Err(Error::IntegrationFailure {
                time: t,
                what: format!("min eigenvalue {low:.3e}"),
            });
        }
        *min_eig = min_eig.min(low);
        times.push(t);
        states.push(state);
        Ok(())
    };

    record(&w, 0.0, &mut times, &mut states, &mut min_eig)?;
    for step_idx in 1..=n_steps {
        let t = step_idx as f64 * grid.dt;
        mat_vec(&step, &w, &mut next, n);
        std::mem::swap(&mut w, &mut next);

        // Re-Hermitize, tracking the defect.
        let mut herm_drift = 0.0_f64;
        for i in 0..d {
            herm_drift = herm_drift.max(w[i * d + i].im.abs());
            w[i * d + i] = Complex64::new(w[i * d + i].re, 0.0);
            for j in (i + 1)..d {
                let upper = w[i * d + j];
                let lower = w[j * d + i];
                herm_drift = herm_drift.max((upper - lower.conj()).norm() / 2.0);
                let avg = (upper + lower.conj()) * Complex64::new(0.5, 0.0);
                w[i * d + j] = avg;
                w[j * d + i] = avg.conj();
            }
        }
        max_herm_drift = max_herm_drift.max(herm_drift);
        if herm_drift > BREACH_TOL {
            return Err(Error::IntegrationFailure {
                time: t,
                what: format!("Hermiticity drift {herm_drift:.3e}"),
            });
        }

        // Renormalize the (now real) trace.
        let tr: f64 = (0..d).map(|i| w[i * d + i].re).sum();
        let drift = (tr - 1.0).abs();
        max_trace_drift = max_trace_drift.max(drift);
        if drift > BREACH_TOL {
            return Err(Error::IntegrationFailure {
                time: t,
                what: format!("trace drift {drift:.3e}"),
            });
        }
        let inv = Complex64::new(1.0 / tr, 0.0);
        for v in w.iter_mut() {
            *v *= inv;
        }

        if step_idx % grid.record_stride == 0 {
            record(&w, t, &mut times, &mut states, &mut min_eig)?;
        }
    }

    Ok(MasterTrajectory {
        times,
        states,
        max_trace_drift,
        max_hermiticity_drift: max_herm_drift,
        min_eigenvalue: min_eig,
    })
}

/// RK4 propagation of an arbitrary (possibly non-Hermitian) operator under
/// the same linear generator, with no state projections. Used for two-time
/// correlation functions via the quantum regression theorem.
pub fn propagate_linear<F>(
    rhs: F,
    op0: &Array2<Complex64>,
    grid: &TimeGrid,
) -> (Vec<f64>, Vec<Array2<Complex64>>)
where
    F: Fn(&Array2<Complex64>) -> Array2<Complex64>,
{
    let d = op0.nrows();
    let n = d * d;
    let s = superoperator_matrix(&rhs, d);
    let step = rk4_step_matrix(&s, n, grid.dt);

    let mut w = to_vec(op0);
    let mut next = vec![ZERO; n];
    let n_steps = grid.n_steps();

    let mut times = vec![0.0];
    let mut ops = vec![op0.clone()];
    for step_idx in 1..=n_steps {
        mat_vec(&step, &w, &mut next, n);
        std::mem::swap(&mut w, &mut next);
        if step_idx % grid.record_stride == 0 {
            times.push(step_idx as f64 * grid.dt);
            ops.push(to_mat(&w, d));
        }
    }
    (times, ops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn norm_max(m: &Array2<Complex64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn pauli_squares_to_identity() {
        for k in 1..=3 {
            let s = pauli(k).unwrap();
            assert!(norm_max(&(s.dot(&s) - identity(2))) < 1e-15);
        }
    }

    #[test]
    fn pauli_commutators_close_cyclically() {
        // [σᵃ, σᵇ] = 2i σᶜ for (a,b,c) cyclic.
        for (a, b, c) in [(1, 2, 3), (2, 3, 1), (3, 1, 2)] {
            let lhs = commutator(&pauli(a).unwrap(), &pauli(b).unwrap());
            let rhs = pauli(c).unwrap() * (I * 2.0);
            assert!(norm_max(&(lhs - rhs)) < 1e-15, "axes ({a},{b},{c})");
        }
    }

    #[test]
    fn pauli_rejects_bad_axis() {
        assert!(pauli(0).is_err());
        assert!(pauli(4).is_err());
        assert!(pauli_in_slot(1, 2, 2).is_err());
    }

    #[test]
    fn ladder_operators_are_nilpotent_and_complete() {
        let sp = sigma_plus();
        let sm = sigma_minus();
        assert!(norm_max(&sp.dot(&sp)) < 1e-15);
        assert!(norm_max(&sm.dot(&sm)) < 1e-15);
        let sum = sp.dot(&sm) + sm.dot(&sp);
        assert!(norm_max(&(sum - identity(2))) < 1e-15);
        // σ⁺σ⁻ projects onto the σ¹ = +1 eigenstate.
        let proj = sp.dot(&sm);
        let plus = proj.dot(&pauli(1).unwrap());
        assert!(norm_max(&(plus - proj)) < 1e-15);
    }

    #[test]
    fn sigma3_from_ladder_difference() {
        // σ⁺ - σ⁻ = iσ³ by definition of σ±.
        let diff = sigma_plus() - sigma_minus();
        let expect = pauli(3).unwrap() * I;
        assert!(norm_max(&(diff - expect)) < 1e-15);
    }

    #[test]
    fn tensor_of_identities_is_identity() {
        assert!(norm_max(&(tensor(&identity(2), &identity(2)) - identity(4))) < 1e-15);
    }

    #[test]
    fn tensor_trace_is_multiplicative() {
        let a = pauli(1).unwrap() + identity(2) * Complex64::new(0.7, 0.0);
        let b = pauli(3).unwrap() * Complex64::new(0.0, 1.3) + identity(2);
        let lhs = trace(&tensor(&a, &b));
        let rhs = trace(&a) * trace(&b);
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn tensor_sigma3_sigma3_eigenvalue() {
        // |-1⟩_A |1⟩_B is basis index 1 (slot A slow); σ³⊗σ³ gives (-1)(+1).
        let op = tensor(&pauli(3).unwrap(), &pauli(3).unwrap());
        let mut vec = [ZERO; 4];
        vec[1] = ONE;
        let mut out = [ZERO; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i] += op[(i, j)] * vec[j];
            }
        }
        assert!((out[1] - (-ONE)).norm() < 1e-15);
        for (i, v) in out.iter().enumerate() {
            if i != 1 {
                assert!(v.norm() < 1e-15);
            }
        }
    }

    #[test]
    fn partial_trace_of_product_recovers_first_factor() {
        let rho_a = DensityMatrix::from_pure(&[ONE, I]).unwrap();
        let rho_b = DensityMatrix::maximally_mixed(2).unwrap();
        let joint = tensor(rho_a.matrix(), rho_b.matrix());
        let back = partial_trace_b(&joint).unwrap();
        assert!(norm_max(&(back - rho_a.matrix().clone())) < 1e-15);
    }

    #[test]
    fn partial_trace_of_bell_state_is_mixed() {
        // (|-1,-1⟩ + |1,1⟩)/√2 -> I/2.
        let amps = [ONE, ZERO, ZERO, ONE];
        let bell = DensityMatrix::from_pure(&amps).unwrap();
        let red = partial_trace_b(bell.matrix()).unwrap();
        let expect = identity(2) * Complex64::new(0.5, 0.0);
        assert!(norm_max(&(red - expect)) < 1e-15);
    }

    #[test]
    fn purity_coherence_examples() {
        let pure = DensityMatrix::equal_superposition();
        assert_abs_diff_eq!(purity_coherence(&pure), 1.0, epsilon = 1e-12);
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        assert_abs_diff_eq!(purity_coherence(&mixed), 0.0, epsilon = 1e-12);
        let diag = DensityMatrix::new(ndarray::array![
            [Complex64::new(0.75, 0.0), ZERO],
            [ZERO, Complex64::new(0.25, 0.0)]
        ])
        .unwrap();
        assert_abs_diff_eq!(purity_coherence(&diag), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn density_matrix_rejects_invalid_states() {
        // Trace 2.
        assert!(DensityMatrix::new(identity(2)).is_err());
        // Non-Hermitian.
        let m = ndarray::array![[ONE, ONE], [ZERO, ZERO]];
        assert!(DensityMatrix::new(m).is_err());
        // Negative eigenvalue.
        let m = ndarray::array![
            [Complex64::new(1.5, 0.0), ZERO],
            [ZERO, Complex64::new(-0.5, 0.0)]
        ];
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn jacobi_eigenvalues_of_diagonal_matrix() {
        let m = ndarray::array![
            [Complex64::new(2.0, 0.0), ZERO],
            [ZERO, Complex64::new(-1.0, 0.0)]
        ];
        let eigs = hermitian_eigenvalues(&m).unwrap();
        assert_abs_diff_eq!(eigs[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(eigs[1], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn jacobi_eigenvalues_of_pauli2() {
        let eigs = hermitian_eigenvalues(&pauli(2).unwrap()).unwrap();
        assert_abs_diff_eq!(eigs[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eigs[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_generator_keeps_state_constant() {
        let rho0 = DensityMatrix::equal_superposition();
        let grid = TimeGrid::new(0.01, 1.0, 10).unwrap();
        let traj = integrate_master(|_| Array2::from_elem((2, 2), ZERO), &rho0, &grid).unwrap();
        for state in &traj.states {
            assert!(norm_max(&(state.clone() - rho0.matrix().clone())) < 1e-14);
        }
        assert_eq!(traj.times.len(), 11);
    }

    #[test]
    fn unitary_evolution_preserves_purity() {
        let h = pauli(3).unwrap();
        let rho0 = DensityMatrix::equal_superposition();
        let grid = TimeGrid::new(1e-3, 10.0, 100).unwrap();
        let traj = integrate_master(
            move |rho| commutator(&h, rho) * (-I),
            &rho0,
            &grid,
        )
        .unwrap();
        for state in &traj.states {
            let rho = DensityMatrix::new(state.clone()).unwrap();
            assert!(
                (purity_coherence(&rho) - 1.0).abs() < 1e-8,
                "purity lost: {}",
                purity_coherence(&rho)
            );
        }
    }

    #[test]
    fn rk4_terminal_error_is_fourth_order() {
        // Damped-precessing qubit: dρ/dt = -i[H,ρ] + dephasing along σ³.
        let h = pauli(1).unwrap();
        let l = pauli(3).unwrap();
        let rhs = move |rho: &Array2<Complex64>| {
            let unitary = commutator(&h, rho) * (-I);
            let dephase =
                (l.dot(rho).dot(&l) - rho) * Complex64::new(0.25, 0.0);
            unitary + dephase
        };
        let rho0 = DensityMatrix::equal_superposition();
        let terminal = |dt: f64| {
            let grid = TimeGrid::new(dt, 2.0, (2.0 / dt).round() as usize).unwrap();
            integrate_master(&rhs, &rho0, &grid)
                .unwrap()
                .states
                .pop()
                .unwrap()
        };
        let reference = terminal(1e-4);
        let err_coarse = norm_max(&(terminal(0.08) - &reference));
        let err_fine = norm_max(&(terminal(0.04) - &reference));
        assert!(
            err_fine * 14.0 <= err_coarse,
            "not 4th order: {err_coarse:.3e} -> {err_fine:.3e}"
        );
    }

    #[test]
    fn linear_propagation_matches_master_for_states() {
        // On a valid state the raw linear propagator and the projected
        // integrator agree closely (projections only remove roundoff).
        let h = pauli(1).unwrap();
        let rhs = move |rho: &Array2<Complex64>| commutator(&h, rho) * (-I);
        let rho0 = DensityMatrix::equal_superposition();
        let grid = TimeGrid::new(1e-3, 1.0, 1000).unwrap();
        let traj = integrate_master(&rhs, &rho0, &grid).unwrap();
        let (_, ops) = propagate_linear(&rhs, rho0.matrix(), &grid);
        let diff = norm_max(&(ops.last().unwrap().clone() - traj.states.last().unwrap().clone()));
        assert!(diff < 1e-12, "diff {diff:.3e}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn partial_trace_duality_on_random_states(seed in 0u64..1_000_000) {
            // Tr[Tr_B(ρ) σ¹] = Tr[ρ (σ¹ ⊗ I)] for random 4x4 states.
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let a = Array2::from_shape_fn((4, 4), |_| {
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            let raw = a.dot(&dagger(&a));
            let tr = trace(&raw);
            let rho = raw.mapv(|z| z / tr);

            let s1 = pauli(1).unwrap();
            let lhs = trace(&partial_trace_b(&rho).unwrap().dot(&s1));
            let rhs = trace(&rho.dot(&tensor(&s1, &identity(2))));
            prop_assert!((lhs - rhs).norm() < 1e-12);

            // And tensor-then-trace is the identity on the first factor.
            let qa = {
                let b = Array2::from_shape_fn((2, 2), |_| {
                    Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
                });
                let raw = b.dot(&dagger(&b));
                let tr = trace(&raw);
                b.dot(&dagger(&b)).mapv(|z| z / tr)
            };
            let qb = DensityMatrix::maximally_mixed(2).unwrap();
            let back = partial_trace_b(&tensor(&qa, qb.matrix())).unwrap();
            prop_assert!(norm_max(&(back - qa)) < 1e-12);
        }

        #[test]
        fn jacobi_eigenvalues_match_trace_moments(seed in 0u64..1_000_000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let a = Array2::from_shape_fn((4, 4), |_| {
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            let h = (&a + &dagger(&a)).mapv(|z| z * Complex64::new(0.5, 0.0));
            let eigs = hermitian_eigenvalues(&h).unwrap();
            // Power sums of the spectrum equal traces of powers.
            let mut pw = identity(4);
            for k in 1..=4usize {
                pw = pw.dot(&h);
                let sum: f64 = eigs.iter().map(|e| e.powi(k as i32)).sum();
                let tr = trace(&pw);
                prop_assert!((tr.im).abs() < 1e-10);
                prop_assert!((sum - tr.re).abs() < 1e-9 * (1.0 + tr.re.abs()),
                    "moment {k}: {sum} vs {}", tr.re);
            }
        }
    }
}
