//! rf-SQUID circuit in the flux basis.
//!
//! The Hamiltonian H = −(ħ²/2C_J) d²/dΦ² + U(Φ) is discretised with second
//! order central differences on a uniform grid centred on the bias flux Φe,
//! with Dirichlet boundaries. The resulting matrix is symmetric tridiagonal,
//! so the lowest eigenpairs come from Sturm-sequence bisection followed by
//! inverse iteration. Wavefunctions are normalised under grid quadrature,
//! Σ ψ² h = 1.
//!
//! The coupling helpers restore ħ at the formula boundary: every coupling is
//! returned as an angular frequency (energy / ħ).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::constants::{FLUX_QUANTUM, HBAR};
use crate::types::Frequency;

const LEAKAGE_LIMIT: f64 = 1e-6;
const CONVERGENCE_LIMIT: f64 = 1e-3;

/// Circuit constants and discretisation of the flux grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircuitSpec {
    /// Junction capacitance (F).
    pub c_j: f64,
    /// Loop inductance (H).
    pub l: f64,
    /// Critical current (A). Zero turns the circuit into an LC oscillator.
    pub i_c: f64,
    /// External flux (Wb).
    pub phi_e: f64,
    /// Number of grid points, odd so that Φe sits on a node.
    pub grid_points: usize,
    /// Half-width of the grid in units of Φ0.
    pub flux_window: f64,
}

impl Default for CircuitSpec {
    /// The symmetric double well used throughout: C_J = 17 fF, L = 6 nH,
    /// πI_cL/Φ0 = 1, Φe = Φ0/2.
    fn default() -> Self {
        let l = 6e-9;
        CircuitSpec {
            c_j: 1.7e-14,
            l,
            i_c: critical_current_for_unit_beta(l),
            phi_e: 0.5 * FLUX_QUANTUM,
            grid_points: 1001,
            flux_window: 1.0,
        }
    }
}

/// I_c with πI_cL/Φ0 = 1.
pub fn critical_current_for_unit_beta(l: f64) -> f64 {
    FLUX_QUANTUM / (PI * l)
}

impl CircuitSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be finite and > 0, got {v}")))
            }
        };
        positive("c_j", self.c_j)?;
        positive("l", self.l)?;
        positive("flux_window", self.flux_window)?;
        if !(self.i_c.is_finite() && self.i_c >= 0.0) {
            return Err(Error::invalid("i_c", format!("must be finite and >= 0, got {}", self.i_c)));
        }
        if !self.phi_e.is_finite() {
            return Err(Error::invalid("phi_e", "must be finite"));
        }
        if self.grid_points < 201 || self.grid_points % 2 == 0 {
            return Err(Error::invalid(
                "grid_points",
                format!("must be odd and >= 201, got {}", self.grid_points),
            ));
        }
        Ok(())
    }

    /// Grid spacing in Wb.
    pub fn step(&self) -> f64 {
        2.0 * self.flux_window * FLUX_QUANTUM / (self.grid_points - 1) as f64
    }

    /// Flux nodes in Wb, symmetric about Φe.
    pub fn flux_grid(&self) -> Vec<f64> {
        let half = (self.grid_points / 2) as isize;
        let h = self.step();
        (-half..=half).map(|k| self.phi_e + k as f64 * h).collect()
    }

    /// Same circuit on a grid with half the spacing.
    fn refined(&self) -> Self {
        CircuitSpec {
            grid_points: 2 * self.grid_points - 1,
            ..*self
        }
    }
}

/// Potential energy U(Φ) = (Φ−Φe)²/2L − (I_cΦ0/2π)cos(2πΦ/Φ0), in J.
pub fn potential(phi: f64, spec: &CircuitSpec) -> f64 {
    let d = phi - spec.phi_e;
    d * d / (2.0 * spec.l) - spec.i_c * FLUX_QUANTUM / (2.0 * PI) * (2.0 * PI * phi / FLUX_QUANTUM).cos()
}

/// Lowest eigenpairs of the circuit Hamiltonian on its flux grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSolution {
    /// Flux nodes (Wb).
    pub flux: Vec<f64>,
    /// Ascending energies (J).
    pub energies: Vec<f64>,
    /// Real wavefunctions on `flux`, Σ ψ² h = 1. The sign is fixed so that
    /// the leftmost lobe of state n has sign (−1)ⁿ.
    pub wavefunctions: Vec<Vec<f64>>,
    /// Kinetic energy expectation of each state (J).
    pub kinetic: Vec<f64>,
    /// (E1 − E0)/ħ.
    pub omega0: Frequency,
    /// |⟨1|Î|0⟩| (A).
    pub i_p: f64,
    /// ⟨0|Î|0⟩ (A).
    pub i_00: f64,
    /// ⟨1|Î|1⟩ (A).
    pub i_11: f64,
}

impl EigenSolution {
    pub fn step(&self) -> f64 {
        self.flux[1] - self.flux[0]
    }

    pub fn n_states(&self) -> usize {
        self.energies.len()
    }
}

/// Solves for the lowest `n_states` eigenpairs.
///
/// Fails with [`Error::BoundaryLeakage`] when any returned state keeps more
/// than 1e−6 of its peak amplitude at a grid edge, and with
/// [`Error::NotConverged`] when re-solving on a grid with half the spacing
/// moves E0 by more than 1e−3 relative.
pub fn solve_eigensystem(spec: &CircuitSpec, n_states: usize) -> Result<EigenSolution> {
    let sol = solve_unchecked(spec, n_states)?;
    for (state, psi) in sol.wavefunctions.iter().enumerate() {
        let peak = psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let edge = psi[0].abs().max(psi[psi.len() - 1].abs());
        let ratio = edge / peak;
        if ratio > LEAKAGE_LIMIT {
            return Err(Error::BoundaryLeakage { state, ratio });
        }
    }
    let fine = solve_unchecked(&spec.refined(), 2)?;
    let relative_shift = ((fine.energies[0] - sol.energies[0]) / sol.energies[0]).abs();
    if relative_shift > CONVERGENCE_LIMIT {
        return Err(Error::NotConverged { relative_shift });
    }
    Ok(sol)
}

/// Eigenpairs without the leakage and grid-convergence checks.
pub fn solve_unchecked(spec: &CircuitSpec, n_states: usize) -> Result<EigenSolution> {
    spec.validate()?;
    if n_states < 2 || n_states > spec.grid_points {
        return Err(Error::invalid(
            "n_states",
            format!("must lie in [2, {}], got {n_states}", spec.grid_points),
        ));
    }
    let flux = spec.flux_grid();
    let h = spec.step();
    // Energies are measured in units of the hopping scale k = ħ²/(2C_J h²),
    // which keeps the matrix entries O(1).
    let k = HBAR * HBAR / (2.0 * spec.c_j * h * h);
    let diag: Vec<f64> = flux.iter().map(|&p| 2.0 + potential(p, spec) / k).collect();
    let off = -1.0;

    let mut energies = Vec::with_capacity(n_states);
    let mut wavefunctions: Vec<Vec<f64>> = Vec::with_capacity(n_states);
    for j in 0..n_states {
        let lambda = kth_eigenvalue(&diag, off, j);
        let mut psi = inverse_iteration(&diag, off, lambda, &wavefunctions)?;
        let norm = (psi.iter().map(|v| v * v).sum::<f64>() * h).sqrt();
        let lobe = psi.iter().fold(0.0f64, |m, v| m.max(v.abs())) * 1e-3;
        let first = psi.iter().copied().find(|v| v.abs() > lobe).unwrap_or(1.0);
        let want_negative = j % 2 == 1;
        let sign = if (first < 0.0) == want_negative { 1.0 } else { -1.0 };
        psi.iter_mut().for_each(|v| *v *= sign / norm);
        energies.push(rayleigh(&diag, off, &psi) * k);
        wavefunctions.push(psi);
    }
    if energies.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Numerical("eigenvalues are not strictly ascending".into()));
    }

    let kinetic = wavefunctions
        .iter()
        .map(|psi| {
            let n = psi.len();
            let s: f64 = (0..n)
                .map(|i| {
                    let left = if i > 0 { psi[i - 1] } else { 0.0 };
                    let right = if i + 1 < n { psi[i + 1] } else { 0.0 };
                    psi[i] * (2.0 * psi[i] - left - right)
                })
                .sum();
            s * h * k
        })
        .collect();

    let mut sol = EigenSolution {
        flux,
        omega0: Frequency((energies[1] - energies[0]) / HBAR),
        energies,
        wavefunctions,
        kinetic,
        i_p: 0.0,
        i_00: 0.0,
        i_11: 0.0,
    };
    let (i_p, i_00, i_11) = current_matrix_elements(&sol, spec);
    sol.i_p = i_p;
    sol.i_00 = i_00;
    sol.i_11 = i_11;
    Ok(sol)
}

/// ⟨i|(Φ̂−Φe)/L|j⟩ by grid quadrature.
pub fn current_element(sol: &EigenSolution, spec: &CircuitSpec, i: usize, j: usize) -> f64 {
    let h = sol.step();
    sol.flux
        .iter()
        .zip(&sol.wavefunctions[i])
        .zip(&sol.wavefunctions[j])
        .map(|((phi, a), b)| a * b * (phi - spec.phi_e))
        .sum::<f64>()
        * h
        / spec.l
}

/// (|⟨1|Î|0⟩|, ⟨0|Î|0⟩, ⟨1|Î|1⟩) in A.
pub fn current_matrix_elements(sol: &EigenSolution, spec: &CircuitSpec) -> (f64, f64, f64) {
    (
        current_element(sol, spec, 1, 0).abs(),
        current_element(sol, spec, 0, 0),
        current_element(sol, spec, 1, 1),
    )
}

/// Applies the discretised Hamiltonian (in J) to a grid function.
fn apply_hamiltonian(spec: &CircuitSpec, flux: &[f64], psi: &[f64]) -> Vec<f64> {
    let h = flux[1] - flux[0];
    let k = HBAR * HBAR / (2.0 * spec.c_j * h * h);
    let n = psi.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { psi[i - 1] } else { 0.0 };
            let right = if i + 1 < n { psi[i + 1] } else { 0.0 };
            k * (2.0 * psi[i] - left - right) + potential(flux[i], spec) * psi[i]
        })
        .collect()
}

/// Two-level truncation diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    /// ⟨i|H|j⟩ for i, j ∈ {0, 1}, in J.
    pub hamiltonian: [[f64; 2]; 2],
    /// max |⟨0|H|1⟩| / min |⟨i|H|i⟩|.
    pub off_diagonal_ratio: f64,
    /// Probability of |L⟩ = (|0⟩−|1⟩)/√2 at Φ < Φe.
    pub left_mass_of_l: f64,
    /// Probability of |R⟩ = (|0⟩+|1⟩)/√2 at Φ > Φe.
    pub right_mass_of_r: f64,
    /// ⟨L|R⟩.
    pub overlap_lr: f64,
}

impl TruncationReport {
    /// Off-diagonals below 1e−6 of the diagonals and both well states more
    /// than 90% localised.
    pub fn is_valid(&self) -> bool {
        self.off_diagonal_ratio < 1e-6 && self.left_mass_of_l > 0.9 && self.right_mass_of_r > 0.9
    }
}

pub fn qubit_truncation_check(sol: &EigenSolution, spec: &CircuitSpec) -> TruncationReport {
    let h = sol.step();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * h;
    let psi = &sol.wavefunctions;
    let mut hm = [[0.0; 2]; 2];
    for (j, col) in psi.iter().take(2).enumerate() {
        let hpsi = apply_hamiltonian(spec, &sol.flux, col);
        for (i, row) in psi.iter().take(2).enumerate() {
            hm[i][j] = dot(row, &hpsi);
        }
    }
    let off = hm[0][1].abs().max(hm[1][0].abs());
    let diag = hm[0][0].abs().min(hm[1][1].abs());

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let l_state: Vec<f64> = psi[0].iter().zip(&psi[1]).map(|(a, b)| s * (a - b)).collect();
    let r_state: Vec<f64> = psi[0].iter().zip(&psi[1]).map(|(a, b)| s * (a + b)).collect();
    let mass = |state: &[f64], left: bool| {
        sol.flux
            .iter()
            .zip(state)
            .filter(|(phi, _)| if left { **phi < spec.phi_e } else { **phi > spec.phi_e })
            .map(|(_, v)| v * v)
            .sum::<f64>()
            * h
    };
    TruncationReport {
        hamiltonian: hm,
        off_diagonal_ratio: off / diag,
        left_mass_of_l: mass(&l_state, true),
        right_mass_of_r: mass(&r_state, false),
        overlap_lr: dot(&l_state, &r_state),
    }
}

/// Number of eigenvalues of the tridiagonal matrix below `x`.
fn sturm_count(diag: &[f64], off: f64, x: f64) -> usize {
    let off2 = off * off;
    let mut count = 0;
    let mut q = 1.0;
    for (i, &d) in diag.iter().enumerate() {
        q = if i == 0 { d - x } else { d - x - off2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (d.abs() + off.abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `j`-th smallest eigenvalue (0-based) by bisection.
fn kth_eigenvalue(diag: &[f64], off: f64, j: usize) -> f64 {
    let radius = 2.0 * off.abs();
    let mut lo = diag.iter().fold(f64::INFINITY, |m, &d| m.min(d)) - radius;
    let mut hi = diag.iter().fold(f64::NEG_INFINITY, |m, &d| m.max(d)) + radius;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) > j {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn rayleigh(diag: &[f64], off: f64, psi: &[f64]) -> f64 {
    let n = psi.len();
    let mut num = 0.0;
    for i in 0..n {
        let mut y = diag[i] * psi[i];
        if i > 0 {
            y += off * psi[i - 1];
        }
        if i + 1 < n {
            y += off * psi[i + 1];
        }
        num += psi[i] * y;
    }
    num / psi.iter().map(|v| v * v).sum::<f64>()
}

/// Eigenvector for a converged eigenvalue, orthogonalised against `previous`.
fn inverse_iteration(diag: &[f64], off: f64, lambda: f64, previous: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = diag.len();
    let scale = diag.iter().fold(0.0f64, |m, d| m.max(d.abs())) + 2.0 * off.abs();
    let lu = TridiagonalLu::factor(
        vec![off; n - 1],
        diag.iter().map(|d| d - lambda).collect(),
        vec![off; n - 1],
        f64::EPSILON * scale,
    );
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.618).sin()).collect();
    for _ in 0..4 {
        for p in previous {
            let c = x.iter().zip(p).map(|(a, b)| a * b).sum::<f64>() / p.iter().map(|v| v * v).sum::<f64>();
            x.iter_mut().zip(p).for_each(|(a, b)| *a -= c * b);
        }
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Numerical("inverse iteration collapsed".into()));
        }
        x.iter_mut().for_each(|v| *v /= norm);
        lu.solve(&mut x);
    }
    for p in previous {
        let c = x.iter().zip(p).map(|(a, b)| a * b).sum::<f64>() / p.iter().map(|v| v * v).sum::<f64>();
        x.iter_mut().zip(p).for_each(|(a, b)| *a -= c * b);
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("inverse iteration produced non-finite values".into()));
    }
    Ok(x)
}

/// LU factorisation of a general tridiagonal matrix with partial pivoting.
struct TridiagonalLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    fn factor(mut dl: Vec<f64>, mut d: Vec<f64>, mut du: Vec<f64>, tiny: f64) -> Self {
        let n = d.len();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        TridiagonalLu { dl, d, du, du2, swapped }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

/// The nanomechanical resonator and the field threading it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanicalSpec {
    /// Mass (kg).
    pub mass: f64,
    /// Vibrational frequency (rad/s).
    pub omega_b: Frequency,
    /// Length of the vibrating segment l (m).
    pub length: f64,
    /// In-plane magnetic field B0 (T).
    pub b0: f64,
    /// Classical vibration amplitude A_C (m).
    #[serde(default)]
    pub amplitude_c: Option<f64>,
}

impl MechanicalSpec {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("mass", Some(self.mass)),
            ("omega_b", Some(self.omega_b.0)),
            ("length", Some(self.length)),
            ("b0", Some(self.b0)),
            ("amplitude_c", self.amplitude_c),
        ];
        for (name, v) in fields {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::invalid(name, format!("must be finite and > 0, got {v}")));
                }
            }
        }
        Ok(())
    }
}

fn nonzero_current(i_p: f64) -> Result<()> {
    if i_p.is_finite() && i_p != 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("i_p", format!("must be finite and non-zero, got {i_p}")))
    }
}

/// Zero-point displacement √(ħ/2mωb) of the resonator (m).
pub fn zero_point_displacement(mass: f64, omega_b: f64) -> f64 {
    (HBAR / (2.0 * mass * omega_b)).sqrt()
}

/// Quantum coupling g_Q = B0·l·|I_p|·√(ħ/2mωb)/ħ.
pub fn coupling_gq(mech: &MechanicalSpec, i_p: f64) -> Result<Frequency> {
    mech.validate()?;
    nonzero_current(i_p)?;
    Ok(Frequency(
        mech.b0 * mech.length * i_p.abs() * zero_point_displacement(mech.mass, mech.omega_b.0) / HBAR,
    ))
}

/// Classical coupling g_C = B0·l·|I_p|·A_C/ħ. Needs `amplitude_c`.
pub fn coupling_gc(mech: &MechanicalSpec, i_p: f64) -> Result<Frequency> {
    mech.validate()?;
    nonzero_current(i_p)?;
    let a_c = mech
        .amplitude_c
        .ok_or_else(|| Error::invalid("amplitude_c", "required for the classical coupling"))?;
    Ok(Frequency(mech.b0 * mech.length * i_p.abs() * a_c / HBAR))
}

/// Field that produces a given g_Q: B0 = ħg_Q/(l·|I_p|·√(ħ/2mωb)).
pub fn field_from_gq(g_q: f64, mass: f64, omega_b: f64, length: f64, i_p: f64) -> f64 {
    HBAR * g_q / (length * i_p.abs() * zero_point_displacement(mass, omega_b))
}

/// Mass that produces a given g_Q: m = B0²l²I_p²/(2ħg_Q²ωb).
pub fn mass_from_gq(g_q: f64, b0: f64, omega_b: f64, length: f64, i_p: f64) -> f64 {
    (b0 * length * i_p).powi(2) / (2.0 * HBAR * g_q * g_q * omega_b)
}

/// Classical amplitude from g_C: A_C = ħg_C/(B0·|I_p|·l).
pub fn amplitude_from_gc(g_c: f64, b0: f64, i_p: f64, length: f64) -> f64 {
    amplitude_length_product(g_c, b0, i_p) / length
}

/// A_C·l = ħg_C/(B0·|I_p|), available when l is unknown (m²).
pub fn amplitude_length_product(g_c: f64, b0: f64, i_p: f64) -> f64 {
    HBAR * g_c / (b0 * i_p.abs())
}

/// Zero-point current amplitude of the quarter-wave resonator at the
/// coupling point, (π/2L_r)·√(ħ/(ωr·C_r)) (A).
pub fn stlr_current_amplitude(l_r: f64, c_r: f64, omega_r: f64) -> f64 {
    PI / (2.0 * l_r) * (HBAR / (omega_r * c_r)).sqrt()
}

/// Resonator–qubit coupling g_rq = M·|I_p|·I_r/ħ with I_r from
/// [`stlr_current_amplitude`].
pub fn coupling_grq(i_p: f64, m_rq: f64, l_r: f64, c_r: f64, omega_r: Frequency) -> Result<Frequency> {
    nonzero_current(i_p)?;
    for (name, v) in [("m_rq", m_rq), ("l_r", l_r), ("c_r", c_r), ("omega_r", omega_r.0)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::invalid(name, format!("must be finite and > 0, got {v}")));
        }
    }
    Ok(Frequency(m_rq * i_p.abs() * stlr_current_amplitude(l_r, c_r, omega_r.0) / HBAR))
}
