//! Shared value types and unit conventions.
//!
//! Frequencies are angular (rad/s) throughout. Couplings `v1`/`v2` carry
//! units of √(rad/s · m/s) so that `γ = V²/v_g` is a rate.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// CODATA 2018 values, SI units.
pub mod constants {
    /// Reduced Planck constant, J·s.
    pub const HBAR: f64 = 1.054_571_817e-34;
    /// Elementary charge, C.
    pub const ELECTRON_CHARGE: f64 = 1.602_176_634e-19;
    /// Superconducting flux quantum Φ0 = h/2e, Wb.
    pub const FLUX_QUANTUM: f64 = 2.067_833_848e-15;
    /// Boltzmann constant, J/K.
    pub const BOLTZMANN: f64 = 1.380_649e-23;
}

/// An angular frequency in rad/s. Detunings built from it may be negative.
#[derive(Debug, Clone, Copy, Default, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Frequency(pub f64);

impl Frequency {
    pub const fn new(rad_per_s: f64) -> Self {
        Frequency(rad_per_s)
    }

    pub const fn value(self) -> f64 {
        self.0
    }

    pub fn abs(self) -> Self {
        Frequency(self.0.abs())
    }
}

impl From<f64> for Frequency {
    fn from(v: f64) -> Self {
        Frequency(v)
    }
}

impl From<Frequency> for f64 {
    fn from(f: Frequency) -> Self {
        f.0
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6e} rad/s", self.0)
    }
}

impl Add for Frequency {
    type Output = Frequency;
    fn add(self, rhs: Self) -> Self {
        Frequency(self.0 + rhs.0)
    }
}

impl Sub for Frequency {
    type Output = Frequency;
    fn sub(self, rhs: Self) -> Self {
        Frequency(self.0 - rhs.0)
    }
}

impl Neg for Frequency {
    type Output = Frequency;
    fn neg(self) -> Self {
        Frequency(-self.0)
    }
}

impl Mul<f64> for Frequency {
    type Output = Frequency;
    fn mul(self, rhs: f64) -> Self {
        Frequency(self.0 * rhs)
    }
}

impl Div<f64> for Frequency {
    type Output = Frequency;
    fn div(self, rhs: f64) -> Self {
        Frequency(self.0 / rhs)
    }
}

/// Names of the individual [`ModelParams`] fields, used in error messages
/// and by each model to declare what it reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamField {
    Omega0,
    OmegaB,
    OmegaR,
    GammaC,
    VG,
    V1,
    V2,
    GQ,
    GC,
    GRq,
    MeanN,
}

impl ParamField {
    pub const ALL: [ParamField; 11] = [
        ParamField::Omega0,
        ParamField::OmegaB,
        ParamField::OmegaR,
        ParamField::GammaC,
        ParamField::VG,
        ParamField::V1,
        ParamField::V2,
        ParamField::GQ,
        ParamField::GC,
        ParamField::GRq,
        ParamField::MeanN,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ParamField::Omega0 => "omega0",
            ParamField::OmegaB => "omega_b",
            ParamField::OmegaR => "omega_r",
            ParamField::GammaC => "gamma_c",
            ParamField::VG => "v_g",
            ParamField::V1 => "v1",
            ParamField::V2 => "v2",
            ParamField::GQ => "g_q",
            ParamField::GC => "g_c",
            ParamField::GRq => "g_rq",
            ParamField::MeanN => "mean_n",
        }
    }
}

impl fmt::Display for ParamField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The full physical parameter set of the scattering models. Unset fields
/// are `None`; each model checks that the fields it needs are present.
///
/// `gamma_c`, `v1` and `v_g` are linked by `γc = V1²/v_g`. Any two of them
/// determine the third (see [`ModelParams::gamma_c`] and
/// [`ModelParams::v1`]); setting all three inconsistently is rejected by
/// [`ModelParams::validate`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    /// Qubit transition frequency ω0.
    pub omega0: Option<Frequency>,
    /// Mechanical (NMR) frequency ωb.
    pub omega_b: Option<Frequency>,
    /// STLR fundamental mode ωr.
    pub omega_r: Option<Frequency>,
    /// Qubit decay rate into the feedline γc = V1²/v_g.
    pub gamma_c: Option<Frequency>,
    /// Group speed of the feedline, m/s.
    pub v_g: Option<f64>,
    /// Feedline–qubit coupling V1.
    pub v1: Option<f64>,
    /// Feedline–STLR coupling V2.
    pub v2: Option<f64>,
    pub g_q: Option<Frequency>,
    pub g_c: Option<Frequency>,
    pub g_rq: Option<Frequency>,
    /// Mean phonon number ⟨n⟩ (dispersive model).
    pub mean_n: Option<f64>,
}

impl ModelParams {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_omega0(mut self, v: f64) -> Self {
        self.omega0 = Some(Frequency(v));
        self
    }
    pub fn with_omega_b(mut self, v: f64) -> Self {
        self.omega_b = Some(Frequency(v));
        self
    }
    pub fn with_omega_r(mut self, v: f64) -> Self {
        self.omega_r = Some(Frequency(v));
        self
    }
    pub fn with_gamma_c(mut self, v: f64) -> Self {
        self.gamma_c = Some(Frequency(v));
        self
    }
    pub fn with_v_g(mut self, v: f64) -> Self {
        self.v_g = Some(v);
        self
    }
    pub fn with_v1(mut self, v: f64) -> Self {
        self.v1 = Some(v);
        self
    }
    pub fn with_v2(mut self, v: f64) -> Self {
        self.v2 = Some(v);
        self
    }
    pub fn with_g_q(mut self, v: f64) -> Self {
        self.g_q = Some(Frequency(v));
        self
    }
    pub fn with_g_c(mut self, v: f64) -> Self {
        self.g_c = Some(Frequency(v));
        self
    }
    pub fn with_g_rq(mut self, v: f64) -> Self {
        self.g_rq = Some(Frequency(v));
        self
    }
    pub fn with_mean_n(mut self, v: f64) -> Self {
        self.mean_n = Some(v);
        self
    }

    /// Raw stored value of a field, without derivation.
    pub fn raw(&self, field: ParamField) -> Option<f64> {
        match field {
            ParamField::Omega0 => self.omega0.map(Frequency::value),
            ParamField::OmegaB => self.omega_b.map(Frequency::value),
            ParamField::OmegaR => self.omega_r.map(Frequency::value),
            ParamField::GammaC => self.gamma_c.map(Frequency::value),
            ParamField::VG => self.v_g,
            ParamField::V1 => self.v1,
            ParamField::V2 => self.v2,
            ParamField::GQ => self.g_q.map(Frequency::value),
            ParamField::GC => self.g_c.map(Frequency::value),
            ParamField::GRq => self.g_rq.map(Frequency::value),
            ParamField::MeanN => self.mean_n,
        }
    }

    pub fn set(&mut self, field: ParamField, value: f64) {
        match field {
            ParamField::Omega0 => self.omega0 = Some(Frequency(value)),
            ParamField::OmegaB => self.omega_b = Some(Frequency(value)),
            ParamField::OmegaR => self.omega_r = Some(Frequency(value)),
            ParamField::GammaC => self.gamma_c = Some(Frequency(value)),
            ParamField::VG => self.v_g = Some(value),
            ParamField::V1 => self.v1 = Some(value),
            ParamField::V2 => self.v2 = Some(value),
            ParamField::GQ => self.g_q = Some(Frequency(value)),
            ParamField::GC => self.g_c = Some(Frequency(value)),
            ParamField::GRq => self.g_rq = Some(Frequency(value)),
            ParamField::MeanN => self.mean_n = Some(value),
        }
    }

    /// Value of a field, deriving `gamma_c` or `v1` from the other two
    /// members of the `γc = V1²/v_g` triple when it is not stored.
    pub fn get(&self, field: ParamField) -> Option<f64> {
        match field {
            ParamField::GammaC => self.gamma_c(),
            ParamField::V1 => self.v1(),
            f => self.raw(f),
        }
    }

    pub fn gamma_c(&self) -> Option<f64> {
        match (self.gamma_c, self.v1, self.v_g) {
            (Some(g), _, _) => Some(g.0),
            (None, Some(v1), Some(vg)) => Some(v1 * v1 / vg),
            _ => None,
        }
    }

    pub fn v1(&self) -> Option<f64> {
        match (self.v1, self.gamma_c, self.v_g) {
            (Some(v1), _, _) => Some(v1),
            (None, Some(g), Some(vg)) => Some((g.0 * vg).sqrt()),
            _ => None,
        }
    }

    /// Overwrite every set field from `other` (used for flag-over-file
    /// configuration merging).
    pub fn overlay(&mut self, other: &ModelParams) {
        for field in ParamField::ALL {
            if let Some(v) = other.raw(field) {
                self.set(field, v);
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        for field in ParamField::ALL {
            let Some(v) = self.raw(field) else { continue };
            if !v.is_finite() {
                return Err(Error::invalid(field.name(), format!("must be finite, got {v}")));
            }
            let ok = match field {
                ParamField::VG => v > 0.0,
                _ => v >= 0.0,
            };
            if !ok {
                let bound = if field == ParamField::VG { "> 0" } else { ">= 0" };
                return Err(Error::invalid(field.name(), format!("must be {bound}, got {v}")));
            }
        }
        if let (Some(g), Some(v1), Some(vg)) = (self.gamma_c, self.v1, self.v_g) {
            let derived = v1 * v1 / vg;
            if (derived - g.0).abs() > 1e-12 * g.0.abs().max(derived.abs()) {
                return Err(Error::invalid(
                    "gamma_c",
                    format!("inconsistent with v1²/v_g = {derived:e} (got {:e})", g.0),
                ));
            }
        }
        Ok(())
    }
}

/// `n_points` evenly spaced frequencies from `start` to `stop` inclusive.
pub fn make_frequency_grid(start: f64, stop: f64, n_points: usize) -> Result<Vec<f64>> {
    if !start.is_finite() || !stop.is_finite() {
        return Err(Error::InvalidGrid(format!(
            "bounds must be finite (got {start}, {stop})"
        )));
    }
    if n_points < 2 {
        return Err(Error::InvalidGrid(format!(
            "need at least 2 points, got {n_points}"
        )));
    }
    if start >= stop {
        return Err(Error::InvalidGrid(format!(
            "start must be below stop (got {start:e} .. {stop:e})"
        )));
    }
    let step = (stop - start) / (n_points - 1) as f64;
    let mut grid: Vec<f64> = (0..n_points).map(|i| start + step * i as f64).collect();
    grid[n_points - 1] = stop;
    Ok(grid)
}

/// Map an angle onto (−π, π].
pub fn wrap_phase(phase: f64) -> f64 {
    let mut p = phase.rem_euclid(2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    }
    if p <= -PI {
        p += 2.0 * PI;
    }
    p
}

fn amplitude_phase(t: Complex64) -> f64 {
    if t.norm_sqr() == 0.0 {
        0.0
    } else {
        wrap_phase(t.im.atan2(t.re))
    }
}

/// A transmission spectrum on a strictly increasing frequency grid.
///
/// Spectra built from a model carry the complex amplitude, and `T`/phase
/// are derived from it. Measured or noise-perturbed spectra have no
/// amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    omega: Vec<f64>,
    transmission: Vec<f64>,
    phase: Vec<f64>,
    amplitude: Option<Vec<Complex64>>,
}

impl Spectrum {
    pub fn from_amplitudes(omega: Vec<f64>, amplitude: Vec<Complex64>) -> Result<Self> {
        if omega.len() != amplitude.len() {
            return Err(Error::Parse(format!(
                "{} frequencies but {} amplitudes",
                omega.len(),
                amplitude.len()
            )));
        }
        check_increasing(&omega)?;
        let transmission = amplitude.iter().map(|t| t.norm_sqr()).collect();
        let phase = amplitude.iter().map(|&t| amplitude_phase(t)).collect();
        Ok(Spectrum {
            omega,
            transmission,
            phase,
            amplitude: Some(amplitude),
        })
    }

    /// Model spectra supply `T` computed alongside the amplitude so that it
    /// cannot round above 1.
    pub(crate) fn from_model(omega: Vec<f64>, amplitude: Vec<Complex64>, transmission: Vec<f64>) -> Result<Self> {
        check_increasing(&omega)?;
        let phase = amplitude.iter().map(|&t| amplitude_phase(t)).collect();
        Ok(Spectrum {
            omega,
            transmission,
            phase,
            amplitude: Some(amplitude),
        })
    }

    /// Build from measured `T` and phase columns. `T` must lie in [0, 1].
    pub fn from_measurements(omega: Vec<f64>, transmission: Vec<f64>, phase: Vec<f64>) -> Result<Self> {
        if omega.len() != transmission.len() || omega.len() != phase.len() {
            return Err(Error::Parse("column lengths differ".into()));
        }
        check_increasing(&omega)?;
        if let Some(t) = transmission
            .iter()
            .find(|t| !(0.0..=1.0).contains(*t))
        {
            return Err(Error::Parse(format!("transmission {t} outside [0, 1]")));
        }
        if phase.iter().any(|p| !p.is_finite()) {
            return Err(Error::Parse("non-finite phase".into()));
        }
        Ok(Spectrum {
            omega,
            transmission,
            phase: phase.into_iter().map(wrap_phase).collect(),
            amplitude: None,
        })
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    /// Transmission probability T = |t|².
    pub fn transmission(&self) -> &[f64] {
        &self.transmission
    }

    /// Phase arg(t) in (−π, π].
    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    /// Complex amplitude, when the spectrum came from a model.
    pub fn amplitude(&self) -> Option<&[Complex64]> {
        self.amplitude.as_deref()
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    /// Mean grid spacing.
    pub fn grid_step(&self) -> f64 {
        match self.omega.len() {
            0 | 1 => 0.0,
            n => (self.omega[n - 1] - self.omega[0]) / (n - 1) as f64,
        }
    }
}

fn check_increasing(omega: &[f64]) -> Result<()> {
    if omega.len() < 2 {
        return Err(Error::InvalidGrid("spectrum needs at least 2 points".into()));
    }
    if omega.iter().any(|w| !w.is_finite()) {
        return Err(Error::NonFinite("frequency column".into()));
    }
    if omega.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("frequencies must be strictly increasing".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grid_examples() {
        assert_eq!(make_frequency_grid(0.0, 10.0, 3).unwrap(), vec![0.0, 5.0, 10.0]);
        assert_eq!(make_frequency_grid(1.9e9, 2.3e9, 2).unwrap(), vec![1.9e9, 2.3e9]);
        assert!(make_frequency_grid(2e9, 2e9, 5).is_err());
        assert!(make_frequency_grid(0.0, 1.0, 1).is_err());
        assert!(make_frequency_grid(f64::NAN, 1.0, 4).is_err());
        assert!(make_frequency_grid(0.0, f64::INFINITY, 4).is_err());
    }

    #[test]
    fn flux_quantum_matches_hbar_over_e() {
        let derived = PI * constants::HBAR / constants::ELECTRON_CHARGE;
        assert!((derived / constants::FLUX_QUANTUM - 1.0).abs() < 1e-9);
    }

    #[test]
    fn gamma_c_derivation_both_ways() {
        let p = ModelParams::new().with_v1(1e8).with_v_g(3e8);
        assert!((p.gamma_c().unwrap() - 1e16 / 3e8).abs() < 1e-3);
        let q = ModelParams::new().with_gamma_c(3.3e7).with_v_g(3e8);
        assert!((q.v1().unwrap().powi(2) / 3e8 - 3.3e7).abs() < 1e-6);
        assert!(q.validate().is_ok());
    }

    #[test]
    fn inconsistent_triple_rejected() {
        let p = ModelParams::new()
            .with_v1(1e8)
            .with_v_g(3e8)
            .with_gamma_c(1e7);
        assert!(p.validate().is_err());
    }

    #[test]
    fn negative_coupling_and_zero_speed_rejected() {
        assert!(ModelParams::new().with_g_q(-1.0).validate().is_err());
        assert!(ModelParams::new().with_v_g(0.0).validate().is_err());
        assert!(ModelParams::new().with_omega0(f64::NAN).validate().is_err());
    }

    #[test]
    fn wrap_phase_range() {
        assert_eq!(wrap_phase(-PI), PI);
        assert_eq!(wrap_phase(PI), PI);
        assert!((wrap_phase(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_phase(-0.5) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn spectrum_rejects_unsorted_and_out_of_range() {
        assert!(Spectrum::from_measurements(vec![1.0, 0.5], vec![1.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(Spectrum::from_measurements(vec![0.0, 1.0], vec![1.1, 1.0], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn zero_amplitude_has_zero_phase() {
        let s = Spectrum::from_amplitudes(
            vec![0.0, 1.0],
            vec![Complex64::new(-0.0, -0.0), Complex64::new(-1.0, -0.0)],
        )
        .unwrap();
        assert_eq!(s.phase()[0], 0.0);
        assert_eq!(s.phase()[1], PI);
    }

    fn opt_finite() -> impl Strategy<Value = Option<f64>> {
        prop::option::of(prop::num::f64::NORMAL | prop::num::f64::ZERO | prop::num::f64::SUBNORMAL)
    }

    proptest! {
        #[test]
        fn params_json_roundtrip_is_bit_exact(
            a in opt_finite(), b in opt_finite(), c in opt_finite(),
            d in opt_finite(), e in opt_finite(), f in opt_finite(),
        ) {
            let p = ModelParams {
                omega0: a.map(Frequency),
                omega_b: b.map(Frequency),
                omega_r: None,
                gamma_c: c.map(Frequency),
                v_g: d,
                v1: None,
                v2: e,
                g_q: f.map(Frequency),
                g_c: None,
                g_rq: a.map(Frequency),
                mean_n: b,
            };
            let json = serde_json::to_string(&p).unwrap();
            let back: ModelParams = serde_json::from_str(&json).unwrap();
            for field in ParamField::ALL {
                prop_assert_eq!(p.raw(field).map(f64::to_bits), back.raw(field).map(f64::to_bits));
            }
        }

        #[test]
        fn grid_is_linear_with_exact_endpoints(start in 0f64..1e10, span in 1e3f64..1e10, n in 2usize..500) {
            let stop = start + span;
            let g = make_frequency_grid(start, stop, n).unwrap();
            prop_assert_eq!(g.len(), n);
            prop_assert_eq!(g[0], start);
            prop_assert_eq!(g[n - 1], stop);
            prop_assert!(g.windows(2).all(|w| w[1] > w[0]));
        }
    }
}
