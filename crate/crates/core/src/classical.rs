//! Classical driven damped oscillator, z̈ + γż + ωb²z = (a/m)cos(ωd t), and
//! its thermal displacement noise under a white Langevin force.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::constants::BOLTZMANN;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalHOParams {
    /// Mass (kg).
    pub mass: f64,
    /// Natural frequency (rad/s).
    pub omega_b: f64,
    /// Dissipation rate (1/s).
    pub gamma: f64,
    /// Drive force amplitude a (N).
    pub drive_amp: f64,
    /// Bath temperature (K).
    pub temperature: f64,
}

impl ClassicalHOParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mass", self.mass), ("omega_b", self.omega_b)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        for (name, v) in [("gamma", self.gamma), ("temperature", self.temperature)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if !self.drive_amp.is_finite() {
            return Err(Error::invalid("drive_amp", "must be finite"));
        }
        Ok(())
    }

    fn response_denominator(&self, omega: f64) -> f64 {
        let detune = self.omega_b * self.omega_b - omega * omega;
        detune * detune + self.gamma * self.gamma * omega * omega
    }

    fn check_drive(&self, omega_d: f64) -> Result<()> {
        self.validate()?;
        if !omega_d.is_finite() {
            return Err(Error::NonFinite(format!("drive frequency {omega_d}")));
        }
        if self.response_denominator(omega_d) == 0.0 {
            return Err(Error::Numerical("undamped drive exactly on resonance".into()));
        }
        Ok(())
    }
}

/// Steady-state amplitude a/(m·√((ωb²−ωd²)² + γ²ωd²)).
pub fn driven_amplitude(omega_d: f64, p: &ClassicalHOParams) -> Result<f64> {
    p.check_drive(omega_d)?;
    Ok(p.drive_amp / (p.mass * p.response_denominator(omega_d).sqrt()))
}

/// Phase lag φ of the response z = A·cos(ωd t − φ), with tan φ =
/// γωd/(ωb²−ωd²). Lies in [0, π] and passes π/2 at ωd = ωb for any γ.
pub fn driven_phase(omega_d: f64, p: &ClassicalHOParams) -> Result<f64> {
    p.check_drive(omega_d)?;
    Ok((p.gamma * omega_d).atan2(p.omega_b * p.omega_b - omega_d * omega_d))
}

/// White force spectral density S_ξ = 2mγk_BT (N²·s).
pub fn thermal_force_psd(p: &ClassicalHOParams) -> f64 {
    2.0 * p.mass * p.gamma * BOLTZMANN * p.temperature
}

/// Displacement spectral density S_x(ω) = 2γk_BT / (m·[(ωb²−ω²)² + γ²ω²]) (m²·s).
pub fn thermal_displacement_psd(omega: f64, p: &ClassicalHOParams) -> Result<f64> {
    p.validate()?;
    if p.gamma <= 0.0 {
        return Err(Error::invalid("gamma", "thermal noise requires gamma > 0"));
    }
    if !omega.is_finite() {
        return Err(Error::NonFinite(format!("frequency {omega}")));
    }
    Ok(2.0 * p.gamma * BOLTZMANN * p.temperature / (p.mass * p.response_denominator(omega)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn params() -> ClassicalHOParams {
        ClassicalHOParams {
            mass: 1e-17,
            omega_b: 2e9,
            gamma: 1e6,
            drive_amp: 1e-12,
            temperature: 0.02,
        }
    }

    #[test]
    fn static_deflection() {
        let p = params();
        assert_relative_eq!(driven_amplitude(0.0, &p).unwrap(), p.drive_amp / (p.mass * p.omega_b * p.omega_b), max_relative = 1e-14);
    }

    #[test]
    fn peak_near_natural_frequency() {
        let p = params();
        let n = 20001;
        let (mut best, mut at) = (0.0, 0.0);
        for i in 0..n {
            let w = p.omega_b + (-5.0 + 10.0 * i as f64 / (n - 1) as f64) * p.gamma;
            let a = driven_amplitude(w, &p).unwrap();
            if a > best {
                best = a;
                at = w;
            }
        }
        assert!((at - p.omega_b).abs() <= p.gamma);
    }

    #[test]
    fn zero_drive_and_pole() {
        let p = ClassicalHOParams { drive_amp: 0.0, ..params() };
        assert_eq!(driven_amplitude(1.9e9, &p).unwrap(), 0.0);
        let undamped = ClassicalHOParams { gamma: 0.0, ..params() };
        assert!(driven_amplitude(undamped.omega_b, &undamped).is_err());
        assert!(driven_amplitude(1.0e9, &undamped).is_ok());
    }

    #[test]
    fn phase_limits() {
        let p = params();
        assert_eq!(driven_phase(p.omega_b, &p).unwrap(), PI / 2.0);
        for g in [1e3, 1e7, 5e8] {
            let q = ClassicalHOParams { gamma: g, ..p };
            assert_eq!(driven_phase(q.omega_b, &q).unwrap(), PI / 2.0);
        }
        assert!(driven_phase(1e-3, &p).unwrap() < 1e-15);
        assert!(PI - driven_phase(1e15, &p).unwrap() < 1e-8);
        // Continuous and increasing through resonance.
        let mut last = 0.0;
        for i in 0..1000 {
            let w = p.omega_b * (0.99 + 0.02 * i as f64 / 999.0);
            let phi = driven_phase(w, &p).unwrap();
            assert!(phi > last && phi < PI);
            last = phi;
        }
    }

    #[test]
    fn steady_state_satisfies_the_equation_of_motion() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let p = ClassicalHOParams {
                mass: rng.random_range(1e-18..1e-15),
                omega_b: rng.random_range(1e8..1e10),
                gamma: rng.random_range(1e4..1e9),
                drive_amp: rng.random_range(1e-14..1e-10),
                temperature: 0.0,
            };
            let wd = p.omega_b * rng.random_range(0.1..3.0);
            let a = driven_amplitude(wd, &p).unwrap();
            let phi = driven_phase(wd, &p).unwrap();
            let force = p.drive_amp / p.mass;
            for k in 0..16 {
                let t = k as f64 * 0.37 / wd;
                let z = a * (wd * t - phi).cos();
                let zd = -a * wd * (wd * t - phi).sin();
                let zdd = -wd * wd * z;
                let lhs = zdd + p.gamma * zd + p.omega_b * p.omega_b * z;
                let rhs = force * (wd * t).cos();
                assert!((lhs - rhs).abs() <= 1e-9 * force, "residual {}", (lhs - rhs).abs() / force);
            }
        }
    }

    #[test]
    fn psd_is_transfer_function_times_force_noise() {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let w: f64 = rng.random_range(-5e9..5e9);
            // |χ(ω)|² with χ = 1/(m(ωb² − ω² − iγω)).
            let chi = num_complex::Complex64::new(p.omega_b * p.omega_b - w * w, -p.gamma * w) * p.mass;
            let via_transfer = thermal_force_psd(&p) / chi.norm_sqr();
            assert_relative_eq!(thermal_displacement_psd(w, &p).unwrap(), via_transfer, max_relative = 1e-12);
        }
    }

    #[test]
    fn psd_even_positive_and_vanishing_at_zero_temperature() {
        let p = params();
        for w in [0.0, 1e8, 1.99e9, 2e9, 7e9] {
            let a = thermal_displacement_psd(w, &p).unwrap();
            assert!(a > 0.0);
            assert_eq!(a, thermal_displacement_psd(-w, &p).unwrap());
        }
        let cold = ClassicalHOParams { temperature: 0.0, ..p };
        assert_eq!(thermal_displacement_psd(2e9, &cold).unwrap(), 0.0);
    }

    #[test]
    fn equipartition_integral() {
        // Q = 20 keeps the line wide enough for a plain trapezoid sum.
        let p = ClassicalHOParams { gamma: 1e8, ..params() };
        let lim = 20.0 * p.omega_b;
        let n = 2_000_001;
        let h = 2.0 * lim / (n - 1) as f64;
        let integral: f64 = (0..n)
            .map(|i| {
                let w = -lim + i as f64 * h;
                let weight = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                weight * thermal_displacement_psd(w, &p).unwrap()
            })
            .sum::<f64>()
            * h;
        let exact = 2.0 * PI * BOLTZMANN * p.temperature / (p.mass * p.omega_b * p.omega_b);
        assert_relative_eq!(integral, exact, max_relative = 0.01);
    }
}
