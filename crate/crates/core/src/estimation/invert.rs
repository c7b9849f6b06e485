//! Closed-form inversions from feature frequencies back to couplings, with
//! first-order (delta-method) uncertainty propagation.
//!
//! Inputs are treated as independent. Where a coupling is the square root
//! of a radicand R, σ_g follows from σ_R; close to R = 0 the derivative
//! blows up, so once R is within one σ_R of zero σ_g is held at √σ_R/2,
//! the value the linear formula takes at R = σ_R.

use serde::{Deserialize, Serialize};

use super::Measured;
use crate::error::{Error, Result};

/// Relative slack for radicands that are negative only through rounding.
const RADICAND_SLACK: f64 = 1e-12;

fn quadrature(terms: &[(f64, f64)]) -> f64 {
    terms.iter().map(|(d, s)| (d * s).powi(2)).sum::<f64>().sqrt()
}

/// √R·scale with uncertainty, given R's scale of magnitude for the rounding
/// check.
fn root(radicand: f64, sigma_r: f64, magnitude: f64, scale: f64, what: &str) -> Result<Measured> {
    let r = if radicand < 0.0 && radicand >= -RADICAND_SLACK * magnitude {
        0.0
    } else {
        radicand
    };
    if !(r >= 0.0) {
        return Err(Error::InconsistentFeatures(format!(
            "{what}: radicand {radicand:.6e} is negative"
        )));
    }
    let value = r.sqrt() * scale;
    let sigma = if r > sigma_r {
        sigma_r / (2.0 * r.sqrt())
    } else {
        0.5 * sigma_r.sqrt()
    };
    Ok(Measured::new(value, sigma * scale))
}

fn check(inputs: &[Measured]) -> Result<()> {
    match inputs.iter().find(|m| !(m.value.is_finite() && m.sigma.is_finite())) {
        Some(m) => Err(Error::NonFinite(format!("feature {} ± {}", m.value, m.sigma))),
        None => Ok(()),
    }
}

/// Splitting inversion shared by the direct qubit–QNMR and STLR–qubit
/// cases: g = √((ω+ − ω−)² − (a − b)²)/2.
fn splitting_coupling(plus: Measured, minus: Measured, a: Measured, b: Measured, what: &str) -> Result<Measured> {
    check(&[plus, minus, a, b])?;
    let split = plus.value - minus.value;
    let detune = a.value - b.value;
    let radicand = split * split - detune * detune;
    let sigma_r = quadrature(&[
        (2.0 * split, plus.sigma),
        (2.0 * split, minus.sigma),
        (2.0 * detune, a.sigma),
        (2.0 * detune, b.sigma),
    ]);
    root(radicand, sigma_r, split * split + detune * detune, 0.5, what)
}

/// Qubit–QNMR coupling from the two dips, g_Q = √((ω+−ω−)² − (ω0−ωb)²)/2.
pub fn estimate_gq_direct(plus: Measured, minus: Measured, omega0: Measured, omega_b: Measured) -> Result<Measured> {
    splitting_coupling(plus, minus, omega0, omega_b, "g_Q")
}

/// Qubit–QNMR coupling when ω0 is unknown. With ω0 = ω+ + ω− − ωb the
/// splitting formula becomes g_Q = √((ω+ − ωb)(ωb − ω−)), which is used
/// directly so that the shared dip uncertainties are not counted twice.
pub fn estimate_gq_from_unity(plus: Measured, minus: Measured, omega_b: Measured) -> Result<Measured> {
    product_coupling(plus, minus, omega_b, "g_Q")
}

/// STLR–qubit coupling, g_rq = √((ω'+−ω'−)² − (ω0−ωr)²)/2.
pub fn estimate_grq(plus: Measured, minus: Measured, omega0: Measured, omega_r: Measured) -> Result<Measured> {
    splitting_coupling(plus, minus, omega0, omega_r, "g_rq")
}

/// STLR–qubit coupling with ωr eliminated through ω'+ + ω'− = ω0 + ωr,
/// g_rq = √((ω'+ − ω0)(ω0 − ω'−)), where ω0 sits at the transparency point.
pub fn estimate_grq_from_unity(plus: Measured, minus: Measured, omega0: Measured) -> Result<Measured> {
    product_coupling(plus, minus, omega0, "g_rq")
}

/// √((p − c)(c − m)).
fn product_coupling(plus: Measured, minus: Measured, center: Measured, what: &str) -> Result<Measured> {
    check(&[plus, minus, center])?;
    let up = plus.value - center.value;
    let down = center.value - minus.value;
    let radicand = up * down;
    let sigma_r = quadrature(&[(down, plus.sigma), (up, minus.sigma), (down - up, center.sigma)]);
    root(radicand, sigma_r, up * up + down * down, 1.0, what)
}

/// Classical coupling from the shifted dip, g_C = √(ω̃0² − (ω0+ωb)²/4).
pub fn estimate_gc(omega_tilde: Measured, omega0: Measured, omega_b: Measured) -> Result<Measured> {
    check(&[omega_tilde, omega0, omega_b])?;
    let mean = 0.5 * (omega0.value + omega_b.value);
    let radicand = omega_tilde.value * omega_tilde.value - mean * mean;
    let sigma_r = quadrature(&[
        (2.0 * omega_tilde.value, omega_tilde.sigma),
        (mean, omega0.sigma),
        (mean, omega_b.sigma),
    ]);
    root(radicand, sigma_r, omega_tilde.value.powi(2), 1.0, "g_C")
}

/// NMR frequency from the two STLR transparency points, ωb = ω''+ + ω''− − ω0.
pub fn estimate_omega_b_stlr(pp: Measured, pm: Measured, omega0: Measured) -> Result<Measured> {
    check(&[pp, pm, omega0])?;
    Ok(Measured::new(
        pp.value + pm.value - omega0.value,
        quadrature(&[(1.0, pp.sigma), (1.0, pm.sigma), (1.0, omega0.sigma)]),
    ))
}

/// Qubit–QNMR coupling from the two STLR transparency points,
/// g_Q = √(ω0(ω''− + ω''+) − ω0² − ω''+ω''−).
pub fn estimate_gq_stlr(pp: Measured, pm: Measured, omega0: Measured) -> Result<Measured> {
    check(&[pp, pm, omega0])?;
    let w0 = omega0.value;
    let radicand = w0 * (pm.value + pp.value) - w0 * w0 - pp.value * pm.value;
    let sigma_r = quadrature(&[
        (w0 - pm.value, pp.sigma),
        (pp.value - w0, pm.sigma),
        (pp.value + pm.value - 2.0 * w0, omega0.sigma),
    ]);
    root(radicand, sigma_r, w0 * w0, 1.0, "g_Q")
}

/// Nearest rung of the dispersive phonon ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhononEstimate {
    pub n: u64,
    /// Distance from the nearest rung in units of the spacing g_Q²/Δ.
    pub residual: f64,
}

/// Inverts dip = ω0 + (g_Q²/Δ)(n + ½) for the phonon number.
pub fn estimate_phonon_number(dip_center: f64, omega0: f64, g_q: f64, delta: f64) -> Result<PhononEstimate> {
    if delta == 0.0 {
        return Err(Error::ZeroDetuning);
    }
    if g_q == 0.0 || !g_q.is_finite() {
        return Err(Error::invalid("g_q", "phonon ladder needs a finite, non-zero coupling"));
    }
    if !(dip_center.is_finite() && omega0.is_finite() && delta.is_finite()) {
        return Err(Error::NonFinite("phonon-number inputs".into()));
    }
    let rung = g_q * g_q / delta;
    let x = (dip_center - omega0) / rung - 0.5;
    let n = x.round();
    let residual = (x - n).abs();
    if residual > 0.25 || n < 0.0 {
        return Err(Error::OffLadder { dip: dip_center, residual });
    }
    Ok(PhononEstimate { n: n as u64, residual })
}

/// Central-difference propagation of independent input uncertainties
/// through an arbitrary function. Used as a cross-check of the analytic
/// derivatives.
pub fn propagate(f: impl Fn(&[f64]) -> f64, inputs: &[Measured]) -> Measured {
    let x: Vec<f64> = inputs.iter().map(|m| m.value).collect();
    let value = f(&x);
    let mut var = 0.0;
    for (i, m) in inputs.iter().enumerate() {
        if m.sigma == 0.0 {
            continue;
        }
        let h = 1e-6 * m.value.abs().max(m.sigma);
        let mut up = x.clone();
        let mut down = x.clone();
        up[i] += h;
        down[i] -= h;
        let d = (f(&up) - f(&down)) / (2.0 * h);
        var += (d * m.sigma).powi(2);
    }
    Measured::new(value, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn exact(v: f64) -> Measured {
        Measured::new(v, 0.0)
    }

    #[test]
    fn gq_direct_examples() {
        let g = estimate_gq_direct(exact(2.16180e9), exact(1.93820e9), exact(2.1e9), exact(2.0e9)).unwrap();
        assert_relative_eq!(g.value, 1.0e8, max_relative = 1e-4);
        // Splitting equal to the bare detuning.
        let zero = estimate_gq_direct(exact(2.1e9), exact(2.0e9), exact(2.1e9), exact(2.0e9)).unwrap();
        assert_eq!(zero.value, 0.0);
        let resonant = estimate_gq_direct(exact(2.1e9), exact(1.9e9), exact(2.0e9), exact(2.0e9)).unwrap();
        assert_relative_eq!(resonant.value, 1.0e8, max_relative = 1e-15);
        assert!(matches!(
            estimate_gq_direct(exact(2.05e9), exact(2.0e9), exact(2.1e9), exact(2.0e9)),
            Err(Error::InconsistentFeatures(_))
        ));
    }

    #[test]
    fn gq_from_unity_matches_derived_omega0() {
        let disc = (1e16f64 + 4e16).sqrt();
        let (lo, hi) = (0.5 * (4.1e9 - disc), 0.5 * (4.1e9 + disc));
        let g = estimate_gq_from_unity(exact(hi), exact(lo), exact(2.0e9)).unwrap();
        assert_relative_eq!(g.value, 1e8, max_relative = 1e-9);
        let via = estimate_gq_direct(exact(hi), exact(lo), exact(hi + lo - 2.0e9), exact(2.0e9)).unwrap();
        assert_relative_eq!(g.value, via.value, max_relative = 1e-9);
    }

    #[test]
    fn gc_examples() {
        let g = estimate_gc(exact(2.05e9f64.hypot(1e8)), exact(2.1e9), exact(2.0e9)).unwrap();
        assert_relative_eq!(g.value, 1e8, max_relative = 1e-6);
        // A seven-digit rounded ω̃0 still lands within 0.2%.
        let rounded = estimate_gc(exact(2.052439e9), exact(2.1e9), exact(2.0e9)).unwrap();
        assert_relative_eq!(rounded.value, 1e8, max_relative = 2e-3);
        assert_eq!(estimate_gc(exact(2.05e9), exact(2.1e9), exact(2.0e9)).unwrap().value, 0.0);
        assert!(estimate_gc(exact(2.0e9), exact(2.1e9), exact(2.0e9)).is_err());
    }

    #[test]
    fn grq_examples() {
        let r = estimate_grq(exact(2.1e9), exact(1.9e9), exact(2.0e9), exact(2.0e9)).unwrap();
        assert_relative_eq!(r.value, 1e8, max_relative = 1e-15);
        let r = estimate_grq(exact(2.16180e9), exact(1.93820e9), exact(2.1e9), exact(2.0e9)).unwrap();
        assert_relative_eq!(r.value, 1e8, max_relative = 1e-4);
        let z = estimate_grq(exact(2.1e9), exact(2.0e9), exact(2.1e9), exact(2.0e9)).unwrap();
        assert_eq!(z.value, 0.0);
    }

    #[test]
    fn stlr_qnmr_examples() {
        let wb = estimate_omega_b_stlr(exact(2.1618e9), exact(1.9382e9), exact(2.1e9)).unwrap();
        assert_relative_eq!(wb.value, 2.0e9, max_relative = 1e-12);
        let sym = estimate_omega_b_stlr(exact(2.2e9), exact(2.0e9), exact(2.1e9)).unwrap();
        assert_eq!(sym.value, 2.1e9);
        let g = estimate_gq_stlr(exact(2.1618e9), exact(1.9382e9), exact(2.1e9)).unwrap();
        assert_relative_eq!(g.value, 1e8, max_relative = 1e-3);
        let s = estimate_omega_b_stlr(Measured::new(1.0, 3.0), Measured::new(1.0, 4.0), exact(0.5)).unwrap();
        assert_eq!(s.sigma, 5.0);
    }

    #[test]
    fn phonon_ladder() {
        let p = estimate_phonon_number(2.1045e9, 2.1e9, 3e7, 1e8).unwrap();
        assert_eq!(p.n, 0);
        assert!(p.residual < 1e-9);
        assert_eq!(estimate_phonon_number(2.1135e9, 2.1e9, 3e7, 1e8).unwrap().n, 1);
        match estimate_phonon_number(2.109e9, 2.1e9, 3e7, 1e8) {
            Err(Error::OffLadder { residual, .. }) => assert!((residual - 0.5).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
        assert!(matches!(estimate_phonon_number(2.1e9, 2.1e9, 3e7, 0.0), Err(Error::ZeroDetuning)));
        assert!(estimate_phonon_number(2.1e9, 2.1e9, 0.0, 1e8).is_err());
        // Below the n = 0 rung.
        assert!(estimate_phonon_number(2.0955e9, 2.1e9, 3e7, 1e8).is_err());
    }

    #[test]
    fn analytic_uncertainty_matches_numeric() {
        let inputs = [
            Measured::new(2.1618e9, 2.4e7),
            Measured::new(1.9382e9, 0.95e7),
            Measured::new(2.1e9, 1e5),
            Measured::new(2.0e9, 1.25e5),
        ];
        let g = estimate_gq_direct(inputs[0], inputs[1], inputs[2], inputs[3]).unwrap();
        let n = propagate(
            |x| ((x[0] - x[1]).powi(2) - (x[2] - x[3]).powi(2)).sqrt() / 2.0,
            &inputs,
        );
        assert_relative_eq!(g.value, n.value, max_relative = 1e-12);
        assert_relative_eq!(g.sigma, n.sigma, max_relative = 1e-4);

        let c = estimate_gc(inputs[0], inputs[2], inputs[3]).unwrap();
        let n = propagate(|x| (x[0] * x[0] - ((x[1] + x[2]) / 2.0).powi(2)).sqrt(), &[inputs[0], inputs[2], inputs[3]]);
        assert_relative_eq!(c.sigma, n.sigma, max_relative = 1e-4);

        let s = estimate_gq_stlr(inputs[0], inputs[1], inputs[2]).unwrap();
        let n = propagate(|x| (x[2] * (x[0] + x[1]) - x[2] * x[2] - x[0] * x[1]).sqrt(), &inputs[..3]);
        assert_relative_eq!(s.sigma, n.sigma, max_relative = 1e-4);

        let u = estimate_gq_from_unity(inputs[0], inputs[1], inputs[3]).unwrap();
        let n = propagate(|x| ((x[0] - x[2]) * (x[2] - x[1])).sqrt(), &[inputs[0], inputs[1], inputs[3]]);
        assert_relative_eq!(u.sigma, n.sigma, max_relative = 1e-4);
    }

    #[test]
    fn uncertainty_stays_finite_at_zero_coupling() {
        let g = estimate_gq_direct(Measured::new(2.1e9, 1e5), Measured::new(2.0e9, 1e5), exact(2.1e9), exact(2.0e9)).unwrap();
        assert_eq!(g.value, 0.0);
        assert!(g.sigma.is_finite() && g.sigma > 0.0);
    }

    proptest! {
        #[test]
        fn gq_direct_increases_with_splitting(
            w0 in 1.5e9f64..2.5e9,
            wb in 1.5e9f64..2.5e9,
            extra in 1e5f64..5e8,
            more in 1e3f64..1e8,
        ) {
            let base = (w0 - wb).abs() + extra;
            let mid = 2.0e9;
            let at = |s: f64| estimate_gq_direct(exact(mid + s / 2.0), exact(mid - s / 2.0), exact(w0), exact(wb)).unwrap().value;
            prop_assert!(at(base + more) > at(base));
        }
    }
}
