//! The end-to-end estimate: detect, classify, invert.

use serde::{Deserialize, Serialize};

use super::classify::{classify_features, interior, ClassifyOptions, ModelClass, Setup};
use super::features::{detect_dips, detect_unity_points, DipFeature};
use super::invert::{
    estimate_gc, estimate_gq_direct, estimate_gq_from_unity, estimate_gq_stlr, estimate_grq_from_unity,
    estimate_omega_b_stlr, estimate_phonon_number,
};
use super::Measured;
use crate::error::{Error, Result};
use crate::types::constants::HBAR;
use crate::types::Spectrum;

pub const REPORT_SCHEMA_VERSION: &str = "1.0";

/// Resonator inputs that turn a classical coupling into an amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeHints {
    /// In-plane field B0 (T).
    pub b0: f64,
    /// Persistent current I_p (A).
    pub i_p: f64,
    /// Vibrating segment length l (m).
    pub length: f64,
}

/// Known resonator parameters that enable the dispersive phonon readout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhononHints {
    pub omega_b: f64,
    pub g_q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateOptions {
    pub setup: Setup,
    pub reference_omega0: Option<f64>,
    /// Resonator frequency when known independently; needed for g_C.
    pub reference_omega_b: Option<f64>,
    pub phonon: Option<PhononHints>,
    pub mechanics: Option<AmplitudeHints>,
    pub depth_threshold: f64,
    pub unity_tol: f64,
    pub tolerance: Option<f64>,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        let c = ClassifyOptions::default();
        EstimateOptions {
            setup: c.setup,
            reference_omega0: None,
            reference_omega_b: None,
            phonon: None,
            mechanics: None,
            depth_threshold: c.depth_threshold,
            unity_tol: c.unity_tol,
            tolerance: None,
        }
    }
}

impl EstimateOptions {
    fn classify_options(&self) -> ClassifyOptions {
        ClassifyOptions {
            setup: self.setup,
            reference_omega0: self.reference_omega0,
            tolerance: self.tolerance,
            depth_threshold: self.depth_threshold,
            unity_tol: self.unity_tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    GQ,
    GC,
    GRq,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawFeatures {
    pub dips: Vec<DipFeature>,
    pub unity_points: Vec<Measured>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    pub schema_version: String,
    pub model_class: ModelClass,
    pub setup: Setup,
    pub omega0_est: Option<Measured>,
    pub omega_b_est: Option<Measured>,
    pub omega_r_est: Option<Measured>,
    /// The coupling that identifies the class (see `g_kind`).
    pub g_est: Option<Measured>,
    pub g_kind: Option<Coupling>,
    /// STLR–qubit coupling, for STLR spectra.
    pub g_rq_est: Option<Measured>,
    pub phonon_n_est: Option<u64>,
    pub phonon_residual: Option<f64>,
    /// Classical vibration amplitude A_C (m).
    pub amplitude_est: Option<Measured>,
    pub raw_features: RawFeatures,
    pub notes: Vec<String>,
}

impl EstimationReport {
    fn new(class: ModelClass, setup: Setup, raw: RawFeatures) -> Self {
        EstimationReport {
            schema_version: REPORT_SCHEMA_VERSION.to_string(),
            model_class: class,
            setup,
            omega0_est: None,
            omega_b_est: None,
            omega_r_est: None,
            g_est: None,
            g_kind: None,
            g_rq_est: None,
            phonon_n_est: None,
            phonon_residual: None,
            amplitude_est: None,
            raw_features: raw,
            notes: Vec::new(),
        }
    }

    fn apply_floor(&mut self, floor: f64) {
        for m in [
            &mut self.omega0_est,
            &mut self.omega_b_est,
            &mut self.omega_r_est,
            &mut self.g_est,
            &mut self.g_rq_est,
        ]
        .into_iter()
        .flatten()
        {
            *m = m.with_floor(floor);
        }
        for u in &mut self.raw_features.unity_points {
            *u = u.with_floor(floor);
        }
        for d in &mut self.raw_features.dips {
            d.center_sigma = d.center_sigma.max(floor);
        }
    }
}

fn exact(v: f64) -> Measured {
    Measured::new(v, 0.0)
}

/// The `k` deepest dips, returned in frequency order.
fn deepest(dips: &[DipFeature], k: usize) -> Vec<DipFeature> {
    let mut d = dips.to_vec();
    d.sort_by(|a, b| b.depth.total_cmp(&a.depth));
    d.truncate(k);
    d.sort_by(|a, b| a.center.0.total_cmp(&b.center.0));
    d
}

/// The transparency point closest to the middle of two dips.
fn central(unity: &[Measured], lo: f64, hi: f64) -> Option<Measured> {
    let mid = 0.5 * (lo + hi);
    unity
        .iter()
        .copied()
        .filter(|u| u.value > lo && u.value < hi)
        .min_by(|a, b| (a.value - mid).abs().total_cmp(&(b.value - mid).abs()))
}

/// Runs detection, classification and the inversions that the class and
/// the supplied hints allow. Inversions that fail are recorded in `notes`;
/// an ambiguous spectrum yields a report of class `Ambiguous`, not an error.
/// Every reported uncertainty is at least half the grid step.
pub fn estimate(s: &Spectrum, opts: &EstimateOptions) -> Result<EstimationReport> {
    let dips = detect_dips(s, opts.depth_threshold)?;
    let unity = detect_unity_points(s, opts.unity_tol)?;
    let step = s.grid_step();
    let raw = RawFeatures {
        dips: dips.clone(),
        unity_points: unity.clone(),
    };
    let class = match classify_features(&dips, &unity, step, &opts.classify_options()) {
        Ok(c) => c,
        Err(Error::Ambiguous(why)) => {
            let mut r = EstimationReport::new(ModelClass::Ambiguous, opts.setup, raw);
            r.notes.push(why);
            r.apply_floor(0.5 * step);
            return Ok(r);
        }
        Err(e) => return Err(e),
    };
    let mut r = EstimationReport::new(class, opts.setup, raw);
    let reference = opts.reference_omega0.map(exact);
    let note = |r: &mut EstimationReport, e: Error| r.notes.push(e.to_string());

    match (opts.setup, class) {
        (_, ModelClass::AbsentFeatures) => r.notes.push("no dips deeper than the threshold".into()),
        (Setup::Direct, ModelClass::QuantumNmr) => {
            let (lo, hi) = (dips[0].measured(), dips[1].measured());
            let omega_b = central(&unity, lo.value, hi.value).expect("classified with an interior point");
            r.omega_b_est = Some(omega_b);
            let g = match reference {
                Some(w0) => {
                    r.omega0_est = Some(w0);
                    estimate_gq_direct(hi, lo, w0, omega_b)
                }
                None => {
                    // The dip frequencies sum to ω0 + ωb.
                    r.omega0_est = Some(Measured::new(
                        hi.value + lo.value - omega_b.value,
                        (hi.sigma.powi(2) + lo.sigma.powi(2) + omega_b.sigma.powi(2)).sqrt(),
                    ));
                    estimate_gq_from_unity(hi, lo, omega_b)
                }
            };
            match g {
                Ok(g) => {
                    r.g_est = Some(g);
                    r.g_kind = Some(Coupling::GQ);
                }
                Err(e) => note(&mut r, e),
            }
        }
        (Setup::Direct, ModelClass::NoNmr) => r.omega0_est = Some(dips[0].measured()),
        (Setup::Direct, ModelClass::ClassicalNmr) => {
            let dip = dips[0];
            r.omega0_est = reference;
            if let (Some(phonon), Some(w0)) = (opts.phonon, opts.reference_omega0) {
                match estimate_phonon_number(dip.center.0, w0, phonon.g_q, w0 - phonon.omega_b) {
                    Ok(p) => {
                        r.model_class = ModelClass::Dispersive;
                        r.phonon_n_est = Some(p.n);
                        r.phonon_residual = Some(p.residual);
                        r.omega_b_est = Some(exact(phonon.omega_b));
                    }
                    Err(e) => note(&mut r, e),
                }
            }
            if r.model_class == ModelClass::ClassicalNmr {
                classical_coupling(&mut r, dip.measured(), opts);
            }
        }
        (Setup::Direct, ModelClass::Unreferenced) => {
            r.notes.push("single dip: supply a reference qubit frequency to tell a bare qubit from a driven one".into())
        }
        (Setup::Stlr, ModelClass::NoNmr | ModelClass::ClassicalNmr | ModelClass::Unreferenced) => {
            let qubit = interior(&unity, &dips)[0];
            let pair = deepest(&dips, 2);
            if class == ModelClass::NoNmr {
                r.omega0_est = Some(qubit);
            } else {
                r.omega0_est = reference;
            }
            if pair.len() == 2 {
                let (lo, hi) = (pair[0].measured(), pair[1].measured());
                match estimate_grq_from_unity(hi, lo, qubit) {
                    Ok(g) => r.g_rq_est = Some(g),
                    Err(e) => note(&mut r, e),
                }
                r.omega_r_est = Some(Measured::new(
                    hi.value + lo.value - qubit.value,
                    (hi.sigma.powi(2) + lo.sigma.powi(2) + qubit.sigma.powi(2)).sqrt(),
                ));
            }
            match class {
                ModelClass::NoNmr => {
                    r.g_est = r.g_rq_est;
                    r.g_kind = r.g_rq_est.map(|_| Coupling::GRq);
                }
                ModelClass::ClassicalNmr => classical_coupling(&mut r, qubit, opts),
                _ => r.notes.push(
                    "single transparency point: supply a reference qubit frequency to tell a bare qubit from a driven one"
                        .into(),
                ),
            }
        }
        (Setup::Stlr, ModelClass::QuantumNmr) => {
            let inner = interior(&unity, &dips);
            let (pm, pp) = (inner[0], inner[1]);
            match reference {
                Some(w0) => {
                    r.omega0_est = Some(w0);
                    match estimate_omega_b_stlr(pp, pm, w0) {
                        Ok(wb) => r.omega_b_est = Some(wb),
                        Err(e) => note(&mut r, e),
                    }
                    match estimate_gq_stlr(pp, pm, w0) {
                        Ok(g) => {
                            r.g_est = Some(g);
                            r.g_kind = Some(Coupling::GQ);
                        }
                        Err(e) => note(&mut r, e),
                    }
                }
                None => r
                    .notes
                    .push("two transparency points: ωb and g_Q need the reference qubit frequency".into()),
            }
        }
        (_, ModelClass::Dispersive | ModelClass::Ambiguous) => unreachable!("not produced by classification"),
    }
    r.apply_floor(0.5 * step);
    Ok(r)
}

/// g_C from the dressed qubit frequency, and A_C when the resonator is
/// described.
fn classical_coupling(r: &mut EstimationReport, dressed: Measured, opts: &EstimateOptions) {
    let (Some(w0), Some(wb)) = (opts.reference_omega0, opts.reference_omega_b) else {
        r.notes
            .push("g_C needs both the reference qubit frequency and the resonator frequency".into());
        return;
    };
    match estimate_gc(dressed, exact(w0), exact(wb)) {
        Ok(g) => {
            r.g_est = Some(g);
            r.g_kind = Some(Coupling::GC);
            if let Some(m) = opts.mechanics {
                let scale = HBAR / (m.b0 * m.i_p.abs() * m.length);
                r.amplitude_est = Some(Measured::new(g.value * scale, g.sigma * scale));
            }
        }
        Err(e) => r.notes.push(e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::add_measurement_noise;
    use crate::scattering::{synthesize, ModelKind};
    use crate::types::{make_frequency_grid, ModelParams};
    use approx::assert_relative_eq;

    fn fig3_spectrum() -> Spectrum {
        let p = ModelParams::new().with_omega0(2.1e9).with_omega_b(2.0e9).with_g_q(1e8).with_gamma_c(3.3e7);
        synthesize(ModelKind::QubitQnmr, &p, &make_frequency_grid(1.8e9, 2.3e9, 4001).unwrap()).unwrap()
    }

    #[test]
    fn qnmr_round_trip_without_reference() {
        let s = fig3_spectrum();
        let r = estimate(&s, &EstimateOptions::default()).unwrap();
        assert_eq!(r.model_class, ModelClass::QuantumNmr);
        assert_eq!(r.schema_version, "1.0");
        let wb = r.omega_b_est.unwrap();
        assert!((wb.value - 2e9).abs() <= s.grid_step());
        let g = r.g_est.unwrap();
        assert!(g.covers(1e8, 1.0), "{g:?}");
        assert_relative_eq!(g.value, 1e8, max_relative = 1e-3);
        assert!(r.omega0_est.unwrap().covers(2.1e9, 1.0));
    }

    #[test]
    fn qnmr_with_reference() {
        let opts = EstimateOptions {
            reference_omega0: Some(2.1e9),
            ..Default::default()
        };
        let r = estimate(&fig3_spectrum(), &opts).unwrap();
        assert_relative_eq!(r.g_est.unwrap().value, 1e8, max_relative = 1e-3);
    }

    #[test]
    fn cnmr_round_trip_and_amplitude() {
        let p = ModelParams::new().with_omega0(2.1e9).with_omega_b(2.0e9).with_g_c(1e8).with_gamma_c(3.3e7);
        let s = synthesize(ModelKind::QubitCnmr, &p, &make_frequency_grid(1.8e9, 2.3e9, 4001).unwrap()).unwrap();
        let mech = AmplitudeHints {
            b0: 5e-3,
            i_p: 9.44e-8,
            length: 1e-5,
        };
        let opts = EstimateOptions {
            reference_omega0: Some(2.1e9),
            reference_omega_b: Some(2.0e9),
            mechanics: Some(mech),
            ..Default::default()
        };
        let r = estimate(&s, &opts).unwrap();
        assert_eq!(r.model_class, ModelClass::ClassicalNmr);
        let g = r.g_est.unwrap();
        assert_eq!(r.g_kind, Some(Coupling::GC));
        assert!(g.covers(1e8, 1.0), "{g:?}");
        assert_relative_eq!(g.value, 1e8, max_relative = 1e-3);
        let a = r.amplitude_est.unwrap();
        assert_relative_eq!(a.value, HBAR * g.value / (5e-3 * 9.44e-8 * 1e-5), max_relative = 1e-12);
    }

    #[test]
    fn dispersive_phonon_readout() {
        let grid = make_frequency_grid(2.0e9, 2.2e9, 4001).unwrap();
        for n in 0..4 {
            let p = ModelParams::new()
                .with_omega0(2.1e9)
                .with_omega_b(2.0e9)
                .with_g_q(3e7)
                .with_gamma_c(1e6)
                .with_mean_n(n as f64);
            let s = synthesize(ModelKind::QubitQnmrDispersive, &p, &grid).unwrap();
            let opts = EstimateOptions {
                reference_omega0: Some(2.1e9),
                phonon: Some(PhononHints {
                    omega_b: 2.0e9,
                    g_q: 3e7,
                }),
                ..Default::default()
            };
            let r = estimate(&s, &opts).unwrap();
            assert_eq!(r.model_class, ModelClass::Dispersive);
            assert_eq!(r.phonon_n_est, Some(n));
        }
    }

    #[test]
    fn stlr_reports() {
        let base = ModelParams::new()
            .with_omega0(2.1e9)
            .with_omega_r(2.0e9)
            .with_g_rq(1e8)
            .with_v2(1e8)
            .with_v_g(3e8);
        let grid = make_frequency_grid(1.7e9, 2.4e9, 4001).unwrap();
        let opts = EstimateOptions {
            setup: Setup::Stlr,
            reference_omega0: Some(2.1e9),
            ..Default::default()
        };

        let s = synthesize(ModelKind::StlrQubit, &base, &grid).unwrap();
        let r = estimate(&s, &opts).unwrap();
        assert_eq!(r.model_class, ModelClass::NoNmr);
        assert!(r.g_rq_est.unwrap().covers(1e8, 1.0));
        assert!(r.omega_r_est.unwrap().covers(2.0e9, 1.0));

        let q = base.with_omega_b(2.0e9).with_g_q(1e8);
        let s = synthesize(ModelKind::StlrQubitQnmr, &q, &grid).unwrap();
        let r = estimate(&s, &opts).unwrap();
        assert_eq!(r.model_class, ModelClass::QuantumNmr);
        assert!(r.omega_b_est.unwrap().covers(2.0e9, 1.0), "{:?}", r.omega_b_est);
        assert_relative_eq!(r.g_est.unwrap().value, 1e8, max_relative = 1e-2);
    }

    #[test]
    fn flat_and_ambiguous_reports() {
        let g = make_frequency_grid(0.0, 1.0, 101).unwrap();
        let flat = Spectrum::from_measurements(g.clone(), vec![1.0; 101], vec![0.0; 101]).unwrap();
        let r = estimate(&flat, &EstimateOptions::default()).unwrap();
        assert_eq!(r.model_class, ModelClass::AbsentFeatures);
        let t: Vec<f64> = g.iter().map(|w| (6.0 * std::f64::consts::PI * w).cos().powi(2)).collect();
        let comb = Spectrum::from_measurements(g, t, vec![0.0; 101]).unwrap();
        let r = estimate(&comb, &EstimateOptions::default()).unwrap();
        assert_eq!(r.model_class, ModelClass::Ambiguous);
        assert!(!r.notes.is_empty());
    }

    #[test]
    fn uncertainties_respect_grid_floor() {
        let s = fig3_spectrum();
        let r = estimate(&s, &EstimateOptions::default()).unwrap();
        let floor = 0.5 * s.grid_step();
        for m in [r.omega0_est, r.omega_b_est, r.g_est].into_iter().flatten() {
            assert!(m.sigma >= floor);
        }
        for d in &r.raw_features.dips {
            assert!(d.center_sigma >= floor);
        }
    }

    #[test]
    fn noisy_qnmr_still_recovers_coupling() {
        let s = fig3_spectrum();
        let mut ok = 0;
        for seed in 0..20 {
            let n = add_measurement_noise(&s, 0.01, seed).unwrap();
            if let Ok(r) = estimate(&n, &EstimateOptions::default()) {
                if r.g_est.is_some_and(|g| g.covers(1e8, 3.0)) {
                    ok += 1;
                }
            }
        }
        assert!(ok >= 19, "{ok}/20");
    }
}
