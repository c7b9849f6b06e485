//! Which of the coupling scenarios produced a spectrum.
//!
//! Directly probed qubit: two dips around a transparency point mean a
//! quantum resonator, a single dip is either the bare qubit (at the
//! reference frequency) or a classically driven one (shifted).
//!
//! Qubit behind an STLR: the STLR–qubit pair already gives two dips and a
//! transparency point at the qubit frequency, so the count of transparency
//! points decides instead. One at the reference qubit frequency means no
//! resonator, one shifted means a classical resonator, two mean a quantum
//! one.

use serde::{Deserialize, Serialize};

use super::features::{detect_dips, detect_unity_points, DipFeature};
use super::Measured;
use crate::error::{Error, Result};
use crate::types::Spectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelClass {
    NoNmr,
    QuantumNmr,
    ClassicalNmr,
    Dispersive,
    /// One feature found but no reference frequency to compare it with.
    Unreferenced,
    AbsentFeatures,
    Ambiguous,
}

/// How the probe reaches the qubit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Setup {
    #[default]
    Direct,
    Stlr,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifyOptions {
    pub setup: Setup,
    /// Bare qubit frequency, needed to tell a shifted feature from an
    /// unshifted one.
    pub reference_omega0: Option<f64>,
    /// Distance from the reference that still counts as unshifted. Defaults
    /// to max(3σ, 2·grid step) of the feature compared.
    pub tolerance: Option<f64>,
    pub depth_threshold: f64,
    pub unity_tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            setup: Setup::Direct,
            reference_omega0: None,
            tolerance: None,
            depth_threshold: 0.5,
            unity_tol: 0.05,
        }
    }
}

/// Detects features and classifies them. More features than any scenario
/// produces is an [`Error::Ambiguous`].
pub fn classify(s: &Spectrum, opts: &ClassifyOptions) -> Result<ModelClass> {
    let dips = detect_dips(s, opts.depth_threshold)?;
    let unity = detect_unity_points(s, opts.unity_tol)?;
    classify_features(&dips, &unity, s.grid_step(), opts)
}

/// Transparency points strictly between the outermost dips.
pub(crate) fn interior(unity: &[Measured], dips: &[DipFeature]) -> Vec<Measured> {
    let (Some(first), Some(last)) = (dips.first(), dips.last()) else {
        return Vec::new();
    };
    unity
        .iter()
        .copied()
        .filter(|u| u.value > first.center.0 && u.value < last.center.0)
        .collect()
}

pub fn classify_features(
    dips: &[DipFeature],
    unity: &[Measured],
    step: f64,
    opts: &ClassifyOptions,
) -> Result<ModelClass> {
    let shifted = |value: f64, sigma: f64| -> Option<bool> {
        let reference = opts.reference_omega0?;
        let tol = opts.tolerance.unwrap_or((3.0 * sigma).max(2.0 * step));
        Some((value - reference).abs() > tol)
    };
    let by_shift = |value: f64, sigma: f64| match shifted(value, sigma) {
        Some(true) => ModelClass::ClassicalNmr,
        Some(false) => ModelClass::NoNmr,
        None => ModelClass::Unreferenced,
    };
    if dips.is_empty() {
        return Ok(ModelClass::AbsentFeatures);
    }
    match opts.setup {
        Setup::Direct => match dips.len() {
            1 => Ok(by_shift(dips[0].center.0, dips[0].center_stderr)),
            2 if !interior(unity, dips).is_empty() => Ok(ModelClass::QuantumNmr),
            2 => Err(Error::Ambiguous("two dips without a transparency point between them".into())),
            n => Err(Error::Ambiguous(format!("{n} dips; a directly probed qubit shows at most two"))),
        },
        Setup::Stlr => {
            let inner = interior(unity, dips);
            match inner.len() {
                0 => Err(Error::Ambiguous("no transparency point between the dips".into())),
                1 => Ok(by_shift(inner[0].value, inner[0].sigma)),
                2 => Ok(ModelClass::QuantumNmr),
                n => Err(Error::Ambiguous(format!("{n} transparency points; expected at most two"))),
            }
        }
    }
}
