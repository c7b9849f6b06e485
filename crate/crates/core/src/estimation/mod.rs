//! From a sampled spectrum back to physical parameters: feature detection,
//! line-shape fits, classification of the resonator as absent, classical or
//! quantum, and the closed-form inversions with propagated uncertainties.

mod classify;
mod features;
pub mod fit;
mod invert;
mod noise;
mod report;

use serde::{Deserialize, Serialize};

pub use classify::{classify, classify_features, ClassifyOptions, ModelClass, Setup};
pub use features::{detect_dips, detect_unity_points, DipFeature};
pub use invert::{
    estimate_gc, estimate_gq_direct, estimate_gq_from_unity, estimate_gq_stlr, estimate_grq, estimate_grq_from_unity,
    estimate_omega_b_stlr, estimate_phonon_number, propagate, PhononEstimate,
};
pub use noise::add_measurement_noise;
pub use report::{
    estimate, AmplitudeHints, Coupling, EstimateOptions, EstimationReport, PhononHints, RawFeatures,
    REPORT_SCHEMA_VERSION,
};

/// A value with a symmetric one-sigma uncertainty, both in the value's unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    pub value: f64,
    pub sigma: f64,
}

impl Measured {
    pub fn new(value: f64, sigma: f64) -> Self {
        Measured { value, sigma }
    }

    /// Raises the uncertainty to at least `floor`.
    pub fn with_floor(self, floor: f64) -> Self {
        Measured {
            value: self.value,
            sigma: self.sigma.max(floor),
        }
    }

    /// Whether `truth` lies within `k` sigmas of the value.
    pub fn covers(&self, truth: f64, k: f64) -> bool {
        (self.value - truth).abs() <= k * self.sigma
    }
}
