//! Microwave scattering spectroscopy of an rf-SQUID qubit coupled to a
//! nanomechanical resonator (NMR), either directly or through a
//! quarter-wavelength transmission-line resonator (STLR).
//!
//! The crate is organised by role:
//!
//! * [`types`]: shared value types (frequencies, model parameters, spectra)
//!   and physical constants.
//! * [`scattering`]: closed-form transmission amplitudes for every coupling
//!   configuration plus the analytic locations of dips and transparency
//!   points.
//! * [`squid`]: finite-difference eigensolver for the flux-basis rf-SQUID
//!   Hamiltonian and the coupling strengths derived from it.
//! * [`classical`]: driven damped oscillator response and thermal
//!   displacement noise, the classical baseline.
//! * [`estimation`]: feature detection, line-shape fitting, classification
//!   and inversion of spectra back to physical parameters.
//! * [`io`]: configuration, CSV/JSON serialization, SVG plots, sweeps and
//!   figure regeneration used by the command-line front end.
//!
//! All frequencies are angular frequencies (rad/s) on a single scale with
//! ħ = 1 inside the scattering formulas. Nothing in the crate converts
//! between Hz and rad/s.

pub mod classical;
pub mod error;
pub mod estimation;
pub mod io;
pub mod scattering;
pub mod squid;
pub mod types;

pub use error::{Error, ErrorKind, Result};
pub use scattering::{FeatureSet, ModelKind, ScatteringModel};
pub use types::{constants, make_frequency_grid, Frequency, ModelParams, ParamField, Spectrum};
