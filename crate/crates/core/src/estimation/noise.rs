//! Seeded measurement noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::types::{wrap_phase, Spectrum};

/// Adds zero-mean Gaussian noise of standard deviation `sigma` to T
/// (clamped to [0, 1]) and the same σ, in radians, to the phase. The
/// output carries no complex amplitude. Identical seeds give bit-identical
/// spectra; `sigma = 0` returns the input unchanged.
pub fn add_measurement_noise(s: &Spectrum, sigma: f64, seed: u64) -> Result<Spectrum> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::invalid("sigma", format!("must be finite and >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(s.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::invalid("sigma", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Vec::with_capacity(s.len());
    let mut phase = Vec::with_capacity(s.len());
    for (&ti, &pi) in s.transmission().iter().zip(s.phase()) {
        t.push((ti + normal.sample(&mut rng)).clamp(0.0, 1.0));
        phase.push(wrap_phase(pi + normal.sample(&mut rng)));
    }
    Spectrum::from_measurements(s.omega().to_vec(), t, phase)
}
