//! Parameter sweeps evaluated in parallel.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimation::add_measurement_noise;
use crate::scattering::{synthesize, ModelKind};
use crate::types::{ModelParams, Spectrum};

use super::config::{NoiseSpec, SweepSpec};

pub const THREADS_ENV: &str = "QSPECTRA_THREADS";

/// A pool capped by `QSPECTRA_THREADS` when set (0 or unset: rayon's
/// default).
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::invalid(THREADS_ENV, format!("expected a thread count, got `{v}`")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Numerical(format!("thread pool: {e}")))
}

/// One spectrum per sweep value, in sweep order. With noise, the value at
/// index i uses seed `seed + i`, so results do not depend on scheduling.
pub fn sweep_spectra(
    model: ModelKind,
    base: &ModelParams,
    sweep: &SweepSpec,
    grid: &[f64],
    noise: Option<NoiseSpec>,
) -> Result<Vec<Spectrum>> {
    sweep.validate()?;
    thread_pool()?.install(|| {
        sweep
            .values
            .par_iter()
            .enumerate()
            .map(|(i, &v)| {
                let mut p = base.clone();
                p.set(sweep.field, v);
                let s = synthesize(model, &p, grid)?;
                match noise {
                    Some(n) => add_measurement_noise(&s, n.sigma, n.seed.wrapping_add(i as u64)),
                    None => Ok(s),
                }
            })
            .collect()
    })
}

/// Long-format table: one row per (sweep value, frequency).
pub fn sweep_to_csv(sweep: &SweepSpec, spectra: &[Spectrum], config: &impl Serialize) -> Result<String> {
    let json = serde_json::to_string(config).map_err(|e| Error::Parse(e.to_string()))?;
    let mut out = format!("# sweep over {}\n# config: {json}\n", sweep.field);
    let _ = writeln!(out, "{},omega,T,phase_rad", sweep.field);
    for (&v, s) in sweep.values.iter().zip(spectra) {
        for ((w, t), p) in s.omega().iter().zip(s.transmission()).zip(s.phase()) {
            let _ = writeln!(out, "{v:.8e},{w:.8e},{t:.8e},{p:.8e}");
        }
    }
    Ok(out)
}
