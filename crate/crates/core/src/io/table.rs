//! Comma-separated tables with `#` comment headers.
//!
//! Numbers are written as `{:.8e}` (nine significant digits) so that
//! identical inputs give byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::classical::{driven_amplitude, driven_phase, thermal_displacement_psd, ClassicalHOParams};
use crate::error::{Error, Result};
use crate::squid::{potential, CircuitSpec, EigenSolution};
use crate::types::constants::FLUX_QUANTUM;
use crate::types::Spectrum;

pub const SPECTRUM_COLUMNS: [&str; 5] = ["omega", "T", "phase_rad", "re_t", "im_t"];

fn num(out: &mut String, v: f64) {
    let _ = write!(out, "{v:.8e}");
}

/// Comment lines: free-form `comments` first, then the configuration as a
/// single JSON line.
fn header(out: &mut String, comments: &[String], config: Option<&impl Serialize>) -> Result<()> {
    for c in comments {
        for line in c.lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
    }
    if let Some(cfg) = config {
        let json = serde_json::to_string(cfg).map_err(|e| Error::Parse(e.to_string()))?;
        out.push_str("# config: ");
        out.push_str(&json);
        out.push('\n');
    }
    Ok(())
}

fn rows(out: &mut String, columns: &[&str], data: &[&[f64]]) {
    out.push_str(&columns.join(","));
    out.push('\n');
    let n = data.first().map_or(0, |c| c.len());
    for i in 0..n {
        for (k, col) in data.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            num(out, col[i]);
        }
        out.push('\n');
    }
}

/// Renders a spectrum table. The `re_t`/`im_t` columns are present only
/// when the spectrum carries its complex amplitude.
pub fn spectrum_to_csv(s: &Spectrum, comments: &[String], config: Option<&impl Serialize>) -> Result<String> {
    let mut out = String::new();
    header(&mut out, comments, config)?;
    match s.amplitude() {
        Some(a) => {
            let re: Vec<f64> = a.iter().map(|t| t.re).collect();
            let im: Vec<f64> = a.iter().map(|t| t.im).collect();
            rows(&mut out, &SPECTRUM_COLUMNS, &[s.omega(), s.transmission(), s.phase(), &re, &im]);
        }
        None => rows(&mut out, &SPECTRUM_COLUMNS[..3], &[s.omega(), s.transmission(), s.phase()]),
    }
    Ok(out)
}

/// Parses a spectrum table. Comment lines are skipped; the `omega`, `T`
/// and `phase_rad` columns are required and the frequency column must be
/// strictly increasing. Amplitude columns, if present, are ignored: the
/// result is a measured spectrum.
pub fn spectrum_from_csv(text: &str) -> Result<Spectrum> {
    let mut reader = ::csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(::csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse(format!("missing column `{name}`")))
    };
    let (iw, it, ip) = (col("omega")?, col("T")?, col("phase_rad")?);
    let (mut omega, mut t, mut phase) = (Vec::new(), Vec::new(), Vec::new());
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        let field = |i: usize| -> Result<f64> {
            let raw = record.get(i).ok_or_else(|| Error::Parse(format!("row {}: too few fields", line + 1)))?;
            raw.parse::<f64>()
                .map_err(|_| Error::Parse(format!("row {}: `{raw}` is not a number", line + 1)))
        };
        omega.push(field(iw)?);
        t.push(field(it)?);
        phase.push(field(ip)?);
    }
    if omega.len() < 2 {
        return Err(Error::Parse("a spectrum needs at least two rows".into()));
    }
    Spectrum::from_measurements(omega, t, phase)
}

/// Wavefunction table: flux in units of Φ0, U(Φ) in J, then one column per
/// state.
pub fn wavefunctions_to_csv(
    sol: &EigenSolution,
    spec: &CircuitSpec,
    states: &[(&str, &[f64])],
    comments: &[String],
    config: Option<&impl Serialize>,
) -> Result<String> {
    let mut out = String::new();
    header(&mut out, comments, config)?;
    let flux: Vec<f64> = sol.flux.iter().map(|p| p / FLUX_QUANTUM).collect();
    let u: Vec<f64> = sol.flux.iter().map(|&p| potential(p, spec)).collect();
    let mut columns = vec!["flux_over_phi0", "U_joules"];
    let mut data: Vec<&[f64]> = vec![&flux, &u];
    for (name, psi) in states {
        columns.push(name);
        data.push(psi);
    }
    rows(&mut out, &columns, &data);
    Ok(out)
}

/// Driven response and thermal noise of the classical oscillator on `grid`.
pub fn classical_to_csv(p: &ClassicalHOParams, grid: &[f64], comments: &[String]) -> Result<String> {
    let mut out = String::new();
    header(&mut out, comments, Some(p))?;
    let mut amp = Vec::with_capacity(grid.len());
    let mut phase = Vec::with_capacity(grid.len());
    let mut psd = Vec::with_capacity(grid.len());
    for &w in grid {
        amp.push(driven_amplitude(w, p)?);
        phase.push(driven_phase(w, p)?);
        psd.push(thermal_displacement_psd(w, p)?);
    }
    rows(&mut out, &["omega", "amplitude_m", "phase_rad", "psd_m2s"], &[grid, &amp, &phase, &psd]);
    Ok(out)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}
