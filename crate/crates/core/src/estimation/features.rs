//! Dip and transparency-point detection on sampled spectra.

use serde::{Deserialize, Serialize};

use super::fit::fit_dip;
use super::Measured;
use crate::error::{Error, Result};
use crate::types::{Frequency, Spectrum};

/// Fit window half-size in naive half-widths.
const WINDOW: f64 = 3.0;

/// A fitted transmission dip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipFeature {
    pub center: Frequency,
    /// One-sigma location uncertainty: FWHM/2, at least half a grid step.
    pub center_sigma: f64,
    /// Statistical error of the fitted centre alone.
    pub center_stderr: f64,
    pub fwhm: Frequency,
    /// 1 − T at the centre.
    pub depth: f64,
    /// RMS residual of the line-shape fit (0 when the fit fell back to
    /// the discrete estimate).
    pub fit_residual: f64,
}

impl DipFeature {
    pub fn measured(&self) -> Measured {
        Measured::new(self.center.0, self.center_sigma)
    }
}

fn check_unit_interval(name: &str, v: f64, hi: f64) -> Result<()> {
    if v > 0.0 && v < hi {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must lie in (0, {hi}), got {v}")))
    }
}

/// Local minima of T at least `threshold` deep, separated by a rise of at
/// least `threshold/2`. Returns indices in ascending order.
fn dip_indices(t: &[f64], threshold: f64) -> Vec<usize> {
    let n = t.len();
    let mut candidates = Vec::new();
    let mut i = 0;
    while i < n {
        // Treat runs of equal values as one sample.
        let mut j = i;
        while j + 1 < n && t[j + 1] == t[i] {
            j += 1;
        }
        let left_higher = i == 0 || t[i - 1] > t[i];
        let right_higher = j + 1 == n || t[j + 1] > t[i];
        if left_higher && right_higher && 1.0 - t[i] >= threshold && i > 0 && j + 1 < n {
            candidates.push((i + j) / 2);
        }
        i = j + 1;
    }
    let prominence = 0.5 * threshold;
    let mut kept: Vec<usize> = Vec::new();
    for c in candidates {
        match kept.last().copied() {
            Some(prev) => {
                let ridge = t[prev..=c].iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
                if ridge - t[prev].max(t[c]) >= prominence {
                    kept.push(c);
                } else if t[c] < t[prev] {
                    *kept.last_mut().unwrap() = c;
                }
            }
            None => kept.push(c),
        }
    }
    kept
}

/// Half-depth crossing on one side of a dip, linearly interpolated.
fn crossing(omega: &[f64], t: &[f64], from: usize, level: f64, forward: bool, stop: usize) -> Option<f64> {
    let mut i = from;
    loop {
        let next = if forward {
            if i + 1 > stop {
                return None;
            }
            i + 1
        } else {
            if i == 0 || i - 1 < stop {
                return None;
            }
            i - 1
        };
        if t[next] >= level {
            let f = (level - t[i]) / (t[next] - t[i]);
            return Some(omega[i] + f * (omega[next] - omega[i]));
        }
        i = next;
    }
}

/// Detects dips deeper than `depth_threshold` and refines each with a
/// line-shape fit over ±3 naive half-widths (clipped halfway to any
/// neighbouring dip).
pub fn detect_dips(s: &Spectrum, depth_threshold: f64) -> Result<Vec<DipFeature>> {
    check_unit_interval("depth_threshold", depth_threshold, 1.0)?;
    let (omega, t) = (s.omega(), s.transmission());
    if omega.len() < 3 {
        return Ok(Vec::new());
    }
    let step = s.grid_step();
    let idx = dip_indices(t, depth_threshold);
    let mut dips = Vec::with_capacity(idx.len());
    for (k, &i) in idx.iter().enumerate() {
        let lo_bound = if k > 0 { (idx[k - 1] + i) / 2 } else { 0 };
        let hi_bound = if k + 1 < idx.len() { (idx[k + 1] + i) / 2 } else { omega.len() - 1 };
        let depth0 = 1.0 - t[i];
        let level = 1.0 - 0.5 * depth0;
        let left = crossing(omega, t, i, level, false, lo_bound);
        let right = crossing(omega, t, i, level, true, hi_bound);
        let half_width = match (left, right) {
            (Some(l), Some(r)) => 0.5 * (r - l),
            (Some(l), None) => omega[i] - l,
            (None, Some(r)) => r - omega[i],
            (None, None) => step,
        }
        .max(0.5 * step);

        let lo = omega.partition_point(|&w| w < omega[i] - WINDOW * half_width).max(lo_bound);
        let hi = omega.partition_point(|&w| w <= omega[i] + WINDOW * half_width).min(hi_bound + 1);
        let fitted = fit_dip(&omega[lo..hi], &t[lo..hi], omega[i], half_width, depth0)
            .filter(|f| f.fwhm > 0.0 && (f.center - omega[i]).abs() <= half_width && f.depth <= 1.0 + 1e-6);
        let feature = match fitted {
            Some(f) => DipFeature {
                center: Frequency(f.center),
                center_sigma: (0.5 * f.fwhm).max(0.5 * step),
                center_stderr: f.center_stderr.max(0.5 * step),
                fwhm: Frequency(f.fwhm),
                depth: f.depth.min(1.0),
                fit_residual: f.rms_residual,
            },
            None => {
                log::debug!("dip fit at {:.6e} fell back to the discrete minimum", omega[i]);
                DipFeature {
                    center: Frequency(omega[i]),
                    center_sigma: half_width.max(0.5 * step),
                    center_stderr: 0.5 * step,
                    fwhm: Frequency(2.0 * half_width),
                    depth: depth0,
                    fit_residual: 0.0,
                }
            }
        };
        dips.push(feature);
    }
    Ok(dips)
}

/// Phase window used to locate the zero crossing inside a transparency run.
const PHASE_WINDOW: f64 = 0.2;

/// Frequencies of complete, phase-free transmission.
///
/// Candidates are maximal runs with T ≥ 1 − `tol` that do not touch either
/// end of the spectrum and contain a sample with |phase| ≤ `tol`. Each is
/// located at the zero of a rational function fitted to −tan(phase) over
/// the run's small-phase samples; if that fails, at the vertex of a parabola through
/// the three highest-T samples. The uncertainty is one grid step.
pub fn detect_unity_points(s: &Spectrum, tol: f64) -> Result<Vec<Measured>> {
    check_unit_interval("tol", tol, 0.1)?;
    let (omega, t, phase) = (s.omega(), s.transmission(), s.phase());
    let n = omega.len();
    let step = s.grid_step();
    let mut points = Vec::new();
    let mut i = 0;
    while i < n {
        if t[i] < 1.0 - tol {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && t[i] >= 1.0 - tol {
            i += 1;
        }
        let end = i; // exclusive
        if start == 0 || end == n {
            continue;
        }
        if !phase[start..end].iter().any(|p| p.abs() <= tol) {
            continue;
        }
        if let Some(w) = phase_zero(&omega[start..end], &phase[start..end]).or_else(|| t_vertex(&omega[start..end], &t[start..end])) {
            points.push(Measured::new(w, step));
        }
    }
    Ok(points)
}

fn phase_zero(omega: &[f64], phase: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = omega
        .iter()
        .zip(phase)
        .filter(|(_, p)| p.abs() <= PHASE_WINDOW)
        .map(|(&w, &p)| (w, -p.tan()))
        .collect();
    if pts.len() < 8 {
        return None;
    }
    let anchor = pts.iter().min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))?.0;
    let scale = pts.iter().fold(0.0f64, |m, p| m.max((p.0 - anchor).abs()));
    if scale == 0.0 {
        return None;
    }
    // −tan(phase) = γx/n is a ratio of low-order polynomials. Fit
    // r·Q(u) = P(u) with deg P = 2, deg Q = 3, Q(0) = 1, which is linear in
    // the coefficients: r = p0 + p1·u + p2·u² − r·(q1·u + q2·u² + q3·u³).
    let mut m = [[0.0; 6]; 6];
    let mut rhs = [0.0; 6];
    for &(w, r) in &pts {
        let u = (w - anchor) / scale;
        let basis = [1.0, u, u * u, -r * u, -r * u * u, -r * u * u * u];
        for row in 0..6 {
            rhs[row] += basis[row] * r;
            for col in 0..6 {
                m[row][col] += basis[row] * basis[col];
            }
        }
    }
    let [a, b, c, ..] = super::fit::solve_small(m, rhs)?;
    let roots: Vec<f64> = if c.abs() <= 1e-12 * b.abs() {
        if b == 0.0 {
            return None;
        }
        vec![-a / b]
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return None;
        }
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        vec![q / c, a / q]
    };
    let u = roots.into_iter().filter(|r| r.abs() <= 1.0).min_by(|x, y| x.abs().total_cmp(&y.abs()))?;
    Some(anchor + u * scale)
}

fn t_vertex(omega: &[f64], t: &[f64]) -> Option<f64> {
    let k = (0..t.len()).max_by(|&a, &b| t[a].total_cmp(&t[b]))?;
    if k == 0 || k + 1 == t.len() {
        return Some(omega[k]);
    }
    let (y0, y1, y2) = (t[k - 1], t[k], t[k + 1]);
    let den = y0 - 2.0 * y1 + y2;
    if den == 0.0 {
        return Some(omega[k]);
    }
    let offset = 0.5 * (y0 - y2) / den;
    Some(omega[k] + offset * 0.5 * (omega[k + 1] - omega[k - 1]))
}
