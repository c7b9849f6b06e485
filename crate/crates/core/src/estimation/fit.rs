//! Damped least-squares fit of a single transmission dip.
//!
//! The line shape is a skewed Lorentzian
//!
//! ```text
//! T(ω) = 1 − d·W²/(x² + W²),   x = ω − c,   W = γ + s·x
//! ```
//!
//! With s = 0 this is the plain Lorentzian dip of depth d and half-width γ.
//! The linear width term absorbs the asymmetry of dips that sit close to a
//! transparency point, which otherwise drags a symmetric fit's centre by a
//! sizeable fraction of the width. The minimum stays at x = 0 for any s, and
//! the half-depth crossings are at x = γ/(1−s) and x = −γ/(1+s), so the
//! full width at half minimum is 2γ/(1−s²).

/// Bound on the skew parameter; keeps W positive across the ±3 half-width
/// fit window and the width formula well conditioned.
const MAX_SKEW: f64 = 0.5;
const MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub center: f64,
    /// Standard error of `center` from the fit covariance.
    pub center_stderr: f64,
    pub fwhm: f64,
    pub depth: f64,
    pub skew: f64,
    /// Root-mean-square residual of T over the fit window.
    pub rms_residual: f64,
}

/// Parameters in scaled units u = (ω − origin)/scale: [c, γ, d, s].
type Params = [f64; 4];

fn model(p: &Params, u: f64) -> (f64, [f64; 4]) {
    let [c, g, d, s] = *p;
    let x = u - c;
    let w = g + s * x;
    let den = x * x + w * w;
    let q = w * w / den;
    let dq_dw = 2.0 * w * x * x / (den * den);
    let dq_dx = -2.0 * x * w * w / (den * den);
    let f = 1.0 - d * q;
    // x depends on c with slope −1, and W on c through s·x.
    let jac = [d * (dq_dx + s * dq_dw), -d * dq_dw, -q, -d * dq_dw * x];
    (f, jac)
}

fn sum_sq(p: &Params, u: &[f64], y: &[f64]) -> f64 {
    u.iter().zip(y).map(|(&ui, &yi)| (yi - model(p, ui).0).powi(2)).sum()
}

fn normal_equations(p: &Params, u: &[f64], y: &[f64]) -> ([[f64; 4]; 4], [f64; 4]) {
    let mut a = [[0.0; 4]; 4];
    let mut b = [0.0; 4];
    for (&ui, &yi) in u.iter().zip(y) {
        let (f, j) = model(p, ui);
        let r = yi - f;
        for row in 0..4 {
            b[row] += j[row] * r;
            for col in 0..4 {
                a[row][col] += j[row] * j[col];
            }
        }
    }
    (a, b)
}

/// Solves a small dense system by Gaussian elimination with partial
/// pivoting. Returns `None` when the matrix is numerically singular.
pub(crate) fn solve_small<const N: usize>(mut a: [[f64; N]; N], mut b: [f64; N]) -> Option<[f64; N]> {
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(scale > 0.0 && scale.is_finite()) {
        return None;
    }
    for k in 0..N {
        let pivot = (k..N).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[pivot][k].abs() <= 1e-14 * scale {
            return None;
        }
        a.swap(k, pivot);
        b.swap(k, pivot);
        for i in k + 1..N {
            let f = a[i][k] / a[k][k];
            for j in k..N {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = [0.0; N];
    for k in (0..N).rev() {
        let s: f64 = (k + 1..N).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Some(x)
}

fn constrain(mut p: Params, u_span: f64) -> Params {
    p[0] = p[0].clamp(-u_span, u_span);
    p[1] = p[1].max(1e-6);
    p[2] = p[2].clamp(1e-9, 1.5);
    p[3] = p[3].clamp(-MAX_SKEW, MAX_SKEW);
    p
}

/// Fits one dip. `center`, `half_width` and `depth` are the starting guess
/// (discrete minimum, naive half-depth half-width, 1 − T_min). Returns
/// `None` with fewer than six samples or when the fit diverges.
pub fn fit_dip(omega: &[f64], t: &[f64], center: f64, half_width: f64, depth: f64) -> Option<LineFit> {
    let n = omega.len();
    if n < 6 || t.len() != n || !(half_width > 0.0) {
        return None;
    }
    let u: Vec<f64> = omega.iter().map(|w| (w - center) / half_width).collect();
    let u_span = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut p: Params = [0.0, 1.0, depth.clamp(1e-6, 1.0), 0.0];
    let mut cost = sum_sq(&p, &u, t);
    let mut lambda = 1e-3;
    for _ in 0..MAX_ITER {
        let (a, b) = normal_equations(&p, &u, t);
        let mut improved = false;
        while lambda < 1e12 {
            let mut damped = a;
            for (k, row) in damped.iter_mut().enumerate() {
                row[k] += lambda * a[k][k].max(1e-12);
            }
            let Some(step) = solve_small(damped, b) else {
                lambda *= 10.0;
                continue;
            };
            let trial = constrain([p[0] + step[0], p[1] + step[1], p[2] + step[2], p[3] + step[3]], u_span);
            let trial_cost = sum_sq(&trial, &u, t);
            if trial_cost.is_finite() && trial_cost <= cost {
                let small = step.iter().all(|s| s.abs() < 1e-13);
                let flat = cost - trial_cost <= 1e-15 * cost.max(f64::MIN_POSITIVE);
                p = trial;
                cost = trial_cost;
                lambda = (lambda * 0.1).max(1e-12);
                improved = !(small || flat);
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let [c, g, d, s] = p;
    if !(c.is_finite() && g.is_finite() && d.is_finite() && s.is_finite()) || c.abs() >= u_span {
        return None;
    }
    let (a, _) = normal_equations(&p, &u, t);
    let dof = (n - 4) as f64;
    let var_c = solve_small(a, [1.0, 0.0, 0.0, 0.0]).map(|col| col[0] * cost / dof);
    let center_stderr = var_c.filter(|v| *v >= 0.0).map(f64::sqrt).unwrap_or(f64::INFINITY) * half_width;
    Some(LineFit {
        center: center + c * half_width,
        center_stderr,
        fwhm: 2.0 * g / (1.0 - s * s) * half_width,
        depth: d,
        skew: s,
        rms_residual: (cost / n as f64).sqrt(),
    })
}
