//! Closed-form single-photon transmission through the qubit / STLR / NMR
//! scatterers.
//!
//! Every configuration reduces to the same shape
//!
//! ```text
//!            n(ω)
//! t(ω) = ─────────────────
//!         n(ω) + i·γ·x(ω)
//! ```
//!
//! with real polynomials `n` and `x` and a single feedline decay rate `γ`
//! (`γc = V1²/v_g` when the qubit touches the line, `γr = V2²/v_g` when the
//! STLR does). Writing it this way clears every internal pole (for example
//! the `g_Q²/(ω − ωb)` term of the STLR–qubit–QNMR amplitude) so that
//! `|t|² = n²/(n² + γ²x²) ≤ 1` holds at every finite frequency, including
//! the measurement points where the textbook forms divide by zero.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Frequency, ModelParams, ParamField, Spectrum};

/// The seven coupling configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Qubit alone on the feedline.
    QubitOnly,
    /// Qubit coupled to a quantised NMR.
    QubitQnmr,
    /// Qubit dispersively coupled to a quantised NMR (phonon-number ladder).
    #[serde(rename = "dispersive")]
    QubitQnmrDispersive,
    /// Qubit driven by a classical NMR.
    QubitCnmr,
    /// STLR on the feedline, qubit behind it.
    StlrQubit,
    StlrQubitQnmr,
    StlrQubitCnmr,
}

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::QubitOnly,
        ModelKind::QubitQnmr,
        ModelKind::QubitQnmrDispersive,
        ModelKind::QubitCnmr,
        ModelKind::StlrQubit,
        ModelKind::StlrQubitQnmr,
        ModelKind::StlrQubitCnmr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::QubitOnly => "qubit-only",
            ModelKind::QubitQnmr => "qubit-qnmr",
            ModelKind::QubitQnmrDispersive => "dispersive",
            ModelKind::QubitCnmr => "qubit-cnmr",
            ModelKind::StlrQubit => "stlr-qubit",
            ModelKind::StlrQubitQnmr => "stlr-qubit-qnmr",
            ModelKind::StlrQubitCnmr => "stlr-qubit-cnmr",
        }
    }

    /// Parameters the model reads. `gamma_c` may be supplied directly or
    /// through `v1` and `v_g`.
    pub fn required(self) -> &'static [ParamField] {
        use ParamField::*;
        match self {
            ModelKind::QubitOnly => &[Omega0, GammaC],
            ModelKind::QubitQnmr => &[Omega0, OmegaB, GQ, GammaC],
            ModelKind::QubitQnmrDispersive => &[Omega0, OmegaB, GQ, GammaC, MeanN],
            ModelKind::QubitCnmr => &[Omega0, OmegaB, GC, GammaC],
            ModelKind::StlrQubit => &[Omega0, OmegaR, GRq, V2, VG],
            ModelKind::StlrQubitQnmr => &[Omega0, OmegaB, OmegaR, GRq, GQ, V2, VG],
            ModelKind::StlrQubitCnmr => &[Omega0, OmegaB, OmegaR, GRq, GC, V2, VG],
        }
    }

    /// Whether the feedline couples to the STLR rather than the qubit.
    pub fn uses_stlr(self) -> bool {
        matches!(
            self,
            ModelKind::StlrQubit | ModelKind::StlrQubitQnmr | ModelKind::StlrQubitCnmr
        )
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .or(match norm.as_str() {
                "qubit-qnmr-dispersive" => Some(ModelKind::QubitQnmrDispersive),
                _ => None,
            })
            .ok_or_else(|| Error::invalid("model", format!("unknown model kind `{s}`")))
    }
}

/// Resolved scatterer in the `n / (n + iγx)` form. Variants are chains of
/// modes hanging off the feedline: `bright` touches the line, `dark` is the
/// end of the chain.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Scatterer {
    /// n = ω − ω_c, x = 1.
    Lorentzian { center: f64, gamma: f64 },
    /// n = (ω − ω_bright)(ω − ω_dark) − g², x = ω − ω_dark.
    TwoMode { bright: f64, dark: f64, g: f64, gamma: f64 },
    /// x = (ω − ω_mid)(ω − ω_dark) − g_inner²,
    /// n = (ω − ω_bright)·x − g_outer²·(ω − ω_dark).
    ThreeMode {
        bright: f64,
        mid: f64,
        dark: f64,
        g_outer: f64,
        g_inner: f64,
        gamma: f64,
    },
}

impl Scatterer {
    fn terms(&self, w: f64) -> (f64, f64, f64) {
        match *self {
            Scatterer::Lorentzian { center, gamma } => (w - center, 1.0, gamma),
            Scatterer::TwoMode { bright, dark, g, gamma } => {
                let x = w - dark;
                ((w - bright) * x - g * g, x, gamma)
            }
            Scatterer::ThreeMode {
                bright,
                mid,
                dark,
                g_outer,
                g_inner,
                gamma,
            } => {
                let x = (w - mid) * (w - dark) - g_inner * g_inner;
                let n = (w - bright) * x - g_outer * g_outer * (w - dark);
                (n, x, gamma)
            }
        }
    }

    /// t = 1/(1 + i·r) with r = γx/n, returned with T = 1/(1 + r²) so the
    /// probability never exceeds 1 through rounding.
    fn evaluate(&self, w: f64) -> (Complex64, f64) {
        let (n, x, gamma) = self.terms(w);
        // 0/0 needs a vanishing coupling, which `ScatteringModel::new` maps
        // to a simpler scatterer; n = 0 here is a true transmission zero.
        if n == 0.0 {
            return (Complex64::new(0.0, 0.0), 0.0);
        }
        let r = gamma * x / n;
        let transmission = 1.0 / (1.0 + r * r);
        if !transmission.is_finite() || transmission == 0.0 {
            return (Complex64::new(0.0, 0.0), 0.0);
        }
        (Complex64::new(transmission, -r * transmission), transmission)
    }
}

/// A scattering configuration bound to concrete parameter values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringModel {
    kind: ModelKind,
    scatterer: Scatterer,
}

fn need(p: &ModelParams, kind: ModelKind, field: ParamField) -> Result<f64> {
    p.get(field).ok_or(Error::MissingParam {
        model: kind.name(),
        field,
    })
}

fn positive_rate(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::invalid(name, format!("decay rate must be > 0, got {v}")))
    }
}

/// Shifted qubit frequency ω̃0 = √((ω0 + ωb)²/4 + g_C²) under a classical
/// drive.
///
/// The rotating-frame bookkeeping behind this expression does not reduce
/// to ω0 at `g_C = 0`; it gives (ω0 + ωb)/2. The expression is used as is.
pub fn dressed_qubit_frequency(omega0: f64, omega_b: f64, g_c: f64) -> f64 {
    (0.5 * (omega0 + omega_b)).hypot(g_c)
}

/// Centre of the dispersive dip for mean phonon number `mean_n`:
/// ω0 + (g_Q²/Δ)(⟨n⟩ + ½), with Δ = ω0 − ωb.
pub fn dispersive_dip_center(omega0: f64, omega_b: f64, g_q: f64, mean_n: f64) -> Result<f64> {
    let delta = omega0 - omega_b;
    if delta == 0.0 {
        return Err(Error::ZeroDetuning);
    }
    Ok(omega0 + g_q * g_q / delta * (mean_n + 0.5))
}

impl ScatteringModel {
    pub fn new(kind: ModelKind, p: &ModelParams) -> Result<Self> {
        p.validate()?;
        for &field in kind.required() {
            need(p, kind, field)?;
        }
        let get = |f| need(p, kind, f);
        let stlr_rate = || -> Result<f64> {
            let v2 = get(ParamField::V2)?;
            positive_rate("v2", v2 * v2 / get(ParamField::VG)?)
        };

        let scatterer = match kind {
            ModelKind::QubitOnly => Scatterer::Lorentzian {
                center: get(ParamField::Omega0)?,
                gamma: positive_rate("gamma_c", get(ParamField::GammaC)?)?,
            },
            ModelKind::QubitQnmr => {
                let omega0 = get(ParamField::Omega0)?;
                let gamma = positive_rate("gamma_c", get(ParamField::GammaC)?)?;
                let g = get(ParamField::GQ)?;
                if g == 0.0 {
                    Scatterer::Lorentzian { center: omega0, gamma }
                } else {
                    Scatterer::TwoMode {
                        bright: omega0,
                        dark: get(ParamField::OmegaB)?,
                        g,
                        gamma,
                    }
                }
            }
            ModelKind::QubitQnmrDispersive => {
                let omega0 = get(ParamField::Omega0)?;
                let omega_b = get(ParamField::OmegaB)?;
                let g = get(ParamField::GQ)?;
                let delta = omega0 - omega_b;
                if delta != 0.0 && (g / delta).abs() >= 0.5 {
                    log::warn!(
                        "dispersive model used outside its regime: |g_Q/Δ| = {:.3}",
                        (g / delta).abs()
                    );
                }
                Scatterer::Lorentzian {
                    center: dispersive_dip_center(omega0, omega_b, g, get(ParamField::MeanN)?)?,
                    gamma: positive_rate("gamma_c", get(ParamField::GammaC)?)?,
                }
            }
            ModelKind::QubitCnmr => Scatterer::Lorentzian {
                center: dressed_qubit_frequency(
                    get(ParamField::Omega0)?,
                    get(ParamField::OmegaB)?,
                    get(ParamField::GC)?,
                ),
                gamma: positive_rate("gamma_c", get(ParamField::GammaC)?)?,
            },
            ModelKind::StlrQubit | ModelKind::StlrQubitCnmr => {
                let omega_r = get(ParamField::OmegaR)?;
                let gamma = stlr_rate()?;
                let g = get(ParamField::GRq)?;
                let qubit = if kind == ModelKind::StlrQubit {
                    get(ParamField::Omega0)?
                } else {
                    dressed_qubit_frequency(
                        get(ParamField::Omega0)?,
                        get(ParamField::OmegaB)?,
                        get(ParamField::GC)?,
                    )
                };
                if g == 0.0 {
                    Scatterer::Lorentzian { center: omega_r, gamma }
                } else {
                    Scatterer::TwoMode {
                        bright: omega_r,
                        dark: qubit,
                        g,
                        gamma,
                    }
                }
            }
            ModelKind::StlrQubitQnmr => {
                let omega_r = get(ParamField::OmegaR)?;
                let omega0 = get(ParamField::Omega0)?;
                let omega_b = get(ParamField::OmegaB)?;
                let gamma = stlr_rate()?;
                let g_rq = get(ParamField::GRq)?;
                let g_q = get(ParamField::GQ)?;
                if g_rq == 0.0 {
                    Scatterer::Lorentzian { center: omega_r, gamma }
                } else if g_q == 0.0 {
                    Scatterer::TwoMode {
                        bright: omega_r,
                        dark: omega0,
                        g: g_rq,
                        gamma,
                    }
                } else {
                    Scatterer::ThreeMode {
                        bright: omega_r,
                        mid: omega0,
                        dark: omega_b,
                        g_outer: g_rq,
                        g_inner: g_q,
                        gamma,
                    }
                }
            }
        };
        Ok(ScatteringModel { kind, scatterer })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// Complex transmission amplitude t(ω).
    pub fn amplitude(&self, omega: f64) -> Result<Complex64> {
        if !omega.is_finite() {
            return Err(Error::NonFinite(format!("probe frequency {omega}")));
        }
        Ok(self.scatterer.evaluate(omega).0)
    }

    /// Transmission probability |t(ω)|².
    pub fn transmission(&self, omega: f64) -> Result<f64> {
        if !omega.is_finite() {
            return Err(Error::NonFinite(format!("probe frequency {omega}")));
        }
        Ok(self.scatterer.evaluate(omega).1)
    }

    /// The real numerator `n(ω)`, weight `x(ω)` and rate `γ` of
    /// `t = n/(n + iγx)`. The printed arctan phase formulas are
    /// `−arctan(γx/n)`.
    pub fn terms(&self, omega: f64) -> (f64, f64, f64) {
        self.scatterer.terms(omega)
    }

    pub fn spectrum(&self, grid: &[f64]) -> Result<Spectrum> {
        if let Some(w) = grid.iter().find(|w| !w.is_finite()) {
            return Err(Error::NonFinite(format!("probe frequency {w}")));
        }
        let (amps, trans) = grid.iter().map(|&w| self.scatterer.evaluate(w)).unzip();
        Spectrum::from_model(grid.to_vec(), amps, trans)
    }

    /// Closed-form dip, transparency-point and width locations.
    pub fn features(&self) -> FeatureSet {
        match self.scatterer {
            Scatterer::Lorentzian { center, gamma } => FeatureSet {
                dips: vec![Frequency(center)],
                unity_points: vec![],
                fwhm: vec![Frequency(2.0 * gamma)],
            },
            Scatterer::TwoMode { bright, dark, g, gamma } => {
                let (lo, hi, split) = normal_modes(bright, dark, g);
                // Linearising n(ω) at each root gives a local Lorentzian of
                // half-width γ·|ω± − ω_dark| / |n'(ω±)|, with |n'| = split.
                let width = |w: f64| 2.0 * gamma * (w - dark).abs() / split;
                FeatureSet {
                    dips: vec![Frequency(lo), Frequency(hi)],
                    unity_points: vec![Frequency(dark)],
                    fwhm: vec![Frequency(width(lo)), Frequency(width(hi))],
                }
            }
            Scatterer::ThreeMode { mid, dark, g_inner, .. } => {
                let (lo, hi, _) = normal_modes(mid, dark, g_inner);
                FeatureSet {
                    dips: vec![],
                    unity_points: vec![Frequency(lo), Frequency(hi)],
                    fwhm: vec![],
                }
            }
        }
    }
}

/// Roots of (ω − a)(ω − b) = g², returned as (lower, upper, upper − lower).
fn normal_modes(a: f64, b: f64, g: f64) -> (f64, f64, f64) {
    let split = ((a - b) * (a - b) + 4.0 * g * g).sqrt();
    let mid = 0.5 * (a + b);
    (mid - 0.5 * split, mid + 0.5 * split, split)
}

/// Analytic feature locations for a model. Frequencies are sorted
/// ascending; `fwhm[i]` belongs to `dips[i]` when present.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureSet {
    /// Zero-transmission frequencies.
    pub dips: Vec<Frequency>,
    /// Full-transmission (transparency) frequencies.
    pub unity_points: Vec<Frequency>,
    /// Full width at half minimum per dip, where a closed form exists.
    pub fwhm: Vec<Frequency>,
}

pub fn analytic_features(kind: ModelKind, p: &ModelParams) -> Result<FeatureSet> {
    Ok(ScatteringModel::new(kind, p)?.features())
}

/// Synthesize a model spectrum on `grid`.
pub fn synthesize(kind: ModelKind, p: &ModelParams, grid: &[f64]) -> Result<Spectrum> {
    ScatteringModel::new(kind, p)?.spectrum(grid)
}

fn eval(kind: ModelKind, omega: f64, p: &ModelParams) -> Result<Complex64> {
    ScatteringModel::new(kind, p)?.amplitude(omega)
}

/// t0(ω) = (ω − ω0)/(ω − ω0 + iγc).
pub fn t_qubit_only(omega: f64, p: &ModelParams) -> Result<Complex64> {
    eval(ModelKind::QubitOnly, omega, p)
}

/// t_Q(ω) = [(ω−ωb)(ω−ω0) − g_Q²] / [(ω−ωb)(ω−ω0+iγc) − g_Q²].
pub fn t_qubit_qnmr(omega: f64, p: &ModelParams) -> Result<Complex64> {
    eval(ModelKind::QubitQnmr, omega, p)
}

/// Lorentzian dip at ω0 + (g_Q²/Δ)(⟨n⟩ + ½), Δ = ω0 − ωb, width 2V1²/v_g.
pub fn t_dispersive(omega: f64, p: &ModelParams) -> Result<Complex64> {
    eval(ModelKind::QubitQnmrDispersive, omega, p)
}

/// Qubit-only form with ω0 replaced by [`dressed_qubit_frequency`].
pub fn t_qubit_cnmr(omega: f64, p: &ModelParams) -> Result<Complex64> {
    eval(ModelKind::QubitCnmr, omega, p)
}

pub fn t_stlr_qubit(omega: f64, p: &ModelParams) -> Result<Complex64> {
    eval(ModelKind::StlrQubit, omega, p)
}

/// Evaluated with the `g_Q²/(ω − ωb)` pole cleared, so ω = ωb is an
/// ordinary point.
pub fn t_stlr_qubit_qnmr(omega: f64, p: &ModelParams) -> Result<Complex64> {
    eval(ModelKind::StlrQubitQnmr, omega, p)
}

pub fn t_stlr_qubit_cnmr(omega: f64, p: &ModelParams) -> Result<Complex64> {
    eval(ModelKind::StlrQubitCnmr, omega, p)
}

/// Whether neighbouring phonon-number dips are resolvable:
/// γc = V1²/v_g < g_Q²/(2|Δ|), strictly.
pub fn resolvability_condition(p: &ModelParams) -> Result<bool> {
    let kind = ModelKind::QubitQnmrDispersive;
    let gamma = need(p, kind, ParamField::GammaC)?;
    let g = need(p, kind, ParamField::GQ)?;
    let delta = need(p, kind, ParamField::Omega0)? - need(p, kind, ParamField::OmegaB)?;
    if delta == 0.0 {
        return Err(Error::ZeroDetuning);
    }
    Ok(gamma < g * g / (2.0 * delta.abs()))
}
