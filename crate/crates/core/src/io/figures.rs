//! Data behind the reference figures, regenerated from the parameters listed
//! in each caption. Every file written starts with a `# figure:` line
//! naming the figure and the caption parameters it was built from.

use std::f64::consts::FRAC_1_SQRT_2;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::scattering::{synthesize, ModelKind};
use crate::squid::{qubit_truncation_check, solve_eigensystem, CircuitSpec, EigenSolution};
use crate::types::constants::FLUX_QUANTUM;
use crate::types::{ModelParams, Spectrum};

use super::config::GridSpec;
use super::json::SquidSummary;
use super::svg::{render, Panel, Series};
use super::table::{spectrum_to_csv, wavefunctions_to_csv, write_text};

#[derive(Debug, Clone)]
pub struct FigureSeries {
    /// File-name suffix and legend label; empty for single-series figures.
    pub label: &'static str,
    /// Index of the transmission panel, for figures that compare groups.
    pub panel: usize,
    pub model: ModelKind,
    pub params: ModelParams,
}

#[derive(Debug, Clone)]
pub enum FigureContent {
    /// Transmission and phase panels with every series overlaid.
    Spectra { grid: GridSpec, series: Vec<FigureSeries> },
    /// One transmission panel per group of series.
    Comparison { grid: GridSpec, panels: Vec<&'static str>, series: Vec<FigureSeries> },
    /// Potential with the two lowest eigenfunctions.
    Eigenstates(CircuitSpec),
    /// The left- and right-well combinations of the two lowest states.
    WellStates(CircuitSpec),
}

#[derive(Debug, Clone)]
pub struct Figure {
    pub id: &'static str,
    pub title: &'static str,
    /// The caption parameters, verbatim where the caption gives them.
    pub caption: &'static str,
    pub content: FigureContent,
}

fn series(label: &'static str, model: ModelKind, params: ModelParams) -> FigureSeries {
    FigureSeries { label, panel: 0, model, params }
}

fn stlr_base() -> ModelParams {
    ModelParams::new()
        .with_omega_r(2e9)
        .with_omega_b(2e9)
        .with_v_g(3e8)
        .with_omega0(2.1e9)
        .with_v2(1e8)
        .with_g_rq(1e8)
}

/// Every reproducible figure, in order. Figures 1 and 6 are schematics.
pub fn catalogue() -> Vec<Figure> {
    let stlr_grid = GridSpec::new(1.7e9, 2.4e9, 4001);
    let direct_grid = GridSpec::new(1.8e9, 2.3e9, 4001);
    let mut fig10 = vec![
        series("a-qubit-cnmr", ModelKind::QubitCnmr, stlr_base().with_g_c(1e8).with_gamma_c(3.3e7)),
        series("a-stlr-qubit-cnmr", ModelKind::StlrQubitCnmr, stlr_base().with_g_c(1e8)),
        series("b-qubit-qnmr", ModelKind::QubitQnmr, stlr_base().with_g_q(1e8).with_gamma_c(3.3e7)),
        series("b-stlr-qubit-qnmr", ModelKind::StlrQubitQnmr, stlr_base().with_g_q(1e8)),
    ];
    fig10[2].panel = 1;
    fig10[3].panel = 1;
    let dispersive = |n: f64| {
        ModelParams::new()
            .with_omega0(2.1e9)
            .with_omega_b(2e9)
            .with_g_q(3e7)
            .with_v1(1e15f64.sqrt())
            .with_v_g(3e8)
            .with_mean_n(n)
    };
    let circuit = CircuitSpec::default();
    vec![
        Figure {
            id: "fig2",
            title: "Fig. 2: qubit only",
            caption: "Fig. 2 caption: omega0=2.1e9, gamma_c=3.3e7, delta_omega=6.6e7",
            content: FigureContent::Spectra {
                grid: GridSpec::new(1.9e9, 2.3e9, 4001),
                series: vec![series("", ModelKind::QubitOnly, ModelParams::new().with_omega0(2.1e9).with_gamma_c(3.3e7))],
            },
        },
        Figure {
            id: "fig3",
            title: "Fig. 3: qubit with quantum NMR",
            caption: "Fig. 3 caption: omega0=2.1e9, omega_b=2.0e9, gamma_c=3.3e7, g_q=1e8",
            content: FigureContent::Spectra {
                grid: direct_grid,
                series: vec![series(
                    "",
                    ModelKind::QubitQnmr,
                    ModelParams::new().with_omega0(2.1e9).with_omega_b(2.0e9).with_gamma_c(3.3e7).with_g_q(1e8),
                )],
            },
        },
        Figure {
            id: "fig4",
            title: "Fig. 4: dispersive phonon ladder",
            caption: "Fig. 4 caption lists no values; dispersive example set omega0=2.1e9, omega_b=2e9, g_q=3e7, v1^2=1e15, v_g=3e8, mean_n=0,1,2,3",
            content: FigureContent::Spectra {
                grid: GridSpec::new(2.09e9, 2.15e9, 6001),
                series: vec![
                    series("n0", ModelKind::QubitQnmrDispersive, dispersive(0.0)),
                    series("n1", ModelKind::QubitQnmrDispersive, dispersive(1.0)),
                    series("n2", ModelKind::QubitQnmrDispersive, dispersive(2.0)),
                    series("n3", ModelKind::QubitQnmrDispersive, dispersive(3.0)),
                ],
            },
        },
        Figure {
            id: "fig5",
            title: "Fig. 5: qubit with classical NMR",
            caption: "Fig. 5 caption: omega0=2.1e9, omega_b=2e9, gamma_c=3.3e7, g_c=1e8",
            content: FigureContent::Spectra {
                grid: direct_grid,
                series: vec![series(
                    "",
                    ModelKind::QubitCnmr,
                    ModelParams::new().with_omega0(2.1e9).with_omega_b(2e9).with_gamma_c(3.3e7).with_g_c(1e8),
                )],
            },
        },
        Figure {
            id: "fig7",
            title: "Fig. 7: STLR and qubit",
            caption: "Fig. 7 caption: omega_r=omega_b=2e9, v_g=3e8, omega0=2.1e9, v2=1e8, g_rq=1e8",
            content: FigureContent::Spectra {
                grid: stlr_grid,
                series: vec![series("", ModelKind::StlrQubit, stlr_base())],
            },
        },
        Figure {
            id: "fig8",
            title: "Fig. 8: STLR, qubit and quantum NMR",
            caption: "Fig. 8 caption: omega_r=omega_b=2e9, v_g=3e8, omega0=2.1e9, v2=1e8, g_rq=1e8, g_q=1e8",
            content: FigureContent::Spectra {
                grid: stlr_grid,
                series: vec![series("", ModelKind::StlrQubitQnmr, stlr_base().with_g_q(1e8))],
            },
        },
        Figure {
            id: "fig9",
            title: "Fig. 9: STLR, qubit and classical NMR",
            caption: "Fig. 9 caption: omega_r=omega_b=2e9, v_g=3e8, omega0=2.1e9, v2=1e8, g_rq=1e8; g_c=1e8 from the Fig. 10 caption",
            content: FigureContent::Spectra {
                grid: stlr_grid,
                series: vec![
                    series("stlr-qubit", ModelKind::StlrQubit, stlr_base()),
                    series("stlr-qubit-cnmr", ModelKind::StlrQubitCnmr, stlr_base().with_g_c(1e8)),
                ],
            },
        },
        Figure {
            id: "fig10",
            title: "Fig. 10: with and without the STLR",
            caption: "Fig. 10 caption: omega_r=omega_b=2e9, v_g=3e8, omega0=2.1e9, v2=1e8, g_rq=1e8, g_c=g_q=1e8; gamma_c=3.3e7 from the Figs. 3 and 5 captions",
            content: FigureContent::Comparison {
                grid: stlr_grid,
                panels: vec!["(a) classical NMR: T", "(b) quantum NMR: T"],
                series: fig10,
            },
        },
        Figure {
            id: "fig11",
            title: "Fig. 11: rf-SQUID potential and lowest eigenstates",
            caption: "Fig. 11 caption: phi_e=0.5*Phi0, L=6e-9, I_c=Phi0/(pi*L) (printed as L*Phi0/pi), C_J=1.7e-14",
            content: FigureContent::Eigenstates(circuit),
        },
        Figure {
            id: "fig12",
            title: "Fig. 12: left- and right-well current states",
            caption: "Fig. 12 caption: parameters of Fig. 11",
            content: FigureContent::WellStates(circuit),
        },
    ]
}

pub fn ids() -> Vec<&'static str> {
    catalogue().into_iter().map(|f| f.id).collect()
}

pub fn figure(id: &str) -> Result<Figure> {
    catalogue()
        .into_iter()
        .find(|f| f.id == id)
        .ok_or_else(|| Error::invalid("which", format!("unknown figure `{id}`; known: {}", ids().join(", "))))
}

fn file_name(fig: &Figure, label: &str, ext: &str) -> String {
    if label.is_empty() {
        format!("{}.{ext}", fig.id)
    } else {
        format!("{}_{label}.{ext}", fig.id)
    }
}

fn with_comment(fig: &Figure, svg: String) -> String {
    let body = svg.split_once('\n').map(|(head, rest)| (head.to_string(), rest.to_string()));
    let (head, rest) = body.unwrap_or((svg, String::new()));
    format!("{head}\n<!-- figure: {}, {} -->\n{rest}", fig.id, fig.caption.replace("--", "-"))
}

fn spectra(grid: &GridSpec, series: &[FigureSeries]) -> Result<Vec<Spectrum>> {
    let points = grid.points()?;
    series.iter().map(|s| synthesize(s.model, &s.params, &points)).collect()
}

fn write_spectra(fig: &Figure, dir: &Path, grid: &GridSpec, series: &[FigureSeries], out: &mut Vec<PathBuf>) -> Result<Vec<Spectrum>> {
    let spectra = spectra(grid, series)?;
    let header = vec![format!("figure: {}, {}", fig.id, fig.caption)];
    for (s, data) in series.iter().zip(&spectra) {
        let config = serde_json::json!({"model": s.model, "params": s.params, "grid": grid});
        let path = dir.join(file_name(fig, s.label, "csv"));
        write_text(&path, &spectrum_to_csv(data, &header, Some(&config))?)?;
        out.push(path);
    }
    Ok(spectra)
}

fn flux_axis(sol: &EigenSolution) -> Vec<f64> {
    sol.flux.iter().map(|p| p / FLUX_QUANTUM).collect()
}

/// Writes the figure's files into `dir` (created if needed) and returns
/// their paths.
pub fn write_figure(fig: &Figure, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = Vec::new();
    let svg = match &fig.content {
        FigureContent::Spectra { grid, series } => {
            let spectra = write_spectra(fig, dir, grid, series, &mut out)?;
            let line = |f: fn(&Spectrum) -> &[f64]| -> Vec<Series> {
                series
                    .iter()
                    .zip(&spectra)
                    .map(|(s, d)| Series::new(s.label, d.omega().to_vec(), f(d).to_vec()))
                    .collect()
            };
            render(
                fig.title,
                "ω (rad/s)",
                &[Panel::new("T", line(Spectrum::transmission)), Panel::new("phase (rad)", line(Spectrum::phase))],
            )
        }
        FigureContent::Comparison { grid, panels, series } => {
            let spectra = write_spectra(fig, dir, grid, series, &mut out)?;
            let panels: Vec<Panel> = panels
                .iter()
                .enumerate()
                .map(|(k, title)| {
                    let lines = series
                        .iter()
                        .zip(&spectra)
                        .filter(|(s, _)| s.panel == k)
                        .map(|(s, d)| Series::new(s.label, d.omega().to_vec(), d.transmission().to_vec()))
                        .collect();
                    Panel::new(*title, lines)
                })
                .collect();
            render(fig.title, "ω (rad/s)", &panels)
        }
        FigureContent::Eigenstates(spec) | FigureContent::WellStates(spec) => {
            let sol = solve_eigensystem(spec, 2)?;
            let header = vec![format!("figure: {}, {}", fig.id, fig.caption)];
            let (psi0, psi1) = (&sol.wavefunctions[0], &sol.wavefunctions[1]);
            let left: Vec<f64> = psi0.iter().zip(psi1).map(|(a, b)| (a - b) * FRAC_1_SQRT_2).collect();
            let right: Vec<f64> = psi0.iter().zip(psi1).map(|(a, b)| (a + b) * FRAC_1_SQRT_2).collect();
            let well = matches!(fig.content, FigureContent::WellStates(_));
            let states: [(&str, &[f64]); 2] = if well {
                [("psi_l", &left), ("psi_r", &right)]
            } else {
                [("psi0", psi0), ("psi1", psi1)]
            };
            let path = dir.join(file_name(fig, "", "csv"));
            write_text(&path, &wavefunctions_to_csv(&sol, spec, &states, &header, Some(spec))?)?;
            out.push(path);
            if !well {
                let mut summary = serde_json::to_value(SquidSummary::new(spec, &sol, qubit_truncation_check(&sol, spec)))
                    .map_err(|e| Error::Parse(e.to_string()))?;
                summary["figure"] = format!("{}, {}", fig.id, fig.caption).into();
                let path = dir.join(file_name(fig, "", "json"));
                let mut text = serde_json::to_string_pretty(&summary).map_err(|e| Error::Parse(e.to_string()))?;
                text.push('\n');
                write_text(&path, &text)?;
                out.push(path);
            }
            let x = flux_axis(&sol);
            let u: Vec<f64> = sol.flux.iter().map(|&p| crate::squid::potential(p, spec)).collect();
            let level = |e: f64| Series::new(format!("E = {e:.4e} J"), x.clone(), vec![e; x.len()]);
            let mut potential = vec![Series::new("U(Φ)", x.clone(), u)];
            if !well {
                potential.push(level(sol.energies[0]));
                potential.push(level(sol.energies[1]));
            }
            let waves = states.iter().map(|(name, psi)| Series::new(*name, x.clone(), psi.to_vec())).collect();
            render(fig.title, "Φ/Φ0", &[Panel::new("U (J)", potential), Panel::new("ψ", waves)])
        }
    };
    let path = dir.join(file_name(fig, "", "svg"));
    write_text(&path, &with_comment(fig, svg))?;
    out.push(path);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scattering::analytic_features;

    #[test]
    fn every_series_is_valid_and_its_features_fall_inside_the_grid() {
        for fig in catalogue() {
            let (grid, series) = match &fig.content {
                FigureContent::Spectra { grid, series } | FigureContent::Comparison { grid, series, .. } => (grid, series),
                _ => continue,
            };
            for s in series {
                let f = analytic_features(s.model, &s.params).unwrap();
                for w in f.dips.iter().map(|d| d.0) {
                    assert!(w > grid.start && w < grid.stop, "{} {}: dip {w:e} outside grid", fig.id, s.label);
                }
                for w in f.unity_points.iter().map(|u| u.0) {
                    assert!(w > grid.start && w < grid.stop, "{} {}: unity {w:e} outside grid", fig.id, s.label);
                }
            }
        }
    }

    #[test]
    fn unknown_figure_is_a_config_error() {
        assert!(matches!(figure("fig1"), Err(Error::InvalidParam { .. })));
        assert_eq!(ids().len(), 10);
    }

    #[test]
    fn writes_files_with_caption_comment() {
        let dir = tempfile::tempdir().unwrap();
        let files = write_figure(&figure("fig9").unwrap(), dir.path()).unwrap();
        let names: Vec<String> = files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
        assert_eq!(names, ["fig9_stlr-qubit.csv", "fig9_stlr-qubit-cnmr.csv", "fig9.svg"]);
        for f in &files[..2] {
            let text = std::fs::read_to_string(f).unwrap();
            assert!(text.starts_with("# figure: fig9, Fig. 9 caption:"));
        }
        assert!(std::fs::read_to_string(&files[2]).unwrap().contains("<!-- figure: fig9"));
    }
}
