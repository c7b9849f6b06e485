//! The five commands, driven by a validated [`RunConfig`].

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::estimation::{add_measurement_noise, estimate};
use crate::scattering::synthesize;
use crate::squid::{potential, qubit_truncation_check, solve_eigensystem};
use crate::types::constants::FLUX_QUANTUM;
use crate::types::Spectrum;

use super::config::{Command, OutputFormat, RunConfig};
use super::figures::{catalogue, figure, write_figure};
use super::json::{report_to_json, SquidSummary};
use super::svg::{render, Panel, Series};
use super::sweep::{sweep_spectra, sweep_to_csv};
use super::table::{read_text, spectrum_from_csv, spectrum_to_csv, wavefunctions_to_csv, write_text};

/// What a command produced: files written and, when no output path was
/// given, the primary document for standard output.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Outcome {
    pub written: Vec<PathBuf>,
    pub stdout: Option<String>,
}

impl Outcome {
    fn emit(&mut self, path: Option<&PathBuf>, text: String) -> Result<()> {
        match path {
            Some(p) => {
                write_text(p, &text)?;
                self.written.push(p.clone());
            }
            None => self.stdout = Some(text),
        }
        Ok(())
    }

    fn side(&mut self, path: Option<PathBuf>, text: impl FnOnce() -> Result<String>) -> Result<()> {
        if let Some(p) = path {
            write_text(&p, &text()?)?;
            self.written.push(p);
        }
        Ok(())
    }
}

pub fn run(cfg: &RunConfig, command: Command) -> Result<Outcome> {
    cfg.validate(command)?;
    match command {
        Command::Spectrum => run_spectrum(cfg),
        Command::Estimate => run_estimate(cfg),
        Command::Squid => run_squid(cfg),
        Command::Sweep => run_sweep(cfg),
        Command::Figures => run_figures(cfg),
    }
}

fn spectrum_plot(title: &str, s: &Spectrum) -> String {
    let w = s.omega().to_vec();
    render(
        title,
        "ω (rad/s)",
        &[
            Panel::new("T", vec![Series::new("", w.clone(), s.transmission().to_vec())]),
            Panel::new("phase (rad)", vec![Series::new("", w, s.phase().to_vec())]),
        ],
    )
}

pub fn run_spectrum(cfg: &RunConfig) -> Result<Outcome> {
    let model = cfg.require_model()?;
    let mut s = synthesize(model, &cfg.params, &cfg.require_grid()?)?;
    if let Some(n) = cfg.noise {
        s = add_measurement_noise(&s, n.sigma, n.seed)?;
    }
    let title = format!("{model} spectrum");
    let mut out = Outcome::default();
    let path = cfg.output.path.as_ref();
    match cfg.output.resolved_format(OutputFormat::Csv) {
        OutputFormat::Csv => {
            out.emit(path, spectrum_to_csv(&s, &[format!("{model} spectrum")], Some(cfg))?)?;
            if cfg.output.plot {
                out.side(cfg.output.sibling("", "svg"), || Ok(spectrum_plot(&title, &s)))?;
            }
        }
        OutputFormat::Svg => out.emit(path, spectrum_plot(&title, &s))?,
        OutputFormat::Json => return Err(Error::invalid("format", "spectrum output is csv or svg")),
    }
    Ok(out)
}

pub fn run_estimate(cfg: &RunConfig) -> Result<Outcome> {
    let input = cfg.input.as_ref().ok_or_else(|| Error::invalid("input", "not set"))?;
    let s = spectrum_from_csv(&read_text(input)?)?;
    let report = estimate(&s, &cfg.estimate)?;
    let mut out = Outcome::default();
    out.emit(cfg.output.path.as_ref(), report_to_json(&report)?)?;
    Ok(out)
}

pub fn run_squid(cfg: &RunConfig) -> Result<Outcome> {
    let spec = &cfg.circuit;
    let sol = solve_eigensystem(spec, cfg.n_states)?;
    let summary = SquidSummary::new(spec, &sol, qubit_truncation_check(&sol, spec));
    let table = || {
        let states: Vec<(String, &[f64])> = sol
            .wavefunctions
            .iter()
            .enumerate()
            .map(|(i, psi)| (format!("psi{i}"), psi.as_slice()))
            .collect();
        let named: Vec<(&str, &[f64])> = states.iter().map(|(n, p)| (n.as_str(), *p)).collect();
        wavefunctions_to_csv(&sol, spec, &named, &["rf-SQUID eigenstates".into()], Some(spec))
    };
    let plot = || {
        let x: Vec<f64> = sol.flux.iter().map(|p| p / FLUX_QUANTUM).collect();
        let u: Vec<f64> = sol.flux.iter().map(|&p| potential(p, spec)).collect();
        let waves = sol
            .wavefunctions
            .iter()
            .take(2)
            .enumerate()
            .map(|(i, psi)| Series::new(format!("ψ{i}"), x.clone(), psi.clone()))
            .collect();
        Ok(render(
            "rf-SQUID potential and eigenstates",
            "Φ/Φ0",
            &[Panel::new("U (J)", vec![Series::new("U(Φ)", x.clone(), u)]), Panel::new("ψ", waves)],
        ))
    };
    let mut out = Outcome::default();
    let path = cfg.output.path.as_ref();
    match cfg.output.resolved_format(OutputFormat::Json) {
        OutputFormat::Json => {
            out.emit(path, summary.to_json()?)?;
            out.side(cfg.output.sibling("_wavefunctions", "csv"), table)?;
        }
        OutputFormat::Csv => {
            out.emit(path, table()?)?;
            out.side(cfg.output.sibling("_summary", "json"), || summary.to_json())?;
        }
        OutputFormat::Svg => {
            out.emit(path, plot()?)?;
            return Ok(out);
        }
    }
    if cfg.output.plot {
        out.side(cfg.output.sibling("", "svg"), plot)?;
    }
    Ok(out)
}

pub fn run_sweep(cfg: &RunConfig) -> Result<Outcome> {
    let model = cfg.require_model()?;
    let sweep = cfg.sweep.as_ref().ok_or_else(|| Error::invalid("sweep", "not set"))?;
    let spectra = sweep_spectra(model, &cfg.params, sweep, &cfg.require_grid()?, cfg.noise)?;
    let mut out = Outcome::default();
    out.emit(cfg.output.path.as_ref(), sweep_to_csv(sweep, &spectra, cfg)?)?;
    if cfg.output.plot {
        let series = sweep
            .values
            .iter()
            .zip(&spectra)
            .map(|(v, s)| Series::new(format!("{} = {v:.3e}", sweep.field), s.omega().to_vec(), s.transmission().to_vec()))
            .collect();
        out.side(cfg.output.sibling("", "svg"), || {
            Ok(render(&format!("{model} sweep"), "ω (rad/s)", &[Panel::new("T", series)]))
        })?;
    }
    Ok(out)
}

pub fn run_figures(cfg: &RunConfig) -> Result<Outcome> {
    let figures = if cfg.figures.which.is_empty() || cfg.figures.which.iter().any(|w| w == "all") {
        catalogue()
    } else {
        cfg.figures.which.iter().map(|id| figure(id)).collect::<Result<_>>()?
    };
    let mut out = Outcome::default();
    for fig in &figures {
        out.written.extend(write_figure(fig, &cfg.figures.out_dir)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::config::{GridSpec, OutputSpec};
    use crate::scattering::ModelKind;
    use crate::types::ModelParams;

    fn qnmr(dir: &std::path::Path) -> RunConfig {
        RunConfig {
            model: Some(ModelKind::QubitQnmr),
            params: ModelParams::new().with_omega0(2.1e9).with_omega_b(2e9).with_g_q(1e8).with_gamma_c(3.3e7),
            grid: Some(GridSpec::new(1.8e9, 2.3e9, 4001)),
            output: OutputSpec {
                path: Some(dir.join("s.csv")),
                format: None,
                plot: true,
            },
            ..RunConfig::default()
        }
    }

    #[test]
    fn spectrum_then_estimate() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = qnmr(dir.path());
        let out = run(&cfg, Command::Spectrum).unwrap();
        assert_eq!(out.written, vec![dir.path().join("s.csv"), dir.path().join("s.svg")]);
        let est = RunConfig {
            input: Some(dir.path().join("s.csv")),
            ..RunConfig::default()
        };
        let report = run(&est, Command::Estimate).unwrap().stdout.unwrap();
        let r = crate::io::report_from_json(&report).unwrap();
        let g = r.g_est.unwrap();
        assert!((g.value - 1e8).abs() < 3.0 * g.sigma, "{g:?}");
        let step = 5e8 / 4000.0;
        assert!((r.omega_b_est.unwrap().value - 2e9).abs() < step);
    }

    #[test]
    fn identical_configs_give_identical_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = qnmr(dir.path());
        cfg.noise = Some(crate::io::config::NoiseSpec { sigma: 0.01, seed: 5 });
        cfg.output = OutputSpec::default();
        let a = run(&cfg, Command::Spectrum).unwrap().stdout.unwrap();
        let b = run(&cfg, Command::Spectrum).unwrap().stdout.unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn squid_writes_summary_and_table() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            output: OutputSpec {
                path: Some(dir.path().join("q.json")),
                format: None,
                plot: false,
            },
            ..RunConfig::default()
        };
        let out = run(&cfg, Command::Squid).unwrap();
        assert_eq!(out.written, vec![dir.path().join("q.json"), dir.path().join("q_wavefunctions.csv")]);
        let s = SquidSummary::from_json(&std::fs::read_to_string(&out.written[0]).unwrap()).unwrap();
        assert!((s.e0 / 2.7025e-23 - 1.0).abs() < 0.01);
        let csv = std::fs::read_to_string(&out.written[1]).unwrap();
        assert!(csv.lines().any(|l| l == "flux_over_phi0,U_joules,psi0,psi1"));
    }

    #[test]
    fn unwritable_path_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = qnmr(dir.path());
        cfg.output.path = Some(dir.path().join("missing").join("s.csv"));
        assert!(matches!(run(&cfg, Command::Spectrum), Err(Error::Io { .. })));
    }
}
