//! Run configuration shared by the command-line front end and the figure
//! generator. A config is read from a JSON file and then overridden field by
//! field by command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::EstimateOptions;
use crate::scattering::{ModelKind, ScatteringModel};
use crate::squid::CircuitSpec;
use crate::types::{make_frequency_grid, ModelParams, ParamField};

use super::table::read_text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Spectrum,
    Estimate,
    Squid,
    Sweep,
    Figures,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
    Svg,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "svg" => Ok(OutputFormat::Svg),
            _ => Err(Error::invalid("format", format!("expected csv, json or svg, got `{s}`"))),
        }
    }
}

/// A uniform frequency grid, written `start:stop:n_points` on the command
/// line or as an object in a config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub n_points: usize,
}

impl GridSpec {
    pub fn new(start: f64, stop: f64, n_points: usize) -> Self {
        GridSpec { start, stop, n_points }
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        make_frequency_grid(self.start, self.stop, self.n_points)
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidGrid(format!("expected start:stop:n_points, got `{s}`"));
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let [a, b, n] = parts[..] else { return Err(bad()) };
        let start = a.parse().map_err(|_| bad())?;
        let stop = b.parse().map_err(|_| bad())?;
        let n_points = n.parse().map_err(|_| bad())?;
        let g = GridSpec::new(start, stop, n_points);
        g.points()?;
        Ok(g)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}:{:e}:{}", self.start, self.stop, self.n_points)
    }
}

/// Gaussian measurement noise applied after synthesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

/// Where results go. Without a path, the primary document is written to
/// standard output. `plot` adds an SVG next to the primary file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub plot: bool,
}

impl OutputSpec {
    /// The format, inferred from the path extension when not given.
    pub fn resolved_format(&self, fallback: OutputFormat) -> OutputFormat {
        self.format.unwrap_or_else(|| {
            match self.path.as_deref().and_then(Path::extension).and_then(|e| e.to_str()) {
                Some("json") => OutputFormat::Json,
                Some("svg") => OutputFormat::Svg,
                Some("csv") => OutputFormat::Csv,
                _ => fallback,
            }
        })
    }

    /// A sibling of the primary path with `suffix` appended to the stem and
    /// the given extension.
    pub fn sibling(&self, suffix: &str, extension: &str) -> Option<PathBuf> {
        let path = self.path.as_ref()?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
        Some(path.with_file_name(format!("{stem}{suffix}.{extension}")))
    }
}

/// One parameter stepped over a list of values, the rest fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub field: ParamField,
    pub values: Vec<f64>,
}

impl SweepSpec {
    /// Parses `field=start:stop:n` (evenly spaced, inclusive) or
    /// `field=v1,v2,...`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::invalid("sweep", format!("{why} in `{s}`"));
        let (name, rest) = s.split_once('=').ok_or_else(|| bad("expected field=values"))?;
        let field = ParamField::ALL
            .into_iter()
            .find(|f| f.name() == name.trim())
            .ok_or_else(|| bad("unknown parameter"))?;
        let values = if rest.contains(':') {
            let parts: Vec<&str> = rest.split(':').collect();
            let [a, b, n] = parts[..] else { return Err(bad("expected start:stop:n")) };
            let a: f64 = a.trim().parse().map_err(|_| bad("bad start"))?;
            let b: f64 = b.trim().parse().map_err(|_| bad("bad stop"))?;
            let n: usize = n.trim().parse().map_err(|_| bad("bad count"))?;
            match n {
                0 => return Err(bad("empty sweep")),
                1 => vec![a],
                _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
            }
        } else {
            rest.split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| bad("bad value")))
                .collect::<Result<_>>()?
        };
        let spec = SweepSpec { field, values };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::invalid("sweep", "no values"));
        }
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid("sweep", format!("non-finite value {v}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FiguresSpec {
    /// Figure ids such as `fig3`; empty means all.
    pub which: Vec<String>,
    pub out_dir: PathBuf,
}

impl Default for FiguresSpec {
    fn default() -> Self {
        FiguresSpec {
            which: Vec::new(),
            out_dir: PathBuf::from("figures"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub model: Option<ModelKind>,
    pub params: ModelParams,
    pub grid: Option<GridSpec>,
    pub noise: Option<NoiseSpec>,
    pub output: OutputSpec,
    /// Spectrum file read by `estimate`.
    pub input: Option<PathBuf>,
    pub estimate: EstimateOptions,
    pub circuit: CircuitSpec,
    /// Eigenstates solved for by `squid` (at least two).
    pub n_states: usize,
    pub sweep: Option<SweepSpec>,
    pub figures: FiguresSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            model: None,
            params: ModelParams::default(),
            grid: None,
            noise: None,
            output: OutputSpec::default(),
            input: None,
            estimate: EstimateOptions::default(),
            circuit: CircuitSpec::default(),
            n_states: 2,
            sweep: None,
            figures: FiguresSpec::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&read_text(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn require_model(&self) -> Result<ModelKind> {
        self.model.ok_or_else(|| Error::invalid("model", "not set"))
    }

    pub fn require_grid(&self) -> Result<Vec<f64>> {
        self.grid.ok_or_else(|| Error::invalid("grid", "not set"))?.points()
    }

    fn check_noise(&self) -> Result<()> {
        if let Some(n) = self.noise {
            if !(n.sigma.is_finite() && n.sigma >= 0.0) {
                return Err(Error::invalid("noise.sigma", format!("must be finite and >= 0, got {}", n.sigma)));
            }
        }
        Ok(())
    }

    /// Checks everything `command` reads. A model whose required
    /// parameters are unset fails with the missing field named.
    pub fn validate(&self, command: Command) -> Result<()> {
        match command {
            Command::Spectrum | Command::Sweep => {
                let model = self.require_model()?;
                self.require_grid()?;
                self.check_noise()?;
                if command == Command::Sweep {
                    let sweep = self.sweep.as_ref().ok_or_else(|| Error::invalid("sweep", "not set"))?;
                    sweep.validate()?;
                    let mut p = self.params.clone();
                    for &v in &sweep.values {
                        p.set(sweep.field, v);
                        ScatteringModel::new(model, &p)?;
                    }
                } else {
                    ScatteringModel::new(model, &self.params)?;
                }
                if self.output.resolved_format(OutputFormat::Csv) == OutputFormat::Json && command == Command::Sweep {
                    return Err(Error::invalid("format", "sweep output is csv"));
                }
            }
            Command::Estimate => {
                if self.input.is_none() {
                    return Err(Error::invalid("input", "not set"));
                }
                if self.output.resolved_format(OutputFormat::Json) != OutputFormat::Json {
                    return Err(Error::invalid("format", "estimate output is json"));
                }
                let t = self.estimate.depth_threshold;
                if !(t > 0.0 && t <= 1.0) {
                    return Err(Error::invalid("depth_threshold", format!("must lie in (0, 1], got {t}")));
                }
            }
            Command::Squid => {
                self.circuit.validate()?;
                if self.n_states < 2 {
                    return Err(Error::invalid("n_states", format!("need at least 2, got {}", self.n_states)));
                }
            }
            Command::Figures => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_strings() {
        let g: GridSpec = "1.8e9:2.3e9:4001".parse().unwrap();
        assert_eq!(g, GridSpec::new(1.8e9, 2.3e9, 4001));
        assert_eq!(g.to_string().parse::<GridSpec>().unwrap(), g);
        assert!(matches!("2e9:2e9:100".parse::<GridSpec>(), Err(Error::InvalidGrid(_))));
        assert!("1:2".parse::<GridSpec>().is_err());
        assert!("1:2:x".parse::<GridSpec>().is_err());
    }

    #[test]
    fn config_file_with_partial_sections() {
        let cfg = RunConfig::from_json(
            r#"{"model": "qubit-qnmr",
                "params": {"omega0": 2.1e9, "omega_b": 2e9, "g_q": 1e8, "gamma_c": 3.3e7},
                "grid": {"start": 1.8e9, "stop": 2.3e9, "n_points": 4001},
                "circuit": {"grid_points": 2001},
                "estimate": {"reference_omega0": 2.1e9}}"#,
        )
        .unwrap();
        assert_eq!(cfg.model, Some(ModelKind::QubitQnmr));
        assert_eq!(cfg.circuit.grid_points, 2001);
        assert_eq!(cfg.circuit.l, CircuitSpec::default().l);
        assert_eq!(cfg.estimate.reference_omega0, Some(2.1e9));
        cfg.validate(Command::Spectrum).unwrap();
        assert!(RunConfig::from_json(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn missing_param_is_named() {
        let cfg = RunConfig {
            model: Some(ModelKind::QubitQnmr),
            params: ModelParams::new().with_omega0(2.1e9).with_omega_b(2e9).with_gamma_c(3.3e7),
            grid: Some(GridSpec::new(1.8e9, 2.3e9, 11)),
            ..RunConfig::default()
        };
        let err = cfg.validate(Command::Spectrum).unwrap_err();
        assert!(err.to_string().contains("g_q"), "{err}");
    }

    #[test]
    fn sweep_strings() {
        let s = SweepSpec::parse("g_q=0:1e8:5").unwrap();
        assert_eq!(s.field, ParamField::GQ);
        assert_eq!(s.values, vec![0.0, 2.5e7, 5e7, 7.5e7, 1e8]);
        assert_eq!(SweepSpec::parse("mean_n=0,1,2").unwrap().values, vec![0.0, 1.0, 2.0]);
        assert!(SweepSpec::parse("nope=1").is_err());
        assert!(SweepSpec::parse("g_q").is_err());
        assert!(SweepSpec::parse("g_q=0:1:0").is_err());
    }

    #[test]
    fn output_siblings_and_formats() {
        let o = OutputSpec {
            path: Some(PathBuf::from("out/run.json")),
            ..OutputSpec::default()
        };
        assert_eq!(o.resolved_format(OutputFormat::Csv), OutputFormat::Json);
        assert_eq!(o.sibling("_wavefunctions", "csv"), Some(PathBuf::from("out/run_wavefunctions.csv")));
        assert_eq!(OutputSpec::default().resolved_format(OutputFormat::Csv), OutputFormat::Csv);
    }
}
