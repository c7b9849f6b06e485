//! Python bindings. Parameters travel as plain dicts keyed by the field
//! names used in config files (`omega0`, `g_q`, ...); results come back as
//! dicts of lists and floats.

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use qspectra_core::classical::{driven_amplitude, driven_phase, thermal_displacement_psd, ClassicalHOParams};
use qspectra_core::estimation::{self, add_measurement_noise, EstimateOptions};
use qspectra_core::io::{report_to_json, spectrum_from_csv, spectrum_to_csv, SquidSummary};
use qspectra_core::squid::{qubit_truncation_check, solve_eigensystem, CircuitSpec};
use qspectra_core::{make_frequency_grid, Error, ErrorKind, ModelKind, ModelParams, ParamField, ScatteringModel, Spectrum};

fn py_err(e: Error) -> PyErr {
    match e.kind() {
        ErrorKind::Config => PyValueError::new_err(e.to_string()),
        ErrorKind::Io => PyOSError::new_err(e.to_string()),
        ErrorKind::Numerical => PyRuntimeError::new_err(e.to_string()),
    }
}

fn model_kind(name: &str) -> PyResult<ModelKind> {
    name.parse().map_err(py_err)
}

fn model_params(params: &Bound<'_, PyDict>) -> PyResult<ModelParams> {
    let mut p = ModelParams::new();
    for (key, value) in params.iter() {
        let key: String = key.extract()?;
        let field = ParamField::ALL
            .into_iter()
            .find(|f| f.name() == key)
            .ok_or_else(|| PyValueError::new_err(format!("unknown parameter `{key}`")))?;
        p.set(field, value.extract()?);
    }
    Ok(p)
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

fn spectrum_dict<'py>(py: Python<'py>, s: &Spectrum) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("omega", s.omega().to_vec())?;
    d.set_item("T", s.transmission().to_vec())?;
    d.set_item("phase_rad", s.phase().to_vec())?;
    if let Some(a) = s.amplitude() {
        d.set_item("re_t", a.iter().map(|t| t.re).collect::<Vec<_>>())?;
        d.set_item("im_t", a.iter().map(|t| t.im).collect::<Vec<_>>())?;
    }
    Ok(d)
}

/// Uniform frequency grid of `n_points` from `start` to `stop` inclusive.
#[pyfunction]
fn frequency_grid(start: f64, stop: f64, n_points: usize) -> PyResult<Vec<f64>> {
    make_frequency_grid(start, stop, n_points).map_err(py_err)
}

/// Power transmission T(ω) of `model` at each frequency.
#[pyfunction]
fn transmission(model: &str, params: &Bound<'_, PyDict>, omega: Vec<f64>) -> PyResult<Vec<f64>> {
    let m = ScatteringModel::new(model_kind(model)?, &model_params(params)?).map_err(py_err)?;
    omega.iter().map(|&w| m.transmission(w).map_err(py_err)).collect()
}

/// Spectrum of `model` on `omega`, optionally with Gaussian noise.
#[pyfunction]
#[pyo3(signature = (model, params, omega, noise_sigma=None, seed=0))]
fn spectrum<'py>(
    py: Python<'py>,
    model: &str,
    params: &Bound<'py, PyDict>,
    omega: Vec<f64>,
    noise_sigma: Option<f64>,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let m = ScatteringModel::new(model_kind(model)?, &model_params(params)?).map_err(py_err)?;
    let mut s = m.spectrum(&omega).map_err(py_err)?;
    if let Some(sigma) = noise_sigma {
        s = add_measurement_noise(&s, sigma, seed).map_err(py_err)?;
    }
    spectrum_dict(py, &s)
}

/// Closed-form dip centres, transparency points and dip widths.
#[pyfunction]
fn analytic_features<'py>(py: Python<'py>, model: &str, params: &Bound<'py, PyDict>) -> PyResult<Bound<'py, PyDict>> {
    let f = qspectra_core::scattering::analytic_features(model_kind(model)?, &model_params(params)?).map_err(py_err)?;
    let d = PyDict::new(py);
    let plain = |v: &[qspectra_core::Frequency]| v.iter().map(|w| w.0).collect::<Vec<_>>();
    d.set_item("dips", plain(&f.dips))?;
    d.set_item("unity_points", plain(&f.unity_points))?;
    d.set_item("fwhm", plain(&f.fwhm))?;
    Ok(d)
}

/// Runs the estimation pipeline on a measured spectrum. `options` takes the
/// same keys as the `estimate` section of a config file.
#[pyfunction]
#[pyo3(signature = (omega, transmission, phase, options=None))]
fn estimate<'py>(
    py: Python<'py>,
    omega: Vec<f64>,
    transmission: Vec<f64>,
    phase: Vec<f64>,
    options: Option<&Bound<'py, PyDict>>,
) -> PyResult<Bound<'py, PyAny>> {
    let s = Spectrum::from_measurements(omega, transmission, phase).map_err(py_err)?;
    let opts: EstimateOptions = match options {
        Some(o) => {
            let text: String = py.import("json")?.call_method1("dumps", (o,))?.extract()?;
            serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))?
        }
        None => EstimateOptions::default(),
    };
    let report = estimation::estimate(&s, &opts).map_err(py_err)?;
    json_to_py(py, &report_to_json(&report).map_err(py_err)?)
}

/// Spectrum CSV text, in the command-line tool's format.
#[pyfunction]
fn spectrum_csv(omega: Vec<f64>, transmission: Vec<f64>, phase: Vec<f64>) -> PyResult<String> {
    let s = Spectrum::from_measurements(omega, transmission, phase).map_err(py_err)?;
    spectrum_to_csv(&s, &[], None::<&()>).map_err(py_err)
}

/// Parses spectrum CSV text.
#[pyfunction]
fn read_spectrum_csv<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyDict>> {
    spectrum_dict(py, &spectrum_from_csv(text).map_err(py_err)?)
}

/// Lowest eigenstates of the rf-SQUID circuit. Keyword arguments override
/// the default circuit (`c_j`, `l`, `i_c`, `phi_e` in Wb, `grid_points`,
/// `flux_window`).
#[pyfunction]
#[pyo3(signature = (n_states=2, **circuit))]
fn solve_squid<'py>(py: Python<'py>, n_states: usize, circuit: Option<&Bound<'py, PyDict>>) -> PyResult<Bound<'py, PyAny>> {
    let spec: CircuitSpec = match circuit {
        Some(c) => {
            let text: String = py.import("json")?.call_method1("dumps", (c,))?.extract()?;
            serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))?
        }
        None => CircuitSpec::default(),
    };
    spec.validate().map_err(py_err)?;
    let sol = solve_eigensystem(&spec, n_states).map_err(py_err)?;
    let summary = SquidSummary::new(&spec, &sol, qubit_truncation_check(&sol, &spec));
    let out = json_to_py(py, &summary.to_json().map_err(py_err)?)?;
    out.set_item("flux", sol.flux.clone())?;
    out.set_item("wavefunctions", sol.wavefunctions.clone())?;
    Ok(out)
}

/// Driven amplitude, phase lag and thermal displacement PSD of the classical
/// oscillator at each frequency.
#[pyfunction]
fn classical_response<'py>(
    py: Python<'py>,
    mass: f64,
    omega_b: f64,
    gamma: f64,
    drive_amp: f64,
    temperature: f64,
    omega: Vec<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let p = ClassicalHOParams {
        mass,
        omega_b,
        gamma,
        drive_amp,
        temperature,
    };
    let mut amp = Vec::with_capacity(omega.len());
    let mut phase = Vec::with_capacity(omega.len());
    let mut psd = Vec::with_capacity(omega.len());
    for &w in &omega {
        amp.push(driven_amplitude(w, &p).map_err(py_err)?);
        phase.push(driven_phase(w, &p).map_err(py_err)?);
        psd.push(thermal_displacement_psd(w, &p).map_err(py_err)?);
    }
    let d = PyDict::new(py);
    d.set_item("omega", omega)?;
    d.set_item("amplitude_m", amp)?;
    d.set_item("phase_rad", phase)?;
    d.set_item("psd_m2s", psd)?;
    Ok(d)
}

#[pymodule]
fn qspectra(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(frequency_grid, m)?)?;
    m.add_function(wrap_pyfunction!(transmission, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_features, m)?)?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum_csv, m)?)?;
    m.add_function(wrap_pyfunction!(read_spectrum_csv, m)?)?;
    m.add_function(wrap_pyfunction!(solve_squid, m)?)?;
    m.add_function(wrap_pyfunction!(classical_response, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
