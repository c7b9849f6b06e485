//! `qspectra`: synthesize, analyse and plot microwave scattering spectra of
//! an rf-SQUID qubit coupled to a nanomechanical resonator.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 I/O error,
//! 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qspectra_core::estimation::{AmplitudeHints, PhononHints, Setup};
use qspectra_core::io::{run, Command, GridSpec, NoiseSpec, OutputFormat, RunConfig, SweepSpec};
use qspectra_core::types::constants::FLUX_QUANTUM;
use qspectra_core::{Error, ErrorKind, ModelKind};

#[derive(Parser, Debug)]
#[command(name = "qspectra", version, about = "Scattering spectra of an rf-SQUID qubit with a nanomechanical resonator")]
struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Transmission and phase spectrum of one model.
    Spectrum(SpectrumArgs),
    /// Classify a measured spectrum and invert it to physical parameters.
    Estimate(EstimateArgs),
    /// Solve the rf-SQUID circuit for its lowest eigenstates.
    Squid(SquidArgs),
    /// One spectrum per value of a swept parameter.
    Sweep(SweepArgs),
    /// Regenerate the data and plots behind the reference figures (fig2-fig5, fig7-fig12).
    Figures(FiguresArgs),
}

#[derive(Args, Debug, Default)]
struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(short, long, value_name = "PATH")]
    output: Option<PathBuf>,

    /// Output format; inferred from the output extension by default.
    #[arg(long, value_enum)]
    format: Option<Format>,

    /// Also write an SVG plot next to the output file.
    #[arg(long)]
    plot: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SetupArg {
    Direct,
    Stlr,
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Model kind, e.g. qubit-only, qubit-qnmr, dispersive, qubit-cnmr,
    /// stlr-qubit, stlr-qubit-qnmr, stlr-qubit-cnmr.
    #[arg(long, value_parser = parse_model)]
    model: Option<ModelKind>,

    /// Frequency grid as start:stop:n_points (rad/s).
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    grid: Option<GridSpec>,

    /// Qubit frequency ω0 (rad/s).
    #[arg(long)]
    omega0: Option<f64>,
    /// Mechanical resonator frequency ωb (rad/s).
    #[arg(long)]
    omega_b: Option<f64>,
    /// STLR frequency ωr (rad/s).
    #[arg(long)]
    omega_r: Option<f64>,
    /// Feedline decay rate γc (rad/s).
    #[arg(long)]
    gamma_c: Option<f64>,
    /// Feedline group velocity (m/s).
    #[arg(long)]
    v_g: Option<f64>,
    /// Qubit–feedline coupling V1.
    #[arg(long)]
    v1: Option<f64>,
    /// STLR–feedline coupling V2.
    #[arg(long)]
    v2: Option<f64>,
    /// Quantum qubit–resonator coupling g_Q (rad/s).
    #[arg(long)]
    g_q: Option<f64>,
    /// Classical qubit–resonator coupling g_C (rad/s).
    #[arg(long)]
    g_c: Option<f64>,
    /// STLR–qubit coupling g_rq (rad/s).
    #[arg(long)]
    g_rq: Option<f64>,
    /// Mean phonon number for the dispersive model.
    #[arg(long)]
    mean_n: Option<f64>,

    /// Standard deviation of Gaussian noise added to T and the phase.
    #[arg(long)]
    noise_sigma: Option<f64>,

    /// Seed of the noise generator.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Swept parameter, as field=start:stop:n or field=v1,v2,...
    #[arg(long, value_parser = parse_sweep)]
    sweep: Option<SweepSpec>,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    /// Spectrum CSV (columns omega, T, phase_rad).
    input: Option<PathBuf>,

    /// Independently known qubit frequency ω0.
    #[arg(long)]
    ref_omega0: Option<f64>,

    /// Independently known resonator frequency ωb.
    #[arg(long)]
    ref_omega_b: Option<f64>,

    /// Whether the feedline couples to the qubit directly or through an STLR.
    #[arg(long, value_enum)]
    setup: Option<SetupArg>,

    /// Resonator frequency for the dispersive phonon-number readout.
    #[arg(long, requires = "phonon_g_q")]
    phonon_omega_b: Option<f64>,

    /// Coupling g_Q for the dispersive phonon-number readout.
    #[arg(long, requires = "phonon_omega_b")]
    phonon_g_q: Option<f64>,

    /// In-plane field B0 (T), to turn g_C into an amplitude.
    #[arg(long, requires_all = ["i_p", "length"])]
    b0: Option<f64>,

    /// Persistent current I_p (A).
    #[arg(long, requires_all = ["b0", "length"])]
    i_p: Option<f64>,

    /// Vibrating segment length (m).
    #[arg(long, requires_all = ["b0", "i_p"])]
    length: Option<f64>,

    /// Minimum dip depth 1 − T.
    #[arg(long)]
    depth_threshold: Option<f64>,

    /// Transmission tolerance for unity points.
    #[arg(long)]
    unity_tol: Option<f64>,

    /// Tolerance when comparing a dip with the reference ω0.
    #[arg(long)]
    tolerance: Option<f64>,

    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct SquidArgs {
    /// Junction capacitance (F).
    #[arg(long)]
    c_j: Option<f64>,

    /// Loop inductance (H).
    #[arg(long)]
    l: Option<f64>,

    /// Critical current (A); 0 gives the LC oscillator.
    #[arg(long)]
    i_c: Option<f64>,

    /// External flux in units of Φ0.
    #[arg(long, value_name = "PHI0_UNITS")]
    phi_e: Option<f64>,

    /// Flux grid points (odd).
    #[arg(long)]
    grid_points: Option<usize>,

    /// Grid half-width in units of Φ0.
    #[arg(long)]
    flux_window: Option<f64>,

    /// Number of eigenstates to solve for.
    #[arg(long)]
    n_states: Option<usize>,

    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct FiguresArgs {
    /// Figure ids (fig2 ... fig12) or `all`.
    #[arg(long, value_delimiter = ',')]
    which: Vec<String>,

    /// Directory for the generated files.
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_grid(s: &str) -> Result<GridSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_sweep(s: &str) -> Result<SweepSpec, String> {
    SweepSpec::parse(s).map_err(|e| e.to_string())
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn apply_output(cfg: &mut RunConfig, out: OutputArgs) {
    if out.output.is_some() {
        cfg.output.path = out.output;
    }
    if let Some(f) = out.format {
        cfg.output.format = Some(match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
            Format::Svg => OutputFormat::Svg,
        });
    }
    cfg.output.plot |= out.plot;
}

fn apply_model(cfg: &mut RunConfig, m: ModelArgs) {
    use qspectra_core::ParamField::*;
    if m.model.is_some() {
        cfg.model = m.model;
    }
    if m.grid.is_some() {
        cfg.grid = m.grid;
    }
    let fields = [
        (Omega0, m.omega0),
        (OmegaB, m.omega_b),
        (OmegaR, m.omega_r),
        (GammaC, m.gamma_c),
        (VG, m.v_g),
        (V1, m.v1),
        (V2, m.v2),
        (GQ, m.g_q),
        (GC, m.g_c),
        (GRq, m.g_rq),
        (MeanN, m.mean_n),
    ];
    for (field, value) in fields {
        if let Some(v) = value {
            cfg.params.set(field, v);
        }
    }
    if m.noise_sigma.is_some() || m.seed.is_some() {
        let mut noise = cfg.noise.unwrap_or(NoiseSpec { sigma: 0.0, seed: 0 });
        set(&mut noise.sigma, m.noise_sigma);
        set(&mut noise.seed, m.seed);
        cfg.noise = Some(noise);
    }
}

/// Merges the flags into the file configuration.
fn configure(cli: Cli) -> Result<(Command, RunConfig), Error> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    let command = match cli.command {
        Cmd::Spectrum(a) => {
            apply_model(&mut cfg, a.model);
            apply_output(&mut cfg, a.out);
            Command::Spectrum
        }
        Cmd::Sweep(a) => {
            apply_model(&mut cfg, a.model);
            apply_output(&mut cfg, a.out);
            if a.sweep.is_some() {
                cfg.sweep = a.sweep;
            }
            Command::Sweep
        }
        Cmd::Estimate(a) => {
            let e = &mut cfg.estimate;
            if a.input.is_some() {
                cfg.input = a.input;
            }
            if let Some(s) = a.setup {
                e.setup = match s {
                    SetupArg::Direct => Setup::Direct,
                    SetupArg::Stlr => Setup::Stlr,
                };
            }
            if a.ref_omega0.is_some() {
                e.reference_omega0 = a.ref_omega0;
            }
            if a.ref_omega_b.is_some() {
                e.reference_omega_b = a.ref_omega_b;
            }
            if let (Some(omega_b), Some(g_q)) = (a.phonon_omega_b, a.phonon_g_q) {
                e.phonon = Some(PhononHints { omega_b, g_q });
            }
            if let (Some(b0), Some(i_p), Some(length)) = (a.b0, a.i_p, a.length) {
                e.mechanics = Some(AmplitudeHints { b0, i_p, length });
            }
            set(&mut e.depth_threshold, a.depth_threshold);
            set(&mut e.unity_tol, a.unity_tol);
            if a.tolerance.is_some() {
                e.tolerance = a.tolerance;
            }
            apply_output(&mut cfg, a.out);
            Command::Estimate
        }
        Cmd::Squid(a) => {
            let c = &mut cfg.circuit;
            set(&mut c.c_j, a.c_j);
            set(&mut c.l, a.l);
            set(&mut c.i_c, a.i_c);
            set(&mut c.phi_e, a.phi_e.map(|f| f * FLUX_QUANTUM));
            set(&mut c.grid_points, a.grid_points);
            set(&mut c.flux_window, a.flux_window);
            set(&mut cfg.n_states, a.n_states);
            apply_output(&mut cfg, a.out);
            Command::Squid
        }
        Cmd::Figures(a) => {
            if !a.which.is_empty() {
                cfg.figures.which = a.which;
            }
            set(&mut cfg.figures.out_dir, a.out_dir);
            Command::Figures
        }
    };
    Ok((command, cfg))
}

fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Config => 1,
        ErrorKind::Io => 2,
        ErrorKind::Numerical => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = configure(cli).and_then(|(command, cfg)| run(&cfg, command));
    match result {
        Ok(outcome) => {
            for path in &outcome.written {
                log::info!("wrote {}", path.display());
            }
            if let Some(text) = outcome.stdout {
                print!("{text}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
