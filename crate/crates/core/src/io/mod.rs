//! Configuration, file formats, plots, sweeps and figure regeneration.

pub mod config;
pub mod figures;
pub mod json;
pub mod run;
pub mod svg;
pub mod sweep;
pub mod table;

pub use config::{Command, FiguresSpec, GridSpec, NoiseSpec, OutputFormat, OutputSpec, RunConfig, SweepSpec};
pub use json::{report_from_json, report_to_json, SquidSummary, SQUID_SCHEMA_VERSION};
pub use run::{run, Outcome};
pub use table::{classical_to_csv, read_text, spectrum_from_csv, spectrum_to_csv, write_text};
