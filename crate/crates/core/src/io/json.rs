//! JSON documents. Each carries a `schema_version`; readers accept any
//! minor version of the major version they know.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{EstimationReport, REPORT_SCHEMA_VERSION};
use crate::squid::{CircuitSpec, EigenSolution, TruncationReport};

pub const SQUID_SCHEMA_VERSION: &str = "1.0";

fn major(version: &str) -> Option<u32> {
    version.split('.').next()?.parse().ok()
}

/// Checks `schema_version` against the major version of `expected` before
/// deserialising the rest.
fn read_versioned<T: DeserializeOwned>(text: &str, expected: &str) -> Result<T> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let want = major(expected).expect("schema constants are well formed");
    let found = match value.get("schema_version") {
        Some(serde_json::Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
        None => return Err(Error::Parse("missing `schema_version`".into())),
    };
    if major(&found) != Some(want) {
        return Err(Error::Schema { found, expected: want });
    }
    serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))
}

fn pretty<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn report_to_json(r: &EstimationReport) -> Result<String> {
    pretty(r)
}

pub fn report_from_json(text: &str) -> Result<EstimationReport> {
    read_versioned(text, REPORT_SCHEMA_VERSION)
}

/// Result of a circuit solve as written by the `squid` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquidSummary {
    pub schema_version: String,
    pub circuit: CircuitSpec,
    /// Ascending energies (J).
    pub energies: Vec<f64>,
    pub e0: f64,
    pub e1: f64,
    /// (E1 − E0)/ħ (rad/s).
    pub omega0: f64,
    pub i_p: f64,
    pub i_00: f64,
    pub i_11: f64,
    pub truncation: TruncationReport,
}

impl SquidSummary {
    pub fn new(spec: &CircuitSpec, sol: &EigenSolution, truncation: TruncationReport) -> Self {
        SquidSummary {
            schema_version: SQUID_SCHEMA_VERSION.to_string(),
            circuit: *spec,
            energies: sol.energies.clone(),
            e0: sol.energies[0],
            e1: sol.energies[1],
            omega0: sol.omega0.0,
            i_p: sol.i_p,
            i_00: sol.i_00,
            i_11: sol.i_11,
            truncation,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        pretty(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        read_versioned(text, SQUID_SCHEMA_VERSION)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::{estimate, EstimateOptions};
    use crate::scattering::{synthesize, ModelKind};
    use crate::types::{make_frequency_grid, ModelParams};

    fn report() -> EstimationReport {
        let p = ModelParams::new().with_omega0(2.1e9).with_omega_b(2.0e9).with_g_q(1e8).with_gamma_c(3.3e7);
        let s = synthesize(ModelKind::QubitQnmr, &p, &make_frequency_grid(1.8e9, 2.3e9, 4001).unwrap()).unwrap();
        estimate(&s, &EstimateOptions::default()).unwrap()
    }

    #[test]
    fn report_round_trip() {
        let r = report();
        let text = report_to_json(&r).unwrap();
        assert!(text.contains("\"schema_version\": \"1.0\""));
        assert_eq!(report_from_json(&text).unwrap(), r);
    }

    #[test]
    fn minor_versions_are_accepted_and_majors_rejected() {
        let r = report();
        let mut v = serde_json::to_value(&r).unwrap();
        v["schema_version"] = "1.7".into();
        assert!(report_from_json(&v.to_string()).is_ok());
        v["schema_version"] = "2.0".into();
        match report_from_json(&v.to_string()) {
            Err(Error::Schema { found, expected }) => {
                assert_eq!(found, "2.0");
                assert_eq!(expected, 1);
            }
            other => panic!("expected schema error, got {other:?}"),
        }
        v.as_object_mut().unwrap().remove("schema_version");
        assert!(matches!(report_from_json(&v.to_string()), Err(Error::Parse(_))));
        assert!(matches!(report_from_json("{"), Err(Error::Parse(_))));
    }
}
