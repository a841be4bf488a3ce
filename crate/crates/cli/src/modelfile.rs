//! JSON model files.
//!
//! ```json
//! {
//!   "z": { "marginal": { "family": "uniform01" } },
//!   "components": [
//!     { "marginal": { "family": "power", "k": 2 },
//!       "copula":   { "family": "fgm", "alpha": -1 } }
//!   ],
//!   "quadrature_order": 64
//! }
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use cindep::numerics::DEFAULT_QUADRATURE_ORDER;
use cindep::{BivariateCopula, CiModel, Component, Marginal};
use serde::Deserialize;
use serde_json::Value;

use crate::CliError;

/// Overrides the default quadrature order when the file does not set one.
pub const QUAD_ORDER_ENV: &str = "CINDEP_QUAD_ORDER";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    z: RawZ,
    components: Vec<RawComponent>,
    #[serde(default)]
    quadrature_order: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawZ {
    marginal: RawFamily,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComponent {
    marginal: RawFamily,
    copula: RawFamily,
}

#[derive(Debug, Deserialize)]
struct RawFamily {
    family: String,
    #[serde(flatten)]
    params: BTreeMap<String, Value>,
}

impl RawFamily {
    fn expect_params(&self, at: &str, names: &[&str]) -> Result<Vec<f64>, CliError> {
        if let Some(extra) = self.params.keys().find(|k| !names.contains(&k.as_str())) {
            return Err(CliError::UnexpectedParameter {
                at: at.to_string(),
                family: self.family.clone(),
                name: extra.clone(),
            });
        }
        names
            .iter()
            .map(|&name| {
                let v = self
                    .params
                    .get(name)
                    .ok_or_else(|| CliError::MissingParameter {
                        at: at.to_string(),
                        family: self.family.clone(),
                        name: name.to_string(),
                    })?;
                v.as_f64().ok_or_else(|| CliError::OutOfRange {
                    at: at.to_string(),
                    message: format!("{}: {name} must be a number, got {v}", self.family),
                })
            })
            .collect()
    }
}

fn out_of_range(at: &str, err: cindep::Error) -> CliError {
    CliError::OutOfRange {
        at: at.to_string(),
        message: err.to_string(),
    }
}

fn marginal(raw: &RawFamily, at: &str) -> Result<Marginal<f64>, CliError> {
    match raw.family.as_str() {
        "uniform01" => {
            raw.expect_params(at, &[])?;
            Ok(Marginal::uniform())
        }
        "power" => {
            let p = raw.expect_params(at, &["k"])?;
            Marginal::power(p[0]).map_err(|e| out_of_range(at, e))
        }
        "exponential" => {
            let p = raw.expect_params(at, &["rate"])?;
            Marginal::exponential(p[0]).map_err(|e| out_of_range(at, e))
        }
        other => Err(CliError::UnknownFamily {
            at: at.to_string(),
            kind: "marginal",
            name: other.to_string(),
        }),
    }
}

fn copula(raw: &RawFamily, at: &str) -> Result<BivariateCopula<f64>, CliError> {
    match raw.family.as_str() {
        "independence" => {
            raw.expect_params(at, &[])?;
            Ok(BivariateCopula::independence())
        }
        "fgm" => {
            let p = raw.expect_params(at, &["alpha"])?;
            BivariateCopula::fgm(p[0]).map_err(|e| out_of_range(at, e))
        }
        "clayton" => {
            let p = raw.expect_params(at, &["theta"])?;
            BivariateCopula::clayton(p[0]).map_err(|e| out_of_range(at, e))
        }
        other => Err(CliError::UnknownFamily {
            at: at.to_string(),
            kind: "copula",
            name: other.to_string(),
        }),
    }
}

/// Quadrature order: the file's value, else the environment, else 64.
fn quadrature_order(from_file: Option<usize>) -> Result<usize, CliError> {
    if let Some(order) = from_file {
        return Ok(order);
    }
    match std::env::var(QUAD_ORDER_ENV) {
        Ok(s) => s.trim().parse().map_err(|_| CliError::OutOfRange {
            at: QUAD_ORDER_ENV.to_string(),
            message: format!("expected a positive integer, got {s:?}"),
        }),
        Err(_) => Ok(DEFAULT_QUADRATURE_ORDER),
    }
}

/// Parses and validates a model from JSON text. `origin` names the source
/// in error messages.
pub fn parse_model_str(text: &str, origin: &str) -> Result<CiModel<f64>, CliError> {
    let raw: RawModel = serde_json::from_str(text).map_err(|e| CliError::Parse {
        origin: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let z = marginal(&raw.z.marginal, "z.marginal")?;
    if raw.components.is_empty() {
        return Err(CliError::Model(cindep::Error::EmptyModel));
    }
    let mut components = Vec::with_capacity(raw.components.len());
    for (i, c) in raw.components.iter().enumerate() {
        let m = marginal(&c.marginal, &format!("components[{i}].marginal"))?;
        let cop = copula(&c.copula, &format!("components[{i}].copula"))?;
        components.push(Component::new(cop, m));
    }
    let order = quadrature_order(raw.quadrature_order)?;
    CiModel::with_quadrature_order(components, z, order).map_err(CliError::Model)
}

pub fn parse_model(path: &Path) -> Result<CiModel<f64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_model_str(&text, &path.display().to_string())
}
