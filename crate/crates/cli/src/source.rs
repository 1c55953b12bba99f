//! Sequence sources accepted on the command line.

use std::fs;

use revlp_core::{power_sequence, random_decreasing, step_sequence, IncrementDist, Precision, Real, Sequence};
use serde_json::Value;

use crate::CliError;

pub const SOURCE_HELP: &str =
    "ones | zeros | harmonic | power:<e> | step:<k> | random[:<seed>] | @<file.json> | inline JSON";

/// Resolves a source to a sequence of length `len`. Generators produce exactly
/// `len` entries; explicit data is used as given.
pub fn resolve(spec: &str, len: usize, prec: Precision) -> Result<Sequence, CliError> {
    let spec = spec.trim();
    let (head, arg) = match spec.split_once(':') {
        Some((h, a)) if !spec.starts_with('[') && !spec.starts_with('{') => (h, Some(a)),
        _ => (spec, None),
    };
    match (head, arg) {
        ("ones", None) => Ok(Sequence::ones(len)),
        ("zeros", None) => Ok(Sequence::zeros(len)),
        ("harmonic", None) => Ok(power_sequence(&Real::int(-1), len, prec)),
        ("power", Some(e)) => Ok(power_sequence(&parse_real(e)?, len, prec)),
        ("step", Some(k)) => {
            let k: usize = k.parse().map_err(|_| CliError::input(format!("bad step index {k:?}")))?;
            Ok(step_sequence(k, len)?)
        }
        ("random", seed) => {
            let seed = match seed {
                Some(s) => s.parse().map_err(|_| CliError::input(format!("bad seed {s:?}")))?,
                None => 0,
            };
            Ok(random_decreasing(len, seed, IncrementDist::default()))
        }
        _ if spec.starts_with('@') => {
            let text = fs::read_to_string(&spec[1..])
                .map_err(|e| CliError::input(format!("cannot read {}: {e}", &spec[1..])))?;
            parse_json(&text, prec)
        }
        _ if spec.starts_with('[') || spec.starts_with('{') => parse_json(spec, prec),
        _ => Err(CliError::input(format!("unknown sequence source {spec:?}; expected {SOURCE_HELP}"))),
    }
}

pub fn parse_real(s: &str) -> Result<Real, CliError> {
    s.trim().parse::<Real>().map_err(|e| CliError::input(e.to_string()))
}

fn parse_json(text: &str, prec: Precision) -> Result<Sequence, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::input(format!("invalid JSON: {e}")))?;
    match value {
        Value::Array(items) => {
            let values = items
                .iter()
                .map(|v| match v {
                    Value::String(s) => json_real(s, prec),
                    Value::Number(n) => parse_real(&n.to_string()),
                    other => Err(CliError::input(format!("sequence entries must be numbers or strings, got {other}"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Sequence::new(values)?)
        }
        obj @ Value::Object(_) => {
            serde_json::from_value(obj).map_err(|e| CliError::input(format!("invalid sequence object: {e}")))
        }
        other => Err(CliError::input(format!("expected a JSON array or sequence object, got {other}"))),
    }
}

/// Strings follow the serialized form: `p/q` and integers are exact, other
/// decimals are exact too, scientific notation is read as a float.
fn json_real(s: &str, prec: Precision) -> Result<Real, CliError> {
    s.parse::<Real>().or_else(|_| Real::parse_float(s, prec)).map_err(|e| CliError::input(e.to_string()))
}
