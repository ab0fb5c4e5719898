//! Canonical JSON reports: sorted keys, fixed float formatting, one trailing newline.
//!
//! Two runs with identical inputs produce byte-identical reports, so reports can be diffed and
//! hashed by pipelines.

use serde::Serialize;
use serde_json::Value;
use std::fmt::Write;

use crate::error::{Error, Result};

/// Digits after the decimal point of every float.
pub const FLOAT_DIGITS: usize = 9;

/// Summary of one CLI run.
#[derive(Clone, Debug, Default, Serialize)]
pub struct RunReport {
    pub mode: String,
    pub capacitated: bool,
    pub delta: f64,
    pub objective: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fractional_objective: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_optimum: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    pub beta_final: f64,
    pub lambda_final: f64,
    pub iterations: u64,
    pub phases: u64,
    pub superphases: u64,
    pub oracle_invocations: u64,
    pub passes: u64,
    pub family_size_max: usize,
    pub feasibility_verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub support_weight_ledger: Option<f64>,
    #[serde(rename = "R", skip_serializing_if = "Option::is_none")]
    pub r: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounding: Option<RoundingSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<Vec<FamilyEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
    /// `(i, j, y)` triples with 1-based endpoints, support only.
    pub assignment: Vec<(usize, usize, f64)>,
}

/// Sizes recorded by the rounding stage.
#[derive(Clone, Debug, Default, Serialize)]
pub struct RoundingSummary {
    pub t: u64,
    pub heavy_copies: u64,
    pub split_vertices: usize,
    pub gadget_vertices: usize,
    pub gadget_edges: usize,
    pub epsilon: f64,
}

/// One set of a dumped odd-set family.
#[derive(Clone, Debug, Serialize)]
pub struct FamilyEntry {
    /// 1-based vertex ids.
    pub members: Vec<usize>,
    pub bnorm: u64,
    pub lambda: f64,
}

fn write_value(out: &mut String, v: &Value) -> Result<()> {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else {
                let f = n.as_f64().unwrap_or(f64::NAN);
                let s = format!("{f:.FLOAT_DIGITS$}");
                // avoid "-0.000000000"
                out.push_str(s.strip_prefix('-').filter(|r| r.bytes().all(|c| c == b'0' || c == b'.')).unwrap_or(&s));
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).map_err(|e| Error::Invariant(e.to_string()))?),
        Value::Array(a) => {
            out.push('[');
            for (k, x) in a.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                write_value(out, x)?;
            }
            out.push(']');
        }
        Value::Object(o) => {
            let mut keys: Vec<&String> = o.keys().collect();
            keys.sort();
            out.push('{');
            for (k, key) in keys.into_iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(key).map_err(|e| Error::Invariant(e.to_string()))?);
                out.push(':');
                write_value(out, &o[key])?;
            }
            out.push('}');
        }
    }
    Ok(())
}

/// Serializes `value` canonically. Non-finite floats become `null`.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Invariant(format!("report not serializable: {e}")))?;
    let mut out = String::new();
    write_value(&mut out, &v)?;
    out.push('\n');
    Ok(out)
}

/// Reads the `assignment` array of a report, or a bare `[[i, j, y], ...]` array.
pub fn parse_assignment(text: &str) -> Result<Vec<(usize, usize, f64)>> {
    let bad = |msg: String| Error::Parse { line: 0, msg };
    let v: Value = serde_json::from_str(text).map_err(|e| bad(format!("invalid JSON: {e}")))?;
    let arr = match &v {
        Value::Array(_) => &v,
        Value::Object(o) => o.get("assignment").ok_or_else(|| bad("no `assignment` field".into()))?,
        _ => return Err(bad("expected an array or an object".into())),
    };
    serde_json::from_value(arr.clone()).map_err(|e| bad(format!("bad assignment: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_are_sorted_and_floats_fixed() {
        let r = RunReport { mode: "frac".into(), delta: 0.0625, objective: 1.5, ..Default::default() };
        let s = to_canonical_json(&r).unwrap();
        assert!(
            s.starts_with("{\"assignment\":[],\"beta_final\":0.000000000,\"capacitated\":false,\"delta\":0.062500000")
        );
        assert!(!s.contains("\"wall_time\"") && !s.contains("\"ratio\""));
        assert!(s.ends_with("}\n"));
    }

    #[test]
    fn capital_r_sorts_first() {
        let r = RunReport { r: Some(7), ..Default::default() };
        assert!(to_canonical_json(&r).unwrap().starts_with("{\"R\":7,"));
    }

    #[test]
    fn negative_zero_prints_as_zero() {
        assert_eq!(to_canonical_json(&vec![-0.0, -1e-12, -0.5]).unwrap(), "[0.000000000,0.000000000,-0.500000000]\n");
    }

    #[test]
    fn non_finite_floats_become_null() {
        // serde_json maps NaN to null; the report stays valid JSON
        assert_eq!(to_canonical_json(&f64::NAN).unwrap(), "null\n");
    }

    #[test]
    fn assignment_round_trip() {
        let r = RunReport { assignment: vec![(1, 2, 0.5), (2, 3, 1.0)], ..Default::default() };
        let s = to_canonical_json(&r).unwrap();
        assert_eq!(parse_assignment(&s).unwrap(), vec![(1, 2, 0.5), (2, 3, 1.0)]);
        assert_eq!(parse_assignment("[[1,3,2]]").unwrap(), vec![(1, 3, 2.0)]);
        assert!(parse_assignment("{}").is_err());
    }
}
