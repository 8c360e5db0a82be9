//! JSON document formats: matrices (structured or numeric), function specs,
//! and hybrid operator specs.
//!
//! Complex numbers are `[re, im]` pairs (a bare number is accepted as a real
//! value). Float mode takes JSON numbers or numeric strings; exact mode
//! requires integers or strings ("3/4", "-0.125") so that no rounding ever
//! slips in.

use num::BigInt;
use serde_json::Value;
use thiserror::Error;

use crate::calculus::{BuiltinFn, SeriesFunction};
use crate::hybrid::{ContinuousNode, DiscreteNode, HybridOperatorSpec};
use crate::jordan::{EigenGroup, JordanSpec};
use crate::matrix::MatrixC;
use crate::sample;
use crate::scalar::{parse_exact_real, Scalar, ScalarMode, Tolerance};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("{0}")]
    Malformed(String),
    #[error("invalid document: {0}")]
    Invalid(String),
}

fn malformed(msg: impl Into<String>) -> ParseError {
    ParseError::Malformed(msg.into())
}

/// A parsed input file: either a matrix document or a hybrid operator spec.
#[derive(Debug, Clone)]
pub enum InputDocument {
    Matrix(MatrixDocument),
    Hybrid(HybridOperatorSpec),
}

/// Matrix documents come structured (a full Jordan spec, the exact ground
/// truth) or numeric (dense entries to be decomposed).
#[derive(Debug, Clone)]
pub enum MatrixDocument {
    Structured(JordanSpec),
    Numeric {
        matrix: MatrixC,
        tolerances: Option<Tolerance>,
        /// Caller-supplied eigenvalues; required to decompose exact-mode
        /// numeric input.
        eigenvalues: Option<Vec<Scalar>>,
    },
}

/// Detect and parse an input document.
pub fn parse_input(value: &Value, tol: &Tolerance) -> Result<InputDocument, ParseError> {
    let obj = value
        .as_object()
        .ok_or_else(|| malformed("top level must be a JSON object"))?;
    if obj.contains_key("discrete") || obj.contains_key("continuous") {
        Ok(InputDocument::Hybrid(parse_hybrid(value)?))
    } else if obj.contains_key("mode") {
        Ok(InputDocument::Matrix(parse_matrix_document(value, tol)?))
    } else {
        Err(malformed(
            "expected a matrix document (with \"mode\") or a hybrid spec (with \"discrete\"/\"continuous\")",
        ))
    }
}

pub fn parse_matrix_document(
    value: &Value,
    tol: &Tolerance,
) -> Result<MatrixDocument, ParseError> {
    let obj = value
        .as_object()
        .ok_or_else(|| malformed("matrix document must be an object"))?;
    let mode_str = obj
        .get("mode")
        .and_then(Value::as_str)
        .ok_or_else(|| malformed("missing \"mode\": \"structured\" or \"numeric\""))?;
    let scalar_mode = match obj.get("scalar_mode").and_then(Value::as_str) {
        None | Some("float") => ScalarMode::Float,
        Some("exact") => ScalarMode::Exact,
        Some(other) => return Err(malformed(format!("unknown scalar_mode {other:?}"))),
    };
    match mode_str {
        "structured" => {
            let groups_v = obj
                .get("groups")
                .and_then(Value::as_array)
                .ok_or_else(|| malformed("structured document needs a \"groups\" array"))?;
            let mut groups = Vec::new();
            let mut dim = 0usize;
            for g in groups_v {
                let go = g
                    .as_object()
                    .ok_or_else(|| malformed("each group must be an object"))?;
                let ev = parse_complex(
                    go.get("eigenvalue")
                        .ok_or_else(|| malformed("group missing \"eigenvalue\""))?,
                    scalar_mode,
                )?;
                let sizes_v = go
                    .get("block_sizes")
                    .and_then(Value::as_array)
                    .ok_or_else(|| malformed("group missing \"block_sizes\""))?;
                let mut sizes = Vec::new();
                for s in sizes_v {
                    let n = s
                        .as_u64()
                        .ok_or_else(|| malformed("block sizes must be positive integers"))?;
                    sizes.push(n as usize);
                }
                dim += sizes.iter().sum::<usize>();
                groups.push(EigenGroup::new(ev, sizes));
            }
            let transform = match obj.get("transform") {
                None => MatrixC::identity(dim.max(1), scalar_mode),
                Some(Value::String(s)) if s == "identity" => {
                    MatrixC::identity(dim.max(1), scalar_mode)
                }
                Some(Value::String(s)) => parse_seeded_transform(s, dim, scalar_mode)?,
                Some(v) => parse_matrix(v, scalar_mode)?,
            };
            let spec = JordanSpec::new(transform, groups, tol)
                .map_err(|e| ParseError::Invalid(e.to_string()))?;
            Ok(MatrixDocument::Structured(spec))
        }
        "numeric" => {
            let entries = obj
                .get("entries")
                .ok_or_else(|| malformed("numeric document needs \"entries\""))?;
            let matrix = parse_matrix(entries, scalar_mode)?;
            let tolerances = match obj.get("tolerances") {
                None => None,
                Some(t) => Some(parse_tolerances(t)?),
            };
            let eigenvalues = match obj.get("eigenvalues") {
                None => None,
                Some(Value::Array(items)) => Some(
                    items
                        .iter()
                        .map(|v| parse_complex(v, scalar_mode))
                        .collect::<Result<Vec<_>, _>>()?,
                ),
                Some(_) => return Err(malformed("\"eigenvalues\" must be an array")),
            };
            Ok(MatrixDocument::Numeric {
                matrix,
                tolerances,
                eigenvalues,
            })
        }
        other => Err(malformed(format!("unknown mode {other:?}"))),
    }
}

fn parse_tolerances(value: &Value) -> Result<Tolerance, ParseError> {
    let obj = value
        .as_object()
        .ok_or_else(|| malformed("tolerances must be an object"))?;
    let default = Tolerance::default();
    let get = |key: &str, fallback: f64| -> Result<f64, ParseError> {
        match obj.get(key) {
            None => Ok(fallback),
            Some(v) => v
                .as_f64()
                .ok_or_else(|| malformed(format!("{key} must be a number"))),
        }
    };
    Ok(Tolerance::new(
        get("rank_eps", default.rank_eps)?,
        get("recon_eps", default.recon_eps)?,
        get("cluster_eps", default.cluster_eps)?,
    ))
}

/// `{"builtin": name}` or
/// `{"series": {"arity": r, "coeffs": [[l1..lr, re, im], ...], "radii": [..]}}`.
pub fn parse_function(value: &Value) -> Result<SeriesFunction, ParseError> {
    let obj = value
        .as_object()
        .ok_or_else(|| malformed("function document must be an object"))?;
    if let Some(name) = obj.get("builtin") {
        let name = name
            .as_str()
            .ok_or_else(|| malformed("\"builtin\" must be a string"))?;
        let builtin = BuiltinFn::from_name(name)
            .ok_or_else(|| malformed(format!("unknown builtin {name:?}")))?;
        return Ok(SeriesFunction::builtin(builtin));
    }
    let series = obj
        .get("series")
        .and_then(Value::as_object)
        .ok_or_else(|| malformed("expected \"builtin\" or \"series\""))?;
    let arity = series
        .get("arity")
        .and_then(Value::as_u64)
        .ok_or_else(|| malformed("series needs a positive integer \"arity\""))? as usize;
    let coeffs_v = series
        .get("coeffs")
        .and_then(Value::as_array)
        .ok_or_else(|| malformed("series needs a \"coeffs\" array"))?;
    let mut entries = Vec::new();
    for row in coeffs_v {
        let row = row
            .as_array()
            .ok_or_else(|| malformed("each coeffs row must be an array"))?;
        if row.len() != arity + 2 {
            return Err(malformed(format!(
                "coeffs rows carry {arity} exponents plus re and im; got {} entries",
                row.len()
            )));
        }
        let mut exps = Vec::with_capacity(arity);
        for e in &row[..arity] {
            exps.push(
                e.as_u64()
                    .ok_or_else(|| malformed("exponents must be nonnegative integers"))?
                    as u32,
            );
        }
        let re = &row[arity];
        let im = &row[arity + 1];
        let coeff = if re.is_string() || im.is_string() {
            Scalar::exact(parse_exact_component(re)?, parse_exact_component(im)?)
        } else {
            Scalar::float(
                re.as_f64()
                    .ok_or_else(|| malformed("coefficient re must be a number"))?,
                im.as_f64()
                    .ok_or_else(|| malformed("coefficient im must be a number"))?,
            )
        };
        entries.push((exps, coeff));
    }
    let radii = match series.get("radii") {
        None => vec![f64::INFINITY; arity],
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| match v {
                Value::String(s) if s == "inf" => Ok(f64::INFINITY),
                _ => v
                    .as_f64()
                    .ok_or_else(|| malformed("radii must be numbers or \"inf\"")),
            })
            .collect::<Result<Vec<_>, _>>()?,
        Some(_) => return Err(malformed("\"radii\" must be an array")),
    };
    SeriesFunction::from_sparse(arity, entries, radii)
        .map_err(|e| ParseError::Invalid(e.to_string()))
}

/// `{"discrete": [[re,im,m,mult],...], "continuous": {...} | [[re,im,w,m],...],
///   "transform": "identity" | "random_seed:<k>" | matrix}`.
pub fn parse_hybrid(value: &Value) -> Result<HybridOperatorSpec, ParseError> {
    let obj = value
        .as_object()
        .ok_or_else(|| malformed("hybrid document must be an object"))?;
    let mut discrete = Vec::new();
    if let Some(d) = obj.get("discrete") {
        let rows = d
            .as_array()
            .ok_or_else(|| malformed("\"discrete\" must be an array"))?;
        for row in rows {
            let row = row
                .as_array()
                .filter(|r| r.len() == 4)
                .ok_or_else(|| malformed("discrete rows are [re, im, m, multiplicity]"))?;
            discrete.push(DiscreteNode {
                eigenvalue: Scalar::float(
                    row[0].as_f64().ok_or_else(|| malformed("re must be a number"))?,
                    row[1].as_f64().ok_or_else(|| malformed("im must be a number"))?,
                ),
                nilpotency: row[2]
                    .as_u64()
                    .ok_or_else(|| malformed("m must be a positive integer"))?
                    as usize,
                multiplicity: row[3]
                    .as_u64()
                    .ok_or_else(|| malformed("multiplicity must be a positive integer"))?
                    as usize,
            });
        }
    }
    let mut continuous = Vec::new();
    match obj.get("continuous") {
        None => {}
        Some(Value::Object(seg)) => {
            let interval = seg
                .get("interval")
                .and_then(Value::as_array)
                .filter(|a| a.len() == 2)
                .ok_or_else(|| malformed("continuous segment needs \"interval\": [a, b]"))?;
            let a = interval[0]
                .as_f64()
                .ok_or_else(|| malformed("interval endpoints must be numbers"))?;
            let b = interval[1]
                .as_f64()
                .ok_or_else(|| malformed("interval endpoints must be numbers"))?;
            let nodes = seg
                .get("nodes")
                .and_then(Value::as_u64)
                .ok_or_else(|| malformed("continuous segment needs \"nodes\""))?
                as usize;
            let m = seg.get("m").and_then(Value::as_u64).unwrap_or(1) as usize;
            continuous = HybridOperatorSpec::midpoint_segment(a, b, nodes, m);
        }
        Some(Value::Array(rows)) => {
            for row in rows {
                let row = row
                    .as_array()
                    .filter(|r| r.len() == 4)
                    .ok_or_else(|| malformed("continuous rows are [re, im, weight, m]"))?;
                continuous.push(ContinuousNode {
                    eigenvalue: Scalar::float(
                        row[0].as_f64().ok_or_else(|| malformed("re must be a number"))?,
                        row[1].as_f64().ok_or_else(|| malformed("im must be a number"))?,
                    ),
                    weight: row[2]
                        .as_f64()
                        .ok_or_else(|| malformed("weight must be a number"))?,
                    nilpotency: row[3]
                        .as_u64()
                        .ok_or_else(|| malformed("m must be a positive integer"))?
                        as usize,
                });
            }
        }
        Some(_) => return Err(malformed("\"continuous\" must be a segment object or node list")),
    }
    let dim: usize = discrete
        .iter()
        .map(|d| d.nilpotency * d.multiplicity)
        .sum::<usize>()
        + continuous.iter().map(|c| c.nilpotency).sum::<usize>();
    let transform = match obj.get("transform") {
        None => MatrixC::identity(dim.max(1), ScalarMode::Float),
        Some(Value::String(s)) if s == "identity" => MatrixC::identity(dim.max(1), ScalarMode::Float),
        Some(Value::String(s)) => parse_seeded_transform(s, dim, ScalarMode::Float)?,
        Some(v) => parse_matrix(v, ScalarMode::Float)?,
    };
    HybridOperatorSpec::new(discrete, continuous, transform)
        .map_err(|e| ParseError::Invalid(e.to_string()))
}

fn parse_seeded_transform(
    s: &str,
    dim: usize,
    mode: ScalarMode,
) -> Result<MatrixC, ParseError> {
    let seed = s
        .strip_prefix("random_seed:")
        .and_then(|t| t.parse::<u64>().ok())
        .ok_or_else(|| {
            malformed(format!(
                "transform string must be \"identity\" or \"random_seed:<k>\", got {s:?}"
            ))
        })?;
    Ok(match mode {
        ScalarMode::Float => sample::seeded_transform(dim, seed),
        ScalarMode::Exact => sample::seeded_exact_transform(dim, seed),
    })
}

/// Dense matrix: array of rows of complex values.
pub fn parse_matrix(value: &Value, mode: ScalarMode) -> Result<MatrixC, ParseError> {
    let rows_v = value
        .as_array()
        .ok_or_else(|| malformed("matrix must be an array of rows"))?;
    let mut rows = Vec::new();
    for row in rows_v {
        let cells = row
            .as_array()
            .ok_or_else(|| malformed("matrix rows must be arrays"))?;
        let mut out = Vec::new();
        for cell in cells {
            out.push(parse_complex(cell, mode)?);
        }
        rows.push(out);
    }
    MatrixC::from_rows(rows).map_err(|e| ParseError::Invalid(e.to_string()))
}

/// `[re, im]` or a bare real value.
pub fn parse_complex(value: &Value, mode: ScalarMode) -> Result<Scalar, ParseError> {
    match value {
        Value::Array(pair) if pair.len() == 2 => match mode {
            ScalarMode::Float => Ok(Scalar::float(
                parse_float_component(&pair[0])?,
                parse_float_component(&pair[1])?,
            )),
            ScalarMode::Exact => Ok(Scalar::exact(
                parse_exact_component(&pair[0])?,
                parse_exact_component(&pair[1])?,
            )),
        },
        Value::Array(_) => Err(malformed("complex values are [re, im] pairs")),
        other => match mode {
            ScalarMode::Float => Ok(Scalar::float(parse_float_component(other)?, 0.0)),
            ScalarMode::Exact => Ok(Scalar::exact(
                parse_exact_component(other)?,
                num::rational::BigRational::from_integer(BigInt::from(0)),
            )),
        },
    }
}

fn parse_float_component(value: &Value) -> Result<f64, ParseError> {
    match value {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| malformed("number out of f64 range")),
        Value::String(s) => s
            .trim()
            .parse::<f64>()
            .map_err(|_| malformed(format!("cannot parse {s:?} as a float"))),
        _ => Err(malformed("expected a number or numeric string")),
    }
}

fn parse_exact_component(value: &Value) -> Result<num::rational::BigRational, ParseError> {
    match value {
        Value::Number(n) if n.is_i64() => Ok(num::rational::BigRational::from_integer(
            BigInt::from(n.as_i64().unwrap()),
        )),
        Value::Number(_) => Err(malformed(
            "exact mode requires integers or string rationals like \"3/4\" or \"0.25\"",
        )),
        Value::String(s) => parse_exact_real(s)
            .ok_or_else(|| malformed(format!("cannot parse {s:?} as an exact rational"))),
        _ => Err(malformed("expected an integer or a rational string")),
    }
}

/// Full-precision JSON for a scalar: floats as numbers, exact values as
/// rational strings.
pub fn scalar_to_json(s: &Scalar) -> Value {
    match s {
        Scalar::Float(z) => serde_json::json!([z.re, z.im]),
        Scalar::Exact(g) => serde_json::json!([g.re.to_string(), g.im.to_string()]),
    }
}

/// Full-precision JSON matrix: rows of [re, im] entries.
pub fn matrix_to_json(m: &MatrixC) -> Value {
    let rows: Vec<Value> = (0..m.rows())
        .map(|i| {
            let cells: Vec<Value> = (0..m.cols()).map(|j| scalar_to_json(m.get(i, j))).collect();
            Value::Array(cells)
        })
        .collect();
    Value::Array(rows)
}
