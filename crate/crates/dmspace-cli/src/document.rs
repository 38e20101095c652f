//! JSON documents for spaces and witnesses.
//!
//! Numbers may be JSON numbers or strings: `"3/4"`, `"0.25"`, `"1e-3"`. In exact mode
//! decimals are read as the rational they spell. `"inf"` is the only infinity token and
//! is accepted for distances only.

use std::path::Path;

use dmspace::ghlp::{Provenance, RhoWitness};
use dmspace::space::{validate_space, DistanceMatrix, ExtendedDistance, Finite, FiniteSpace, Infinite, Scalar, Q};
use num_traits::CheckedMul;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDocument {
    pub schema_version: u32,
    pub labels: Vec<String>,
    pub dist: Vec<Vec<Value>>,
    pub mass: Vec<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessDocument {
    pub schema_version: u32,
    pub ambient: Vec<Vec<Value>>,
    pub embed_x: Vec<usize>,
    pub embed_y: Vec<usize>,
    pub level: Value,
    pub eps: Value,
    pub removed_x: Vec<usize>,
    pub removed_y: Vec<usize>,
}

/// Scalars the command line can read and print.
pub trait CliScalar: Scalar {
    fn parse_token(s: &str) -> Result<Self, String>;
    fn to_value(self) -> Value;
}

fn pow10(k: u32) -> Option<i64> {
    10i64.checked_pow(k)
}

/// Exact value of `p/q` or a decimal with optional exponent.
fn parse_rational(s: &str) -> Result<Q, String> {
    let bad = || format!("not a number: {s:?}");
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(Q::new(p, q));
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let overflow = || format!("{s:?} does not fit a 64-bit rational");
    let digits = format!("{int}{frac}");
    let digits = digits.trim_start_matches('0');
    let num: i64 = if digits.is_empty() { 0 } else { digits.parse().map_err(|_| overflow())? };
    let scale = exp - frac.len() as i32;
    let v = if scale >= 0 {
        let f = pow10(scale as u32).ok_or_else(overflow)?;
        Q::from_integer(num).checked_mul(&Q::from_integer(f)).ok_or_else(overflow)?
    } else {
        Q::new(num, pow10(scale.unsigned_abs()).ok_or_else(overflow)?)
    };
    Ok(if neg { -v } else { v })
}

impl CliScalar for Q {
    fn parse_token(s: &str) -> Result<Self, String> {
        parse_rational(s.trim())
    }

    fn to_value(self) -> Value {
        Value::String(self.to_string())
    }
}

impl CliScalar for f64 {
    fn parse_token(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s.contains('/') {
            return Ok(Scalar::to_f64(parse_rational(s)?));
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(format!("not a finite number: {s:?}")),
        }
    }

    fn to_value(self) -> Value {
        serde_json::Number::from_f64(self).map(Value::Number).unwrap_or_else(|| Value::String(self.to_string()))
    }
}

fn token(v: &Value) -> Option<String> {
    match v {
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

pub fn parse_scalar<T: CliScalar>(v: &Value, at: &str) -> Result<T, String> {
    let s = token(v).ok_or_else(|| format!("{at}: expected a number or string, found {v}"))?;
    T::parse_token(&s).map_err(|e| format!("{at}: {e}"))
}

pub fn parse_distance<T: CliScalar>(v: &Value, at: &str) -> Result<ExtendedDistance<T>, String> {
    match token(v) {
        Some(s) if s.trim() == "inf" => Ok(Infinite),
        _ => parse_scalar(v, at).map(Finite),
    }
}

pub fn distance_value<T: CliScalar>(d: ExtendedDistance<T>) -> Value {
    match d {
        Finite(v) => v.to_value(),
        Infinite => Value::String("inf".into()),
    }
}

pub fn matrix_rows<T: CliScalar>(d: &DistanceMatrix<T>) -> Vec<Vec<Value>> {
    d.rows().into_iter().map(|r| r.into_iter().map(distance_value).collect()).collect()
}

fn parse_matrix<T: CliScalar>(rows: &[Vec<Value>], name: &str) -> Result<DistanceMatrix<T>, String> {
    let parsed = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            r.iter().enumerate().map(|(j, v)| parse_distance(v, &format!("{name}[{i}][{j}]"))).collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    DistanceMatrix::from_rows(parsed).map_err(|e| format!("{name}: {e}"))
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

/// Parses `text`, rejecting unknown schema versions before looking at anything else.
fn checked_document<D: for<'de> Deserialize<'de>>(text: &str, path: &str) -> Result<D, CliError> {
    let doc_err = |msg: String| CliError::Document { path: path.to_string(), msg };
    let raw: Value = serde_json::from_str(text).map_err(|e| doc_err(e.to_string()))?;
    match raw.get("schema_version").and_then(Value::as_u64) {
        Some(v) if v == u64::from(SCHEMA_VERSION) => {}
        Some(v) => return Err(doc_err(format!("unsupported schema version {v} (this build reads {SCHEMA_VERSION})"))),
        None => return Err(doc_err("missing schema_version".into())),
    }
    serde_json::from_str(text).map_err(|e| doc_err(e.to_string()))
}

/// Labels, matrix and masses of a document, before any validation.
pub fn read_parts<T: CliScalar>(path: &Path) -> Result<(Vec<String>, DistanceMatrix<T>, Vec<T>), CliError> {
    let name = path.display().to_string();
    let doc: SpaceDocument = checked_document(&read(path)?, &name)?;
    let doc_err = |msg: String| CliError::Document { path: name.clone(), msg };
    let dist = parse_matrix(&doc.dist, "dist").map_err(doc_err)?;
    let mass = doc
        .mass
        .iter()
        .enumerate()
        .map(|(i, v)| parse_scalar(v, &format!("mass[{i}]")))
        .collect::<Result<Vec<T>, _>>()
        .map_err(doc_err)?;
    Ok((doc.labels, dist, mass))
}

/// Loads and validates a space.
pub fn load_space<T: CliScalar>(path: &Path, tol: T) -> Result<FiniteSpace<T>, CliError> {
    let (labels, dist, mass) = read_parts::<T>(path)?;
    let name = path.display().to_string();
    let report = validate_space(&labels, &dist, &mass, tol)
        .map_err(|e| CliError::Document { path: name.clone(), msg: e.to_string() })?;
    if let Some(v) = report.violations.first() {
        return Err(CliError::Document { path: name, msg: format!("{}: {}", v.name(), v.describe(&labels)) });
    }
    FiniteSpace::with_tol(labels, dist, mass, tol).map_err(|e| CliError::Document { path: name, msg: e.to_string() })
}

pub fn space_document<T: CliScalar>(s: &FiniteSpace<T>, metadata: Option<Value>) -> SpaceDocument {
    SpaceDocument {
        schema_version: SCHEMA_VERSION,
        labels: s.labels().to_vec(),
        dist: matrix_rows(s.dist()),
        mass: s.mass().iter().map(|&m| m.to_value()).collect(),
        metadata,
    }
}

pub fn witness_document<T: CliScalar>(w: &RhoWitness<T>) -> WitnessDocument {
    WitnessDocument {
        schema_version: SCHEMA_VERSION,
        ambient: matrix_rows(&w.ambient),
        embed_x: w.embed_x.clone(),
        embed_y: w.embed_y.clone(),
        level: distance_value(w.level),
        eps: w.eps.to_value(),
        removed_x: w.removed_x.clone(),
        removed_y: w.removed_y.clone(),
    }
}

pub fn parse_witness<T: CliScalar>(text: &str, path: &str) -> Result<RhoWitness<T>, CliError> {
    let doc: WitnessDocument = checked_document(text, path)?;
    let doc_err = |msg: String| CliError::Document { path: path.to_string(), msg };
    Ok(RhoWitness {
        ambient: parse_matrix(&doc.ambient, "ambient").map_err(doc_err)?,
        embed_x: doc.embed_x,
        embed_y: doc.embed_y,
        level: parse_distance(&doc.level, "level").map_err(doc_err)?,
        eps: parse_scalar(&doc.eps, "eps").map_err(doc_err)?,
        removed_x: doc.removed_x,
        removed_y: doc.removed_y,
        provenance: Provenance::Supplied,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse_rational("0.1").unwrap(), Q::new(1, 10));
        assert_eq!(parse_rational("-2.50").unwrap(), Q::new(-5, 2));
        assert_eq!(parse_rational("1e-3").unwrap(), Q::new(1, 1000));
        assert_eq!(parse_rational("1.5E2").unwrap(), Q::from_integer(150));
        assert_eq!(parse_rational("3/6").unwrap(), Q::new(1, 2));
        assert_eq!(parse_rational("0").unwrap(), Q::from_integer(0));
        assert_eq!(parse_rational(".5").unwrap(), Q::new(1, 2));
        for bad in ["", "-", "1/0", "abc", "1e", "1.2.3", "1e40"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn float_tokens() {
        assert_eq!(f64::parse_token("1/4").unwrap(), 0.25);
        assert_eq!(f64::parse_token(" 2.5 ").unwrap(), 2.5);
        assert!(f64::parse_token("inf").is_err());
        assert!(f64::parse_token("NaN").is_err());
    }

    #[test]
    fn witness_round_trip() {
        let x = FiniteSpace::from_rows(&[vec![Q::from(0), Q::new(3, 2)], vec![Q::new(3, 2), Q::from(0)]], vec![Q::from(1), Q::new(1, 3)])
            .unwrap();
        let w = RhoWitness::identity(&x);
        let text = serde_json::to_string(&witness_document(&w)).unwrap();
        let back: RhoWitness<Q> = parse_witness(&text, "w").unwrap();
        assert_eq!(back.ambient, w.ambient);
        assert_eq!(back.level, w.level);
        assert_eq!(back.eps, w.eps);
    }
}
