//! Parameter scalars and ambient points that are either exact rationals or
//! floating point, plus the `"p/q"` string encoding used in JSON documents.

use std::fmt;
use std::str::FromStr;

use num::{BigInt, BigRational, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A parameter value on a curve.
#[derive(Clone, Debug, PartialEq)]
pub enum Param {
    Exact(BigRational),
    Float(f64),
}

impl Param {
    pub fn int(n: i64) -> Self {
        Param::Exact(BigRational::from_integer(n.into()))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Param::Exact(BigRational::new(n.into(), d.into()))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Param::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            Param::Float(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Param::Exact(q) => Some(q),
            Param::Float(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Param::Exact(_))
    }

    /// Exact when both operands are exact.
    pub fn add(&self, other: &Param) -> Param {
        match (self, other) {
            (Param::Exact(a), Param::Exact(b)) => Param::Exact(a + b),
            _ => Param::Float(self.to_f64() + other.to_f64()),
        }
    }

    pub fn mul(&self, other: &Param) -> Param {
        match (self, other) {
            (Param::Exact(a), Param::Exact(b)) => Param::Exact(a * b),
            _ => Param::Float(self.to_f64() * other.to_f64()),
        }
    }

    /// Total order used for sorting point sets; exact pairs compare exactly.
    pub fn cmp_value(&self, other: &Param) -> std::cmp::Ordering {
        match (self, other) {
            (Param::Exact(a), Param::Exact(b)) => a.cmp(b),
            _ => self.to_f64().total_cmp(&other.to_f64()),
        }
    }
}

impl From<f64> for Param {
    fn from(x: f64) -> Self {
        Param::Float(x)
    }
}

impl From<BigRational> for Param {
    fn from(q: BigRational) -> Self {
        Param::Exact(q)
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Exact(q) => write!(f, "{q}"),
            Param::Float(x) => write!(f, "{x}"),
        }
    }
}

/// Parses `"p/q"`, an integer, or a plain decimal such as `"0.3"` (read
/// exactly as 3/10). Anything else that parses as `f64` becomes a float.
impl FromStr for Param {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if let Some(q) = parse_rational(s) {
            return Ok(Param::Exact(q));
        }
        s.trim()
            .parse::<f64>()
            .map(Param::Float)
            .map_err(|_| Error::invalid(format!("cannot parse parameter {s:?}")))
    }
}

/// Exact parse of `"p/q"`, `"n"`, or a finite decimal `"-1.25"`.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).ok()?;
        let d = BigInt::from_str(d.trim()).ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Ok(n) = BigInt::from_str(s) {
        return Some(BigRational::from_integer(n));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.')?;
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{}{}", if int.is_empty() { "0" } else { int }, frac);
    let num = BigInt::from_str(&digits).ok()?;
    let den = num::pow(BigInt::from(10), frac.len());
    let q = BigRational::new(num, den);
    Some(if neg { -q } else { q })
}

/// Exact rational from a JSON string or number (numbers convert exactly).
pub fn rational_from_json(v: &serde_json::Value) -> Result<BigRational> {
    match v {
        serde_json::Value::String(s) => {
            parse_rational(s).ok_or_else(|| Error::invalid(format!("bad rational {s:?}")))
        }
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                return Ok(BigRational::from_integer(i.into()));
            }
            let f = n.as_f64().ok_or_else(|| Error::invalid("bad number"))?;
            BigRational::from_float(f).ok_or_else(|| Error::invalid("non-finite number"))
        }
        other => Err(Error::invalid(format!("expected rational, got {other}"))),
    }
}

impl Serialize for Param {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Param::Exact(q) => s.serialize_str(&q.to_string()),
            Param::Float(x) => s.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for Param {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match &v {
            serde_json::Value::String(s) => s.parse().map_err(de::Error::custom),
            serde_json::Value::Number(n) => match n.as_i64() {
                Some(i) => Ok(Param::int(i)),
                None => Ok(Param::Float(n.as_f64().unwrap_or(f64::NAN))),
            },
            _ => Err(de::Error::custom("expected number or \"p/q\" string")),
        }
    }
}

/// A point of the ambient space.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Exact(Vec<BigRational>),
    Float(Vec<f64>),
}

impl Point {
    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Point::Exact(v) => v.iter().map(|q| q.to_f64().unwrap_or(f64::NAN)).collect(),
            Point::Float(v) => v.clone(),
        }
    }

    pub fn as_exact(&self) -> Option<&[BigRational]> {
        match self {
            Point::Exact(v) => Some(v),
            Point::Float(_) => None,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Point::Exact(v) => v.len(),
            Point::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_strings_are_exact() {
        assert_eq!(parse_rational("0.3"), Some(BigRational::new(3.into(), 10.into())));
        assert_eq!(parse_rational("-1.25"), Some(BigRational::new((-5).into(), 4.into())));
        assert_eq!(parse_rational("7/-14"), Some(BigRational::new((-1).into(), 2.into())));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!("1e-3".parse::<Param>().unwrap(), Param::Float(1e-3));
    }

    #[test]
    fn param_json_round_trip() {
        let p = vec![Param::ratio(1, 3), Param::Float(0.5), Param::int(2)];
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"["1/3",0.5,"2"]"#);
        let back: Vec<Param> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }
}
