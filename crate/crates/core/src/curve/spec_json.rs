//! JSON encoding of curve specs and the builtin curve zoo.

use std::f64::consts::PI;

use num::{BigRational, ToPrimitive};
use serde_json::{json, Value};

use super::{AnalyticCurve, CurveSpec, Domain, HelixCurve, RationalCurve};
use crate::error::{Error, Result};
use crate::param::{parse_rational, rational_from_json};
use crate::poly::{QPoly, RatFn};

/// Builtin curves: `line`, `unit_circle`, `rational_circle`, `parabola`,
/// `cubic`, `rect_hyperbola`, `circular_helix(c)`, `ellipse(a,b)` and
/// `torus_knot(p,q)`.
pub fn builtin(name: &str) -> Result<CurveSpec> {
    let name = name.trim();
    let (head, args) = match name.split_once('(') {
        Some((h, rest)) => {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| Error::invalid(format!("unbalanced builtin {name:?}")))?;
            let args = inner
                .split(',')
                .map(|a| {
                    a.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::invalid(format!("bad argument {a:?} in {name:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            (h.trim(), args)
        }
        None => (name, Vec::new()),
    };
    let arity = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(Error::invalid(format!("{head} takes {n} argument(s)")))
        }
    };
    let full_turn = Domain::new(-PI, PI)?;
    Ok(match head {
        "line" => {
            arity(0)?;
            RationalCurve::polynomial(&[&[0, 1], &[0]], Domain::real_line())?.into()
        }
        "parabola" => {
            arity(0)?;
            RationalCurve::polynomial(&[&[0, 1], &[0, 0, 1]], Domain::real_line())?.into()
        }
        "cubic" => {
            arity(0)?;
            RationalCurve::polynomial(&[&[0, 1], &[0, 0, 0, 1]], Domain::real_line())?.into()
        }
        "rect_hyperbola" => {
            arity(0)?;
            RationalCurve::new(
                vec![
                    RatFn::polynomial(QPoly::from_ints(&[0, 1])),
                    RatFn::new(QPoly::from_ints(&[1]), QPoly::from_ints(&[0, 1])),
                ],
                Domain::new(0.0, f64::INFINITY)?,
            )?
            .into()
        }
        "rational_circle" => {
            arity(0)?;
            let den = QPoly::from_ints(&[1, 0, 1]);
            RationalCurve::new(
                vec![
                    RatFn::new(QPoly::from_ints(&[1, 0, -1]), den.clone()),
                    RatFn::new(QPoly::from_ints(&[0, 2]), den),
                ],
                Domain::real_line(),
            )?
            .into()
        }
        "unit_circle" => {
            arity(0)?;
            HelixCurve::unit_circle(full_turn).into()
        }
        "circular_helix" => {
            arity(1)?;
            HelixCurve::circular(args[0], Domain::real_line())?.into()
        }
        "ellipse" => {
            arity(2)?;
            AnalyticCurve::ellipse(args[0], args[1], full_turn).into()
        }
        "torus_knot" => {
            arity(2)?;
            HelixCurve::new(vec![1.0, 1.0], vec![args[0], args[1]], vec![], 4, full_turn)?.into()
        }
        _ => return Err(Error::invalid(format!("unknown builtin curve {name:?}"))),
    })
}

/// Parses a domain endpoint: number, `"p/q"`, `"inf"`, `"-inf"`, or a
/// multiple of pi such as `"-pi"`, `"pi/2"`, `"3pi/4"`.
fn endpoint(v: &Value) -> Result<f64> {
    if let Value::String(s) = v {
        let s = s.trim();
        match s {
            "inf" | "+inf" | "infinity" => return Ok(f64::INFINITY),
            "-inf" | "-infinity" => return Ok(f64::NEG_INFINITY),
            _ => {}
        }
        if let Some(pos) = s.find("pi") {
            let (coef, rest) = s.split_at(pos);
            let coef = match coef.trim() {
                "" | "+" => 1.0,
                "-" => -1.0,
                c => c
                    .trim_end_matches('*')
                    .parse::<f64>()
                    .map_err(|_| Error::invalid(format!("bad endpoint {s:?}")))?,
            };
            let div = match rest[2..].trim().strip_prefix('/') {
                Some(d) => d
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::invalid(format!("bad endpoint {s:?}")))?,
                None if rest[2..].trim().is_empty() => 1.0,
                None => return Err(Error::invalid(format!("bad endpoint {s:?}"))),
            };
            return Ok(coef * PI / div);
        }
        return parse_rational(s)
            .and_then(|q| q.to_f64())
            .ok_or_else(|| Error::invalid(format!("bad endpoint {s:?}")));
    }
    v.as_f64()
        .ok_or_else(|| Error::invalid(format!("bad endpoint {v}")))
}

fn domain_from_json(v: &Value) -> Result<Domain> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| Error::invalid("domain must be [lo, hi]"))?;
    Domain::new(endpoint(&arr[0])?, endpoint(&arr[1])?)
}

fn qpoly_from_json(v: &Value) -> Result<QPoly> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::invalid("polynomial must be a coefficient list"))?;
    Ok(QPoly::new(arr.iter().map(rational_from_json).collect::<Result<Vec<_>>>()?))
}

fn f64_list(v: Option<&Value>, what: &str) -> Result<Vec<f64>> {
    match v {
        None => Ok(Vec::new()),
        Some(Value::Array(a)) => a
            .iter()
            .map(|x| x.as_f64().ok_or_else(|| Error::invalid(format!("{what}: expected numbers"))))
            .collect(),
        Some(_) => Err(Error::invalid(format!("{what}: expected a list"))),
    }
}

/// Reads `{"kind": "rational" | "helix" | "builtin", ...}`; a document with a
/// top-level `"curve"` key is unwrapped first.
pub fn curve_from_json(v: &Value) -> Result<CurveSpec> {
    if let Some(inner) = v.get("curve") {
        return curve_from_json(inner);
    }
    let kind = v
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::invalid("curve spec needs a \"kind\""))?;
    let domain = v.get("domain").map(domain_from_json).transpose()?;
    match kind {
        "builtin" => {
            let name = v
                .get("name")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::invalid("builtin curve needs a \"name\""))?;
            let c = builtin(name)?;
            match domain {
                Some(d) => c.with_domain(d),
                None => Ok(c),
            }
        }
        "rational" => {
            let coords = v
                .get("coords")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::invalid("rational curve needs \"coords\""))?
                .iter()
                .map(|c| {
                    let num = qpoly_from_json(
                        c.get("num").ok_or_else(|| Error::invalid("coordinate needs \"num\""))?,
                    )?;
                    let den = match c.get("den") {
                        Some(d) => qpoly_from_json(d)?,
                        None => QPoly::from_ints(&[1]),
                    };
                    if num::Zero::is_zero(&den) {
                        return Err(Error::invalid("zero denominator"));
                    }
                    Ok(RatFn::new(num, den))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(RationalCurve::new(coords, domain.unwrap_or_else(Domain::real_line))?.into())
        }
        "helix" => {
            let radii = f64_list(v.get("radii"), "radii")?;
            let freqs = f64_list(v.get("freqs"), "freqs")?;
            let drift = f64_list(v.get("drift"), "drift")?;
            let dim = match v.get("dim") {
                Some(d) => d.as_u64().ok_or_else(|| Error::invalid("dim must be an integer"))? as usize,
                None => 2 * radii.len() + drift.len(),
            };
            Ok(HelixCurve::new(radii, freqs, drift, dim, domain.unwrap_or_else(Domain::real_line))?.into())
        }
        other => Err(Error::invalid(format!("unknown curve kind {other:?}"))),
    }
}

fn endpoint_json(x: f64) -> Value {
    if x == f64::INFINITY {
        json!("inf")
    } else if x == f64::NEG_INFINITY {
        json!("-inf")
    } else {
        json!(x)
    }
}

fn qpoly_json(p: &QPoly) -> Value {
    Value::Array(p.coeffs().iter().map(|c: &BigRational| json!(c.to_string())).collect())
}

/// Inverse of [`curve_from_json`]; analytic curves are written as builtins.
pub fn curve_to_json(c: &CurveSpec) -> Value {
    let d = c.domain();
    let domain = json!([endpoint_json(d.lo), endpoint_json(d.hi)]);
    match c {
        CurveSpec::Rational(r) => json!({
            "kind": "rational",
            "coords": r.coords().iter().map(|f| json!({"num": qpoly_json(f.num()), "den": qpoly_json(f.den())})).collect::<Vec<_>>(),
            "domain": domain,
        }),
        CurveSpec::Helix(h) => json!({
            "kind": "helix",
            "radii": h.radii(),
            "freqs": h.freqs(),
            "drift": h.drift(),
            "dim": h.dim(),
            "domain": domain,
        }),
        CurveSpec::Analytic(a) => json!({"kind": "builtin", "name": a.name(), "domain": domain}),
    }
}
