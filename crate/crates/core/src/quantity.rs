//! Distance polynomials `D(x, y)` on pairs of ambient points and their
//! partial gradients `D_X`, `D_Y`.
//!
//! Evaluation is generic over [`Scalar`], so the same code runs in floating
//! point, over exact rationals, and over rational functions of the curve
//! parameter (which is how Elekes curves of rational curves are formed).

use num::{BigRational, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::param::rational_from_json;
use crate::poly::{QPoly, RatFn, Ring};

/// Ring elements that can absorb rational constants.
pub trait Scalar: Ring {
    fn from_rational(q: &BigRational) -> Self;
}

impl Scalar for f64 {
    fn from_rational(q: &BigRational) -> Self {
        q.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for BigRational {
    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }
}

impl Scalar for RatFn {
    fn from_rational(q: &BigRational) -> Self {
        RatFn::polynomial(QPoly::constant(q.clone()))
    }
}

/// Monomial `coeff * prod x_i^e_i * prod y_i^e_{d+i}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Term {
    pub exponents: Vec<u32>,
    pub coeff: BigRational,
}

#[derive(Clone, Debug, PartialEq)]
pub enum QuantityKind {
    SquaredEuclidean,
    /// `((x - v) x (y - v))^2` in the plane.
    PinnedAreaSquared { apex: [BigRational; 2] },
    GeneralPolynomial { terms: Vec<Term> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantitySpec {
    dim: usize,
    kind: QuantityKind,
}

fn pow<T: Scalar>(x: &T, e: u32) -> T {
    (0..e).fold(T::one(), |acc, _| acc * x.clone())
}

impl QuantitySpec {
    pub fn squared_euclidean(dim: usize) -> Self {
        QuantitySpec {
            dim,
            kind: QuantityKind::SquaredEuclidean,
        }
    }

    pub fn pinned_area(apex: [BigRational; 2]) -> Self {
        QuantitySpec {
            dim: 2,
            kind: QuantityKind::PinnedAreaSquared { apex },
        }
    }

    /// Merges duplicate exponent vectors, drops zero terms, and sorts.
    pub fn polynomial(dim: usize, terms: Vec<Term>) -> Result<Self> {
        let mut merged: std::collections::BTreeMap<Vec<u32>, BigRational> = Default::default();
        for t in terms {
            if t.exponents.len() != 2 * dim {
                return Err(Error::DimensionMismatch {
                    expected: 2 * dim,
                    got: t.exponents.len(),
                });
            }
            *merged.entry(t.exponents).or_insert_with(BigRational::zero) += t.coeff;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(exponents, coeff)| Term { exponents, coeff })
            .collect();
        Ok(QuantitySpec {
            dim,
            kind: QuantityKind::GeneralPolynomial { terms },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &QuantityKind {
        &self.kind
    }

    /// Total degree of `D`.
    pub fn degree(&self) -> usize {
        match &self.kind {
            QuantityKind::SquaredEuclidean => 2,
            QuantityKind::PinnedAreaSquared { .. } => 4,
            QuantityKind::GeneralPolynomial { terms } => terms
                .iter()
                .map(|t| t.exponents.iter().sum::<u32>() as usize)
                .max()
                .unwrap_or(0),
        }
    }

    fn check<T>(&self, x: &[T], y: &[T]) -> Result<()> {
        for len in [x.len(), y.len()] {
            if len != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    got: len,
                });
            }
        }
        Ok(())
    }

    pub fn eval<T: Scalar>(&self, x: &[T], y: &[T]) -> Result<T> {
        self.check(x, y)?;
        Ok(match &self.kind {
            QuantityKind::SquaredEuclidean => x
                .iter()
                .zip(y)
                .map(|(a, b)| {
                    let d = a.clone() - b.clone();
                    d.clone() * d
                })
                .fold(T::zero(), |acc, v| acc + v),
            QuantityKind::PinnedAreaSquared { apex } => {
                let c = cross(x, y, apex);
                c.clone() * c
            }
            QuantityKind::GeneralPolynomial { terms } => terms
                .iter()
                .map(|t| self.eval_term(t, x, y))
                .fold(T::zero(), |acc, v| acc + v),
        })
    }

    fn eval_term<T: Scalar>(&self, t: &Term, x: &[T], y: &[T]) -> T {
        x.iter()
            .chain(y)
            .zip(&t.exponents)
            .fold(T::from_rational(&t.coeff), |acc, (v, &e)| acc * pow(v, e))
    }

    /// `(D_X, D_Y)`.
    pub fn grad<T: Scalar>(&self, x: &[T], y: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        self.check(x, y)?;
        Ok(match &self.kind {
            QuantityKind::SquaredEuclidean => {
                let two = T::from_int(2);
                let dx: Vec<T> = x
                    .iter()
                    .zip(y)
                    .map(|(a, b)| two.clone() * (a.clone() - b.clone()))
                    .collect();
                let dy = dx.iter().map(|v| -v.clone()).collect();
                (dx, dy)
            }
            QuantityKind::PinnedAreaSquared { apex } => {
                let v0 = T::from_rational(&apex[0]);
                let v1 = T::from_rational(&apex[1]);
                let two_c = T::from_int(2) * cross(x, y, apex);
                let (x0, x1) = (x[0].clone() - v0.clone(), x[1].clone() - v1.clone());
                let (y0, y1) = (y[0].clone() - v0, y[1].clone() - v1);
                (
                    vec![two_c.clone() * y1, -(two_c.clone() * y0)],
                    vec![-(two_c.clone() * x1), two_c * x0],
                )
            }
            QuantityKind::GeneralPolynomial { terms } => {
                let n = 2 * self.dim;
                let mut g = vec![T::zero(); n];
                for t in terms {
                    for (k, slot) in g.iter_mut().enumerate() {
                        let e = t.exponents[k];
                        if e == 0 {
                            continue;
                        }
                        let mut dt = t.clone();
                        dt.exponents[k] -= 1;
                        dt.coeff *= BigRational::from_integer(e.into());
                        *slot = slot.clone() + self.eval_term(&dt, x, y);
                    }
                }
                let gy = g.split_off(self.dim);
                (g, gy)
            }
        })
    }

    pub fn eval_f64(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.eval(x, y)
    }

    pub fn grad_f64(&self, x: &[f64], y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.grad(x, y)
    }

    /// Reads `{"kind": "sq_euclidean"}`, `{"kind": "pinned_area", "apex":
    /// [vx, vy]}` or `{"kind": "poly", "dim": d, "terms": [{"exponents":
    /// [...], "coeff": "p/q"}, ...]}`; a top-level `"quantity"` key is
    /// unwrapped first. `default_dim` fills a missing `"dim"`.
    pub fn from_json(v: &Value, default_dim: usize) -> Result<Self> {
        if let Some(inner) = v.get("quantity") {
            return Self::from_json(inner, default_dim);
        }
        let kind = v
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::invalid("quantity spec needs a \"kind\""))?;
        let dim = match v.get("dim") {
            Some(d) => d.as_u64().ok_or_else(|| Error::invalid("dim must be an integer"))? as usize,
            None => default_dim,
        };
        match kind {
            "sq_euclidean" => Ok(Self::squared_euclidean(dim)),
            "pinned_area" => {
                let apex = match v.get("apex") {
                    None => [BigRational::zero(), BigRational::zero()],
                    Some(a) => {
                        let a = a
                            .as_array()
                            .filter(|a| a.len() == 2)
                            .ok_or_else(|| Error::invalid("apex must be [vx, vy]"))?;
                        [rational_from_json(&a[0])?, rational_from_json(&a[1])?]
                    }
                };
                if dim != 2 {
                    return Err(Error::DimensionMismatch { expected: 2, got: dim });
                }
                Ok(Self::pinned_area(apex))
            }
            "poly" => {
                let terms = v
                    .get("terms")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::invalid("poly quantity needs \"terms\""))?
                    .iter()
                    .map(|t| {
                        let exponents = t
                            .get("exponents")
                            .and_then(Value::as_array)
                            .ok_or_else(|| Error::invalid("term needs \"exponents\""))?
                            .iter()
                            .map(|e| {
                                e.as_u64()
                                    .map(|e| e as u32)
                                    .ok_or_else(|| Error::invalid("exponents must be non-negative integers"))
                            })
                            .collect::<Result<Vec<_>>>()?;
                        let coeff = rational_from_json(
                            t.get("coeff").ok_or_else(|| Error::invalid("term needs \"coeff\""))?,
                        )?;
                        Ok(Term { exponents, coeff })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::polynomial(dim, terms)
            }
            other => Err(Error::invalid(format!("unknown quantity kind {other:?}"))),
        }
    }

    pub fn to_json(&self) -> Value {
        match &self.kind {
            QuantityKind::SquaredEuclidean => json!({"kind": "sq_euclidean", "dim": self.dim}),
            QuantityKind::PinnedAreaSquared { apex } => json!({
                "kind": "pinned_area",
                "apex": [apex[0].to_string(), apex[1].to_string()],
            }),
            QuantityKind::GeneralPolynomial { terms } => json!({
                "kind": "poly",
                "dim": self.dim,
                "terms": terms.iter().map(|t| json!({"exponents": t.exponents, "coeff": t.coeff.to_string()})).collect::<Vec<_>>(),
            }),
        }
    }
}

fn cross<T: Scalar>(x: &[T], y: &[T], apex: &[BigRational; 2]) -> T {
    let v0 = T::from_rational(&apex[0]);
    let v1 = T::from_rational(&apex[1]);
    (x[0].clone() - v0.clone()) * (y[1].clone() - v1.clone()) - (x[1].clone() - v1) * (y[0].clone() - v0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn origin() -> [BigRational; 2] {
        [q(0), q(0)]
    }

    #[test]
    fn eval_examples() {
        let se = QuantitySpec::squared_euclidean(2);
        assert_eq!(se.eval(&[q(0), q(0)], &[q(3), q(4)]).unwrap(), q(25));
        let pa = QuantitySpec::pinned_area(origin());
        assert_eq!(pa.eval(&[q(1), q(0)], &[q(0), q(1)]).unwrap(), q(1));
        assert_eq!(pa.eval(&[q(1), q(0)], &[q(2), q(0)]).unwrap(), q(0));
    }

    #[test]
    fn grad_examples() {
        let se = QuantitySpec::squared_euclidean(2);
        let (dx, dy) = se.grad(&[q(1), q(0)], &[q(0), q(0)]).unwrap();
        assert_eq!(dx, vec![q(2), q(0)]);
        assert_eq!(dy, vec![q(-2), q(0)]);
        let pa = QuantitySpec::pinned_area(origin());
        let (dx, dy) = pa.grad(&[q(1), q(0)], &[q(0), q(1)]).unwrap();
        assert_eq!(dx, vec![q(2), q(0)]);
        assert_eq!(dy, vec![q(0), q(2)]);
    }

    #[test]
    fn dimension_mismatch() {
        let se = QuantitySpec::squared_euclidean(3);
        assert!(matches!(
            se.eval_f64(&[0.0, 1.0], &[0.0, 1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn general_polynomial_matches_builtin() {
        // (x1 - y1)^2 + (x2 - y2)^2 expanded
        let mk = |e: [u32; 4], c: i64| Term {
            exponents: e.to_vec(),
            coeff: q(c),
        };
        let poly = QuantitySpec::polynomial(
            2,
            vec![
                mk([2, 0, 0, 0], 1),
                mk([1, 0, 1, 0], -2),
                mk([0, 0, 2, 0], 1),
                mk([0, 2, 0, 0], 1),
                mk([0, 1, 0, 1], -1),
                mk([0, 1, 0, 1], -1),
                mk([0, 0, 0, 2], 1),
            ],
        )
        .unwrap();
        if let QuantityKind::GeneralPolynomial { terms } = poly.kind() {
            assert_eq!(terms.len(), 6);
            assert!(terms.windows(2).all(|w| w[0].exponents < w[1].exponents));
        }
        let se = QuantitySpec::squared_euclidean(2);
        let (x, y) = ([q(3), q(-1)], [q(1), q(5)]);
        assert_eq!(poly.eval(&x, &y).unwrap(), se.eval(&x, &y).unwrap());
        assert_eq!(poly.grad(&x, &y).unwrap(), se.grad(&x, &y).unwrap());
        assert_eq!(poly.degree(), 2);
    }

    #[test]
    fn json_round_trip() {
        let v = json!({"kind": "pinned_area", "apex": ["1/2", 3]});
        let pa = QuantitySpec::from_json(&v, 2).unwrap();
        assert_eq!(QuantitySpec::from_json(&pa.to_json(), 2).unwrap(), pa);
        assert!(QuantitySpec::from_json(&json!({"kind": "pinned_area"}), 3).is_err());
        let se = QuantitySpec::from_json(&json!({"quantity": {"kind": "sq_euclidean"}}), 3).unwrap();
        assert_eq!(se.dim(), 3);
    }
}
