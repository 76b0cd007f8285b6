//! Parametrized curves: exact rational parametrizations, generalized
//! helices in normal form, and black-box analytic curves given by a jet
//! evaluator.

mod arclength;
mod spec_json;
mod simplicity;

use std::fmt;
use std::sync::Arc;

use num::{BigInt, BigRational, One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::param::{Param, Point};
use crate::poly::{QPoly, RatFn};

pub use arclength::{arc_length_reparametrize, ArcLengthCurve};
pub use simplicity::{check_simplicity, ConditionReport, SimplicityReport, Witness};
pub use spec_json::{builtin, curve_from_json, curve_to_json};

/// Derivative orders precomputed for rational curves.
const RATIONAL_JET_CACHE: usize = 6;

/// Sampling window used when a domain end is infinite.
pub const DEFAULT_WINDOW: f64 = 2.0;

/// Open parameter interval `(lo, hi)`; either end may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
}

impl Domain {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::invalid(format!("empty domain ({lo}, {hi})")));
        }
        Ok(Domain { lo, hi })
    }

    pub fn real_line() -> Self {
        Domain {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        t > self.lo && t < self.hi
    }

    pub fn contains_exact(&self, t: &BigRational) -> bool {
        let above = !self.lo.is_finite() || *t > BigRational::from_float(self.lo).unwrap();
        let below = !self.hi.is_finite() || *t < BigRational::from_float(self.hi).unwrap();
        above && below
    }

    pub fn check(&self, t: f64) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::Domain {
                t,
                lo: self.lo,
                hi: self.hi,
            })
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// Finite interval for sampling: an infinite end becomes `±DEFAULT_WINDOW`,
    /// or sits `DEFAULT_WINDOW` past the finite end when that is beyond it.
    pub fn window(&self) -> (f64, f64) {
        let lo = if self.lo.is_finite() {
            self.lo
        } else if self.hi > -DEFAULT_WINDOW {
            -DEFAULT_WINDOW
        } else {
            self.hi - DEFAULT_WINDOW
        };
        let hi = if self.hi.is_finite() {
            self.hi
        } else if lo < DEFAULT_WINDOW {
            DEFAULT_WINDOW
        } else {
            lo + DEFAULT_WINDOW
        };
        (lo, hi)
    }

    /// `n` interior points, midpoints of `n` equal cells of the window.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        let (lo, hi) = self.window();
        let h = (hi - lo) / n as f64;
        (0..n).map(|i| lo + (i as f64 + 0.5) * h).collect()
    }
}

/// Curve in R^d whose coordinates are reduced rational functions with exact
/// coefficients.
#[derive(Clone, Debug)]
pub struct RationalCurve {
    coords: Vec<RatFn>,
    domain: Domain,
    degree: usize,
    derivs: Vec<Vec<RatFn>>,
    derivs_f64: Vec<Vec<(Vec<f64>, Vec<f64>)>>,
}

impl RationalCurve {
    /// Validates that no denominator has a real root in the domain
    /// (Sturm sequences over the exact endpoints).
    pub fn new(coords: Vec<RatFn>, domain: Domain) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("curve needs at least one coordinate"));
        }
        let lo = domain.lo.is_finite().then(|| BigRational::from_float(domain.lo).unwrap());
        let hi = domain.hi.is_finite().then(|| BigRational::from_float(domain.hi).unwrap());
        for (i, c) in coords.iter().enumerate() {
            if c.den().count_real_roots(lo.as_ref(), hi.as_ref()) > 0 {
                return Err(Error::PoleInDomain { coord: i });
            }
        }
        let degree = coords.iter().map(RatFn::degree).max().unwrap_or(0);
        let mut derivs = vec![coords.clone()];
        for k in 1..=RATIONAL_JET_CACHE {
            let next = derivs[k - 1].iter().map(RatFn::derivative).collect();
            derivs.push(next);
        }
        let derivs_f64 = derivs
            .iter()
            .map(|order| order.iter().map(ratfn_f64).collect())
            .collect();
        Ok(RationalCurve {
            coords,
            domain,
            degree,
            derivs,
            derivs_f64,
        })
    }

    /// Polynomial curve from integer coefficient lists.
    pub fn polynomial(coords: &[&[i64]], domain: Domain) -> Result<Self> {
        Self::new(
            coords
                .iter()
                .map(|c| RatFn::polynomial(QPoly::from_ints(c)))
                .collect(),
            domain,
        )
    }

    pub fn coords(&self) -> &[RatFn] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// `max_j max(deg num_j, deg den_j)`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    fn check_exact(&self, t: &BigRational) -> Result<()> {
        if self.domain.contains_exact(t) {
            Ok(())
        } else {
            Err(Error::Domain {
                t: t.to_f64().unwrap_or(f64::NAN),
                lo: self.domain.lo,
                hi: self.domain.hi,
            })
        }
    }

    pub fn eval_exact(&self, t: &BigRational) -> Result<Vec<BigRational>> {
        self.check_exact(t)?;
        self.coords
            .iter()
            .map(|c| c.eval(t).ok_or_else(|| Error::Pole { t: t.to_string() }))
            .collect()
    }

    /// Derivative functions of order `k` (cached up to a small order).
    pub fn derivative_functions(&self, k: usize) -> Vec<RatFn> {
        if k < self.derivs.len() {
            return self.derivs[k].clone();
        }
        let mut d = self.derivs.last().unwrap().clone();
        for _ in self.derivs.len() - 1..k {
            d = d.iter().map(RatFn::derivative).collect();
        }
        d
    }

    /// Exact jet by evaluating the differentiated rational functions.
    pub fn jet_exact(&self, t: &BigRational, order: usize) -> Result<Vec<Vec<BigRational>>> {
        self.check_exact(t)?;
        (0..=order)
            .map(|k| {
                self.derivative_functions(k)
                    .iter()
                    .map(|c| c.eval(t).ok_or_else(|| Error::Pole { t: t.to_string() }))
                    .collect()
            })
            .collect()
    }

    /// Exact jet by the Leibniz recurrence `f^(k) = sum C(k,j) g^(j) h^(k-j)`
    /// on `h = f/g`, using only derivatives of numerators and denominators.
    pub fn jet_exact_leibniz(&self, t: &BigRational, order: usize) -> Result<Vec<Vec<BigRational>>> {
        self.check_exact(t)?;
        let mut jet = vec![Vec::with_capacity(self.dim()); order + 1];
        for c in &self.coords {
            let mut f = c.num().clone();
            let mut g = c.den().clone();
            let mut fd = Vec::with_capacity(order + 1);
            let mut gd = Vec::with_capacity(order + 1);
            for _ in 0..=order {
                fd.push(f.eval(t));
                gd.push(g.eval(t));
                f = f.derivative();
                g = g.derivative();
            }
            if gd[0].is_zero() {
                return Err(Error::Pole { t: t.to_string() });
            }
            let mut h: Vec<BigRational> = Vec::with_capacity(order + 1);
            for k in 0..=order {
                let mut acc = fd[k].clone();
                for j in 1..=k {
                    acc -= BigRational::from_integer(binomial(k, j)) * &gd[j] * &h[k - j];
                }
                h.push(acc / &gd[0]);
            }
            for (k, v) in h.into_iter().enumerate() {
                jet[k].push(v);
            }
        }
        Ok(jet)
    }

    pub fn eval_f64(&self, t: f64) -> Vec<f64> {
        self.derivs_f64[0].iter().map(|(n, d)| horner(n, t) / horner(d, t)).collect()
    }

    pub fn jet_f64(&self, t: f64, order: usize) -> Vec<Vec<f64>> {
        (0..=order)
            .map(|k| {
                if k < self.derivs_f64.len() {
                    self.derivs_f64[k].iter().map(|(n, d)| horner(n, t) / horner(d, t)).collect()
                } else {
                    self.derivative_functions(k).iter().map(|c| c.eval_f64(t)).collect()
                }
            })
            .collect()
    }
}

fn ratfn_f64(r: &RatFn) -> (Vec<f64>, Vec<f64>) {
    let conv = |p: &QPoly| p.coeffs().iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
    (conv(r.num()), conv(r.den()))
}

fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * t + a)
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// Generalized helix in normal form
/// `(a_1 cos l_1 t, a_1 sin l_1 t, ..., a_k cos l_k t, a_k sin l_k t, t w, 0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HelixCurve {
    radii: Vec<f64>,
    freqs: Vec<f64>,
    drift: Vec<f64>,
    dim: usize,
    domain: Domain,
}

impl HelixCurve {
    pub fn new(radii: Vec<f64>, freqs: Vec<f64>, drift: Vec<f64>, dim: usize, domain: Domain) -> Result<Self> {
        if radii.len() != freqs.len() {
            return Err(Error::invalid("radii and frequencies differ in length"));
        }
        if radii.is_empty() && drift.is_empty() {
            return Err(Error::invalid("helix needs k > 0 or l > 0"));
        }
        if 2 * radii.len() + drift.len() > dim || dim < 2 {
            return Err(Error::invalid(format!(
                "ambient dimension {dim} too small for k = {}, l = {}",
                radii.len(),
                drift.len()
            )));
        }
        if radii.iter().any(|&a| !(a > 0.0)) || freqs.iter().any(|&l| l == 0.0 || !l.is_finite()) {
            return Err(Error::invalid("radii must be positive and frequencies nonzero"));
        }
        Ok(HelixCurve {
            radii,
            freqs,
            drift,
            dim,
            domain,
        })
    }

    /// `(cos t, sin t, c t)`.
    pub fn circular(c: f64, domain: Domain) -> Result<Self> {
        Self::new(vec![1.0], vec![1.0], vec![c], 3, domain)
    }

    /// `(cos t, sin t)`.
    pub fn unit_circle(domain: Domain) -> Self {
        Self::new(vec![1.0], vec![1.0], vec![], 2, domain).expect("valid circle")
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn drift(&self) -> &[f64] {
        &self.drift
    }

    /// Number of rotation planes.
    pub fn k(&self) -> usize {
        self.radii.len()
    }

    /// Length of the drift vector.
    pub fn l(&self) -> usize {
        self.drift.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn is_circle(&self) -> bool {
        self.k() == 1 && self.drift.iter().all(|&w| w == 0.0)
    }

    pub fn jet_f64(&self, t: f64, order: usize) -> Vec<Vec<f64>> {
        (0..=order)
            .map(|j| {
                let mut v = Vec::with_capacity(self.dim);
                let phase = j as f64 * std::f64::consts::FRAC_PI_2;
                for (a, l) in self.radii.iter().zip(&self.freqs) {
                    let s = a * l.powi(j as i32);
                    v.push(s * (l * t + phase).cos());
                    v.push(s * (l * t + phase).sin());
                }
                for w in &self.drift {
                    v.push(match j {
                        0 => t * w,
                        1 => *w,
                        _ => 0.0,
                    });
                }
                v.resize(self.dim, 0.0);
                v
            })
            .collect()
    }
}

/// Evaluator contract: for `(t, K)` return `[γ(t), γ'(t), ..., γ^(K)(t)]`.
pub type JetFn = dyn Fn(f64, usize) -> Result<Vec<Vec<f64>>> + Send + Sync;

/// Curve given by a deterministic jet evaluator.
#[derive(Clone)]
pub struct AnalyticCurve {
    name: String,
    dim: usize,
    domain: Domain,
    max_order: usize,
    eval: Arc<JetFn>,
}

impl fmt::Debug for AnalyticCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticCurve")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .field("max_order", &self.max_order)
            .finish()
    }
}

impl AnalyticCurve {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        domain: Domain,
        max_order: usize,
        eval: impl Fn(f64, usize) -> Result<Vec<Vec<f64>>> + Send + Sync + 'static,
    ) -> Self {
        AnalyticCurve {
            name: name.into(),
            dim,
            domain,
            max_order,
            eval: Arc::new(eval),
        }
    }

    /// `(a cos t, b sin t)` with closed-form jets.
    pub fn ellipse(a: f64, b: f64, domain: Domain) -> Self {
        Self::new(format!("ellipse({a},{b})"), 2, domain, 16, move |t, k| {
            Ok((0..=k)
                .map(|j| {
                    let ph = t + j as f64 * std::f64::consts::FRAC_PI_2;
                    vec![a * ph.cos(), b * ph.sin()]
                })
                .collect())
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn jet_f64(&self, t: f64, order: usize) -> Result<Vec<Vec<f64>>> {
        if order > self.max_order {
            return Err(Error::JetOrder {
                requested: order,
                supported: self.max_order,
            });
        }
        (self.eval)(t, order)
    }
}

/// Any supported curve representation.
#[derive(Clone, Debug)]
pub enum CurveSpec {
    Rational(RationalCurve),
    Helix(HelixCurve),
    Analytic(AnalyticCurve),
}

impl From<RationalCurve> for CurveSpec {
    fn from(c: RationalCurve) -> Self {
        CurveSpec::Rational(c)
    }
}

impl From<HelixCurve> for CurveSpec {
    fn from(c: HelixCurve) -> Self {
        CurveSpec::Helix(c)
    }
}

impl From<AnalyticCurve> for CurveSpec {
    fn from(c: AnalyticCurve) -> Self {
        CurveSpec::Analytic(c)
    }
}

impl CurveSpec {
    pub fn dim(&self) -> usize {
        match self {
            CurveSpec::Rational(c) => c.dim(),
            CurveSpec::Helix(c) => c.dim(),
            CurveSpec::Analytic(c) => c.dim(),
        }
    }

    pub fn domain(&self) -> Domain {
        match self {
            CurveSpec::Rational(c) => c.domain(),
            CurveSpec::Helix(c) => c.domain(),
            CurveSpec::Analytic(c) => c.domain(),
        }
    }

    /// Same curve on a different domain.
    pub fn with_domain(&self, domain: Domain) -> Result<CurveSpec> {
        Ok(match self {
            CurveSpec::Rational(c) => CurveSpec::Rational(RationalCurve::new(c.coords.clone(), domain)?),
            CurveSpec::Helix(c) => CurveSpec::Helix(HelixCurve { domain, ..c.clone() }),
            CurveSpec::Analytic(c) => CurveSpec::Analytic(AnalyticCurve { domain, ..c.clone() }),
        })
    }

    /// Algebraic degree of a rational parametrization.
    pub fn degree(&self) -> Option<usize> {
        match self {
            CurveSpec::Rational(c) => Some(c.degree()),
            _ => None,
        }
    }

    pub fn as_rational(&self) -> Option<&RationalCurve> {
        match self {
            CurveSpec::Rational(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_helix(&self) -> Option<&HelixCurve> {
        match self {
            CurveSpec::Helix(c) => Some(c),
            _ => None,
        }
    }

    pub fn max_jet_order(&self) -> usize {
        match self {
            CurveSpec::Analytic(c) => c.max_order(),
            _ => usize::MAX,
        }
    }

    /// Exact for rational curves at rational parameters, floating otherwise.
    pub fn evaluate(&self, t: &Param) -> Result<Point> {
        match (self, t) {
            (CurveSpec::Rational(c), Param::Exact(q)) => c.eval_exact(q).map(Point::Exact),
            _ => self.eval_f64(t.to_f64()).map(Point::Float),
        }
    }

    pub fn derivative_jet(&self, t: &Param, order: usize) -> Result<Vec<Point>> {
        match (self, t) {
            (CurveSpec::Rational(c), Param::Exact(q)) => {
                Ok(c.jet_exact(q, order)?.into_iter().map(Point::Exact).collect())
            }
            _ => Ok(self
                .jet_f64(t.to_f64(), order)?
                .into_iter()
                .map(Point::Float)
                .collect()),
        }
    }

    pub fn eval_f64(&self, t: f64) -> Result<Vec<f64>> {
        self.domain().check(t)?;
        Ok(match self {
            CurveSpec::Rational(c) => {
                let v = c.eval_f64(t);
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Pole { t: t.to_string() });
                }
                v
            }
            CurveSpec::Helix(c) => c.jet_f64(t, 0).swap_remove(0),
            CurveSpec::Analytic(c) => c.jet_f64(t, 0)?.swap_remove(0),
        })
    }

    pub fn jet_f64(&self, t: f64, order: usize) -> Result<Vec<Vec<f64>>> {
        self.domain().check(t)?;
        match self {
            CurveSpec::Rational(c) => Ok(c.jet_f64(t, order)),
            CurveSpec::Helix(c) => Ok(c.jet_f64(t, order)),
            CurveSpec::Analytic(c) => c.jet_f64(t, order),
        }
    }

    /// `(γ(t), γ'(t))` in floating point.
    pub fn point_and_tangent(&self, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut j = self.jet_f64(t, 1)?;
        let d = j.pop().unwrap();
        Ok((j.pop().unwrap(), d))
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::param::Param;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn parabola() -> CurveSpec {
        RationalCurve::polynomial(&[&[0, 1], &[0, 0, 1]], Domain::real_line()).unwrap().into()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(
            parabola().evaluate(&Param::int(3)).unwrap(),
            Point::Exact(vec![q(3, 1), q(9, 1)])
        );
        let h: CurveSpec = HelixCurve::new(vec![1.0], vec![1.0], vec![1.0], 3, Domain::real_line())
            .unwrap()
            .into();
        assert_eq!(h.evaluate(&Param::Float(0.0)).unwrap(), Point::Float(vec![1.0, 0.0, 0.0]));
        let circle = builtin("rational_circle").unwrap();
        assert_eq!(
            circle.evaluate(&Param::int(1)).unwrap(),
            Point::Exact(vec![q(0, 1), q(1, 1)])
        );
    }

    #[test]
    fn jet_examples() {
        let j = parabola().derivative_jet(&Param::int(1), 2).unwrap();
        let want = [[1, 1], [1, 2], [0, 2]];
        for (p, w) in j.iter().zip(want) {
            assert_eq!(p.as_exact().unwrap(), &[q(w[0], 1), q(w[1], 1)]);
        }
        let circle: CurveSpec = HelixCurve::unit_circle(Domain::real_line()).into();
        let j = circle.jet_f64(0.0, 1).unwrap();
        assert!((j[1][0]).abs() < 1e-15 && (j[1][1] - 1.0).abs() < 1e-15);
        let hyp = builtin("rect_hyperbola").unwrap();
        let j = hyp.derivative_jet(&Param::int(2), 1).unwrap();
        assert_eq!(j[0].as_exact().unwrap(), &[q(2, 1), q(1, 2)]);
        assert_eq!(j[1].as_exact().unwrap(), &[q(1, 1), q(-1, 4)]);
    }

    #[test]
    fn domain_is_open() {
        let c = builtin("rect_hyperbola").unwrap();
        assert!(matches!(c.evaluate(&Param::int(0)), Err(Error::Domain { .. })));
        assert!(matches!(c.eval_f64(-1.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn pole_inside_domain_is_rejected() {
        let coords = vec![
            RatFn::polynomial(QPoly::from_ints(&[0, 1])),
            RatFn::new(QPoly::from_ints(&[1]), QPoly::from_ints(&[0, 1])),
        ];
        assert!(matches!(
            RationalCurve::new(coords.clone(), Domain::real_line()),
            Err(Error::PoleInDomain { coord: 1 })
        ));
        assert!(RationalCurve::new(coords, Domain::new(0.0, 5.0).unwrap()).is_ok());
    }

    #[test]
    fn exact_jet_paths_agree() {
        let c = builtin("rational_circle").unwrap();
        let r = c.as_rational().unwrap();
        for t in [q(0, 1), q(1, 3), q(-7, 2), q(5, 1)] {
            assert_eq!(r.jet_exact(&t, 8).unwrap(), r.jet_exact_leibniz(&t, 8).unwrap());
        }
    }

    #[test]
    fn helix_degree_is_undefined() {
        assert_eq!(builtin("unit_circle").unwrap().degree(), None);
        assert_eq!(builtin("rational_circle").unwrap().degree(), Some(2));
        assert_eq!(builtin("cubic").unwrap().degree(), Some(3));
    }

    #[test]
    fn window_clips_infinite_ends() {
        assert_eq!(Domain::real_line().window(), (-2.0, 2.0));
        assert_eq!(Domain::new(0.0, f64::INFINITY).unwrap().window(), (0.0, 2.0));
        assert_eq!(Domain::new(f64::NEG_INFINITY, 1.0).unwrap().window(), (-2.0, 1.0));
        assert_eq!(Domain::new(5.0, f64::INFINITY).unwrap().window(), (5.0, 7.0));
        assert_eq!(Domain::new(-1.0, 1.0).unwrap().window(), (-1.0, 1.0));
    }
}
