//! Elekes curves `ξ_pq(t) = (D(γt, p), D(γt, q))`, resultant
//! implicitization of rational plane curves, and pairwise intersection
//! scans.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::counting::ParamPointSet;
use crate::curve::{CurveSpec, Domain};
use crate::error::{Error, Result};
use crate::param::{rational_from_json, Param, Point};
use crate::poly::{bareiss_det, BiPoly, ExactDiv, GcdDomain, Poly, QPoly, RatFn, Ring, ZPoly};
use crate::quantity::QuantitySpec;

/// Half-width of the parameter window searched on unbounded domains.
pub const SEARCH_CLIP: f64 = 8.0;

/// Relative agreement required by the floating same-curve fingerprint.
pub const FINGERPRINT_TOL: f64 = 1e-9;

/// Degree bound used for fingerprints when no algebraic degree is known.
const FALLBACK_DEGREE: usize = 8;

#[derive(Clone, Debug)]
pub struct ElekesCurve {
    base: CurveSpec,
    quantity: QuantitySpec,
    p: Param,
    q: Param,
    p_point: Point,
    q_point: Point,
    components: Option<[RatFn; 2]>,
}

impl ElekesCurve {
    /// Caches the rational components when the base curve is rational and
    /// both anchor parameters are exact.
    pub fn new(base: &CurveSpec, quantity: &QuantitySpec, p: Param, q: Param) -> Result<Self> {
        if p.cmp_value(&q).is_eq() {
            return Err(Error::invalid("Elekes curve needs p != q"));
        }
        if quantity.dim() != base.dim() {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                got: quantity.dim(),
            });
        }
        let p_point = base.evaluate(&p)?;
        let q_point = base.evaluate(&q)?;
        let components = match (base.as_rational(), p_point.as_exact(), q_point.as_exact()) {
            (Some(r), Some(pp), Some(qp)) => {
                let t: Vec<RatFn> = r.coords().to_vec();
                let konst = |v: &[BigRational]| -> Vec<RatFn> {
                    v.iter().map(|c| RatFn::polynomial(QPoly::constant(c.clone()))).collect()
                };
                Some([quantity.eval(&t, &konst(pp))?, quantity.eval(&t, &konst(qp))?])
            }
            _ => None,
        };
        Ok(ElekesCurve {
            base: base.clone(),
            quantity: quantity.clone(),
            p,
            q,
            p_point,
            q_point,
            components,
        })
    }

    pub fn base(&self) -> &CurveSpec {
        &self.base
    }

    pub fn quantity(&self) -> &QuantitySpec {
        &self.quantity
    }

    pub fn anchors(&self) -> (&Param, &Param) {
        (&self.p, &self.q)
    }

    pub fn components(&self) -> Option<&[RatFn; 2]> {
        self.components.as_ref()
    }

    /// `ξ_qp`.
    pub fn swapped(&self) -> ElekesCurve {
        ElekesCurve {
            p: self.q.clone(),
            q: self.p.clone(),
            p_point: self.q_point.clone(),
            q_point: self.p_point.clone(),
            components: self.components.clone().map(|[a, b]| [b, a]),
            ..self.clone()
        }
    }

    /// Direct evaluation; exact for exact data on a rational base.
    pub fn eval(&self, t: &Param) -> Result<Point> {
        let x = self.base.evaluate(t)?;
        match (x.as_exact(), self.p_point.as_exact(), self.q_point.as_exact()) {
            (Some(x), Some(p), Some(q)) => Ok(Point::Exact(vec![self.quantity.eval(x, p)?, self.quantity.eval(x, q)?])),
            _ => {
                let x = x.to_f64();
                Ok(Point::Float(vec![
                    self.quantity.eval_f64(&x, &self.p_point.to_f64())?,
                    self.quantity.eval_f64(&x, &self.q_point.to_f64())?,
                ]))
            }
        }
    }

    /// Evaluation through the cached rational components.
    pub fn eval_components(&self, t: &BigRational) -> Result<Option<Vec<BigRational>>> {
        let Some(c) = &self.components else {
            return Ok(None);
        };
        if !self.base.domain().contains_exact(t) {
            return Err(Error::Domain {
                t: t.to_f64().unwrap_or(f64::NAN),
                lo: self.base.domain().lo,
                hi: self.base.domain().hi,
            });
        }
        c.iter()
            .map(|f| f.eval(t).ok_or_else(|| Error::Pole { t: t.to_string() }))
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    pub fn eval_f64(&self, t: f64) -> Result<[f64; 2]> {
        let x = self.base.eval_f64(t)?;
        Ok([
            self.quantity.eval_f64(&x, &self.p_point.to_f64())?,
            self.quantity.eval_f64(&x, &self.q_point.to_f64())?,
        ])
    }

    /// `(ξ(t), ξ'(t))`.
    pub fn eval_with_derivative(&self, t: f64) -> Result<([f64; 2], [f64; 2])> {
        let (x, dx) = self.base.point_and_tangent(t)?;
        let mut val = [0.0; 2];
        let mut der = [0.0; 2];
        for (k, anchor) in [&self.p_point, &self.q_point].into_iter().enumerate() {
            let a = anchor.to_f64();
            val[k] = self.quantity.eval_f64(&x, &a)?;
            let (gx, _) = self.quantity.grad_f64(&x, &a)?;
            der[k] = crate::curve::dot(&dx, &gx);
        }
        Ok((val, der))
    }

    /// Upper bound on the degree of the image curve, `deg D * deg γ`.
    pub fn degree_bound(&self) -> Option<usize> {
        self.base.degree().map(|m| m * self.quantity.degree())
    }

    pub fn implicit(&self) -> Option<Result<ImplicitPlanePoly>> {
        self.components.as_ref().map(|[x, y]| implicitize_rational(x, y))
    }
}

/// Square-free implicit equation `G(X, Y) = 0` with coprime integer
/// coefficients and a positive leading term in graded-lex order (`X > Y`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ImplicitPlanePoly {
    /// `coeffs[i][j]` multiplies `X^i Y^j`.
    coeffs: Vec<Vec<BigInt>>,
}

impl ImplicitPlanePoly {
    /// Normalizes an arbitrary nonzero coefficient grid.
    pub fn from_grid(mut coeffs: Vec<Vec<BigInt>>) -> Result<Self> {
        for row in coeffs.iter_mut() {
            while row.last().is_some_and(Zero::is_zero) {
                row.pop();
            }
        }
        while coeffs.last().is_some_and(Vec::is_empty) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(Error::DegenerateParametrization("zero polynomial".into()));
        }
        let g = coeffs.iter().flatten().fold(BigInt::zero(), |g, c| Integer::gcd(&g, c));
        let (li, lj) = coeffs
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(move |(j, _)| (i, j)))
            .max_by_key(|&(i, j)| (i + j, i))
            .unwrap();
        let g = if coeffs[li][lj].is_negative() { -g } else { g };
        for c in coeffs.iter_mut().flatten() {
            *c = &*c / &g;
        }
        Ok(ImplicitPlanePoly { coeffs })
    }

    fn from_bipoly(g: &BiPoly) -> Result<Self> {
        Self::from_grid(g.coeffs().iter().map(|row| row.coeffs().to_vec()).collect())
    }

    /// Nonzero terms `(i, j, c)` for `c X^i Y^j`, in grid order.
    pub fn terms(&self) -> Vec<(usize, usize, BigInt)> {
        self.coeffs
            .iter()
            .enumerate()
            .flat_map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(move |(j, c)| (i, j, c.clone()))
            })
            .collect()
    }

    pub fn total_degree(&self) -> usize {
        self.terms().iter().map(|t| t.0 + t.1).max().unwrap_or(0)
    }

    pub fn degree_x(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn degree_y(&self) -> usize {
        self.coeffs.iter().map(|r| r.len().saturating_sub(1)).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &BigRational, y: &BigRational) -> BigRational {
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, row| {
            let inner = row
                .iter()
                .rev()
                .fold(BigRational::zero(), |a, c| a * y + BigRational::from_integer(c.clone()));
            acc * x + inner
        })
    }

    pub fn eval_f64(&self, x: f64, y: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, row| {
            let inner = row.iter().rev().fold(0.0, |a, c| a * y + c.to_f64().unwrap_or(f64::NAN));
            acc * x + inner
        })
    }

    /// `{"degree": n, "coeffs": [[i, j, "c"], ...]}`.
    pub fn to_json(&self) -> Value {
        json!({
            "degree": self.total_degree(),
            "coeffs": self.terms().iter().map(|(i, j, c)| json!([i, j, c.to_string()])).collect::<Vec<_>>(),
        })
    }

    /// Accepts rational coefficients and renormalizes.
    pub fn from_json(v: &Value) -> Result<Self> {
        let terms = v
            .get("coeffs")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::invalid("implicit polynomial needs \"coeffs\""))?;
        let mut parsed = Vec::new();
        for t in terms {
            let t = t
                .as_array()
                .filter(|t| t.len() == 3)
                .ok_or_else(|| Error::invalid("term must be [i, j, coeff]"))?;
            let idx = |v: &Value| v.as_u64().map(|x| x as usize).ok_or_else(|| Error::invalid("bad exponent"));
            parsed.push((idx(&t[0])?, idx(&t[1])?, rational_from_json(&t[2])?));
        }
        let lcm = parsed.iter().fold(BigInt::one(), |l, (_, _, c)| l.lcm(c.denom()));
        let mut grid: Vec<Vec<BigInt>> = Vec::new();
        for (i, j, c) in parsed {
            if grid.len() <= i {
                grid.resize(i + 1, Vec::new());
            }
            if grid[i].len() <= j {
                grid[i].resize(j + 1, BigInt::zero());
            }
            grid[i][j] += (c * BigRational::from_integer(lcm.clone())).to_integer();
        }
        Self::from_grid(grid)
    }
}

impl fmt::Display for ImplicitPlanePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = self.terms();
        terms.sort_by_key(|&(i, j, _)| std::cmp::Reverse((i + j, i)));
        for (k, (i, j, c)) in terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mono = [("X", *i), ("Y", *j)]
                .iter()
                .filter(|(_, e)| *e > 0)
                .map(|(v, e)| if *e == 1 { v.to_string() } else { format!("{v}^{e}") })
                .collect::<Vec<_>>()
                .join("*");
            match (mono.is_empty(), mag.is_one()) {
                (true, _) => write!(f, "{mag}")?,
                (false, true) => write!(f, "{mono}")?,
                (false, false) => write!(f, "{mag}*{mono}")?,
            }
        }
        Ok(())
    }
}

/// Integer coefficient lists of `f` and `g` scaled by one common factor.
fn clear_denominators(f: &QPoly, g: &QPoly) -> (Vec<BigInt>, Vec<BigInt>) {
    let lcm = f
        .coeffs()
        .iter()
        .chain(g.coeffs())
        .fold(BigInt::one(), |l, c| l.lcm(c.denom()));
    let scale = |p: &QPoly| {
        p.coeffs()
            .iter()
            .map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer())
            .collect()
    };
    (scale(f), scale(g))
}

fn sylvester<C: Ring>(a: &[C], b: &[C]) -> Vec<Vec<C>> {
    let (m, n) = (a.len() - 1, b.len() - 1);
    let size = m + n;
    let mut rows = Vec::with_capacity(size);
    for (poly, shifts) in [(a, n), (b, m)] {
        for s in 0..shifts {
            let mut row = vec![C::zero(); size];
            for (k, c) in poly.iter().rev().enumerate() {
                row[s + k] = c.clone();
            }
            rows.push(row);
        }
    }
    rows
}

fn d_dx(g: &BiPoly) -> BiPoly {
    g.derivative()
}

fn d_dy(g: &BiPoly) -> BiPoly {
    g.map(|c| c.derivative())
}

/// Square-free part of `Res_t(g1(t) X - f1(t), g2(t) Y - f2(t))` for the
/// plane curve `(f1/g1, f2/g2)`, from a Sylvester determinant evaluated by
/// Bareiss elimination over `Z[X, Y]`.
pub fn implicitize_rational(x: &RatFn, y: &RatFn) -> Result<ImplicitPlanePoly> {
    if x.degree() == 0 && y.degree() == 0 {
        return Err(Error::DegenerateParametrization("both coordinates are constant".into()));
    }
    let (f1, g1) = clear_denominators(x.num(), x.den());
    let (f2, g2) = clear_denominators(y.num(), y.den());
    let len1 = f1.len().max(g1.len());
    let len2 = f2.len().max(g2.len());
    let at = |v: &[BigInt], k: usize| v.get(k).cloned().unwrap_or_default();
    // g1_k X - f1_k as a polynomial in X over Z[Y]
    let a: Vec<BiPoly> = (0..len1)
        .map(|k| Poly::new(vec![ZPoly::constant(-at(&f1, k)), ZPoly::constant(at(&g1, k))]))
        .collect();
    // g2_k Y - f2_k
    let b: Vec<BiPoly> = (0..len2)
        .map(|k| BiPoly::constant(ZPoly::new(vec![-at(&f2, k), at(&g2, k)])))
        .collect();
    let res = bareiss_det(sylvester(&a, &b));
    if res.is_zero() {
        return Err(Error::DegenerateParametrization("resultant vanishes identically".into()));
    }
    let common = res.gcd(&d_dx(&res)).gcd(&d_dy(&res));
    let squarefree = res.exact_div(&common).expect("gcd divides the resultant");
    let g = ImplicitPlanePoly::from_bipoly(&squarefree)?;
    assert!(g.degree_x() < len2 && g.degree_y() < len1, "resultant degree bound violated");
    Ok(g)
}

/// Finite parameter window for intersection and fingerprint searches.
pub fn search_window(d: Domain) -> (f64, f64) {
    let lo = if d.lo.is_finite() { d.lo } else { d.hi.min(SEARCH_CLIP) - 2.0 * SEARCH_CLIP };
    let hi = if d.hi.is_finite() { d.hi } else { lo.max(-SEARCH_CLIP) + 2.0 * SEARCH_CLIP };
    (lo, hi)
}

fn sample_nodes(d: Domain, n: usize) -> Vec<f64> {
    let (lo, hi) = search_window(d);
    let h = (hi - lo) / n as f64;
    (0..n).map(|i| lo + (i as f64 + 0.5) * h).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SameCurveMethod {
    ExactImplicit,
    Fingerprint,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntersectionReport {
    pub points: Vec<[f64; 2]>,
    pub params: Vec<(f64, f64)>,
    pub same_algebraic_curve: bool,
    pub method: SameCurveMethod,
    /// Grid cells whose polyline segments cross but where Newton failed.
    pub unconverged_cells: usize,
    pub degree_bound: Option<usize>,
}

/// Decides whether two Elekes curves trace the same algebraic curve.
pub fn same_curve(e1: &ElekesCurve, e2: &ElekesCurve) -> Result<(bool, SameCurveMethod)> {
    if let (Some(a), Some(b)) = (e1.implicit(), e2.implicit()) {
        return Ok((a? == b?, SameCurveMethod::ExactImplicit));
    }
    Ok((fingerprint_match(e1, e2)? && fingerprint_match(e2, e1)?, SameCurveMethod::Fingerprint))
}

/// Whether `2B + 1` sample points of `e1` lie on the sampled part of `e2`.
fn fingerprint_match(e1: &ElekesCurve, e2: &ElekesCurve) -> Result<bool> {
    let b = e1.degree_bound().unwrap_or(FALLBACK_DEGREE).max(1);
    let probes = sample_nodes(e1.base.domain(), 2 * b + 1);
    let nodes = sample_nodes(e2.base.domain(), 256);
    let poly: Vec<[f64; 2]> = nodes.iter().map(|&s| e2.eval_f64(s)).collect::<Result<_>>()?;
    let scale = poly.iter().fold(1.0f64, |m, p| m.max(p[0].abs()).max(p[1].abs()));
    for t in probes {
        let target = e1.eval_f64(t)?;
        let (mut best, mut s) = (f64::INFINITY, nodes[0]);
        for (node, p) in nodes.iter().zip(&poly) {
            let d = (p[0] - target[0]).hypot(p[1] - target[1]);
            if d < best {
                best = d;
                s = *node;
            }
        }
        let (lo, hi) = search_window(e2.base.domain());
        for _ in 0..50 {
            let (v, dv) = e2.eval_with_derivative(s)?;
            let r = [v[0] - target[0], v[1] - target[1]];
            best = r[0].hypot(r[1]);
            let den = dv[0] * dv[0] + dv[1] * dv[1];
            if best <= FINGERPRINT_TOL * scale * 1e-3 || den == 0.0 {
                break;
            }
            let next = s - (r[0] * dv[0] + r[1] * dv[1]) / den;
            if !(next > lo && next < hi) || !e2.base.domain().contains(next) {
                break;
            }
            s = next;
        }
        if best > FINGERPRINT_TOL * scale {
            return Ok(false);
        }
    }
    Ok(true)
}

fn bbox(a: [f64; 2], b: [f64; 2], pad: f64) -> [f64; 4] {
    [a[0].min(b[0]) - pad, a[0].max(b[0]) + pad, a[1].min(b[1]) - pad, a[1].max(b[1]) + pad]
}

fn overlap(a: &[f64; 4], b: &[f64; 4]) -> bool {
    a[0] <= b[1] && b[0] <= a[1] && a[2] <= b[3] && b[2] <= a[3]
}

fn segments_cross(p: [f64; 2], q: [f64; 2], r: [f64; 2], s: [f64; 2]) -> bool {
    let orient = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let (d1, d2) = (orient(p, q, r), orient(p, q, s));
    let (d3, d4) = (orient(r, s, p), orient(r, s, q));
    d1 * d2 <= 0.0 && d3 * d4 <= 0.0
}

/// Newton on `ξ1(t) - ξ2(s) = 0` from `(t, s)`.
fn newton_pair(e1: &ElekesCurve, e2: &ElekesCurve, mut t: f64, mut s: f64, scale: f64) -> Option<(f64, f64, [f64; 2])> {
    let (d1, d2) = (e1.base.domain(), e2.base.domain());
    for _ in 0..60 {
        let (v1, j1) = e1.eval_with_derivative(t).ok()?;
        let (v2, j2) = e2.eval_with_derivative(s).ok()?;
        let r = [v1[0] - v2[0], v1[1] - v2[1]];
        if r[0].hypot(r[1]) <= 1e-12 * scale {
            return Some(polish(e1, e2, t, s, r[0].hypot(r[1])).unwrap_or((t, s, v1)));
        }
        // [j1, -j2] (dt, ds) = -r
        let det = -j1[0] * j2[1] + j2[0] * j1[1];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dt = (-r[0] * -j2[1] + j2[0] * -r[1]) / det;
        let ds = (j1[0] * -r[1] - j1[1] * -r[0]) / det;
        let mut lambda = 1.0;
        let norm0 = r[0].hypot(r[1]);
        loop {
            let (nt, ns) = (t + lambda * dt, s + lambda * ds);
            if d1.contains(nt) && d2.contains(ns) {
                let a = e1.eval_f64(nt).ok()?;
                let b = e2.eval_f64(ns).ok()?;
                if (a[0] - b[0]).hypot(a[1] - b[1]) < norm0 || lambda < 1e-3 {
                    t = nt;
                    s = ns;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-6 {
                return None;
            }
        }
    }
    None
}

/// Plain Newton steps while the residual keeps shrinking.
fn polish(e1: &ElekesCurve, e2: &ElekesCurve, mut t: f64, mut s: f64, mut res: f64) -> Option<(f64, f64, [f64; 2])> {
    let mut best = None;
    for _ in 0..60 {
        let (v1, j1) = e1.eval_with_derivative(t).ok()?;
        let (v2, j2) = e2.eval_with_derivative(s).ok()?;
        let r = [v1[0] - v2[0], v1[1] - v2[1]];
        let det = -j1[0] * j2[1] + j2[0] * j1[1];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let nt = t + (r[0] * j2[1] - j2[0] * r[1]) / det;
        let ns = s + (r[0] * j1[1] - j1[0] * r[1]) / det;
        if !(e1.base.domain().contains(nt) && e2.base.domain().contains(ns)) {
            break;
        }
        let (a, b) = (e1.eval_f64(nt).ok()?, e2.eval_f64(ns).ok()?);
        let next = (a[0] - b[0]).hypot(a[1] - b[1]);
        if next > res || (next == res && nt == t && ns == s) {
            break;
        }
        (t, s, res) = (nt, ns, next);
        best = Some((t, s, a));
    }
    best
}

/// Intersections of two Elekes curves by grid search plus Newton
/// refinement; the count is a lower-bound estimate. When both curves trace
/// the same algebraic curve, no points are reported.
pub fn intersect_elekes_pair(e1: &ElekesCurve, e2: &ElekesCurve, n: usize, tol: f64) -> Result<IntersectionReport> {
    if e1.p.cmp_value(&e2.p).is_eq() && e1.q.cmp_value(&e2.q).is_eq() {
        return Err(Error::invalid("intersecting an Elekes curve with itself"));
    }
    let (same, method) = same_curve(e1, e2)?;
    intersect_known(e1, e2, n, tol, same, method)
}

fn intersect_known(
    e1: &ElekesCurve,
    e2: &ElekesCurve,
    n: usize,
    tol: f64,
    same: bool,
    method: SameCurveMethod,
) -> Result<IntersectionReport> {
    if n < 4 || !(tol > 0.0) {
        return Err(Error::invalid("intersection search needs n >= 4 and tol > 0"));
    }
    let degree_bound = match (e1.degree_bound(), e2.degree_bound()) {
        (Some(a), Some(b)) => Some(a.max(b) * a.max(b)),
        _ => None,
    };
    let mut report = IntersectionReport {
        points: Vec::new(),
        params: Vec::new(),
        same_algebraic_curve: same,
        method,
        unconverged_cells: 0,
        degree_bound,
    };
    if same {
        return Ok(report);
    }
    let nodes1 = sample_nodes(e1.base.domain(), n);
    let nodes2 = sample_nodes(e2.base.domain(), n);
    let img1: Vec<[f64; 2]> = nodes1.iter().map(|&t| e1.eval_f64(t)).collect::<Result<_>>()?;
    let img2: Vec<[f64; 2]> = nodes2.iter().map(|&t| e2.eval_f64(t)).collect::<Result<_>>()?;
    let scale = img1
        .iter()
        .chain(&img2)
        .fold(1.0f64, |m, p| m.max(p[0].abs()).max(p[1].abs()));
    let pad = 1e-9 * scale;
    let boxes2: Vec<[f64; 4]> = img2.windows(2).map(|w| bbox(w[0], w[1], pad)).collect();
    let found: Vec<(Option<(f64, f64, [f64; 2])>, bool)> = (0..n - 1)
        .into_par_iter()
        .flat_map_iter(|i| {
            let b1 = bbox(img1[i], img1[i + 1], pad);
            let (img1, img2, nodes1, nodes2, boxes2) = (&img1, &img2, &nodes1, &nodes2, &boxes2);
            (0..n - 1).filter(move |&j| overlap(&b1, &boxes2[j])).map(move |j| {
                let crosses = segments_cross(img1[i], img1[i + 1], img2[j], img2[j + 1]);
                let t0 = 0.5 * (nodes1[i] + nodes1[i + 1]);
                let s0 = 0.5 * (nodes2[j] + nodes2[j + 1]);
                (newton_pair(e1, e2, t0, s0, scale), crosses)
            })
        })
        .collect();
    let merge = tol.sqrt();
    for (hit, crosses) in found {
        match hit {
            Some((t, s, p)) => {
                let dup = report.points.iter().any(|q| {
                    (q[0] - p[0]).abs() <= merge * (1.0 + p[0].abs()) && (q[1] - p[1]).abs() <= merge * (1.0 + p[1].abs())
                });
                if !dup {
                    report.points.push(p);
                    report.params.push((t, s));
                }
            }
            None if crosses => report.unconverged_cells += 1,
            None => {}
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IncidenceFailure {
    pub p: usize,
    pub q: usize,
    pub r: usize,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IncidenceReport {
    pub checked: usize,
    pub exact: bool,
    pub failures: Vec<IncidenceFailure>,
    /// Fewest and most distinct product points `ξ_pq(r)` over all curves.
    pub min_incidences: usize,
    pub max_incidences: usize,
}

/// Checks `ξ_pq(γ⁻¹ r) = (D(r, p), D(r, q))` for all ordered pairs `(p, q)`
/// and every other point `r`, exactly when the data are exact.
pub fn verify_incidence_invariant(pset: &ParamPointSet, q: &QuantitySpec) -> Result<IncidenceReport> {
    let n = pset.len();
    if n < 3 {
        return Err(Error::invalid("incidence check needs |P| >= 3"));
    }
    let exact = pset.is_exact();
    let params = pset.params();
    let pts = pset.points()?;
    let curve = pset.curve();
    let per_curve: Vec<(usize, Vec<IncidenceFailure>)> = (0..n * n)
        .into_par_iter()
        .filter(|k| k / n != k % n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            let e = ElekesCurve::new(curve, q, params[i].clone(), params[j].clone())?;
            let mut failures = Vec::new();
            let mut images: Vec<Point> = Vec::new();
            for r in (0..n).filter(|&r| r != i && r != j) {
                let fail = |detail: String| IncidenceFailure { p: i, q: j, r, detail };
                if exact {
                    let (x, a, b) = (
                        pts[r].as_exact().unwrap(),
                        pts[i].as_exact().unwrap(),
                        pts[j].as_exact().unwrap(),
                    );
                    let want = vec![q.eval(x, a)?, q.eval(x, b)?];
                    let got = e.eval_components(params[r].as_exact().unwrap())?.unwrap();
                    if got != want {
                        failures.push(fail(format!("components give ({}, {})", got[0], got[1])));
                    }
                    if want.iter().any(Zero::is_zero) {
                        failures.push(fail("zero distance between distinct points".into()));
                    }
                    if !images.contains(&Point::Exact(want.clone())) {
                        images.push(Point::Exact(want));
                    }
                } else {
                    let x = pts[r].to_f64();
                    let want = [q.eval_f64(&x, &pts[i].to_f64())?, q.eval_f64(&x, &pts[j].to_f64())?];
                    let got = e.eval_f64(params[r].to_f64())?;
                    let scale = want[0].abs().max(want[1].abs()).max(f64::MIN_POSITIVE);
                    if (got[0] - want[0]).abs() > 1e-12 * scale || (got[1] - want[1]).abs() > 1e-12 * scale {
                        failures.push(fail(format!("evaluation gives ({}, {})", got[0], got[1])));
                    }
                    let dup = images.iter().any(|p| {
                        let p = p.to_f64();
                        (p[0] - want[0]).abs() <= 1e-12 * scale && (p[1] - want[1]).abs() <= 1e-12 * scale
                    });
                    if !dup {
                        images.push(Point::Float(want.to_vec()));
                    }
                }
            }
            Ok((images.len(), failures))
        })
        .collect::<Result<_>>()?;
    Ok(IncidenceReport {
        checked: n * (n - 1) * (n - 2),
        exact,
        min_incidences: per_curve.iter().map(|c| c.0).min().unwrap_or(0),
        max_incidences: per_curve.iter().map(|c| c.0).max().unwrap_or(0),
        failures: per_curve.into_iter().flat_map(|c| c.1).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub curves: usize,
    pub pairs_checked: usize,
    pub same_curve_pairs: usize,
    pub max_pairwise_intersections: usize,
    /// Sizes of the classes of curves sharing one algebraic curve, largest
    /// first.
    pub duplicate_curve_classes: Vec<usize>,
    /// Intersection count -> number of sampled pairs.
    pub histogram: BTreeMap<usize, usize>,
    pub unconverged_cells: usize,
    pub method: Option<SameCurveMethod>,
    pub degree_bound: Option<usize>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Samples `k` unordered pairs of distinct Elekes curves `ξ_pq` (ordered
/// anchor pairs from `pset`), groups curves into same-curve classes, and
/// records the intersection counts of the sampled pairs.
pub fn admissibility_scan(
    pset: &ParamPointSet,
    q: &QuantitySpec,
    k: usize,
    n: usize,
    tol: f64,
    seed: u64,
) -> Result<AdmissibilityReport> {
    let params = pset.params();
    let m = params.len();
    let curves: Vec<ElekesCurve> = (0..m)
        .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| ElekesCurve::new(pset.curve(), q, params[i].clone(), params[j].clone()))
        .collect::<Result<_>>()?;
    let c = curves.len();
    let mut report = AdmissibilityReport {
        curves: c,
        pairs_checked: 0,
        same_curve_pairs: 0,
        max_pairwise_intersections: 0,
        duplicate_curve_classes: Vec::new(),
        histogram: BTreeMap::new(),
        unconverged_cells: 0,
        method: None,
        degree_bound: curves.first().and_then(|e| e.degree_bound()).map(|b| b * b),
    };
    if k == 0 || c < 2 {
        return Ok(report);
    }

    let rational = curves.iter().all(|e| e.components().is_some());
    let class: Vec<usize> = if rational {
        report.method = Some(SameCurveMethod::ExactImplicit);
        let polys: Vec<ImplicitPlanePoly> = curves
            .par_iter()
            .map(|e| e.implicit().unwrap())
            .collect::<Result<_>>()?;
        let mut ids: HashMap<&ImplicitPlanePoly, usize> = HashMap::new();
        polys
            .iter()
            .enumerate()
            .map(|(i, p)| *ids.entry(p).or_insert(i))
            .collect()
    } else {
        report.method = Some(SameCurveMethod::Fingerprint);
        let boxes: Vec<[f64; 4]> = curves
            .par_iter()
            .map(|e| {
                let pts: Vec<[f64; 2]> = sample_nodes(e.base.domain(), 256)
                    .iter()
                    .map(|&t| e.eval_f64(t))
                    .collect::<Result<_>>()?;
                Ok(pts.iter().fold(
                    [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY],
                    |b, p| [b[0].min(p[0]), b[1].max(p[0]), b[2].min(p[1]), b[3].max(p[1])],
                ))
            })
            .collect::<Result<_>>()?;
        let close = |a: &[f64; 4], b: &[f64; 4]| {
            let s = a.iter().chain(b).fold(1.0f64, |m, v| m.max(v.abs()));
            a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-3 * s)
        };
        let candidates: Vec<(usize, usize)> = (0..c)
            .flat_map(|i| (i + 1..c).map(move |j| (i, j)))
            .filter(|&(i, j)| close(&boxes[i], &boxes[j]))
            .collect();
        let matches: Vec<bool> = candidates
            .par_iter()
            .map(|&(i, j)| Ok(fingerprint_match(&curves[i], &curves[j])? && fingerprint_match(&curves[j], &curves[i])?))
            .collect::<Result<_>>()?;
        let mut parent: Vec<usize> = (0..c).collect();
        for (&(i, j), ok) in candidates.iter().zip(matches) {
            if ok {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
        (0..c).map(|i| find(&mut parent, i)).collect()
    };
    let mut sizes: HashMap<usize, usize> = HashMap::new();
    for &cl in &class {
        *sizes.entry(cl).or_default() += 1;
    }
    report.duplicate_curve_classes = sizes.into_values().collect();
    report.duplicate_curve_classes.sort_unstable_by(|a, b| b.cmp(a));

    let total = c * (c - 1) / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks: Vec<usize> = if k >= total {
        (0..total).collect()
    } else {
        sample(&mut rng, total, k).into_vec()
    };
    let pairs: Vec<(usize, usize)> = picks.into_iter().map(|idx| unrank_pair(idx, c)).collect();
    let method = report.method.unwrap();
    let results: Vec<IntersectionReport> = pairs
        .par_iter()
        .map(|&(i, j)| intersect_known(&curves[i], &curves[j], n, tol, class[i] == class[j], method))
        .collect::<Result<_>>()?;
    report.pairs_checked = results.len();
    for r in results {
        report.unconverged_cells += r.unconverged_cells;
        if r.same_algebraic_curve {
            report.same_curve_pairs += 1;
            continue;
        }
        report.max_pairwise_intersections = report.max_pairwise_intersections.max(r.points.len());
        *report.histogram.entry(r.points.len()).or_default() += 1;
    }
    Ok(report)
}

/// Index of the unordered pair `(i, j)`, `i < j < c`, in row-major order.
fn unrank_pair(mut idx: usize, c: usize) -> (usize, usize) {
    for i in 0..c {
        let row = c - 1 - i;
        if idx < row {
            return (i, i + 1 + idx);
        }
        idx -= row;
    }
    unreachable!("pair index out of range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::{generate_point_set, Scheme};
    use crate::curve::builtin;

    fn qi(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn rf(num: &[i64], den: &[i64]) -> RatFn {
        RatFn::new(QPoly::from_ints(num), QPoly::from_ints(den))
    }

    fn grid(terms: &[(usize, usize, i64)]) -> ImplicitPlanePoly {
        let mut g = vec![vec![BigInt::zero(); 4]; 4];
        for &(i, j, c) in terms {
            g[i][j] = c.into();
        }
        ImplicitPlanePoly::from_grid(g).unwrap()
    }

    #[test]
    fn eval_examples() {
        let e = ElekesCurve::new(&builtin("parabola").unwrap(), &QuantitySpec::squared_euclidean(2), Param::int(0), Param::int(1)).unwrap();
        let ex = |t| e.eval(&Param::int(t)).unwrap();
        assert_eq!(ex(0), Point::Exact(vec![qi(0), qi(2)]));
        assert_eq!(ex(1), Point::Exact(vec![qi(2), qi(0)]));
        assert_eq!(ex(2), Point::Exact(vec![qi(20), qi(10)]));
        assert_eq!(e.eval_components(&qi(2)).unwrap().unwrap(), vec![qi(20), qi(10)]);
        assert_eq!(e.swapped().eval(&Param::int(2)).unwrap(), Point::Exact(vec![qi(10), qi(20)]));
    }

    #[test]
    fn implicitization_examples() {
        let g = implicitize_rational(&rf(&[0, 1], &[1]), &rf(&[0, 0, 1], &[1])).unwrap();
        assert_eq!(g, grid(&[(2, 0, 1), (0, 1, -1)]));
        assert_eq!(g.to_string(), "X^2 - Y");
        let g = implicitize_rational(&rf(&[1, 0, -1], &[1, 0, 1]), &rf(&[0, 2], &[1, 0, 1])).unwrap();
        assert_eq!(g, grid(&[(2, 0, 1), (0, 2, 1), (0, 0, -1)]));
        let g = implicitize_rational(&rf(&[0, 1], &[1]), &rf(&[1], &[0, 1])).unwrap();
        assert_eq!(g, grid(&[(1, 1, 1), (0, 0, -1)]));
        assert!(matches!(
            implicitize_rational(&rf(&[3], &[1]), &rf(&[2], &[7])),
            Err(Error::DegenerateParametrization(_))
        ));
    }

    #[test]
    fn improper_parametrization_is_reduced() {
        // (t^2, t^4) traces Y = X^2 twice
        let g = implicitize_rational(&rf(&[0, 0, 1], &[1]), &rf(&[0, 0, 0, 0, 1], &[1])).unwrap();
        assert_eq!(g, grid(&[(2, 0, 1), (0, 1, -1)]));
    }

    #[test]
    fn implicit_json_round_trip() {
        let g = grid(&[(2, 0, 3), (0, 2, 3), (0, 0, -3)]);
        assert_eq!(g.to_json()["degree"], 2);
        let v = json!({"coeffs": [[2, 0, "1/3"], [0, 2, "1/3"], [0, 0, "-1/3"]]});
        assert_eq!(ImplicitPlanePoly::from_json(&v).unwrap(), g);
    }

    #[test]
    fn parabola_swap_pair_intersects_on_diagonal() {
        let c = builtin("parabola").unwrap();
        let q = QuantitySpec::squared_euclidean(2);
        let e1 = ElekesCurve::new(&c, &q, Param::int(0), Param::int(1)).unwrap();
        let e2 = e1.swapped();
        let r = intersect_elekes_pair(&e1, &e2, 64, 1e-9).unwrap();
        assert!(!r.same_algebraic_curve);
        assert!(!r.points.is_empty() && r.points.len() <= 16);
        assert!(r.points.iter().any(|p| (p[0] - p[1]).abs() < 1e-8));
    }

    #[test]
    fn rotated_pairs_on_circle_share_a_curve() {
        let c = builtin("unit_circle").unwrap();
        let q = QuantitySpec::squared_euclidean(2);
        let e1 = ElekesCurve::new(&c, &q, Param::Float(0.0), Param::Float(1.0)).unwrap();
        let e2 = ElekesCurve::new(&c, &q, Param::Float(0.5), Param::Float(1.5)).unwrap();
        assert_eq!(same_curve(&e1, &e2).unwrap(), (true, SameCurveMethod::Fingerprint));
        let e3 = ElekesCurve::new(&c, &q, Param::Float(0.0), Param::Float(2.0)).unwrap();
        assert!(!same_curve(&e1, &e3).unwrap().0);

        let rc = builtin("rational_circle").unwrap();
        let a = ElekesCurve::new(&rc, &q, Param::int(0), Param::int(1)).unwrap();
        let b = ElekesCurve::new(&rc, &q, Param::int(1), Param::int(0)).unwrap();
        let d = ElekesCurve::new(&rc, &q, Param::int(0), Param::int(-1)).unwrap();
        assert_eq!(same_curve(&a, &d).unwrap(), (true, SameCurveMethod::ExactImplicit));
        assert!(same_curve(&a, &b).unwrap().0);
    }

    #[test]
    fn incidence_examples() {
        let c = builtin("parabola").unwrap();
        let p = generate_point_set(&c, &"arith:-2:1:5".parse().unwrap()).unwrap();
        let r = verify_incidence_invariant(&p, &QuantitySpec::squared_euclidean(2)).unwrap();
        assert_eq!((r.checked, r.failures.len(), r.exact), (60, 0, true));
        assert_eq!((r.min_incidences, r.max_incidences), (3, 3));

        let h = builtin("rect_hyperbola").unwrap();
        let p = generate_point_set(&h, &"geom:1:2:4".parse().unwrap()).unwrap();
        let pa = QuantitySpec::pinned_area([qi(0), qi(0)]);
        assert!(verify_incidence_invariant(&p, &pa).unwrap().failures.is_empty());

        let circle = builtin("unit_circle").unwrap();
        let p = generate_point_set(&circle, &Scheme::EquallySpacedAngle { n: 3 }).unwrap();
        let r = verify_incidence_invariant(&p, &QuantitySpec::squared_euclidean(2)).unwrap();
        assert_eq!((r.min_incidences, r.max_incidences, r.exact), (1, 1, false));
    }

    #[test]
    fn unrank_covers_all_pairs() {
        let c = 5;
        let all: Vec<_> = (0..10).map(|k| unrank_pair(k, c)).collect();
        assert_eq!(all[0], (0, 1));
        assert_eq!(all[9], (3, 4));
        assert!(all.iter().all(|&(i, j)| i < j && j < c));
    }

    #[test]
    fn empty_scan() {
        let c = builtin("parabola").unwrap();
        let p = generate_point_set(&c, &"arith:0:1:4".parse().unwrap()).unwrap();
        let r = admissibility_scan(&p, &QuantitySpec::squared_euclidean(2), 0, 32, 1e-9, 1).unwrap();
        assert_eq!(r.pairs_checked, 0);
        assert!(r.histogram.is_empty());
    }
}
