use std::sync::Arc;

use super::{norm, AnalyticCurve, CurveSpec, Domain};
use crate::error::{Error, Result};
use crate::series;

const MIN_SPEED: f64 = 1e-12;

// Gauss-Kronrod 7-15 abscissae and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> Result<f64>, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx)? + f(c + dx)?;
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    Ok((k * h, (k - g).abs() * h))
}

/// Adaptive Gauss-Kronrod quadrature.
pub(crate) fn integrate(f: &impl Fn(f64) -> Result<f64>, a: f64, b: f64, tol: f64) -> Result<f64> {
    fn rec(f: &impl Fn(f64) -> Result<f64>, a: f64, b: f64, tol: f64, depth: u32) -> Result<f64> {
        let (v, err) = gk15(f, a, b)?;
        if err <= tol.max(64.0 * f64::EPSILON * v.abs()) || depth >= 30 {
            return Ok(v);
        }
        let m = 0.5 * (a + b);
        Ok(rec(f, a, m, 0.5 * tol, depth + 1)? + rec(f, m, b, 0.5 * tol, depth + 1)?)
    }
    rec(f, a, b, tol, 0)
}

/// Arc-length bookkeeping for a curve on a bounded domain: cumulative
/// length on a grid and the inverse map `s -> t`.
#[derive(Clone, Debug)]
pub struct ArcLengthCurve {
    base: CurveSpec,
    nodes: Vec<f64>,
    cumulative: Vec<f64>,
}

impl ArcLengthCurve {
    pub fn new(curve: &CurveSpec, n: usize) -> Result<Self> {
        if n < 16 {
            return Err(Error::invalid("arc-length grid needs n >= 16"));
        }
        let d = curve.domain();
        if !d.is_bounded() {
            return Err(Error::invalid("arc-length reparametrization needs a bounded domain"));
        }
        let h = (d.hi - d.lo) / n as f64;
        let nodes: Vec<f64> = (0..=n).map(|i| d.lo + i as f64 * h).collect();
        let speed = |t: f64| -> Result<f64> { Ok(norm(&curve.jet_f64(t, 1)?[1])) };
        let mut checks: Vec<f64> = nodes[1..n].to_vec();
        checks.push(d.lo + 0.5 * h);
        checks.push(d.hi - 0.5 * h);
        for &t in &checks {
            let s = speed(t)?;
            if s < MIN_SPEED {
                return Err(Error::SingularParametrization { t, speed: s });
            }
        }
        let mut cumulative = Vec::with_capacity(n + 1);
        cumulative.push(0.0);
        for w in nodes.windows(2) {
            let piece = integrate(&speed, w[0], w[1], 1e-15 * (w[1] - w[0]).max(1e-300))?;
            cumulative.push(cumulative.last().unwrap() + piece);
        }
        Ok(ArcLengthCurve {
            base: curve.clone(),
            nodes,
            cumulative,
        })
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn base(&self) -> &CurveSpec {
        &self.base
    }

    fn speed(&self, t: f64) -> Result<f64> {
        Ok(norm(&self.base.jet_f64(t, 1)?[1]))
    }

    /// Original parameter at arc length `s`, by safeguarded Newton.
    pub fn param_at(&self, s: f64) -> Result<f64> {
        let len = self.length();
        if !(s > 0.0 && s < len) {
            return Err(Error::Domain { t: s, lo: 0.0, hi: len });
        }
        let i = self.cumulative.partition_point(|&c| c <= s).clamp(1, self.nodes.len() - 1) - 1;
        let (a, b) = (self.nodes[i], self.nodes[i + 1]);
        let (ca, cb) = (self.cumulative[i], self.cumulative[i + 1]);
        let (mut lo, mut hi) = (a, b);
        let mut t = a + (s - ca) / (cb - ca) * (b - a);
        let speed = |x: f64| self.speed(x);
        for _ in 0..60 {
            let f = ca + integrate(&speed, a, t, 1e-16 * (b - a))? - s;
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let step = f / self.speed(t)?;
            let mut next = t - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let done = (next - t).abs() <= 4.0 * f64::EPSILON * t.abs().max(1.0);
            t = next;
            if done {
                break;
            }
        }
        Ok(t)
    }

    /// Parameter `t` with `∫_{t0}^{t} |γ'| = ds`, for short offsets.
    ///
    /// The integral is one fixed Kronrod rule, so the result is a smooth
    /// function of `ds` down to rounding.
    pub fn offset_param(&self, t0: f64, ds: f64) -> Result<f64> {
        let speed = |x: f64| self.speed(x);
        let mut t = t0 + ds / self.speed(t0)?;
        for _ in 0..20 {
            let g = if t == t0 { 0.0 } else { gk15(&speed, t0, t)?.0 };
            let next = t - (g - ds) / self.speed(t)?;
            let done = (next - t).abs() <= 2.0 * f64::EPSILON * t.abs().max(1.0);
            t = next;
            if done {
                break;
            }
        }
        Ok(t)
    }

    /// Jet of the unit-speed curve at arc length `s`, by Taylor-series
    /// composition of the base jet with the inverse arc-length map.
    pub fn jet(&self, s: f64, order: usize) -> Result<Vec<Vec<f64>>> {
        self.jet_at_param(self.param_at(s)?, order)
    }

    /// Same as [`ArcLengthCurve::jet`], at the point with base parameter `t0`.
    pub fn jet_at_param(&self, t0: f64, order: usize) -> Result<Vec<Vec<f64>>> {
        let gj = self.base.jet_f64(t0, order.max(1))?;
        if order == 0 {
            return Ok(vec![gj[0].clone()]);
        }
        let dim = gj[0].len();
        let coeff = |i: usize, j: usize| gj[j][i] / series::factorial(j);
        // speed^2 as a series in u = t - t0
        let mut speed2 = vec![0.0; order];
        for i in 0..dim {
            let dcoef: Vec<f64> = (0..order).map(|j| coeff(i, j + 1) * (j + 1) as f64).collect();
            let sq = series::mul(&dcoef, &dcoef, order - 1);
            for (acc, v) in speed2.iter_mut().zip(sq) {
                *acc += v;
            }
        }
        let g = series::pow(&speed2, -0.5, order - 1);
        let u = series::solve_autonomous(&g, order);
        let mut jet = vec![vec![0.0; dim]; order + 1];
        for i in 0..dim {
            let a: Vec<f64> = (0..=order).map(|j| coeff(i, j)).collect();
            let sigma = series::compose(&a, &u, order);
            for (k, row) in jet.iter_mut().enumerate() {
                row[i] = sigma[k] * series::factorial(k);
            }
        }
        Ok(jet)
    }
}

/// Unit-speed reparametrization on `(0, L)`, built from adaptive quadrature
/// of the speed on an `n`-cell grid plus Newton inversion.
pub fn arc_length_reparametrize(curve: &CurveSpec, n: usize) -> Result<AnalyticCurve> {
    let arc = Arc::new(ArcLengthCurve::new(curve, n)?);
    let len = arc.length();
    let max_order = curve.max_jet_order().min(16);
    let name = format!("arc_length({})", super::curve_to_json(curve));
    Ok(AnalyticCurve::new(
        name,
        curve.dim(),
        Domain::new(0.0, len)?,
        max_order,
        move |s, k| arc.jet(s, k),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::builtin;
    use std::f64::consts::PI;

    #[test]
    fn gk_integrates_polynomials_exactly() {
        let f = |x: f64| Ok(x.powi(5) - 3.0 * x * x);
        let v = integrate(&f, 0.0, 2.0, 1e-14).unwrap();
        assert!((v - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn line_length_and_identity() {
        let line = builtin("line").unwrap().with_domain(Domain::new(0.0, 2.0).unwrap()).unwrap();
        let sigma = arc_length_reparametrize(&line, 32).unwrap();
        assert!((sigma.domain().hi - 2.0).abs() < 1e-14);
        let p = sigma.jet_f64(0.75, 0).unwrap();
        assert!((p[0][0] - 0.75).abs() < 1e-14 && p[0][1].abs() < 1e-15);
    }

    #[test]
    fn circle_arc_is_unit_speed() {
        let c = builtin("unit_circle").unwrap().with_domain(Domain::new(0.0, PI).unwrap()).unwrap();
        let sigma = arc_length_reparametrize(&c, 64).unwrap();
        assert!((sigma.domain().hi - PI).abs() < 1e-10);
        for s in [0.1, 1.0, 2.5, 3.1] {
            let j = sigma.jet_f64(s, 2).unwrap();
            assert!((norm(&j[1]) - 1.0).abs() < 1e-8);
            assert!((norm(&j[2]) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn unbounded_domain_is_rejected() {
        assert!(arc_length_reparametrize(&builtin("parabola").unwrap(), 64).is_err());
    }

    #[test]
    fn stationary_point_is_singular() {
        // (t^2, t^3) has zero velocity at t = 0
        let cusp: CurveSpec = crate::curve::RationalCurve::polynomial(
            &[&[0, 0, 1], &[0, 0, 0, 1]],
            Domain::new(-1.0, 1.0).unwrap(),
        )
        .unwrap()
        .into();
        assert!(matches!(
            arc_length_reparametrize(&cusp, 16),
            Err(Error::SingularParametrization { .. })
        ));
    }
}
