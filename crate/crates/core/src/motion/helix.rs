use rayon::prelude::*;
use serde::Serialize;

use crate::curve::{norm, ArcLengthCurve, CurveSpec, Domain, HelixCurve};
use crate::error::{Error, Result};

/// Largest derivative order the profile supports.
pub const MAX_PROFILE_ORDER: usize = 5;

/// Relative variation below which an order counts as constant.
pub const CONSTANCY_TOL: f64 = 1e-4;

const ARC_GRID: usize = 256;
/// Changes under `h -> h/2` smaller than this, relative, cannot affect
/// the constancy verdict and are not treated as cancellation.
const CANCELLATION_TOL: f64 = 0.1 * CONSTANCY_TOL;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivativeNormProfile {
    pub orders: Vec<usize>,
    /// Parameter interval the profile was taken over.
    pub domain: (f64, f64),
    pub length: f64,
    pub step: f64,
    /// Arc-length positions of the samples.
    pub samples: Vec<f64>,
    /// `norms[k - 1][i]` estimates `|σ^(k)(samples[i])|`.
    pub norms: Vec<Vec<f64>>,
    /// `(max - min) / mean` per order.
    pub variation: Vec<f64>,
    pub helix_candidate: bool,
}

impl DerivativeNormProfile {
    pub fn mean(&self, order: usize) -> f64 {
        let row = &self.norms[order - 1];
        row.iter().sum::<f64>() / row.len() as f64
    }

    /// `order,s,norm` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("order,s,norm\n");
        for (k, row) in self.orders.iter().zip(&self.norms) {
            for (s, v) in self.samples.iter().zip(row) {
                out.push_str(&format!("{k},{s},{v}\n"));
            }
        }
        out
    }
}

fn sub_scaled(acc: &mut [f64], v: &[f64], c: f64) {
    for (a, x) in acc.iter_mut().zip(v) {
        *a += c * x;
    }
}

/// Central difference of order `j` (1 to 4) of `f` at `s`, second-order accurate.
fn central(f: &impl Fn(f64) -> Result<Vec<f64>>, s: f64, h: f64, j: usize) -> Result<Vec<f64>> {
    let stencil: &[(f64, f64)] = match j {
        1 => &[(1.0, 0.5), (-1.0, -0.5)],
        2 => &[(1.0, 1.0), (0.0, -2.0), (-1.0, 1.0)],
        3 => &[(2.0, 0.5), (1.0, -1.0), (-1.0, 1.0), (-2.0, -0.5)],
        4 => &[(2.0, 1.0), (1.0, -4.0), (0.0, 6.0), (-1.0, -4.0), (-2.0, 1.0)],
        _ => unreachable!("stencil order"),
    };
    let scale = h.powi(j as i32);
    let mut acc: Option<Vec<f64>> = None;
    for &(off, w) in stencil {
        let v = f(s + off * h)?;
        let acc = acc.get_or_insert_with(|| vec![0.0; v.len()]);
        sub_scaled(acc, &v, w / scale);
    }
    Ok(acc.unwrap_or_default())
}

/// Richardson-extrapolated norm of the `k`-th derivative at `s`, plus the
/// unextrapolated estimates at `2h`, `h`, `h/2`.
///
/// Order 1 differences positions. Order `k >= 2` differences the highest
/// exact arc-length derivative `σ^(j)`, `j <= k - 1`, that the curve's jet
/// supports. Stencil points are placed through a local arc-length chart
/// around the sample.
fn estimate(arc: &ArcLengthCurve, s: f64, h: f64, k: usize) -> Result<(f64, [f64; 3])> {
    let t0 = arc.param_at(s)?;
    let j = if k == 1 { 0 } else { (k - 1).min(arc.base().max_jet_order()) };
    let exact = |ds: f64| -> Result<Vec<f64>> { Ok(arc.jet_at_param(arc.offset_param(t0, ds)?, j)?.swap_remove(j)) };
    let at = |step: f64| central(&exact, 0.0, step, k - j);
    let (a, b, c) = (at(2.0 * h)?, at(h)?, at(0.5 * h)?);
    let rich: Vec<f64> = b.iter().zip(&c).map(|(x, y)| (4.0 * y - x) / 3.0).collect();
    Ok((norm(&rich), [norm(&a), norm(&b), norm(&c)]))
}

/// Norms of the derivatives of the arc-length reparametrization `σ` of
/// `curve`, orders `1..=max_order`, at `m` interior arc-length samples.
///
/// Each estimate is a central difference extrapolated once from steps `h`
/// and `h/2`; a step `2h` probe flags cancellation. Unbounded domains are
/// cut to the middle 90% of their sampling window first, which keeps a
/// pole at a finite open endpoint out of the arc length.
pub fn derivative_norm_profile(curve: &CurveSpec, max_order: usize, m: usize, h: f64) -> Result<DerivativeNormProfile> {
    if max_order == 0 || max_order > MAX_PROFILE_ORDER {
        return Err(Error::JetOrder {
            requested: max_order,
            supported: MAX_PROFILE_ORDER,
        });
    }
    if curve.max_jet_order() < 1 {
        return Err(Error::JetOrder {
            requested: 1,
            supported: curve.max_jet_order(),
        });
    }
    if m < 2 {
        return Err(Error::InsufficientSamples(m));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid("finite-difference step must be positive"));
    }
    let bounded = if curve.domain().is_bounded() {
        curve.clone()
    } else {
        let (lo, hi) = curve.domain().window();
        let pad = 0.05 * (hi - lo);
        curve.with_domain(Domain::new(lo + pad, hi - pad)?)?
    };
    let domain = (bounded.domain().lo, bounded.domain().hi);
    let arc = ArcLengthCurve::new(&bounded, ARC_GRID)?;
    let length = arc.length();
    let margin = 5.0 * h;
    if length <= 2.0 * margin {
        return Err(Error::invalid(format!("curve length {length} too short for step {h}")));
    }
    let samples: Vec<f64> = (0..m)
        .map(|i| margin + (length - 2.0 * margin) * i as f64 / (m - 1) as f64)
        .collect();
    let orders: Vec<usize> = (1..=max_order).collect();
    let norms = orders
        .iter()
        .map(|&k| {
            samples
                .par_iter()
                .map(|&s| {
                    let (v, [a, b, c]) = estimate(&arc, s, h, k)?;
                    let (d1, d2) = ((a - b).abs(), (b - c).abs());
                    if d2 > d1 && d2 > CANCELLATION_TOL * v.max(f64::MIN_POSITIVE) {
                        return Err(Error::StepTooSmall { order: k });
                    }
                    Ok(v)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let variation: Vec<f64> = norms.iter().map(|row| relative_variation(row)).collect();
    let helix_candidate = variation.iter().skip(1).all(|&v| v < CONSTANCY_TOL);
    Ok(DerivativeNormProfile {
        orders,
        domain,
        length,
        step: h,
        samples,
        norms,
        variation,
        helix_candidate,
    })
}

fn relative_variation(row: &[f64]) -> f64 {
    let (lo, hi) = row.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, u), &v| (l.min(v), u.max(v)));
    let mean = row.iter().sum::<f64>() / row.len() as f64;
    if mean == 0.0 {
        if hi - lo == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (hi - lo) / mean.abs()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioCertificate {
    /// Index `i` of the frequency compared against the first one.
    pub index: usize,
    pub ratio: f64,
    /// Reconstruction `p / q`, when one was found.
    pub fraction: Option<(i128, i128)>,
    pub rel_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HelixClassification {
    pub is_generalized: bool,
    pub is_algebraic: bool,
    pub k: usize,
    pub l: usize,
    pub ratio_certificates: Vec<RatioCertificate>,
    pub reason: String,
}

/// First continued-fraction convergent `p/q` of `x` with `q <= max_q` and
/// `|x - p/q| < tol |x|`.
pub fn rational_reconstruction(x: f64, max_q: i128, tol: f64) -> Option<(i128, i128, f64)> {
    if !x.is_finite() {
        return None;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    let mut r = x;
    for _ in 0..128 {
        let a = r.floor();
        if a.abs() > 1e30 {
            return None;
        }
        let ai = a as i128;
        let p = ai.checked_mul(p1)?.checked_add(p0)?;
        let q = ai.checked_mul(q1)?.checked_add(q0)?;
        if q > max_q {
            return None;
        }
        let err = ((x - p as f64 / q as f64) / x).abs();
        if err < tol || (x == 0.0 && p == 0) {
            return Some((p, q, if x == 0.0 { 0.0 } else { err }));
        }
        let frac = r - a;
        if frac == 0.0 {
            return None;
        }
        r = 1.0 / frac;
        (p0, q0, p1, q1) = (p1, q1, p, q);
    }
    None
}

/// Decides whether a generalized helix parametrizes a piece of a real
/// algebraic curve: either it is a line (`k = 0`), or it has no drift and
/// every frequency ratio `λ_i / λ_1` is rational up to denominator `max_q`.
pub fn classify_helix(curve: &HelixCurve, max_q: u64, tol: f64) -> HelixClassification {
    let k = curve.k();
    let l = if curve.drift().iter().all(|&w| w == 0.0) { 0 } else { curve.l() };
    let base = HelixClassification {
        is_generalized: true,
        is_algebraic: false,
        k,
        l,
        ratio_certificates: Vec::new(),
        reason: String::new(),
    };
    if k == 0 {
        return HelixClassification {
            is_algebraic: true,
            reason: "straight line".into(),
            ..base
        };
    }
    if l > 0 {
        return HelixClassification {
            reason: "rotation with nonzero drift".into(),
            ..base
        };
    }
    let l1 = curve.freqs()[0];
    let certs: Vec<RatioCertificate> = curve.freqs()[1..]
        .iter()
        .enumerate()
        .map(|(i, li)| {
            let ratio = li / l1;
            let found = rational_reconstruction(ratio, max_q as i128, tol);
            RatioCertificate {
                index: i + 1,
                ratio,
                fraction: found.map(|(p, q, _)| (p, q)),
                rel_error: found.map(|(_, _, e)| e),
            }
        })
        .collect();
    let all = certs.iter().all(|c| c.fraction.is_some());
    HelixClassification {
        is_algebraic: all,
        reason: if all {
            "all frequency ratios rational".into()
        } else {
            "irrational frequency ratio".into()
        },
        ratio_certificates: certs,
        ..base
    }
}
