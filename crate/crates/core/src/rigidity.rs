//! Frameworks on curves, infinitesimal flexibility, and the rigidity
//! function `H_αβ(τ)` with its degeneracy scan.
//!
//! Each vertex moves along the curve, so a tangent assignment is one scalar
//! `a_v` per vertex (the coefficient of `γ'(α_v)`), and infinitesimal
//! motions are the kernel of an `|E| x V` matrix.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num::{BigInt, BigRational, Integer, One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::curve::{curve_from_json, dot, CurveSpec};
use crate::error::{Error, Result};
use crate::param::Param;
use crate::poly::{bareiss_rank, kernel_basis};
use crate::quantity::QuantitySpec;

/// Half-width of the window around `α`, `β` where `H` is blended with its
/// removable value.
pub const REMOVABLE_WINDOW: f64 = 1e-7;

/// Smallest denominator factor accepted by [`eval_h`].
pub const SINGULAR_FACTOR: f64 = 1e-14;

#[derive(Clone, Debug)]
pub struct Framework {
    curve: CurveSpec,
    quantity: QuantitySpec,
    embedding: Vec<Param>,
    edges: Vec<(usize, usize)>,
}

impl Framework {
    pub fn new(curve: CurveSpec, quantity: QuantitySpec, embedding: Vec<Param>, edges: Vec<(usize, usize)>) -> Result<Self> {
        if quantity.dim() != curve.dim() {
            return Err(Error::DimensionMismatch {
                expected: curve.dim(),
                got: quantity.dim(),
            });
        }
        let v = embedding.len();
        let mut seen = std::collections::HashSet::new();
        for &(a, b) in &edges {
            if a >= v || b >= v {
                return Err(Error::invalid(format!("edge ({a}, {b}) refers to a missing vertex")));
            }
            if a == b {
                return Err(Error::invalid(format!("self-loop at vertex {a}")));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::invalid(format!("duplicate edge ({a}, {b})")));
            }
        }
        for (i, p) in embedding.iter().enumerate() {
            curve.domain().check(p.to_f64())?;
            if embedding[..i].iter().any(|o| o.cmp_value(p).is_eq()) {
                return Err(Error::invalid(format!("vertex {i} repeats parameter {p}")));
            }
        }
        Ok(Framework {
            curve,
            quantity,
            embedding,
            edges,
        })
    }

    /// Complete graph on the given embedding.
    pub fn complete(curve: CurveSpec, quantity: QuantitySpec, embedding: Vec<Param>) -> Result<Self> {
        let n = embedding.len();
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        Self::new(curve, quantity, embedding, edges)
    }

    /// Complete bipartite graph between the first `a` and the remaining
    /// vertices.
    pub fn bipartite(curve: CurveSpec, quantity: QuantitySpec, embedding: Vec<Param>, a: usize) -> Result<Self> {
        let n = embedding.len();
        let edges = (0..a).flat_map(|i| (a..n).map(move |j| (i, j))).collect();
        Self::new(curve, quantity, embedding, edges)
    }

    /// `{"curve": ..., "quantity": ..., "embedding": [...], "edges": [[u, w], ...]}`;
    /// `"complete": true` may replace `"edges"`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let curve = curve_from_json(v.get("curve").ok_or_else(|| Error::invalid("framework needs \"curve\""))?)?;
        let quantity = match v.get("quantity") {
            Some(q) => QuantitySpec::from_json(q, curve.dim())?,
            None => QuantitySpec::squared_euclidean(curve.dim()),
        };
        let embedding: Vec<Param> = serde_json::from_value(
            v.get("embedding")
                .cloned()
                .ok_or_else(|| Error::invalid("framework needs \"embedding\""))?,
        )
        .map_err(|e| Error::invalid(format!("embedding: {e}")))?;
        if v.get("complete").and_then(Value::as_bool) == Some(true) {
            return Self::complete(curve, quantity, embedding);
        }
        let edges: Vec<(usize, usize)> = serde_json::from_value(
            v.get("edges")
                .cloned()
                .ok_or_else(|| Error::invalid("framework needs \"edges\" or \"complete\""))?,
        )
        .map_err(|e| Error::invalid(format!("edges: {e}")))?;
        Self::new(curve, quantity, embedding, edges)
    }

    pub fn curve(&self) -> &CurveSpec {
        &self.curve
    }

    pub fn quantity(&self) -> &QuantitySpec {
        &self.quantity
    }

    pub fn embedding(&self) -> &[Param] {
        &self.embedding
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.embedding.len()
    }

    pub fn is_exact(&self) -> bool {
        self.curve.as_rational().is_some() && self.embedding.iter().all(Param::is_exact)
    }
}

/// Row `(u, w)`: `γ'(α_u)·D_X` in column `u`, `γ'(α_w)·D_Y` in column `w`.
pub fn flexibility_matrix(fw: &Framework) -> Result<Vec<Vec<f64>>> {
    let jets: Vec<(Vec<f64>, Vec<f64>)> = fw
        .embedding
        .iter()
        .map(|p| fw.curve.point_and_tangent(p.to_f64()))
        .collect::<Result<_>>()?;
    let v = fw.vertex_count();
    fw.edges
        .iter()
        .map(|&(a, b)| {
            let (dx, dy) = fw.quantity.grad_f64(&jets[a].0, &jets[b].0)?;
            let mut row = vec![0.0; v];
            row[a] = dot(&jets[a].1, &dx);
            row[b] = dot(&jets[b].1, &dy);
            Ok(row)
        })
        .collect()
}

/// Exact flexibility matrix, available for rational curves at rational
/// parameters.
pub fn flexibility_matrix_exact(fw: &Framework) -> Result<Vec<Vec<BigRational>>> {
    let r = fw
        .curve
        .as_rational()
        .ok_or_else(|| Error::ExactnessUnavailable("exact matrix needs a rational curve".into()))?;
    let jets: Vec<Vec<Vec<BigRational>>> = fw
        .embedding
        .iter()
        .map(|p| {
            let t = p
                .as_exact()
                .ok_or_else(|| Error::ExactnessUnavailable(format!("parameter {p} is not rational")))?;
            r.jet_exact(t, 1)
        })
        .collect::<Result<_>>()?;
    let v = fw.vertex_count();
    let dotq = |a: &[BigRational], b: &[BigRational]| a.iter().zip(b).fold(BigRational::zero(), |s, (x, y)| s + x * y);
    fw.edges
        .iter()
        .map(|&(a, b)| {
            let (dx, dy) = fw.quantity.grad(&jets[a][0], &jets[b][0])?;
            let mut row = vec![BigRational::zero(); v];
            row[a] = dotq(&jets[a][1], &dx);
            row[b] = dotq(&jets[b][1], &dy);
            Ok(row)
        })
        .collect()
}

/// Basis of the exact kernel of the flexibility matrix.
pub fn exact_kernel(fw: &Framework) -> Result<Vec<Vec<BigRational>>> {
    Ok(kernel_basis(&flexibility_matrix_exact(fw)?, fw.vertex_count()))
}

fn integer_rows(m: &[Vec<BigRational>]) -> Vec<Vec<BigInt>> {
    m.iter()
        .map(|row| {
            let l = row.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
            row.iter()
                .map(|c| (c * BigRational::from_integer(l.clone())).to_integer())
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlexibilityResult {
    pub rows: usize,
    pub cols: usize,
    pub numerical_nullity: usize,
    pub exact_nullity: Option<usize>,
    pub singular_values: Vec<f64>,
    pub tol: f64,
    /// Whether both paths ran and agree.
    pub paths_agree: Option<bool>,
    pub flexible: bool,
}

/// Nullity from singular values (`σ > tol σ_max` counts toward the rank)
/// and, for exact data, from fraction-free elimination.
pub fn infinitesimal_nullity(fw: &Framework, tol: f64) -> Result<FlexibilityResult> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::invalid("nullity tolerance must lie in (0, 1)"));
    }
    let m = flexibility_matrix(fw)?;
    let (rows, cols) = (m.len(), fw.vertex_count());
    let mut singular_values = if rows == 0 || cols == 0 {
        Vec::new()
    } else {
        DMatrix::from_fn(rows, cols, |i, j| m[i][j])
            .singular_values()
            .iter()
            .copied()
            .collect::<Vec<_>>()
    };
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let smax = singular_values.first().copied().unwrap_or(0.0);
    let rank = singular_values.iter().filter(|&&s| s > tol * smax && s > 0.0).count();
    let numerical_nullity = cols - rank;
    let exact_nullity = if fw.is_exact() {
        Some(cols - bareiss_rank(integer_rows(&flexibility_matrix_exact(fw)?)))
    } else {
        None
    };
    let nullity = exact_nullity.unwrap_or(numerical_nullity);
    Ok(FlexibilityResult {
        rows,
        cols,
        numerical_nullity,
        exact_nullity,
        singular_values,
        tol,
        paths_agree: exact_nullity.map(|e| e == numerical_nullity),
        flexible: nullity >= 1,
    })
}

struct HFactors {
    num: [f64; 2],
    den: [f64; 2],
}

fn h_factors(curve: &CurveSpec, q: &QuantitySpec, alpha: f64, beta: f64, tau: f64) -> Result<HFactors> {
    let (ga, va) = curve.point_and_tangent(alpha)?;
    let (gb, vb) = curve.point_and_tangent(beta)?;
    let (gt, vt) = curve.point_and_tangent(tau)?;
    let (dx_ta, dy_ta) = q.grad_f64(&gt, &ga)?;
    let (dx_tb, dy_tb) = q.grad_f64(&gt, &gb)?;
    Ok(HFactors {
        num: [dot(&vb, &dy_tb), dot(&vt, &dx_ta)],
        den: [dot(&va, &dy_ta), dot(&vt, &dx_tb)],
    })
}

/// Value of `H_αβ` at `τ = α` or `τ = β`:
/// `-(γ'β · D_Y(γα, γβ)) / (γ'α · D_X(γα, γβ))`.
///
/// The vanishing factors pair up as `∂_τ D(γτ, γα)` against `∂_α D(γτ, γα)`,
/// whose ratio tends to `-1` for any symmetric `D` vanishing on the
/// diagonal; the same holds at `τ = β`.
pub fn removable_h(curve: &CurveSpec, q: &QuantitySpec, alpha: f64, beta: f64) -> Result<f64> {
    let (ga, va) = curve.point_and_tangent(alpha)?;
    let (gb, vb) = curve.point_and_tangent(beta)?;
    let (dx, dy) = q.grad_f64(&ga, &gb)?;
    let den = dot(&va, &dx);
    if den.abs() < SINGULAR_FACTOR {
        return Err(Error::SingularH {
            tau: alpha,
            factor: den,
        });
    }
    Ok(-dot(&vb, &dy) / den)
}

fn raw_h(curve: &CurveSpec, q: &QuantitySpec, alpha: f64, beta: f64, tau: f64) -> Result<f64> {
    let f = h_factors(curve, q, alpha, beta, tau)?;
    for d in f.den {
        if d.abs() < SINGULAR_FACTOR {
            return Err(Error::SingularH { tau, factor: d });
        }
    }
    Ok(f.num[0] * f.num[1] / (f.den[0] * f.den[1]))
}

/// `H_αβ(τ) = (γ'β·D_Y(γτ,γβ))(γ'τ·D_X(γτ,γα)) / ((γ'α·D_Y(γτ,γα))(γ'τ·D_X(γτ,γβ)))`.
///
/// Within [`REMOVABLE_WINDOW`] of `α` or `β` the value is interpolated
/// linearly between [`removable_h`] and `H` at the window edge.
pub fn eval_h(curve: &CurveSpec, q: &QuantitySpec, alpha: f64, beta: f64, tau: f64) -> Result<f64> {
    if alpha == beta {
        return Err(Error::invalid("H needs alpha != beta"));
    }
    curve.domain().check(tau)?;
    for center in [alpha, beta] {
        let off = tau - center;
        if off.abs() < REMOVABLE_WINDOW {
            let h0 = removable_h(curve, q, alpha, beta)?;
            if off == 0.0 {
                return Ok(h0);
            }
            let edge = center + REMOVABLE_WINDOW.copysign(off);
            let h1 = raw_h(curve, q, alpha, beta, edge)?;
            return Ok(h0 + (h1 - h0) * off.abs() / REMOVABLE_WINDOW);
        }
    }
    raw_h(curve, q, alpha, beta, tau)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegeneracyWitness {
    pub alpha: f64,
    pub beta: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub h1: f64,
    pub h2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairScan {
    pub alpha: f64,
    pub beta: f64,
    pub variation: f64,
    /// Sign changes of the discrete derivative of `H` along the `τ` grid.
    pub sign_changes: usize,
    pub singular_skipped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegeneracyReport {
    pub is_degenerate_candidate: bool,
    pub max_h_variation: f64,
    pub witness: Option<DegeneracyWitness>,
    pub tol: f64,
    pub window: (f64, f64),
    pub pairs: Vec<PairScan>,
}

/// Chebyshev nodes on `(lo, hi)`, ascending.
fn chebyshev(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (c, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    (0..n)
        .rev()
        .map(|k| c + r * ((2 * k + 1) as f64 * PI / (2 * n) as f64).cos())
        .collect()
}

/// Samples `m` pairs `(α, β)` and measures the relative variation
/// `(max H - min H) / max |H|` of `H_αβ` over `n` Chebyshev nodes of the
/// domain window.
pub fn scan_t_degeneracy(
    curve: &CurveSpec,
    q: &QuantitySpec,
    m: usize,
    n: usize,
    tol: f64,
    seed: u64,
) -> Result<DegeneracyReport> {
    if m < 8 || n < 64 {
        return Err(Error::invalid("degeneracy scan needs m >= 8 pairs and n >= 64 nodes"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let (lo, hi) = curve.domain().window();
    let width = hi - lo;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(m);
    while pairs.len() < m {
        let a = lo + width * rng.gen_range(0.02..0.98);
        let b = lo + width * rng.gen_range(0.02..0.98);
        if (a - b).abs() >= 0.1 * width {
            pairs.push((a, b));
        }
    }
    let taus = chebyshev(lo, hi, n);
    let scans: Vec<(PairScan, Option<DegeneracyWitness>)> = pairs
        .par_iter()
        .map(|&(alpha, beta)| {
            let mut vals = Vec::with_capacity(n);
            let mut skipped = 0;
            for &t in &taus {
                match eval_h(curve, q, alpha, beta, t) {
                    Ok(h) if h.is_finite() => vals.push((t, h)),
                    Ok(_) | Err(Error::SingularH { .. }) => skipped += 1,
                    Err(e) => return Err(e),
                }
            }
            let scan = |variation, sign_changes| PairScan {
                alpha,
                beta,
                variation,
                sign_changes,
                singular_skipped: skipped,
            };
            if vals.is_empty() {
                return Ok((scan(f64::NAN, 0), None));
            }
            let (imin, imax) = vals.iter().enumerate().fold((0, 0), |(a, b), (i, v)| {
                (if v.1 < vals[a].1 { i } else { a }, if v.1 > vals[b].1 { i } else { b })
            });
            let scale = vals.iter().fold(0.0f64, |s, v| s.max(v.1.abs()));
            let variation = if scale > 0.0 { (vals[imax].1 - vals[imin].1) / scale } else { 0.0 };
            let diffs: Vec<f64> = vals
                .windows(2)
                .map(|w| w[1].1 - w[0].1)
                .filter(|d| d.abs() > 1e-12 * scale)
                .collect();
            let sign_changes = diffs.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
            let witness = DegeneracyWitness {
                alpha,
                beta,
                tau1: vals[imin].0,
                tau2: vals[imax].0,
                h1: vals[imin].1,
                h2: vals[imax].1,
            };
            Ok((scan(variation, sign_changes), Some(witness)))
        })
        .collect::<Result<_>>()?;
    let best = scans
        .iter()
        .enumerate()
        .filter(|(_, s)| !s.0.variation.is_nan())
        .fold(None::<usize>, |b, (i, s)| match b {
            Some(j) if scans[j].0.variation >= s.0.variation => Some(j),
            _ => Some(i),
        });
    let max_h_variation = best.map_or(f64::NAN, |i| scans[i].0.variation);
    let is_degenerate_candidate = max_h_variation < tol;
    Ok(DegeneracyReport {
        is_degenerate_candidate,
        max_h_variation,
        witness: if is_degenerate_candidate {
            None
        } else {
            best.and_then(|i| scans[i].1.clone())
        },
        tol,
        window: (lo, hi),
        pairs: scans.into_iter().map(|s| s.0).collect(),
    })
}

/// Exact kernel vectors as `"p/q"` strings.
pub fn kernel_to_strings(k: &[Vec<BigRational>]) -> Vec<Vec<String>> {
    k.iter().map(|v| v.iter().map(ToString::to_string).collect()).collect()
}

/// Normalizes a rational vector so its first nonzero entry is 1.
pub fn normalize_vector(v: &[BigRational]) -> Vec<BigRational> {
    match v.iter().find(|c| !c.is_zero()) {
        Some(lead) => {
            let lead = lead.clone();
            v.iter().map(|c| c / &lead).collect()
        }
        None => v.to_vec(),
    }
}
