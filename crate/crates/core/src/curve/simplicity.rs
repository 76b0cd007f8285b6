use rayon::prelude::*;
use serde::Serialize;

use super::{norm, CurveSpec};
use crate::error::{Error, Result};
use crate::quantity::QuantitySpec;

/// Sampled `(alpha, beta)` positions for the two-distance injectivity check,
/// as fractions of the sampling window.
const PAIR_FRACTIONS: [(f64, f64); 8] = [
    (0.1, 0.9),
    (0.25, 0.6),
    (0.4, 0.75),
    (0.05, 0.5),
    (0.3, 0.35),
    (0.55, 0.95),
    (0.7, 0.2),
    (0.15, 0.45),
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub params: Vec<f64>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition: usize,
    pub name: String,
    pub passed: bool,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimplicityReport {
    pub grid: usize,
    pub tol: f64,
    pub conditions: Vec<ConditionReport>,
}

impl SimplicityReport {
    pub fn all_passed(&self) -> bool {
        self.conditions.iter().all(|c| c.passed)
    }

    /// Report for condition `k` (1-based).
    pub fn condition(&self, k: usize) -> &ConditionReport {
        &self.conditions[k - 1]
    }

    pub fn failed(&self) -> Vec<usize> {
        self.conditions.iter().filter(|c| !c.passed).map(|c| c.condition).collect()
    }
}

fn report(condition: usize, name: &str, witness: Option<Witness>) -> ConditionReport {
    ConditionReport {
        condition,
        name: name.to_string(),
        passed: witness.is_none(),
        witness,
    }
}

fn witness(params: Vec<f64>, detail: impl Into<String>) -> Witness {
    Witness {
        params,
        detail: detail.into(),
    }
}

/// Grid-sampled check of the five regularity conditions for the pair
/// `(quantity, curve)`: injectivity and regularity, non-vanishing second
/// derivative, the distance-polynomial axioms, injectivity of
/// `t -> (D(γt, γα), D(γt, γβ))`, and the submersion condition.
///
/// Conditions 3 to 5 compare against `tol` times the largest sampled
/// magnitude of the quantity involved. A failure carries a witness; a pass
/// is only sampling evidence.
pub fn check_simplicity(curve: &CurveSpec, quantity: &QuantitySpec, n: usize, tol: f64) -> Result<SimplicityReport> {
    if n < 32 {
        return Err(Error::invalid("simplicity grid needs n >= 32"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    if quantity.dim() != curve.dim() {
        return Err(Error::DimensionMismatch {
            expected: curve.dim(),
            got: quantity.dim(),
        });
    }
    let ts = curve.domain().grid(n);
    let jets = ts
        .iter()
        .map(|&t| curve.jet_f64(t, 2))
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<&Vec<f64>> = jets.iter().map(|j| &j[0]).collect();

    let c1 = {
        let diam = pts
            .iter()
            .flat_map(|p| pts.iter().map(move |q| dist(p, q)))
            .fold(0.0, f64::max);
        let stall = jets
            .iter()
            .zip(&ts)
            .find(|(j, _)| norm(&j[1]) <= tol)
            .map(|(j, &t)| witness(vec![t], format!("|γ'| = {:e}", norm(&j[1]))));
        stall.or_else(|| {
            (0..n).into_par_iter().find_map_first(|i| {
                (i + 1..n).find_map(|j| {
                    let d = dist(pts[i], pts[j]);
                    (d <= tol * diam).then(|| witness(vec![ts[i], ts[j]], format!("|γ(s) - γ(t)| = {d:e}")))
                })
            })
        })
    };

    let c2 = jets
        .iter()
        .all(|j| norm(&j[2]) < tol)
        .then(|| witness(vec![], "γ̈ ≡ 0 on the grid"));

    let dvals: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| quantity.eval_f64(pts[i], pts[j])).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let dscale = dvals.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));

    let c3 = (0..n).into_par_iter().find_map_first(|i| {
        let dii = dvals[i][i];
        if dii.abs() > tol * dscale {
            return Some(witness(vec![ts[i], ts[i]], format!("D(γt, γt) = {dii:e}")));
        }
        (i + 1..n).find_map(|j| {
            let (a, b) = (dvals[i][j], dvals[j][i]);
            if (a - b).abs() > tol * dscale.max(f64::MIN_POSITIVE) {
                Some(witness(vec![ts[i], ts[j]], format!("asymmetric: {a:e} vs {b:e}")))
            } else if a.abs() <= tol * dscale {
                Some(witness(vec![ts[i], ts[j]], format!("D vanishes off the diagonal: {a:e}")))
            } else {
                None
            }
        })
    });

    let (lo, hi) = curve.domain().window();
    let mut c4 = None;
    for (fa, fb) in PAIR_FRACTIONS {
        let (alpha, beta) = (lo + fa * (hi - lo), lo + fb * (hi - lo));
        let (pa, pb) = (curve.eval_f64(alpha)?, curve.eval_f64(beta)?);
        let img: Vec<(f64, f64)> = pts
            .iter()
            .map(|p| Ok((quantity.eval_f64(p, &pa)?, quantity.eval_f64(p, &pb)?)))
            .collect::<Result<_>>()?;
        let scale = img.iter().fold(0.0f64, |m, (x, y)| m.max(x.abs()).max(y.abs()));
        c4 = (0..n).into_par_iter().find_map_first(|i| {
            (i + 1..n).find_map(|j| {
                let close = (img[i].0 - img[j].0).abs() <= tol * scale && (img[i].1 - img[j].1).abs() <= tol * scale;
                close.then(|| {
                    witness(
                        vec![alpha, beta, ts[i], ts[j]],
                        "two parameters share both distances to γα and γβ",
                    )
                })
            })
        });
        if c4.is_some() {
            break;
        }
    }

    let grads: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        return Ok(f64::NAN);
                    }
                    let (dx, dy) = quantity.grad_f64(pts[i], pts[j])?;
                    let ga = super::dot(&jets[i][1], &dx);
                    let gb = super::dot(&jets[j][1], &dy);
                    Ok(ga.hypot(gb))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let gscale = grads.iter().flatten().filter(|g| !g.is_nan()).fold(0.0f64, |m, &g| m.max(g));
    let c5 = (0..n).into_par_iter().find_map_first(|i| {
        (0..n).find_map(|j| {
            let g = grads[i][j];
            (i != j && g <= tol * gscale).then(|| witness(vec![ts[i], ts[j]], format!("|∇D| = {g:e}")))
        })
    });

    Ok(SimplicityReport {
        grid: n,
        tol,
        conditions: vec![
            report(1, "injective and regular", c1),
            report(2, "second derivative not identically zero", c2),
            report(3, "distance-polynomial axioms", c3),
            report(4, "two-distance injectivity", c4),
            report(5, "submersion", c5),
        ],
    })
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{builtin, Domain};
    use num::BigRational;

    #[test]
    fn line_fails_condition_two() {
        let r = check_simplicity(&builtin("line").unwrap(), &QuantitySpec::squared_euclidean(2), 64, 1e-9).unwrap();
        assert_eq!(r.failed(), vec![2]);
        assert_eq!(r.condition(2).witness.as_ref().unwrap().detail, "γ̈ ≡ 0 on the grid");
    }

    #[test]
    fn parabola_is_simple() {
        let c = builtin("parabola").unwrap().with_domain(Domain::new(0.0, 1.0).unwrap()).unwrap();
        let r = check_simplicity(&c, &QuantitySpec::squared_euclidean(2), 256, 1e-9).unwrap();
        assert!(r.all_passed(), "{r:?}");
    }

    #[test]
    fn parabola_pinned_area_off_origin() {
        let c = builtin("parabola").unwrap().with_domain(Domain::new(0.1, 1.0).unwrap()).unwrap();
        let q = QuantitySpec::pinned_area([BigRational::from_integer(0.into()), BigRational::from_integer(0.into())]);
        let r = check_simplicity(&c, &q, 256, 1e-9).unwrap();
        assert!(r.all_passed(), "{r:?}");
    }

    #[test]
    fn full_circle_has_antipodal_critical_pairs() {
        let r = check_simplicity(&builtin("unit_circle").unwrap(), &QuantitySpec::squared_euclidean(2), 64, 1e-9).unwrap();
        assert!(!r.condition(5).passed);
        let w = &r.condition(5).witness.as_ref().unwrap().params;
        assert!(((w[0] - w[1]).abs() - std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn small_grid_is_rejected() {
        assert!(check_simplicity(&builtin("parabola").unwrap(), &QuantitySpec::squared_euclidean(2), 16, 1e-9).is_err());
    }
}
