//! Point sets on curves, counting distinct values of `D` over pairs, growth
//! exponent fits, and the incidence-based lower bound on the number of
//! distinct values.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num::{BigInt, BigRational, One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::curve::CurveSpec;
use crate::error::{Error, Result};
use crate::param::{Param, Point};
use crate::quantity::QuantitySpec;

/// Absolute floor under the relative merge gap.
const ABS_EPS: f64 = 1e-300;

/// Denominator of random rational parameters.
const RANDOM_DENOM_BITS: u32 = 32;

#[derive(Clone, Debug, PartialEq)]
pub enum Scheme {
    Arithmetic { start: Param, step: Param, n: usize },
    Geometric { start: Param, ratio: Param, n: usize },
    UniformRandom { seed: u64, n: usize },
    EquallySpacedAngle { n: usize },
}

impl Scheme {
    pub fn len(&self) -> usize {
        match self {
            Scheme::Arithmetic { n, .. }
            | Scheme::Geometric { n, .. }
            | Scheme::UniformRandom { n, .. }
            | Scheme::EquallySpacedAngle { n } => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Same scheme with `n` points.
    pub fn with_len(&self, n: usize) -> Scheme {
        let mut s = self.clone();
        match &mut s {
            Scheme::Arithmetic { n: m, .. }
            | Scheme::Geometric { n: m, .. }
            | Scheme::UniformRandom { n: m, .. }
            | Scheme::EquallySpacedAngle { n: m } => *m = n,
        }
        s
    }
}

/// `arith:start:step:N`, `geom:start:ratio:N`, `random:seed:N`, `angle:N`.
impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let int = |x: &str| {
            x.parse::<usize>()
                .map_err(|_| Error::invalid(format!("bad count {x:?} in scheme {s:?}")))
        };
        match parts.as_slice() {
            ["arith", a, b, n] => Ok(Scheme::Arithmetic {
                start: a.parse()?,
                step: b.parse()?,
                n: int(n)?,
            }),
            ["geom", a, r, n] => Ok(Scheme::Geometric {
                start: a.parse()?,
                ratio: r.parse()?,
                n: int(n)?,
            }),
            ["random", seed, n] => Ok(Scheme::UniformRandom {
                seed: seed
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad seed {seed:?}")))?,
                n: int(n)?,
            }),
            ["angle", n] => Ok(Scheme::EquallySpacedAngle { n: int(n)? }),
            _ => Err(Error::invalid(format!(
                "unknown scheme {s:?} (expected arith:a:h:N, geom:a:r:N, random:seed:N or angle:N)"
            ))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Arithmetic { start, step, n } => write!(f, "arith:{start}:{step}:{n}"),
            Scheme::Geometric { start, ratio, n } => write!(f, "geom:{start}:{ratio}:{n}"),
            Scheme::UniformRandom { seed, n } => write!(f, "random:{seed}:{n}"),
            Scheme::EquallySpacedAngle { n } => write!(f, "angle:{n}"),
        }
    }
}

/// Distinct parameters on one curve, kept sorted.
#[derive(Clone, Debug)]
pub struct ParamPointSet {
    curve: CurveSpec,
    params: Vec<Param>,
    label: String,
}

impl ParamPointSet {
    /// Sorts `params` and checks they are distinct and inside the domain.
    pub fn new(curve: CurveSpec, mut params: Vec<Param>, label: impl Into<String>) -> Result<Self> {
        params.sort_by(|a, b| a.cmp_value(b));
        let domain = curve.domain();
        for p in &params {
            let inside = match p {
                Param::Exact(q) => domain.contains_exact(q),
                Param::Float(x) => domain.contains(*x),
            };
            if !inside {
                return Err(Error::Domain {
                    t: p.to_f64(),
                    lo: domain.lo,
                    hi: domain.hi,
                });
            }
        }
        if let Some(w) = params.windows(2).find(|w| w[0].cmp_value(&w[1]).is_eq()) {
            return Err(Error::invalid(format!("repeated parameter {}", w[0])));
        }
        Ok(ParamPointSet {
            curve,
            params,
            label: label.into(),
        })
    }

    pub fn curve(&self) -> &CurveSpec {
        &self.curve
    }

    pub fn params(&self) -> &[Param] {
        &self.params
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// True when every parameter is exact and the curve is rational.
    pub fn is_exact(&self) -> bool {
        self.curve.as_rational().is_some() && self.params.iter().all(Param::is_exact)
    }

    pub fn points(&self) -> Result<Vec<Point>> {
        self.params.iter().map(|p| self.curve.evaluate(p)).collect()
    }

    pub fn points_f64(&self) -> Result<Vec<Vec<f64>>> {
        self.params.iter().map(|p| self.curve.eval_f64(p.to_f64())).collect()
    }

    /// Same set plus one more parameter.
    pub fn with_param(&self, p: Param) -> Result<Self> {
        let mut params = self.params.clone();
        params.push(p);
        Self::new(self.curve.clone(), params, self.label.clone())
    }
}

/// Builds `N` parameters following `scheme`; every parameter must lie in
/// the curve domain.
pub fn generate_point_set(curve: &CurveSpec, scheme: &Scheme) -> Result<ParamPointSet> {
    let n = scheme.len();
    if n < 2 {
        return Err(Error::invalid("a point set needs N >= 2"));
    }
    let params = match scheme {
        Scheme::Arithmetic { start, step, .. } => {
            if step.to_f64() == 0.0 {
                return Err(Error::invalid("arithmetic step must be nonzero"));
            }
            let mut v = vec![start.clone()];
            for _ in 1..n {
                v.push(v.last().unwrap().add(step));
            }
            v
        }
        Scheme::Geometric { start, ratio, .. } => {
            let r = ratio.to_f64();
            if start.to_f64() == 0.0 || !(r > 0.0) || r == 1.0 {
                return Err(Error::invalid("geometric progression needs start != 0 and ratio > 0, != 1"));
            }
            let mut v = vec![start.clone()];
            for _ in 1..n {
                v.push(v.last().unwrap().mul(ratio));
            }
            v
        }
        Scheme::UniformRandom { seed, .. } => {
            let (lo, hi) = curve.domain().window();
            let lo_q = BigRational::from_float(lo).unwrap();
            let width = BigRational::from_float(hi).unwrap() - &lo_q;
            let denom = BigInt::one() << RANDOM_DENOM_BITS;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut seen = std::collections::HashSet::new();
            let mut v = Vec::with_capacity(n);
            while v.len() < n {
                let k: u64 = rng.gen_range(1..(1u64 << RANDOM_DENOM_BITS));
                if seen.insert(k) {
                    let u = BigRational::new(BigInt::from(k), denom.clone());
                    v.push(Param::Exact(&lo_q + &width * u));
                }
                if seen.len() as u64 >= (1u64 << RANDOM_DENOM_BITS) - 1 {
                    return Err(Error::invalid("cannot draw that many distinct parameters"));
                }
            }
            v
        }
        Scheme::EquallySpacedAngle { .. } => {
            let h = curve
                .as_helix()
                .filter(|h| h.is_circle())
                .ok_or_else(|| Error::SchemeMismatch("equally spaced angles need a circle (helix with k = 1, l = 0)".into()))?;
            let period = 2.0 * PI / h.freqs()[0].abs();
            let d = curve.domain();
            let start = if d.lo.is_finite() {
                d.lo
            } else if d.hi.is_finite() {
                d.hi - period
            } else {
                0.0
            };
            if d.is_bounded() && d.hi - d.lo < period * (1.0 - 1e-12) {
                return Err(Error::Domain {
                    t: start + period,
                    lo: d.lo,
                    hi: d.hi,
                });
            }
            (0..n)
                .map(|k| Param::Float(start + (k as f64 + 0.5) * period / n as f64))
                .collect()
        }
    };
    ParamPointSet::new(curve.clone(), params, scheme.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CountMode {
    Exact,
    Tolerance(f64),
}

/// `exact` or `tol:<rel_eps>`.
impl FromStr for CountMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exact" => Ok(CountMode::Exact),
            other => other
                .strip_prefix("tol:")
                .and_then(|e| e.parse::<f64>().ok())
                .filter(|&e| e > 0.0)
                .map(CountMode::Tolerance)
                .ok_or_else(|| Error::invalid(format!("bad mode {s:?} (expected exact or tol:<eps>)"))),
        }
    }
}

impl fmt::Display for CountMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CountMode::Exact => write!(f, "exact"),
            CountMode::Tolerance(e) => write!(f, "tol:{e:e}"),
        }
    }
}

/// Number of distinct values over unordered pairs of distinct points, with
/// a summary of the value multiset.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountResult {
    pub n: usize,
    pub count: usize,
    pub pairs: usize,
    pub min: f64,
    pub max: f64,
    pub max_multiplicity: usize,
    pub mode: String,
}

/// Counts `|{D(p, r) : p != r in P}|`; the zero value of the diagonal is
/// not included.
pub fn count_distinct_values(pset: &ParamPointSet, q: &QuantitySpec, mode: CountMode) -> Result<CountResult> {
    let n = pset.len();
    let pairs = n * n.saturating_sub(1) / 2;
    let (count, min, max, max_multiplicity) = match mode {
        CountMode::Exact => {
            if !pset.is_exact() {
                return Err(Error::ExactnessUnavailable(
                    "exact counting needs a rational curve and rational parameters".into(),
                ));
            }
            let pts: Vec<Vec<BigRational>> = pset
                .points()?
                .into_iter()
                .map(|p| p.as_exact().unwrap().to_vec())
                .collect();
            let hist = (0..n)
                .into_par_iter()
                .map(|i| {
                    let mut h: HashMap<BigRational, usize> = HashMap::new();
                    for j in i + 1..n {
                        *h.entry(q.eval(&pts[i], &pts[j])?).or_default() += 1;
                    }
                    Ok(h)
                })
                .try_reduce(HashMap::new, |mut a, b| {
                    for (k, v) in b {
                        *a.entry(k).or_default() += v;
                    }
                    Ok(a)
                })?;
            let min = hist.keys().min().map_or(f64::NAN, |v| v.to_f64().unwrap_or(f64::NAN));
            let max = hist.keys().max().map_or(f64::NAN, |v| v.to_f64().unwrap_or(f64::NAN));
            (hist.len(), min, max, hist.values().copied().max().unwrap_or(0))
        }
        CountMode::Tolerance(eps) => {
            if !(eps > 0.0) {
                return Err(Error::invalid("rel_eps must be positive"));
            }
            let pts = pset.points_f64()?;
            let mut vals: Vec<f64> = (0..n)
                .into_par_iter()
                .flat_map_iter(|i| {
                    let pts = &pts;
                    (i + 1..n).map(move |j| q.eval_f64(&pts[i], &pts[j]))
                })
                .collect::<Result<_>>()?;
            vals.par_sort_unstable_by(f64::total_cmp);
            let (count, mult) = merge_runs(&vals, eps);
            (
                count,
                vals.first().copied().unwrap_or(f64::NAN),
                vals.last().copied().unwrap_or(f64::NAN),
                mult,
            )
        }
    };
    Ok(CountResult {
        n,
        count,
        pairs,
        min,
        max,
        max_multiplicity,
        mode: mode.to_string(),
    })
}

/// Groups a sorted slice into runs whose consecutive gaps are within
/// `eps * max(|a|, |b|)`; returns the number of runs and the longest run.
fn merge_runs(sorted: &[f64], eps: f64) -> (usize, usize) {
    if sorted.is_empty() {
        return (0, 0);
    }
    let (mut count, mut run, mut longest) = (1, 1, 1);
    for w in sorted.windows(2) {
        let gap = w[1] - w[0];
        if gap <= (eps * w[0].abs().max(w[1].abs())).max(ABS_EPS) {
            run += 1;
        } else {
            count += 1;
            run = 1;
        }
        longest = longest.max(run);
    }
    (count, longest)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    pub samples: Vec<(usize, usize)>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares fit of `ln count` against `ln N`.
pub fn fit_exponent(samples: &[(usize, usize)]) -> Result<ExponentFit> {
    let increasing = samples.windows(2).all(|w| w[0].0 < w[1].0);
    if samples.len() < 3 || !increasing {
        return Err(Error::InsufficientSamples(samples.len()));
    }
    if samples.iter().any(|&(n, c)| n == 0 || c == 0) {
        return Err(Error::invalid("sizes and counts must be positive"));
    }
    let xs: Vec<f64> = samples.iter().map(|s| (s.0 as f64).ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| (s.1 as f64).ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(ExponentFit {
        samples: samples.to_vec(),
        slope,
        intercept,
        r_squared,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowerBound {
    pub delta: f64,
    /// Set when `Δ = 1` already satisfies the incidence inequality.
    pub trivial: bool,
    pub incidences: f64,
    pub admissibility: f64,
    pub incidence_constant: f64,
}

/// Smallest `Δ >= 1` with `(NP - 2) NXi <= K (NXi^(2/3) Δ^(4/3) + NXi + Δ^2)`:
/// `NXi` Elekes curves each meet `NP - 2` points of the grid `Δ x Δ`. The
/// admissibility constant `c` is validated and echoed; its effect is
/// already absorbed into `k`.
pub fn elekes_lower_bound(np: u64, nxi: u64, c: f64, k: f64) -> Result<LowerBound> {
    if np < 3 || nxi < 1 {
        return Err(Error::invalid("need NP >= 3 and NXi >= 1"));
    }
    if !(c >= 1.0) || !(k > 0.0) || !c.is_finite() || !k.is_finite() {
        return Err(Error::invalid("need C >= 1 and K > 0"));
    }
    let incidences = (np - 2) as f64 * nxi as f64;
    let curves = nxi as f64;
    let rhs = |d: f64| k * (curves.powf(2.0 / 3.0) * d.powf(4.0 / 3.0) + curves + d * d);
    let bound = |delta, trivial| LowerBound {
        delta,
        trivial,
        incidences,
        admissibility: c,
        incidence_constant: k,
    };
    if rhs(1.0) >= incidences {
        return Ok(bound(1.0, true));
    }
    let (mut lo, mut hi) = (1.0, 2.0);
    while rhs(hi) < incidences {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if rhs(mid) >= incidences {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(bound(hi, false))
}
