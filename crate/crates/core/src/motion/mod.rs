//! Finite motions of frameworks along a curve by Newton continuation, and
//! helix detection from derivative norms or declared frequencies.

mod helix;

use std::collections::VecDeque;

use serde::Serialize;

use crate::curve::{dot, CurveSpec};
use crate::error::{Error, Result};
use crate::quantity::QuantitySpec;
use crate::rigidity::{eval_h, Framework};

pub use helix::{classify_helix, derivative_norm_profile, DerivativeNormProfile, HelixClassification, RatioCertificate};

/// Relative residual accepted on a propagated constraint.
pub const NEWTON_TOL: f64 = 1e-12;

const NEWTON_MAX_ITER: usize = 50;

/// Maximum recursive step halvings before a trace aborts.
pub const MAX_HALVINGS: u32 = 10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OdeSample {
    pub step: usize,
    pub driver: f64,
    /// Central difference of the constrained partner's path.
    pub beta_prime: f64,
    pub inverse_h: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct MotionTrace {
    pub driver: usize,
    /// Driver parameter at every recorded step.
    pub steps: Vec<f64>,
    /// `paths[v][k]` is the parameter of vertex `v` at step `k`.
    pub paths: Vec<Vec<f64>>,
    pub edges: Vec<(usize, usize)>,
    /// Whether an edge defines a vertex in the propagation tree.
    pub defining: Vec<bool>,
    pub edge_targets: Vec<f64>,
    /// Largest relative deviation `|D - D_0| / |D_0|` per edge.
    pub max_drift: Vec<f64>,
    pub newton_iterations: usize,
    pub newton_failures: usize,
    pub ode_check: Vec<OdeSample>,
}

impl MotionTrace {
    /// Largest drift over the monitored (non-defining) edges.
    pub fn monitored_drift(&self) -> f64 {
        self.max_drift
            .iter()
            .zip(&self.defining)
            .filter(|(_, &d)| !d)
            .fold(0.0, |m, (&v, _)| m.max(v))
    }

    pub fn max_ode_error(&self) -> f64 {
        self.ode_check
            .iter()
            .fold(0.0, |m, s| m.max((s.beta_prime - s.inverse_h).abs()))
    }
}

/// One propagated vertex: solve `D(γ(anchor), γ(x)) = target` for `x`.
#[derive(Clone, Copy, Debug)]
struct Constraint {
    vertex: usize,
    anchor: usize,
    target: f64,
}

/// Newton on `x -> D(γ a, γ x) - target`, started at `x0`.
fn solve_partner(curve: &CurveSpec, q: &QuantitySpec, anchor: f64, target: f64, x0: f64) -> Result<Option<(f64, usize)>> {
    let pa = curve.eval_f64(anchor)?;
    let mut x = x0;
    let scale = target.abs().max(f64::MIN_POSITIVE);
    for it in 1..=NEWTON_MAX_ITER {
        if !curve.domain().contains(x) {
            return Ok(None);
        }
        let (px, vx) = curve.point_and_tangent(x)?;
        let r = q.eval_f64(&pa, &px)? - target;
        if r.abs() <= NEWTON_TOL * scale {
            return Ok(Some((x, it)));
        }
        let (_, dy) = q.grad_f64(&pa, &px)?;
        let slope = dot(&vx, &dy);
        if slope == 0.0 || !slope.is_finite() {
            return Ok(None);
        }
        x -= r / slope;
    }
    Ok(None)
}

enum Advance {
    Done(Vec<f64>),
    Diverged,
    Exited,
}

struct Tracer<'a> {
    curve: &'a CurveSpec,
    q: &'a QuantitySpec,
    driver: usize,
    order: Vec<Constraint>,
    iterations: usize,
    halvings: usize,
}

impl Tracer<'_> {
    fn try_step(&mut self, state: &[f64], delta: f64) -> Result<Advance> {
        let mut next = state.to_vec();
        next[self.driver] += delta;
        if !self.curve.domain().contains(next[self.driver]) {
            return Ok(Advance::Exited);
        }
        for c in &self.order {
            match solve_partner(self.curve, self.q, next[c.anchor], c.target, state[c.vertex])? {
                Some((x, it)) => {
                    self.iterations += it;
                    next[c.vertex] = x;
                }
                None => return Ok(Advance::Diverged),
            }
        }
        Ok(Advance::Done(next))
    }

    /// Advances by `delta`, halving recursively on Newton failure.
    fn advance(&mut self, state: &[f64], delta: f64, depth: u32) -> Result<Advance> {
        match self.try_step(state, delta)? {
            Advance::Diverged if depth < MAX_HALVINGS => {
                self.halvings += 1;
                let mid = match self.advance(state, 0.5 * delta, depth + 1)? {
                    Advance::Done(s) => s,
                    other => return Ok(other),
                };
                self.advance(&mid, 0.5 * delta, depth + 1)
            }
            other => Ok(other),
        }
    }
}

fn record(trace: &mut MotionTrace, curve: &CurveSpec, q: &QuantitySpec, state: &[f64]) -> Result<()> {
    trace.steps.push(state[trace.driver]);
    for (path, &x) in trace.paths.iter_mut().zip(state) {
        path.push(x);
    }
    let pts: Vec<Vec<f64>> = state.iter().map(|&x| curve.eval_f64(x)).collect::<Result<_>>()?;
    for (k, &(a, b)) in trace.edges.iter().enumerate() {
        let d = q.eval_f64(&pts[a], &pts[b])?;
        let t = trace.edge_targets[k];
        let drift = (d - t).abs() / t.abs().max(f64::MIN_POSITIVE);
        trace.max_drift[k] = trace.max_drift[k].max(drift);
    }
    Ok(())
}

fn run(
    curve: &CurveSpec,
    q: &QuantitySpec,
    start: Vec<f64>,
    edges: Vec<(usize, usize)>,
    driver: usize,
    order: Vec<Constraint>,
    delta: f64,
    steps: usize,
) -> Result<MotionTrace> {
    let pts: Vec<Vec<f64>> = start.iter().map(|&x| curve.eval_f64(x)).collect::<Result<_>>()?;
    let edge_targets = edges
        .iter()
        .map(|&(a, b)| q.eval_f64(&pts[a], &pts[b]))
        .collect::<Result<Vec<_>>>()?;
    let mut defining = vec![false; edges.len()];
    for c in &order {
        let k = edges
            .iter()
            .position(|&(a, b)| (a, b) == (c.anchor, c.vertex) || (b, a) == (c.anchor, c.vertex))
            .expect("defining edge is in the edge list");
        defining[k] = true;
    }
    let mut trace = MotionTrace {
        driver,
        paths: vec![Vec::with_capacity(steps + 1); start.len()],
        max_drift: vec![0.0; edges.len()],
        edges,
        defining,
        edge_targets,
        ..Default::default()
    };
    record(&mut trace, curve, q, &start)?;
    let mut tracer = Tracer {
        curve,
        q,
        driver,
        order,
        iterations: 0,
        halvings: 0,
    };
    let mut state = start;
    for step in 1..=steps {
        let outcome = tracer.advance(&state, delta, 0)?;
        trace.newton_iterations = tracer.iterations;
        trace.newton_failures = tracer.halvings;
        match outcome {
            Advance::Done(next) => {
                state = next;
                record(&mut trace, curve, q, &state)?;
            }
            Advance::Diverged => {
                return Err(Error::NewtonDivergence {
                    step,
                    partial: Box::new(trace),
                })
            }
            Advance::Exited => {
                return Err(Error::DomainExit {
                    step,
                    partial: Box::new(trace),
                })
            }
        }
    }
    Ok(trace)
}

/// Moves `α` by `delta` per step while keeping `D(γα, γβ)` and
/// `D(γτ, γα)` fixed, and records the drift of `D(γτ, γβ)`.
///
/// Vertices are `0 = α`, `1 = τ`, `2 = β`; edge `(1, 2)` is monitored.
/// The trace also carries samples comparing `β'(α)` with `1 / H_αβ(τ)`.
pub fn trace_triangle_motion(
    curve: &CurveSpec,
    q: &QuantitySpec,
    initial: (f64, f64, f64),
    delta: f64,
    steps: usize,
) -> Result<MotionTrace> {
    let (alpha, tau, beta) = initial;
    if alpha == tau || alpha == beta || tau == beta {
        return Err(Error::invalid("triangle parameters must be distinct"));
    }
    validate_step(delta)?;
    let (pa, pt, pb) = (curve.eval_f64(alpha)?, curve.eval_f64(tau)?, curve.eval_f64(beta)?);
    let d1 = q.eval_f64(&pt, &pa)?;
    let d3 = q.eval_f64(&pa, &pb)?;
    let d2 = q.eval_f64(&pt, &pb)?;
    let mut trace = MotionTrace {
        driver: 0,
        steps: vec![alpha],
        paths: vec![vec![alpha], vec![tau], vec![beta]],
        edges: vec![(0, 2), (1, 0), (1, 2)],
        defining: vec![true, true, false],
        edge_targets: vec![d3, d1, d2],
        max_drift: vec![0.0; 3],
        ..Default::default()
    };
    let (mut a, mut t, mut b) = (alpha, tau, beta);
    let solve_pair = |a: f64, t0: f64, b0: f64, iters: &mut usize| -> Result<Option<(f64, f64)>> {
        let Some((b, ib)) = solve_partner(curve, q, a, d3, b0)? else {
            return Ok(None);
        };
        let Some((t, it)) = solve_partner(curve, q, a, d1, t0)? else {
            return Ok(None);
        };
        *iters += ib + it;
        Ok(Some((t, b)))
    };
    for step in 1..=steps {
        // recursive halving as an explicit stack of pending sub-steps
        let mut pending = vec![(delta, 0u32)];
        while let Some((h, depth)) = pending.pop() {
            let na = a + h;
            if !curve.domain().contains(na) {
                return Err(Error::DomainExit {
                    step,
                    partial: Box::new(trace),
                });
            }
            match solve_pair(na, t, b, &mut trace.newton_iterations)? {
                Some((nt, nb)) => {
                    a = na;
                    t = nt;
                    b = nb;
                }
                None if depth < MAX_HALVINGS => {
                    trace.newton_failures += 1;
                    pending.push((0.5 * h, depth + 1));
                    pending.push((0.5 * h, depth + 1));
                }
                None => {
                    return Err(Error::NewtonDivergence {
                        step,
                        partial: Box::new(trace),
                    })
                }
            }
        }
        trace.steps.push(a);
        trace.paths[0].push(a);
        trace.paths[1].push(t);
        trace.paths[2].push(b);
        let (pa, pt, pb) = (curve.eval_f64(a)?, curve.eval_f64(t)?, curve.eval_f64(b)?);
        let now = [q.eval_f64(&pa, &pb)?, q.eval_f64(&pt, &pa)?, q.eval_f64(&pt, &pb)?];
        for k in 0..3 {
            let target = trace.edge_targets[k];
            let drift = (now[k] - target).abs() / target.abs().max(f64::MIN_POSITIVE);
            trace.max_drift[k] = trace.max_drift[k].max(drift);
        }
    }
    trace.ode_check = ode_samples(curve, q, &trace)?;
    Ok(trace)
}

/// `β'(α)` by central differences on the recorded path, against `1/H`.
fn ode_samples(curve: &CurveSpec, q: &QuantitySpec, trace: &MotionTrace) -> Result<Vec<OdeSample>> {
    let n = trace.steps.len();
    if n < 3 {
        return Ok(Vec::new());
    }
    let stride = ((n - 2) / 10).max(1);
    let mut out = Vec::new();
    for k in (1..n - 1).step_by(stride) {
        let (a0, a1) = (trace.steps[k - 1], trace.steps[k + 1]);
        let beta_prime = (trace.paths[2][k + 1] - trace.paths[2][k - 1]) / (a1 - a0);
        let h = match eval_h(curve, q, trace.steps[k], trace.paths[2][k], trace.paths[1][k]) {
            Ok(h) => h,
            Err(Error::SingularH { .. }) => continue,
            Err(e) => return Err(e),
        };
        out.push(OdeSample {
            step: k,
            driver: trace.steps[k],
            beta_prime,
            inverse_h: 1.0 / h,
        });
    }
    Ok(out)
}

fn validate_step(delta: f64) -> Result<()> {
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::invalid("driver step must be finite and nonzero"));
    }
    Ok(())
}

/// Moves the driver vertex by `delta` per step and propagates every other
/// vertex along the first edge that reaches it in a breadth-first order
/// from the driver; all remaining edges are drift monitors.
pub fn trace_framework_motion(fw: &Framework, driver: usize, delta: f64, steps: usize) -> Result<MotionTrace> {
    let v = fw.vertex_count();
    if driver >= v {
        return Err(Error::invalid(format!("driver {driver} is not a vertex")));
    }
    validate_step(delta)?;
    let edges = fw.edges().to_vec();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); v];
    for &(a, b) in &edges {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    let start: Vec<f64> = fw.embedding().iter().map(|p| p.to_f64()).collect();
    let pts: Vec<Vec<f64>> = start.iter().map(|&x| fw.curve().eval_f64(x)).collect::<Result<_>>()?;
    let mut seen = vec![false; v];
    seen[driver] = true;
    let mut queue = VecDeque::from([driver]);
    let mut order = Vec::with_capacity(v.saturating_sub(1));
    while let Some(u) = queue.pop_front() {
        for &w in &adjacency[u] {
            if !seen[w] {
                seen[w] = true;
                order.push(Constraint {
                    vertex: w,
                    anchor: u,
                    target: fw.quantity().eval_f64(&pts[u], &pts[w])?,
                });
                queue.push_back(w);
            }
        }
    }
    if let Some(vertex) = seen.iter().position(|s| !s) {
        return Err(Error::DisconnectedFramework { vertex });
    }
    run(fw.curve(), fw.quantity(), start, edges, driver, order, delta, steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{builtin, Domain};
    use crate::param::Param;

    fn se(d: usize) -> QuantitySpec {
        QuantitySpec::squared_euclidean(d)
    }

    #[test]
    fn circle_triangle_is_rigidly_rotated() {
        let c = builtin("unit_circle").unwrap();
        let tr = trace_triangle_motion(&c, &se(2), (0.0, 0.8, 1.7), 0.005, 100).unwrap();
        assert_eq!(tr.steps.len(), 101);
        assert_eq!(tr.paths[0], tr.steps);
        assert!(tr.monitored_drift() < 1e-9);
        assert!((tr.paths[2][100] - 2.2).abs() < 1e-9);
        assert!(tr.max_ode_error() < 1e-4);
    }

    #[test]
    fn helix_triangle_keeps_distances() {
        let c = builtin("circular_helix(0.5)").unwrap();
        let tr = trace_triangle_motion(&c, &se(3), (0.0, 0.7, 1.5), 0.005, 100).unwrap();
        assert!(tr.monitored_drift() < 1e-8);
    }

    #[test]
    fn parabola_triangle_drifts() {
        let c = builtin("parabola").unwrap();
        let tr = trace_triangle_motion(&c, &se(2), (0.0, 0.5, 1.0), 0.01, 10).unwrap();
        assert!(tr.monitored_drift() > 1e-4);
    }

    #[test]
    fn framework_and_triangle_paths_agree() {
        let c = builtin("parabola").unwrap();
        let fw = Framework::new(
            c.clone(),
            se(2),
            vec![Param::Float(0.0), Param::Float(0.5), Param::Float(1.0)],
            vec![(0, 1), (0, 2), (1, 2)],
        )
        .unwrap();
        let a = trace_framework_motion(&fw, 0, 0.01, 10).unwrap();
        let b = trace_triangle_motion(&c, &se(2), (0.0, 0.5, 1.0), 0.01, 10).unwrap();
        assert!((a.monitored_drift() - b.monitored_drift()).abs() < 1e-10);
        assert_eq!(a.defining, vec![true, true, false]);
    }

    #[test]
    fn k5_on_circle() {
        let c = builtin("unit_circle").unwrap().with_domain(Domain::real_line()).unwrap();
        let emb = (0..5).map(|k| Param::Float(2.0 * std::f64::consts::PI * k as f64 / 5.0)).collect();
        let fw = Framework::complete(c, se(2), emb).unwrap();
        let tr = trace_framework_motion(&fw, 0, 0.01, 50).unwrap();
        assert!(tr.monitored_drift() < 1e-8);
        assert_eq!(tr.defining.iter().filter(|d| !**d).count(), 6);
    }

    #[test]
    fn disconnected_and_domain_exit() {
        let c = builtin("parabola").unwrap();
        let fw = Framework::new(
            c.clone(),
            se(2),
            vec![Param::int(0), Param::int(1), Param::int(2)],
            vec![(0, 1)],
        )
        .unwrap();
        assert!(matches!(
            trace_framework_motion(&fw, 0, 0.01, 3),
            Err(Error::DisconnectedFramework { vertex: 2 })
        ));
        let short = c.with_domain(Domain::new(-1.0, 1.2).unwrap()).unwrap();
        match trace_triangle_motion(&short, &se(2), (0.0, 0.5, 0.9), 0.1, 50) {
            Err(Error::DomainExit { partial, .. }) | Err(Error::NewtonDivergence { partial, .. }) => {
                assert!(!partial.steps.is_empty())
            }
            other => panic!("expected a partial trace, got {other:?}"),
        }
    }
}
