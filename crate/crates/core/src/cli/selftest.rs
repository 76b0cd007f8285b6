//! Small known-answer checks behind `--self-test`.

use num::{BigRational, Zero};

use super::{EXIT_OK, EXIT_SELF_TEST};
use crate::counting::{
    count_distinct_values, elekes_lower_bound, fit_exponent, generate_point_set, CountMode, ParamPointSet, Scheme,
};
use crate::curve::{arc_length_reparametrize, builtin, check_simplicity, CurveSpec, Domain};
use crate::elekes::{admissibility_scan, implicitize_rational, verify_incidence_invariant, ElekesCurve};
use crate::error::Result;
use crate::motion::{classify_helix, derivative_norm_profile, trace_framework_motion, trace_triangle_motion};
use crate::param::{Param, Point};
use crate::quantity::QuantitySpec;
use crate::rigidity::{flexibility_matrix, infinitesimal_nullity, Framework};

type Check = (&'static str, fn() -> Result<bool>);

fn se(d: usize) -> QuantitySpec {
    QuantitySpec::squared_euclidean(d)
}

fn int_point(p: &Point) -> Vec<f64> {
    p.to_f64()
}

fn curve_checks() -> Vec<Check> {
    vec![
        ("parabola at t=3 is (3, 9)", || {
            let p = builtin("parabola")?.evaluate(&Param::int(3))?;
            Ok(p.as_exact().is_some() && int_point(&p) == [3.0, 9.0])
        }),
        ("helix (cos t, sin t, t) at 0 is (1, 0, 0)", || {
            Ok(builtin("circular_helix(1)")?.eval_f64(0.0)? == [1.0, 0.0, 0.0])
        }),
        ("rational circle at t=1 is (0, 1)", || {
            Ok(int_point(&builtin("rational_circle")?.evaluate(&Param::int(1))?) == [0.0, 1.0])
        }),
        ("parabola jet at 1", || {
            let j = builtin("parabola")?.derivative_jet(&Param::int(1), 2)?;
            let j: Vec<Vec<f64>> = j.iter().map(int_point).collect();
            Ok(j == [vec![1.0, 1.0], vec![1.0, 2.0], vec![0.0, 2.0]])
        }),
        ("hyperbola jet at 2", || {
            let j = builtin("rect_hyperbola")?.derivative_jet(&Param::int(2), 1)?;
            Ok(int_point(&j[0]) == [2.0, 0.5] && int_point(&j[1]) == [1.0, -0.25])
        }),
        ("circle arc on (0, pi) has length pi", || {
            let c = builtin("unit_circle")?.with_domain(Domain::new(0.0, std::f64::consts::PI)?)?;
            let a = arc_length_reparametrize(&c, 64)?;
            let speed = crate::curve::norm(&a.jet_f64(1.0, 1)?[1]);
            Ok((a.domain().hi - std::f64::consts::PI).abs() < 1e-10 && (speed - 1.0).abs() < 1e-8)
        }),
    ]
}

fn quantity_checks() -> Vec<Check> {
    vec![
        ("squared distance (0,0)-(3,4) is 25", || {
            Ok(se(2).eval_f64(&[0.0, 0.0], &[3.0, 4.0])? == 25.0)
        }),
        ("pinned area of unit vectors is 1", || {
            let q = QuantitySpec::pinned_area([BigRational::zero(), BigRational::zero()]);
            Ok(q.eval_f64(&[1.0, 0.0], &[0.0, 1.0])? == 1.0 && q.eval_f64(&[1.0, 0.0], &[2.0, 0.0])? == 0.0)
        }),
        ("squared distance gradient", || {
            let (dx, dy) = se(2).grad_f64(&[1.0, 0.0], &[0.0, 0.0])?;
            Ok(dx == [2.0, 0.0] && dy == [-2.0, 0.0])
        }),
    ]
}

fn counting_checks() -> Vec<Check> {
    vec![
        ("arith:0:1:5 on the line", || {
            let p = generate_point_set(&builtin("line")?, &"arith:0:1:5".parse()?)?;
            Ok(p.params().iter().map(Param::to_f64).collect::<Vec<_>>() == [0.0, 1.0, 2.0, 3.0, 4.0])
        }),
        ("random:42:3 is reproducible", || {
            let c = builtin("parabola")?.with_domain(Domain::new(0.0, 1.0)?)?;
            let s = Scheme::UniformRandom { seed: 42, n: 3 };
            let a = generate_point_set(&c, &s)?;
            let b = generate_point_set(&c, &s)?;
            Ok(a.params() == b.params() && a.len() == 3)
        }),
        ("line with 10 points has 9 distances", || {
            let p = generate_point_set(&builtin("line")?, &"arith:0:1:10".parse()?)?;
            Ok(count_distinct_values(&p, &se(2), CountMode::Exact)?.count == 9)
        }),
        ("six points on the circle give 3 distances", || {
            let p = generate_point_set(&builtin("unit_circle")?, &"angle:6".parse()?)?;
            Ok(count_distinct_values(&p, &se(2), CountMode::Tolerance(1e-9))?.count == 3)
        }),
        ("perfect power laws", || {
            let a = fit_exponent(&[(10, 100), (100, 10_000), (1000, 1_000_000)])?;
            let b = fit_exponent(&[(10, 10), (100, 100), (1000, 1000)])?;
            Ok((a.slope - 2.0).abs() < 1e-12 && (a.r_squared - 1.0).abs() < 1e-12 && (b.slope - 1.0).abs() < 1e-12)
        }),
        ("bound degenerates to 1", || {
            Ok(elekes_lower_bound(3, 1, 1.0, 1.0)?.delta == 1.0 && elekes_lower_bound(100, 10_000, 1.0, 1e12)?.delta == 1.0)
        }),
    ]
}

fn elekes_checks() -> Vec<Check> {
    vec![
        ("Elekes curve of the parabola at 0, 1, 2", || {
            let e = ElekesCurve::new(&builtin("parabola")?, &se(2), Param::int(0), Param::int(1))?;
            let at = |t| -> Result<Vec<f64>> { Ok(e.eval(&Param::int(t))?.to_f64()) };
            Ok(at(0)? == [0.0, 2.0] && at(1)? == [2.0, 0.0] && at(2)? == [20.0, 10.0])
        }),
        ("implicit parabola is X^2 - Y", || {
            let c = builtin("parabola")?;
            let r = c.as_rational().expect("parabola is rational");
            Ok(implicitize_rational(&r.coords()[0], &r.coords()[1])?.to_string() == "X^2 - Y")
        }),
        ("5 parabola points: 60 exact incidences", || {
            let params = (0..5).map(Param::int).collect();
            let p = ParamPointSet::new(builtin("parabola")?, params, "five")?;
            let r = verify_incidence_invariant(&p, &se(2))?;
            Ok(r.checked == 60 && r.failures.is_empty())
        }),
        ("4 hyperbola points with pinned area", || {
            let params = (1..5).map(Param::int).collect();
            let p = ParamPointSet::new(builtin("rect_hyperbola")?, params, "four")?;
            let q = QuantitySpec::pinned_area([BigRational::zero(), BigRational::zero()]);
            Ok(verify_incidence_invariant(&p, &q)?.failures.is_empty())
        }),
        ("empty scan for k = 0", || {
            let params = (0..4).map(Param::int).collect();
            let p = ParamPointSet::new(builtin("parabola")?, params, "four")?;
            Ok(admissibility_scan(&p, &se(2), 0, 64, 1e-9, 1)?.pairs_checked == 0)
        }),
    ]
}

fn circle_triangle() -> Result<Framework> {
    let tau = 2.0 * std::f64::consts::PI / 3.0;
    let c: CurveSpec = builtin("unit_circle")?.with_domain(Domain::real_line())?;
    Framework::complete(c, se(2), vec![Param::Float(0.0), Param::Float(tau), Param::Float(2.0 * tau)])
}

fn rigidity_checks() -> Vec<Check> {
    vec![
        ("K_{2,1} has nullity at least 1", || {
            let fw = Framework::new(
                builtin("parabola")?,
                se(2),
                vec![Param::int(0), Param::int(1), Param::int(2)],
                vec![(0, 2), (1, 2)],
            )?;
            Ok(infinitesimal_nullity(&fw, 1e-9)?.numerical_nullity >= 1)
        }),
        ("rotation field on the circle triangle", || {
            let m = flexibility_matrix(&circle_triangle()?)?;
            Ok(m.iter().all(|row| row.iter().sum::<f64>().abs() < 1e-12))
        }),
        ("circle triangle has nullity 1", || {
            Ok(infinitesimal_nullity(&circle_triangle()?, 1e-9)?.numerical_nullity == 1)
        }),
    ]
}

fn motion_checks() -> Vec<Check> {
    vec![
        ("triangle and framework traces agree", || {
            let c = builtin("parabola")?;
            let fw = Framework::complete(c.clone(), se(2), vec![Param::Float(0.0), Param::Float(0.5), Param::Float(1.0)])?;
            let a = trace_framework_motion(&fw, 0, 0.01, 10)?;
            let b = trace_triangle_motion(&c, &se(2), (0.0, 0.5, 1.0), 0.01, 10)?;
            Ok((a.monitored_drift() - b.monitored_drift()).abs() < 1e-10)
        }),
        ("circle curvature is 1", || {
            let p = derivative_norm_profile(&builtin("unit_circle")?, 2, 16, 1e-3)?;
            Ok(p.norms[1].iter().all(|v| (v - 1.0).abs() < 1e-6))
        }),
        ("circle is an algebraic helix", || {
            let c = builtin("unit_circle")?;
            Ok(classify_helix(c.as_helix().expect("circle is a helix"), 1_000_000, 1e-12).is_algebraic)
        }),
    ]
}

fn simplicity_checks() -> Vec<Check> {
    vec![("the line fails only condition 2", || {
        let r = check_simplicity(&builtin("line")?, &se(2), 64, 1e-9)?;
        Ok(r.failed() == [2])
    })]
}

fn checks_for(command: &str) -> Vec<Check> {
    let mut v = Vec::new();
    match command {
        "count-distances" => {
            v.extend(quantity_checks());
            v.extend(counting_checks());
        }
        "estimate-exponent" | "bound" => v.extend(counting_checks()),
        "elekes-analyze" => v.extend(elekes_checks()),
        "test-degeneracy" | "flex" => v.extend(rigidity_checks()),
        "trace-motion" | "classify-curve" => v.extend(motion_checks()),
        "check-simplicity" => {
            v.extend(curve_checks());
            v.extend(quantity_checks());
            v.extend(simplicity_checks());
        }
        _ => {}
    }
    v
}

/// Runs the checks for `command`, one line each, and returns the exit code.
pub(super) fn run(command: &str) -> i32 {
    let mut ok = true;
    for (name, check) in checks_for(command) {
        match check() {
            Ok(true) => println!("ok    {name}"),
            Ok(false) => {
                ok = false;
                println!("FAIL  {name}");
            }
            Err(e) => {
                ok = false;
                println!("FAIL  {name}: {e}");
            }
        }
    }
    if ok {
        EXIT_OK
    } else {
        EXIT_SELF_TEST
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_command_passes() {
        for cmd in [
            "count-distances",
            "estimate-exponent",
            "elekes-analyze",
            "test-degeneracy",
            "flex",
            "trace-motion",
            "classify-curve",
            "check-simplicity",
            "bound",
        ] {
            assert!(!checks_for(cmd).is_empty(), "{cmd}");
            assert_eq!(run(cmd), EXIT_OK, "{cmd}");
        }
    }
}
