use std::f64::consts::PI;

use curve_rigidity::curve::{
    arc_length_reparametrize, builtin, check_simplicity, curve_from_json, curve_to_json, ArcLengthCurve, CurveSpec,
    Domain, HelixCurve,
};
use curve_rigidity::poly::{QPoly, RatFn};
use curve_rigidity::{Param, Point, QuantitySpec, RationalCurve};
use num::{BigRational, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn exact(p: &Point) -> Vec<BigRational> {
    p.as_exact().expect("exact point").to_vec()
}

#[test]
fn evaluation_examples() {
    let p = builtin("parabola").unwrap().evaluate(&Param::int(3)).unwrap();
    assert_eq!(exact(&p), vec![q(3, 1), q(9, 1)]);
    let h = HelixCurve::new(vec![1.0], vec![1.0], vec![1.0], 3, Domain::real_line()).unwrap();
    assert_eq!(CurveSpec::from(h).eval_f64(0.0).unwrap(), vec![1.0, 0.0, 0.0]);
    let c = builtin("rational_circle").unwrap().evaluate(&Param::int(1)).unwrap();
    assert_eq!(exact(&c), vec![q(0, 1), q(1, 1)]);
}

#[test]
fn jet_examples() {
    let j = builtin("parabola").unwrap().derivative_jet(&Param::int(1), 2).unwrap();
    let j: Vec<_> = j.iter().map(exact).collect();
    assert_eq!(j, vec![vec![q(1, 1), q(1, 1)], vec![q(1, 1), q(2, 1)], vec![q(0, 1), q(2, 1)]]);
    let j = builtin("unit_circle").unwrap().jet_f64(0.0, 1).unwrap();
    assert!(max_err(&j[0], &[1.0, 0.0]) < 1e-15 && max_err(&j[1], &[0.0, 1.0]) < 1e-15);
    let j = builtin("rect_hyperbola").unwrap().derivative_jet(&Param::int(2), 1).unwrap();
    assert_eq!(exact(&j[0]), vec![q(2, 1), q(1, 2)]);
    assert_eq!(exact(&j[1]), vec![q(1, 1), q(-1, 4)]);
}

#[test]
fn parabola_arc_length_matches_closed_form() {
    let c = builtin("parabola").unwrap().with_domain(Domain::new(0.0, 1.0).unwrap()).unwrap();
    let arc = ArcLengthCurve::new(&c, 64).unwrap();
    // ∫_0^1 sqrt(1 + 4t^2) dt = (2 sqrt 5 + asinh 2) / 4
    let oracle = (2.0 * 5f64.sqrt() + 2f64.asinh()) / 4.0;
    assert!((arc.length() - oracle).abs() < 1e-8);
}

#[test]
fn arc_length_of_line_and_circle() {
    let line: CurveSpec = RationalCurve::polynomial(&[&[0, 1], &[0]], Domain::new(0.0, 2.0).unwrap())
        .unwrap()
        .into();
    let sigma = arc_length_reparametrize(&line, 32).unwrap();
    assert!((sigma.domain().hi - 2.0).abs() < 1e-14);
    let p = sigma.jet_f64(0.7, 0).unwrap().swap_remove(0);
    assert!((p[0] - 0.7).abs() < 1e-12 && p[1] == 0.0);
    let arc = builtin("unit_circle").unwrap().with_domain(Domain::new(0.0, PI).unwrap()).unwrap();
    assert!((ArcLengthCurve::new(&arc, 64).unwrap().length() - PI).abs() < 1e-10);
}

#[test]
fn simplicity_examples() {
    let se = QuantitySpec::squared_euclidean(2);
    let r = check_simplicity(&builtin("line").unwrap(), &se, 64, 1e-9).unwrap();
    assert_eq!(r.failed(), vec![2]);
    assert!(r.condition(2).witness.as_ref().unwrap().detail.contains("≡ 0"));
    let p = builtin("parabola").unwrap();
    let r = check_simplicity(&p.with_domain(Domain::new(0.0, 1.0).unwrap()).unwrap(), &se, 256, 1e-9).unwrap();
    assert!(r.all_passed());
    let pinned = QuantitySpec::pinned_area([BigRational::zero(), BigRational::zero()]);
    let r = check_simplicity(&p.with_domain(Domain::new(0.1, 1.0).unwrap()).unwrap(), &pinned, 256, 1e-9).unwrap();
    assert!(r.all_passed());
}

#[test]
fn json_round_trip_over_the_zoo() {
    for name in ["line", "parabola", "cubic", "rect_hyperbola", "rational_circle", "unit_circle", "circular_helix(0.5)"] {
        let c = builtin(name).unwrap();
        let back = curve_from_json(&curve_to_json(&c)).unwrap();
        assert_eq!(back.domain(), c.domain(), "{name}");
        for t in [0.3, 0.9, 1.7] {
            assert_eq!(back.eval_f64(t).unwrap(), c.eval_f64(t).unwrap(), "{name}");
        }
    }
}

fn rational_curve() -> CurveSpec {
    let den = QPoly::from_ints(&[2, 0, 1]);
    RationalCurve::new(
        vec![
            RatFn::new(QPoly::from_ints(&[1, -3, 0, 2]), den.clone()),
            RatFn::new(QPoly::from_ints(&[0, 5, 1]), den),
        ],
        Domain::real_line(),
    )
    .unwrap()
    .into()
}

/// Richardson-extrapolated central difference of the position.
fn fd_tangent(c: &CurveSpec, t: f64, h: f64) -> Vec<f64> {
    let d = |h: f64| -> Vec<f64> {
        let (a, b) = (c.eval_f64(t + h).unwrap(), c.eval_f64(t - h).unwrap());
        a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * h)).collect()
    };
    let (d1, d2) = (d(h), d(h / 2.0));
    d1.iter().zip(&d2).map(|(a, b)| (4.0 * b - a) / 3.0).collect()
}

fn max_err(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn exact_jet_paths_agree(n in -200i64..200, d in 1i64..50) {
        let c = rational_curve();
        let r = c.as_rational().unwrap();
        let t = q(n, d);
        prop_assert_eq!(r.jet_exact(&t, 4).unwrap(), r.jet_exact_leibniz(&t, 4).unwrap());
        let fns = r.derivative_functions(2);
        let direct: Vec<BigRational> = fns.iter().map(|f| f.eval(&t).unwrap()).collect();
        prop_assert_eq!(&r.jet_exact(&t, 2).unwrap()[2], &direct);
    }

    #[test]
    fn finite_differences_converge_at_fourth_order(t in -1.5f64..1.5, which in 0usize..4) {
        let c = match which {
            0 => rational_curve(),
            1 => builtin("circular_helix(0.5)").unwrap(),
            2 => builtin("ellipse(2,1)").unwrap(),
            _ => builtin("cubic").unwrap(),
        };
        let exact = c.jet_f64(t, 1).unwrap().swap_remove(1);
        let e1 = max_err(&fd_tangent(&c, t, 0.04), &exact);
        let e2 = max_err(&fd_tangent(&c, t, 0.02), &exact);
        prop_assert!(e1 < 1e-3);
        if e1 > 1e-10 {
            // halving h divides a fourth-order error by about 16
            prop_assert!(e1 / e2 > 8.0, "ratio {}", e1 / e2);
        }
    }

    #[test]
    fn helix_distance_is_translation_invariant(x in -20f64..20.0, y in -20f64..20.0, s in -20f64..20.0) {
        let c = builtin("circular_helix(0.5)").unwrap();
        let d = |a: f64, b: f64| {
            let (p, r) = (c.eval_f64(a).unwrap(), c.eval_f64(b).unwrap());
            p.iter().zip(&r).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt()
        };
        prop_assert!((d(x, y) - d(x + s, y + s)).abs() < 1e-12);
    }
}

#[test]
fn arc_length_is_unit_speed_off_the_construction_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for name in ["parabola", "cubic", "ellipse(2,1)", "circular_helix(0.5)"] {
        let c = builtin(name).unwrap();
        let (lo, hi) = c.domain().window();
        let c = c.with_domain(Domain::new(lo.max(-1.5), hi.min(1.5)).unwrap()).unwrap();
        let sigma = arc_length_reparametrize(&c, 64).unwrap();
        let len = sigma.domain().hi;
        for _ in 0..40 {
            let s = rng.gen_range(0.001..0.999) * len;
            let v = sigma.jet_f64(s, 1).unwrap();
            let speed = v[1].iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((speed - 1.0).abs() <= 1e-6, "{name} at s = {s}: {speed}");
        }
    }
}
