use curve_rigidity::counting::{
    count_distinct_values, elekes_lower_bound, fit_exponent, generate_point_set, CountMode, ParamPointSet, Scheme,
};
use curve_rigidity::curve::builtin;
use curve_rigidity::{CurveSpec, Param, QuantitySpec};
use num::BigRational;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn se(d: usize) -> QuantitySpec {
    QuantitySpec::squared_euclidean(d)
}

/// Brute-force count: sort all pairwise values and merge neighbours within
/// `eps` relative.
fn brute_force(c: &CurveSpec, params: &[f64], d: &QuantitySpec, eps: f64) -> usize {
    let pts: Vec<Vec<f64>> = params.iter().map(|&t| c.eval_f64(t).unwrap()).collect();
    let mut vals = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            vals.push(d.eval_f64(&pts[i], &pts[j]).unwrap());
        }
    }
    vals.sort_by(f64::total_cmp);
    let mut count = 0;
    let mut last = f64::NAN;
    for v in vals {
        if !((v - last).abs() <= eps * v.abs().max(last.abs())) {
            count += 1;
            last = v;
        }
    }
    count
}

#[test]
fn progressions() {
    let p = generate_point_set(&builtin("line").unwrap(), &"arith:0:1:5".parse().unwrap()).unwrap();
    assert_eq!(p.params().iter().map(Param::to_f64).collect::<Vec<_>>(), [0.0, 1.0, 2.0, 3.0, 4.0]);
    let g = generate_point_set(&builtin("rect_hyperbola").unwrap(), &"geom:1:2:4".parse().unwrap()).unwrap();
    assert_eq!(g.params().to_vec(), vec![Param::int(1), Param::int(2), Param::int(4), Param::int(8)]);
}

#[test]
fn random_scheme_is_reproducible_and_inside() {
    let c = builtin("parabola").unwrap().with_domain(curve_rigidity::Domain::new(0.0, 1.0).unwrap()).unwrap();
    let s = Scheme::UniformRandom { seed: 42, n: 3 };
    let a = generate_point_set(&c, &s).unwrap();
    assert_eq!(a.params(), generate_point_set(&c, &s).unwrap().params());
    assert!(a.params().iter().all(|p| p.is_exact() && p.to_f64() > 0.0 && p.to_f64() < 1.0));
}

#[test]
fn count_examples_against_brute_force() {
    let circle = builtin("unit_circle").unwrap();
    let six = generate_point_set(&circle, &Scheme::EquallySpacedAngle { n: 6 }).unwrap();
    let params: Vec<f64> = six.params().iter().map(Param::to_f64).collect();
    assert_eq!(brute_force(&circle, &params, &se(2), 1e-9), 3);
    assert_eq!(count_distinct_values(&six, &se(2), CountMode::Tolerance(1e-9)).unwrap().count, 3);

    let line = generate_point_set(&builtin("line").unwrap(), &"arith:0:1:10".parse().unwrap()).unwrap();
    assert_eq!(count_distinct_values(&line, &se(2), CountMode::Exact).unwrap().count, 9);

    let helix = builtin("circular_helix(1)").unwrap();
    let five = generate_point_set(&helix, &"arith:0:0.3:5".parse().unwrap()).unwrap();
    assert_eq!(brute_force(&helix, &[0.0, 0.3, 0.6, 0.9, 1.2], &se(3), 1e-9), 4);
    assert_eq!(count_distinct_values(&five, &se(3), CountMode::Tolerance(1e-9)).unwrap().count, 4);
}

#[test]
fn fit_examples() {
    let f = fit_exponent(&[(10, 100), (100, 10_000), (1000, 1_000_000)]).unwrap();
    assert!((f.slope - 2.0).abs() < 1e-12 && (f.r_squared - 1.0).abs() < 1e-12);
    let f = fit_exponent(&[(10, 10), (100, 100), (1000, 1000)]).unwrap();
    assert!((f.slope - 1.0).abs() < 1e-12);
    assert!(fit_exponent(&[(10, 10), (100, 100)]).is_err());
}

/// Smallest integer-resolution Δ with the incidence inequality, by linear scan.
fn scan_bound(np: u64, nxi: u64, k: f64) -> f64 {
    let need = (np - 2) as f64 * nxi as f64;
    let n = nxi as f64;
    let mut d = 1.0f64;
    while k * (n.powf(2.0 / 3.0) * d.powf(4.0 / 3.0) + n + d * d) < need {
        d += 0.01;
    }
    d
}

#[test]
fn lower_bound_against_scan() {
    let b = elekes_lower_bound(100, 10_000, 1.0, 1.0).unwrap();
    let oracle = scan_bound(100, 10_000, 1.0);
    assert!((b.delta - oracle).abs() <= 0.011, "{} vs {}", b.delta, oracle);
    assert!(!b.trivial);
    assert_eq!(elekes_lower_bound(3, 1, 1.0, 1.0).unwrap().delta, 1.0);
    assert_eq!(elekes_lower_bound(100, 10_000, 1.0, 1e9).unwrap().delta, 1.0);
    assert!(elekes_lower_bound(2, 1, 1.0, 1.0).is_err());
}

#[test]
fn exact_and_tolerance_counts_agree() {
    let curves = ["parabola", "cubic", "rect_hyperbola", "rational_circle"].map(|n| builtin(n).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for i in 0..20 {
        let c = &curves[i % curves.len()];
        let n = rng.gen_range(4..=64);
        let pset = generate_point_set(c, &Scheme::UniformRandom { seed: rng.gen(), n }).unwrap();
        let exact = count_distinct_values(&pset, &se(2), CountMode::Exact).unwrap().count;
        let tol = count_distinct_values(&pset, &se(2), CountMode::Tolerance(1e-12)).unwrap().count;
        assert_eq!(exact, tol, "instance {i}");
    }
}

#[test]
fn helix_counts_stay_linear() {
    let c = builtin("circular_helix(0.5)").unwrap();
    for n in [8, 16, 64, 200] {
        let p = generate_point_set(&c, &format!("arith:0:0.7:{n}").parse().unwrap()).unwrap();
        assert!(count_distinct_values(&p, &se(3), CountMode::Tolerance(1e-9)).unwrap().count <= n - 1);
    }
}

fn rational_params(max: usize) -> impl Strategy<Value = Vec<(i64, i64)>> {
    proptest::collection::btree_set((-60i64..60, 1i64..7), 3..max).prop_map(|s| s.into_iter().collect())
}

fn pset_of(c: &CurveSpec, raw: &[(i64, i64)]) -> Option<ParamPointSet> {
    let mut params: Vec<Param> = Vec::new();
    for &(n, d) in raw {
        let p = Param::Exact(BigRational::new(n.into(), d.into()));
        if c.domain().contains(p.to_f64()) && params.iter().all(|o| o.cmp_value(&p).is_ne()) {
            params.push(p);
        }
    }
    (params.len() >= 3).then(|| ParamPointSet::new(c.clone(), params, "prop").unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn adding_a_point_never_decreases_the_count(raw in rational_params(14), extra in (-60i64..60, 1i64..7)) {
        let c = builtin("parabola").unwrap();
        if let Some(p) = pset_of(&c, &raw) {
            let x = Param::Exact(BigRational::new(extra.0.into(), extra.1.into()));
            if p.params().iter().all(|o| o.cmp_value(&x).is_ne()) {
                let before = count_distinct_values(&p, &se(2), CountMode::Exact).unwrap().count;
                let after = count_distinct_values(&p.with_param(x).unwrap(), &se(2), CountMode::Exact).unwrap().count;
                prop_assert!(after >= before);
            }
        }
    }

    #[test]
    fn count_is_between_the_floor_and_the_pair_count(raw in rational_params(16), which in 0usize..3) {
        // plane curves of degree n: every point sees at least (N - 1) / (2n) values
        let (name, degree) = [("parabola", 2.0), ("cubic", 3.0), ("rational_circle", 2.0)][which];
        let c = builtin(name).unwrap();
        if let Some(p) = pset_of(&c, &raw) {
            let n = p.len();
            let count = count_distinct_values(&p, &se(2), CountMode::Exact).unwrap().count;
            prop_assert!(count <= n * (n - 1) / 2);
            prop_assert!(count as f64 >= (n - 1) as f64 / (2.0 * degree));
        }
    }
}
