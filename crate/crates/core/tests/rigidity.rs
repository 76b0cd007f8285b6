use curve_rigidity::curve::builtin;
use curve_rigidity::rigidity::{
    eval_h, exact_kernel, flexibility_matrix_exact, infinitesimal_nullity, scan_t_degeneracy, Framework,
};
use curve_rigidity::{CurveSpec, Domain, Param, QuantitySpec};
use num::{BigRational, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q(n: i64, d: i64) -> Param {
    Param::Exact(BigRational::new(n.into(), d.into()))
}

fn se(d: usize) -> QuantitySpec {
    QuantitySpec::squared_euclidean(d)
}

/// Closed form for squared distance on `(t, t^2)`: every factor of `H`
/// splits off a `(τ - α)` or `(τ - β)`.
fn parabola_h(a: f64, b: f64, t: f64) -> f64 {
    (1.0 + 2.0 * b * (t + b)) * (1.0 + 2.0 * t * (t + a)) / ((1.0 + 2.0 * a * (t + a)) * (1.0 + 2.0 * t * (t + b)))
}

#[test]
fn h_against_closed_forms() {
    let circle = builtin("unit_circle").unwrap();
    assert!((eval_h(&circle, &se(2), 0.3, 1.1, 2.0).unwrap() - 1.0).abs() < 1e-12);
    let helix = builtin("circular_helix(1)").unwrap();
    assert!((eval_h(&helix, &se(3), 0.2, 0.9, 1.7).unwrap() - 1.0).abs() < 1e-10);
    let p = builtin("parabola").unwrap();
    let (h2, h3) = (eval_h(&p, &se(2), 0.0, 1.0, 2.0).unwrap(), eval_h(&p, &se(2), 0.0, 1.0, 3.0).unwrap());
    assert!((h2 - parabola_h(0.0, 1.0, 2.0)).abs() < 1e-12);
    assert!((h3 - parabola_h(0.0, 1.0, 3.0)).abs() < 1e-12);
    assert!((h2 - h3).abs() > 1e-3);
}

proptest! {
    #[test]
    fn parabola_h_matches_closed_form(a in -2.0f64..2.0, b in -2.0f64..2.0, t in -2.0f64..2.0) {
        prop_assume!((a - b).abs() > 1e-2 && (t - a).abs() > 1e-3 && (t - b).abs() > 1e-3);
        let oracle = parabola_h(a, b, t);
        prop_assume!(oracle.is_finite() && oracle.abs() < 1e6);
        let h = eval_h(&builtin("parabola").unwrap(), &se(2), a, b, t);
        if let Ok(h) = h {
            prop_assert!((h - oracle).abs() <= 1e-9 * oracle.abs().max(1.0), "{} vs {}", h, oracle);
        }
    }

    #[test]
    fn swapping_alpha_and_beta_inverts_h(a in -2.0f64..2.0, b in -2.0f64..2.0, t in -2.0f64..2.0, which in 0usize..2) {
        prop_assume!((a - b).abs() > 1e-2);
        let c = builtin(["parabola", "cubic"][which]).unwrap();
        if let (Ok(h1), Ok(h2)) = (eval_h(&c, &se(2), a, b, t), eval_h(&c, &se(2), b, a, t)) {
            prop_assume!(h1.abs() < 1e6 && h2.abs() < 1e6);
            prop_assert!((h1 * h2 - 1.0).abs() < 1e-9);
        }
    }
}

fn random_exact_embedding(rng: &mut ChaCha8Rng, n: usize) -> Vec<Param> {
    let mut out: Vec<Param> = Vec::new();
    while out.len() < n {
        let p = q(rng.gen_range(-40..40), rng.gen_range(1..8));
        if out.iter().all(|o| o.cmp_value(&p).is_ne()) {
            out.push(p);
        }
    }
    out
}

#[test]
fn exact_kernel_vectors_annihilate_the_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for which in ["parabola", "cubic", "rational_circle"] {
        let c = builtin(which).unwrap();
        for _ in 0..5 {
            let emb = random_exact_embedding(&mut rng, 4);
            // a path has three edges on four vertices, so at least one flex
            let fw = Framework::new(c.clone(), se(2), emb, vec![(0, 1), (1, 2), (2, 3)]).unwrap();
            let m = flexibility_matrix_exact(&fw).unwrap();
            let k = exact_kernel(&fw).unwrap();
            assert_eq!(Some(k.len()), infinitesimal_nullity(&fw, 1e-9).unwrap().exact_nullity);
            assert!(!k.is_empty());
            for v in &k {
                for row in &m {
                    let dot = row.iter().zip(v).fold(BigRational::zero(), |s, (a, b)| s + a * b);
                    assert!(dot.is_zero());
                }
            }
        }
    }
}

#[test]
fn single_edge_always_flexes() {
    let fw = Framework::new(builtin("parabola").unwrap(), se(2), vec![q(0, 1), q(1, 1)], vec![(0, 1)]).unwrap();
    assert_eq!(infinitesimal_nullity(&fw, 1e-9).unwrap().exact_nullity, Some(1));
}

#[test]
fn degenerate_curves_give_flexible_triangles() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cases: [(CurveSpec, usize); 2] = [
        (builtin("unit_circle").unwrap().with_domain(Domain::new(-1.2, 1.2).unwrap()).unwrap(), 2),
        (builtin("circular_helix(0.5)").unwrap().with_domain(Domain::new(-3.0, 3.0).unwrap()).unwrap(), 3),
    ];
    for (c, d) in cases {
        let scan = scan_t_degeneracy(&c, &se(d), 8, 64, 1e-9, 7).unwrap();
        assert!(scan.is_degenerate_candidate);
        let (lo, hi) = c.domain().window();
        for _ in 0..25 {
            let emb: Vec<Param> = (0..3).map(|_| Param::Float(rng.gen_range(lo..hi))).collect();
            let fw = Framework::complete(c.clone(), se(d), emb).unwrap();
            assert!(infinitesimal_nullity(&fw, 1e-9).unwrap().numerical_nullity >= 1);
        }
    }
}

#[test]
fn parabola_bipartite_quadruples_are_rigid() {
    let c = builtin("parabola").unwrap();
    let scan = scan_t_degeneracy(&c, &se(2), 8, 64, 1e-9, 7).unwrap();
    assert!(!scan.is_degenerate_candidate);
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..20 {
        let fw = Framework::bipartite(c.clone(), se(2), random_exact_embedding(&mut rng, 4), 2).unwrap();
        let r = infinitesimal_nullity(&fw, 1e-9).unwrap();
        assert_eq!(r.exact_nullity, Some(0));
        assert_eq!(r.paths_agree, Some(true));
    }
}

#[test]
fn circle_k4_has_one_flex_on_both_paths() {
    let c = builtin("unit_circle").unwrap().with_domain(Domain::real_line()).unwrap();
    let emb = [0.0, 1.0, 2.0, 3.0].map(Param::Float).to_vec();
    assert_eq!(infinitesimal_nullity(&Framework::complete(c, se(2), emb).unwrap(), 1e-9).unwrap().numerical_nullity, 1);
    let rc = builtin("rational_circle").unwrap();
    let emb = vec![q(-2, 1), q(0, 1), q(1, 3), q(3, 1)];
    let r = infinitesimal_nullity(&Framework::complete(rc, se(2), emb).unwrap(), 1e-9).unwrap();
    assert_eq!((r.exact_nullity, r.paths_agree), (Some(1), Some(true)));
}

#[test]
fn scan_examples() {
    let p = builtin("parabola").unwrap();
    let r = scan_t_degeneracy(&p, &se(2), 16, 256, 1e-8, 1).unwrap();
    let w = r.witness.unwrap();
    assert!((w.h1 - w.h2).abs() > 1e-8 * w.h1.abs().max(w.h2.abs()));
    assert!((w.h1 - parabola_h(w.alpha, w.beta, w.tau1)).abs() < 1e-8 * w.h1.abs().max(1.0));
    assert!(scan_t_degeneracy(&p, &se(2), 4, 256, 1e-8, 1).is_err());
}
