//! Elekes curves of the parabola: exact implicit equations, swap symmetry,
//! and pairwise intersections.

use curve_rigidity::curve::builtin;
use curve_rigidity::elekes::{intersect_elekes_pair, same_curve, ElekesCurve};
use curve_rigidity::{Param, QuantitySpec};

fn main() -> curve_rigidity::Result<()> {
    let parabola = builtin("parabola")?;
    let q = QuantitySpec::squared_euclidean(2);
    let e = ElekesCurve::new(&parabola, &q, Param::int(0), Param::int(1))?;
    let g = e.implicit().expect("rational base")?;
    println!("xi_01: G(X, Y) = {g}");
    println!("  degree {} (bound {})", g.total_degree(), e.degree_bound().unwrap());
    println!("xi_10: G(X, Y) = {}", e.swapped().implicit().unwrap()?);

    let f = ElekesCurve::new(&parabola, &q, Param::int(-1), Param::int(2))?;
    println!("xi_-1,2: G(X, Y) = {}", f.implicit().unwrap()?);
    let (same, method) = same_curve(&e, &f)?;
    println!("same curve: {same} ({method:?})");
    let r = intersect_elekes_pair(&e, &f, 64, 1e-9)?;
    println!("{} intersections:", r.points.len());
    for (p, (t, s)) in r.points.iter().zip(&r.params) {
        println!("  ({:>10.5}, {:>10.5}) at t = {t:.6}, s = {s:.6}", p[0], p[1]);
    }

    let circle = builtin("rational_circle")?;
    let a = ElekesCurve::new(&circle, &q, Param::int(0), Param::int(1))?;
    let b = a.swapped();
    println!("circle: xi_pq and xi_qp are one curve: {}", same_curve(&a, &b)?.0);
    Ok(())
}
