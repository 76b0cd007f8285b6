//! Scans H over random pairs and reports which curves make it constant.

use curve_rigidity::curve::builtin;
use curve_rigidity::rigidity::{eval_h, scan_t_degeneracy};
use curve_rigidity::{Domain, QuantitySpec};

fn main() -> curve_rigidity::Result<()> {
    let cases = [
        ("unit_circle", 2, Some((-1.2, 1.2))),
        ("circular_helix(0.5)", 3, None),
        ("ellipse(2,1)", 2, Some((-1.2, 1.2))),
        ("parabola", 2, None),
        ("cubic", 2, None),
    ];
    for (name, dim, window) in cases {
        let mut c = builtin(name)?;
        if let Some((lo, hi)) = window {
            c = c.with_domain(Domain::new(lo, hi)?)?;
        }
        let r = scan_t_degeneracy(&c, &QuantitySpec::squared_euclidean(dim), 16, 256, 1e-8, 1)?;
        println!("{name:<22} degenerate {:<5} max variation {:.3e}", r.is_degenerate_candidate, r.max_h_variation);
        if let Some(w) = r.witness {
            println!("  witness: H({:.3}, {:.3}) = {:.6} at {:.3}, {:.6} at {:.3}", w.alpha, w.beta, w.h1, w.tau1, w.h2, w.tau2);
        }
    }
    let p = builtin("parabola")?;
    let q = QuantitySpec::squared_euclidean(2);
    for tau in [-1.0, 0.5, 2.0, 3.0] {
        println!("parabola H_01({tau}) = {:.6}", eval_h(&p, &q, 0.0, 1.0, tau)?);
    }
    Ok(())
}
