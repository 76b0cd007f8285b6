//! Follows a triangle while one vertex slides along the curve, and watches
//! whether the third distance survives.

use curve_rigidity::curve::builtin;
use curve_rigidity::motion::{trace_framework_motion, trace_triangle_motion};
use curve_rigidity::rigidity::Framework;
use curve_rigidity::{Domain, Param, QuantitySpec};

fn main() -> curve_rigidity::Result<()> {
    let cases = [
        ("unit_circle", 2, (0.0, 0.8, 1.7)),
        ("circular_helix(0.5)", 3, (0.0, 0.7, 1.5)),
        ("torus_knot(2,3)", 4, (0.1, 0.6, 1.3)),
        ("parabola", 2, (0.0, 0.5, 1.0)),
        ("cubic", 2, (0.2, 0.6, 1.1)),
    ];
    println!("{:<22} {:>12} {:>12} {:>10}", "curve", "drift", "ode error", "beta end");
    for (name, dim, tri) in cases {
        let c = builtin(name)?;
        let tr = trace_triangle_motion(&c, &QuantitySpec::squared_euclidean(dim), tri, 0.005, 100)?;
        let ode = if tr.ode_check.is_empty() { f64::NAN } else { tr.max_ode_error() };
        println!("{:<22} {:>12.3e} {:>12.3e} {:>10.6}", name, tr.monitored_drift(), ode, tr.paths[2].last().unwrap());
    }

    let circle = builtin("unit_circle")?.with_domain(Domain::real_line())?;
    let emb = (0..5).map(|k| Param::Float(2.0 * std::f64::consts::PI * k as f64 / 5.0)).collect();
    let k5 = Framework::complete(circle, QuantitySpec::squared_euclidean(2), emb)?;
    let tr = trace_framework_motion(&k5, 0, 0.01, 50)?;
    println!("K5 on the circle: {} monitored edges, drift {:.3e}", tr.defining.iter().filter(|d| !**d).count(), tr.monitored_drift());
    Ok(())
}
