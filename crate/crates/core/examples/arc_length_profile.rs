//! Derivative norms of the unit-speed parametrization: constant on helices,
//! varying elsewhere.

use curve_rigidity::curve::builtin;
use curve_rigidity::motion::derivative_norm_profile;

fn main() -> curve_rigidity::Result<()> {
    for name in ["unit_circle", "circular_helix(0.5)", "torus_knot(2,3)", "ellipse(2,1)", "parabola", "rect_hyperbola"] {
        let p = derivative_norm_profile(&builtin(name)?, 4, 64, 1e-3)?;
        let means: Vec<String> = p.orders.iter().map(|&k| format!("{:.5}", p.mean(k))).collect();
        let vars: Vec<String> = p.variation.iter().map(|v| format!("{v:.1e}")).collect();
        println!("{name:<22} helix {:<5} mean |σ^(k)| {:?}", p.helix_candidate, means);
        println!("{:<22} variation {:?}", "", vars);
    }
    Ok(())
}
