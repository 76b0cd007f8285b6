//! Distinct squared distances on a few curves, and the growth exponent of
//! the count as the point set doubles.

use curve_rigidity::counting::{count_distinct_values, fit_exponent, generate_point_set, CountMode, Scheme};
use curve_rigidity::curve::builtin;
use curve_rigidity::QuantitySpec;

fn main() -> curve_rigidity::Result<()> {
    let cases = [
        ("unit_circle", 2, Scheme::EquallySpacedAngle { n: 64 }, CountMode::Tolerance(1e-9)),
        ("circular_helix(0.5)", 3, "arith:0:0.4:64".parse()?, CountMode::Tolerance(1e-9)),
        ("parabola", 2, "arith:0:1:64".parse()?, CountMode::Exact),
        ("parabola", 2, Scheme::UniformRandom { seed: 7, n: 64 }, CountMode::Exact),
    ];
    println!("{:<22} {:<16} {:>6} {:>8}  mode", "curve", "scheme", "N", "count");
    for (name, dim, scheme, mode) in cases {
        let pset = generate_point_set(&builtin(name)?, &scheme)?;
        let r = count_distinct_values(&pset, &QuantitySpec::squared_euclidean(dim), mode)?;
        println!("{:<22} {:<16} {:>6} {:>8}  {}", name, pset.label(), r.n, r.count, r.mode);
    }

    let helix = builtin("circular_helix(0.5)")?;
    let mut samples = Vec::new();
    for n in [32, 64, 128, 256] {
        let pset = generate_point_set(&helix, &format!("arith:0:0.4:{n}").parse()?)?;
        let r = count_distinct_values(&pset, &QuantitySpec::squared_euclidean(3), CountMode::Tolerance(1e-9))?;
        samples.push((n, r.count));
    }
    let fit = fit_exponent(&samples)?;
    println!("helix counts {:?}: exponent {:.4} (r^2 {:.6})", samples, fit.slope, fit.r_squared);
    Ok(())
}
