//! Which generalized helices are pieces of algebraic curves.

use curve_rigidity::motion::classify_helix;
use curve_rigidity::{Domain, HelixCurve};

fn main() -> curve_rigidity::Result<()> {
    let cases = [
        ("circle", vec![1.0], vec![1.0], vec![]),
        ("(2,3) torus knot", vec![1.0, 1.0], vec![2.0, 3.0], vec![]),
        // f64 pi has a convergent inside the denominator bound
        ("(1,pi) winding", vec![1.0, 1.0], vec![1.0, std::f64::consts::PI], vec![]),
        ("(1,sqrt 2) winding", vec![1.0, 1.0], vec![1.0, 2f64.sqrt()], vec![]),
        ("355/113 winding", vec![1.0, 0.5], vec![113.0, 355.0], vec![]),
        ("circular helix", vec![1.0], vec![1.0], vec![0.5]),
    ];
    for (name, radii, freqs, drift) in cases {
        let dim = 2 * radii.len() + drift.len();
        let h = HelixCurve::new(radii, freqs, drift, dim, Domain::real_line())?;
        let c = classify_helix(&h, 1_000_000, 1e-12);
        let certs: Vec<String> = c
            .ratio_certificates
            .iter()
            .map(|r| match r.fraction {
                Some((p, q)) => format!("{p}/{q}"),
                None => format!("{:.6} (none)", r.ratio),
            })
            .collect();
        println!("{name:<20} algebraic {:<5} k={} l={} {:?} {}", c.is_algebraic, c.k, c.l, certs, c.reason);
    }
    Ok(())
}
