//! Smallest grid side that can host the incidences of the Elekes curves.

use curve_rigidity::counting::elekes_lower_bound;

fn main() -> curve_rigidity::Result<()> {
    println!("{:>6} {:>10} {:>12} {:>8}", "NP", "NXi", "delta", "trivial");
    for np in [10u64, 30, 100, 300, 1000] {
        let nxi = np * (np - 1);
        let b = elekes_lower_bound(np, nxi, 1.0, 1.0)?;
        println!("{:>6} {:>10} {:>12.3} {:>8}", np, nxi, b.delta, b.trivial);
    }
    let b = elekes_lower_bound(100, 10_000, 1.0, 1.0)?;
    println!("NP = 100, NXi = 10^4: delta = {:.3}, {} incidences", b.delta, b.incidences);
    Ok(())
}
