//! Infinitesimal flexibility of frameworks whose vertices live on a curve.

use curve_rigidity::curve::builtin;
use curve_rigidity::rigidity::{exact_kernel, infinitesimal_nullity, kernel_to_strings, Framework};
use curve_rigidity::{Param, QuantitySpec};

fn main() -> curve_rigidity::Result<()> {
    let q = QuantitySpec::squared_euclidean(2);
    let ints = |v: &[i64]| v.iter().map(|&k| Param::int(k)).collect::<Vec<_>>();

    let circle = builtin("rational_circle")?;
    let k4 = Framework::complete(circle, q.clone(), ints(&[-2, 0, 1, 3]))?;
    let r = infinitesimal_nullity(&k4, 1e-9)?;
    println!("K4 on the circle: nullity {:?} (numerical {})", r.exact_nullity, r.numerical_nullity);
    println!("  flex: {:?}", kernel_to_strings(&exact_kernel(&k4)?));

    let parabola = builtin("parabola")?;
    let k3 = Framework::complete(parabola.clone(), q.clone(), ints(&[0, 1, 2]))?;
    let r = infinitesimal_nullity(&k3, 1e-9)?;
    println!("triangle on the parabola: nullity {:?}, flexible {}", r.exact_nullity, r.flexible);

    let k22 = Framework::bipartite(parabola.clone(), q.clone(), ints(&[-1, 3, 0, 2]), 2)?;
    println!("K2,2 on the parabola: nullity {:?}", infinitesimal_nullity(&k22, 1e-9)?.exact_nullity);
    let k21 = Framework::bipartite(parabola, q, ints(&[-1, 3, 0]), 2)?;
    let r = infinitesimal_nullity(&k21, 1e-9)?;
    println!("K2,1 on the parabola: nullity {:?}, singular values {:?}", r.exact_nullity, r.singular_values);
    Ok(())
}
