//! Truncated Taylor series in one variable, stored as coefficient vectors.

pub(crate) fn mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for (i, x) in a.iter().enumerate().take(n + 1) {
        for (j, y) in b.iter().enumerate().take(n + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// `a^p` for a series with positive constant term.
pub(crate) fn pow(a: &[f64], p: f64, n: usize) -> Vec<f64> {
    let mut f = vec![0.0; n + 1];
    f[0] = a[0].powf(p);
    for k in 1..=n {
        let mut acc = 0.0;
        for j in 1..=k {
            let aj = a.get(j).copied().unwrap_or(0.0);
            acc += (p * j as f64 - (k - j) as f64) * aj * f[k - j];
        }
        f[k] = acc / (k as f64 * a[0]);
    }
    f
}

/// `f(u(s))` where `f` is given by its Taylor coefficients and `u(0) = 0`.
pub(crate) fn compose(f: &[f64], u: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for c in f.iter().rev() {
        out = mul(&out, u, n);
        out[0] += c;
    }
    out
}

/// Taylor coefficients of the solution of `u' = g(u)`, `u(0) = 0`.
pub(crate) fn solve_autonomous(g: &[f64], n: usize) -> Vec<f64> {
    let mut u = vec![0.0; n + 1];
    for order in 1..=n {
        let gu = compose(g, &u, order - 1);
        for k in 1..=order {
            u[k] = gu[k - 1] / k as f64;
        }
    }
    u
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_series() {
        // sqrt(1 + x) = 1 + x/2 - x^2/8 + x^3/16
        let s = pow(&[1.0, 1.0], 0.5, 3);
        for (a, b) in s.iter().zip([1.0, 0.5, -0.125, 0.0625]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn ode_recovers_exponential_inverse() {
        // u' = e^{-u}  =>  u = ln(1 + s) = s - s^2/2 + s^3/3
        let g: Vec<f64> = (0..6).map(|k| (-1f64).powi(k as i32) / factorial(k)).collect();
        let u = solve_autonomous(&g, 4);
        for (a, b) in u.iter().zip([0.0, 1.0, -0.5, 1.0 / 3.0, -0.25]) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
    }
}
