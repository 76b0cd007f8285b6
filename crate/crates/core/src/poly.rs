//! Dense univariate polynomials over exact rings, rational functions, and
//! the fraction-free machinery (pseudo-remainders, primitive GCDs, Bareiss
//! determinants) used by implicitization and exact rank computations.
//!
//! Bivariate integer polynomials are represented recursively as
//! `Poly<Poly<BigInt>>`: the outer variable is `X`, the inner one is `Y`.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num::bigint::Sign;
use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};

/// Commutative ring with identity, as needed by polynomial arithmetic.
pub trait Ring:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_int(n: i64) -> Self;

    /// Sign of the leading coefficient (recursively for polynomials).
    fn lead_sign(&self) -> i8;
}

/// Rings where exact division can be attempted.
pub trait ExactDiv: Ring {
    /// Returns `self / d` when the quotient exists in the ring.
    fn exact_div(&self, d: &Self) -> Option<Self>;
}

/// Unique factorization domains with a computable GCD.
pub trait GcdDomain: ExactDiv {
    /// A GCD normalized to have positive leading sign.
    fn gcd(&self, other: &Self) -> Self;
}

/// Marker for fields, enabling Euclidean division of polynomials.
pub trait Field: ExactDiv {}

impl Ring for BigInt {
    fn from_int(n: i64) -> Self {
        BigInt::from(n)
    }
    fn lead_sign(&self) -> i8 {
        match self.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }
}

impl ExactDiv for BigInt {
    fn exact_div(&self, d: &Self) -> Option<Self> {
        if d.is_zero() {
            return None;
        }
        let (q, r) = self.div_rem(d);
        r.is_zero().then_some(q)
    }
}

impl GcdDomain for BigInt {
    fn gcd(&self, other: &Self) -> Self {
        Integer::gcd(self, other)
    }
}

impl Ring for BigRational {
    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn lead_sign(&self) -> i8 {
        if self.is_zero() {
            0
        } else if self.is_negative() {
            -1
        } else {
            1
        }
    }
}

impl ExactDiv for BigRational {
    fn exact_div(&self, d: &Self) -> Option<Self> {
        (!d.is_zero()).then(|| self / d)
    }
}

impl Field for BigRational {}

impl Ring for f64 {
    fn from_int(n: i64) -> Self {
        n as f64
    }
    fn lead_sign(&self) -> i8 {
        if *self > 0.0 {
            1
        } else if *self < 0.0 {
            -1
        } else {
            0
        }
    }
}

/// Dense polynomial with ascending coefficients and no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly<C> {
    coeffs: Vec<C>,
}

pub type QPoly = Poly<BigRational>;
pub type ZPoly = Poly<BigInt>;
/// Polynomial in `X` whose coefficients are polynomials in `Y`.
pub type BiPoly = Poly<Poly<BigInt>>;

impl<C: Ring> Poly<C> {
    pub fn new(mut coeffs: Vec<C>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn constant(c: C) -> Self {
        Self::new(vec![c])
    }

    /// `c * x^k`
    pub fn monomial(c: C, k: usize) -> Self {
        let mut coeffs = vec![C::zero(); k];
        coeffs.push(c);
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    /// Coefficient of `x^i`, zero beyond the degree.
    pub fn coeff(&self, i: usize) -> C {
        self.coeffs.get(i).cloned().unwrap_or_else(C::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> C {
        self.coeffs.last().cloned().unwrap_or_else(C::zero)
    }

    pub fn eval(&self, x: &C) -> C {
        self.coeffs
            .iter()
            .rev()
            .fold(C::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c.clone() * C::from_int(i as i64))
                .collect(),
        )
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::new(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    pub fn map<D: Ring>(&self, f: impl Fn(&C) -> D) -> Poly<D> {
        Poly::new(self.coeffs.iter().map(f).collect())
    }

    fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![C::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Poly { coeffs }
    }

    /// Pseudo-remainder: `lc(d)^e * self = q * d + r` with `deg r < deg d`.
    pub fn pseudo_rem(&self, d: &Self) -> Self {
        let dd = d.degree().expect("pseudo-remainder by zero polynomial");
        let lc = d.lead();
        let mut r = self.clone();
        while let Some(dr) = r.degree() {
            if dr < dd {
                break;
            }
            let t = d.shift(dr - dd).scale(&r.lead());
            r = r.scale(&lc) - t;
        }
        r
    }
}

impl<C: Ring + ToPrimitive> Poly<C> {
    /// Horner evaluation in floating point.
    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
    }
}

impl<C: Ring> Zero for Poly<C> {
    fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl<C: Ring> One for Poly<C> {
    fn one() -> Self {
        Poly {
            coeffs: vec![C::one()],
        }
    }
}

impl<C: Ring> Add for Poly<C> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl<C: Ring> Sub for Poly<C> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl<C: Ring> Neg for Poly<C> {
    type Output = Self;
    fn neg(self) -> Self {
        Poly {
            coeffs: self.coeffs.into_iter().map(|c| -c).collect(),
        }
    }
}

impl<C: Ring> Mul for Poly<C> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        let mut out = vec![C::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self::new(out)
    }
}

impl<C: Ring> Ring for Poly<C> {
    fn from_int(n: i64) -> Self {
        Self::constant(C::from_int(n))
    }
    fn lead_sign(&self) -> i8 {
        self.coeffs.last().map_or(0, |c| c.lead_sign())
    }
}

impl<C: ExactDiv> ExactDiv for Poly<C> {
    fn exact_div(&self, d: &Self) -> Option<Self> {
        let dd = d.degree()?;
        let lc = d.lead();
        let mut r = self.clone();
        let mut q = vec![C::zero(); self.coeffs.len().saturating_sub(dd)];
        while let Some(dr) = r.degree() {
            if dr < dd {
                return None;
            }
            let c = r.lead().exact_div(&lc)?;
            q[dr - dd] = c.clone();
            r = r - d.shift(dr - dd).scale(&c);
        }
        Some(Self::new(q))
    }
}

impl<C: GcdDomain> Poly<C> {
    /// GCD of the coefficients.
    pub fn content(&self) -> C {
        self.coeffs
            .iter()
            .fold(C::zero(), |g, c| if g.is_zero() { normalize_sign(c) } else { g.gcd(c) })
    }

    pub fn primitive_part(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let c = self.content();
        let p = self.exact_div(&Poly::constant(c)).expect("content divides");
        normalize_sign(&p)
    }
}

fn normalize_sign<R: Ring>(x: &R) -> R {
    if x.lead_sign() < 0 {
        -x.clone()
    } else {
        x.clone()
    }
}

impl<C: GcdDomain> GcdDomain for Poly<C> {
    fn gcd(&self, other: &Self) -> Self {
        if self.is_zero() {
            return normalize_sign(other);
        }
        if other.is_zero() {
            return normalize_sign(self);
        }
        let c = self.content().gcd(&other.content());
        let (mut a, mut b) = (self.primitive_part(), other.primitive_part());
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        loop {
            let r = a.pseudo_rem(&b);
            if r.is_zero() {
                break;
            }
            a = b;
            b = r.primitive_part();
        }
        normalize_sign(&b.scale(&c))
    }
}

impl<C: Field> Poly<C> {
    /// Euclidean division.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("division by zero polynomial");
        let lc = d.lead();
        let mut r = self.clone();
        let mut q = vec![C::zero(); self.coeffs.len().saturating_sub(dd)];
        while let Some(dr) = r.degree() {
            if dr < dd {
                break;
            }
            let c = r.lead().exact_div(&lc).expect("field division");
            q[dr - dd] = c.clone();
            r = r - d.shift(dr - dd).scale(&c);
        }
        (Self::new(q), r)
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inv = C::one().exact_div(&self.lead()).expect("nonzero lead");
        self.scale(&inv)
    }

    /// Monic GCD by the Euclidean algorithm.
    pub fn field_gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }
}

impl QPoly {
    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&v| BigRational::from_int(v)).collect())
    }

    /// Scales to integer coefficients with unit content; the sign is kept.
    pub fn to_primitive_integer(&self) -> ZPoly {
        let lcm = self
            .coeffs
            .iter()
            .fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer())
            .collect();
        let z = ZPoly::new(ints);
        if z.is_zero() {
            return z;
        }
        let g = z.content();
        z.exact_div(&ZPoly::constant(g)).expect("content divides")
    }

    /// Sturm sequence `p, p', -rem(p, p'), ...`.
    pub fn sturm_sequence(&self) -> Vec<QPoly> {
        let mut seq = vec![self.clone(), self.derivative()];
        loop {
            let n = seq.len();
            if seq[n - 1].is_zero() {
                seq.pop();
                break;
            }
            let (_, r) = seq[n - 2].div_rem(&seq[n - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(-r);
        }
        seq
    }

    /// Number of distinct real roots in the open interval `(lo, hi)`;
    /// `None` endpoints stand for the corresponding infinity.
    pub fn count_real_roots(&self, lo: Option<&BigRational>, hi: Option<&BigRational>) -> usize {
        if self.degree().unwrap_or(0) == 0 {
            return 0;
        }
        let seq = self.sturm_sequence();
        let var_lo = sign_variations(seq.iter().map(|p| sign_at(p, lo, false)));
        let var_hi = sign_variations(seq.iter().map(|p| sign_at(p, hi, true)));
        // Sturm counts roots in (lo, hi]; drop hi itself when it is a root.
        let mut count = var_lo.saturating_sub(var_hi);
        if let Some(h) = hi {
            if self.eval(h).is_zero() {
                count = count.saturating_sub(1);
            }
        }
        count
    }
}

fn sign_at(p: &QPoly, x: Option<&BigRational>, plus_inf: bool) -> i8 {
    match x {
        Some(v) => p.eval(v).lead_sign(),
        None => {
            let s = p.lead().lead_sign();
            let odd = p.degree().unwrap_or(0) % 2 == 1;
            if !plus_inf && odd {
                -s
            } else {
                s
            }
        }
    }
}

fn sign_variations(signs: impl Iterator<Item = i8>) -> usize {
    let mut last = 0;
    let mut n = 0;
    for s in signs.filter(|&s| s != 0) {
        if last != 0 && s != last {
            n += 1;
        }
        last = s;
    }
    n
}

/// Rational function `num / den` with coprime parts and monic denominator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatFn {
    num: QPoly,
    den: QPoly,
}

impl RatFn {
    pub fn new(num: QPoly, den: QPoly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return RatFn {
                num,
                den: QPoly::one(),
            };
        }
        let g = num.field_gcd(&den);
        let (num, _) = num.div_rem(&g);
        let (den, _) = den.div_rem(&g);
        let lc = den.lead();
        RatFn {
            num: num.scale(&lc.recip()),
            den: den.scale(&lc.recip()),
        }
    }

    pub fn polynomial(p: QPoly) -> Self {
        RatFn {
            num: p,
            den: QPoly::one(),
        }
    }

    pub fn num(&self) -> &QPoly {
        &self.num
    }

    pub fn den(&self) -> &QPoly {
        &self.den
    }

    /// `max(deg num, deg den)`.
    pub fn degree(&self) -> usize {
        self.num.degree().unwrap_or(0).max(self.den.degree().unwrap_or(0))
    }

    /// `None` at a pole.
    pub fn eval(&self, t: &BigRational) -> Option<BigRational> {
        let d = self.den.eval(t);
        (!d.is_zero()).then(|| self.num.eval(t) / d)
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        self.num.eval_f64(t) / self.den.eval_f64(t)
    }

    /// Quotient rule, reduced.
    pub fn derivative(&self) -> Self {
        let n = self.num.derivative() * self.den.clone() - self.num.clone() * self.den.derivative();
        RatFn::new(n, self.den.clone() * self.den.clone())
    }

    pub fn recip(&self) -> Self {
        RatFn::new(self.den.clone(), self.num.clone())
    }
}

impl Zero for RatFn {
    fn zero() -> Self {
        RatFn::polynomial(QPoly::zero())
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl One for RatFn {
    fn one() -> Self {
        RatFn::polynomial(QPoly::one())
    }
}

impl Add for RatFn {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        if self.den == rhs.den {
            return RatFn::new(self.num + rhs.num, self.den);
        }
        RatFn::new(
            self.num * rhs.den.clone() + rhs.num * self.den.clone(),
            self.den * rhs.den,
        )
    }
}

impl Sub for RatFn {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for RatFn {
    type Output = Self;
    fn neg(self) -> Self {
        RatFn {
            num: -self.num,
            den: self.den,
        }
    }
}

impl Mul for RatFn {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        RatFn::new(self.num * rhs.num, self.den * rhs.den)
    }
}

impl Ring for RatFn {
    fn from_int(n: i64) -> Self {
        RatFn::polynomial(QPoly::from_int(n))
    }
    fn lead_sign(&self) -> i8 {
        self.num.lead_sign()
    }
}

/// Determinant by fraction-free (Bareiss) elimination with row pivoting.
pub fn bareiss_det<C: ExactDiv>(mut m: Vec<Vec<C>>) -> C {
    let n = m.len();
    if n == 0 {
        return C::one();
    }
    let mut negate = false;
    let mut prev = C::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    negate = !negate;
                }
                None => return C::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = m[i][j].clone() * m[k][k].clone() - m[i][k].clone() * m[k][j].clone();
                m[i][j] = v.exact_div(&prev).expect("Bareiss division is exact");
            }
            m[i][k] = C::zero();
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}

/// Rank of an integer matrix by fraction-free elimination with full
/// column search.
pub fn bareiss_rank(mut m: Vec<Vec<BigInt>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut prev = BigInt::one();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        for i in rank + 1..rows {
            for j in col + 1..cols {
                let v = &m[i][j] * &m[rank][col] - &m[i][col] * &m[rank][j];
                m[i][j] = v.exact_div(&prev).expect("Bareiss division is exact");
            }
            m[i][col] = BigInt::zero();
        }
        prev = m[rank][col].clone();
        rank += 1;
    }
    rank
}

/// Reduced row echelon form over the rationals; returns the pivot columns.
pub fn rref(m: &mut [Vec<BigRational>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let delta = &f * &m[r][j];
                    m[i][j] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Basis of the right kernel of a rational matrix with `cols` columns.
pub fn kernel_basis(m: &[Vec<BigRational>], cols: usize) -> Vec<Vec<BigRational>> {
    let mut a = m.to_vec();
    let pivots = rref(&mut a);
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![BigRational::zero(); cols];
            v[free] = BigRational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[row][free].clone();
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn zp(c: &[i64]) -> ZPoly {
        ZPoly::new(c.iter().map(|&v| BigInt::from(v)).collect())
    }

    #[test]
    fn integer_poly_gcd() {
        // (x-1)(x+2) and (x-1)(x-3)
        let a = zp(&[-2, 1, 1]);
        let b = zp(&[3, -4, 1]);
        assert_eq!(a.gcd(&b), zp(&[-1, 1]));
        // content is kept: 6(x+1) vs 4(x+1)
        assert_eq!(zp(&[6, 6]).gcd(&zp(&[4, 4])), zp(&[2, 2]));
    }

    #[test]
    fn bivariate_gcd_recovers_common_factor() {
        // X - Y^2 times (X + Y) and times (X - 1)
        let x = BiPoly::monomial(ZPoly::one(), 1);
        let y = BiPoly::constant(zp(&[0, 1]));
        let f = x.clone() - y.clone() * y.clone();
        let a = f.clone() * (x.clone() + y.clone());
        let b = f.clone() * (x.clone() - BiPoly::one());
        assert_eq!(a.gcd(&b), normalize_sign(&f));
    }

    #[test]
    fn exact_division_detects_remainder() {
        assert!(zp(&[1, 0, 1]).exact_div(&zp(&[1, 1])).is_none());
        assert_eq!(zp(&[-1, 0, 1]).exact_div(&zp(&[1, 1])), Some(zp(&[-1, 1])));
    }

    #[test]
    fn sturm_counts_roots() {
        // (t-1)(t-2)(t+3)
        let p = QPoly::from_ints(&[6, -7, 0, 1]);
        assert_eq!(p.count_real_roots(None, None), 3);
        assert_eq!(p.count_real_roots(Some(&q(0, 1)), Some(&q(5, 2))), 2);
        assert_eq!(p.count_real_roots(Some(&q(1, 1)), Some(&q(2, 1))), 0);
        assert_eq!(p.count_real_roots(Some(&q(-4, 1)), Some(&q(1, 1))), 1);
        // 1 + t^2 has none
        assert_eq!(QPoly::from_ints(&[1, 0, 1]).count_real_roots(None, None), 0);
    }

    #[test]
    fn ratfn_reduces_and_differentiates() {
        // (t^2 - 1)/(t - 1) = t + 1
        let r = RatFn::new(QPoly::from_ints(&[-1, 0, 1]), QPoly::from_ints(&[-1, 1]));
        assert_eq!(r, RatFn::polynomial(QPoly::from_ints(&[1, 1])));
        let inv = RatFn::new(QPoly::one(), QPoly::from_ints(&[0, 1]));
        assert_eq!(inv.derivative().eval(&q(2, 1)), Some(q(-1, 4)));
    }

    #[test]
    fn bareiss_matches_cofactor_expansion() {
        let m: Vec<Vec<BigInt>> = [[2, -1, 0], [1, 3, 4], [0, 5, -2]]
            .iter()
            .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
            .collect();
        // 2(-6-20) + 1(-2-0) = -54
        assert_eq!(bareiss_det(m), BigInt::from(-54));
        let singular: Vec<Vec<BigInt>> = [[0, 1], [0, 2]]
            .iter()
            .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
            .collect();
        assert_eq!(bareiss_det(singular.clone()), BigInt::zero());
        assert_eq!(bareiss_rank(singular), 1);
    }

    #[test]
    fn kernel_of_rank_one_matrix() {
        let m = vec![vec![q(1, 1), q(2, 1), q(3, 1)], vec![q(2, 1), q(4, 1), q(6, 1)]];
        let k = kernel_basis(&m, 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            for row in &m {
                let dot: BigRational = row.iter().zip(v).map(|(a, b)| a * b).sum();
                assert!(dot.is_zero());
            }
        }
    }
}
