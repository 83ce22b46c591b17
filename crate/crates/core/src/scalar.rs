//! Coefficient backends for the series and operator algebra.
//!
//! Everything downstream is generic over [`Coeff`]: a commutative ring with a
//! partial inverse and exact division by integers. Two backends matter in
//! practice: [`C64`] (double-precision complex, used by the flows) and
//! [`Rat`] (arbitrary-precision rationals, used by the algebraic identity
//! tests and the kernel solver). The multivariate polynomials of the
//! coefficient body implement `Coeff` as well, which is what lets the series
//! routines run symbolically.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

/// Double-precision complex scalar.
pub type C64 = Complex64;

/// Arbitrary-precision rational scalar.
pub type Rat = BigRational;

/// Commutative ring with partial inversion, the coefficient domain of all
/// truncated series and coefficient-body polynomials.
pub trait Coeff:
    Clone
    + PartialEq
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_int(n: i64) -> Self;
    /// Multiplicative inverse, `None` when the element is not a unit.
    fn try_inv(&self) -> Option<Self>;
    /// Exact division by a nonzero integer (always defined over ℚ-algebras).
    fn div_int(&self, n: i64) -> Self;
}

impl Coeff for C64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn from_int(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn try_inv(&self) -> Option<Self> {
        if self.norm_sqr() == 0.0 {
            None
        } else {
            Some(Complex64::new(1.0, 0.0) / self)
        }
    }
    fn div_int(&self, n: i64) -> Self {
        self / (n as f64)
    }
}

impl Coeff for Rat {
    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn one() -> Self {
        <BigRational as One>::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn try_inv(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
    fn div_int(&self, n: i64) -> Self {
        self / BigRational::from_integer(BigInt::from(n))
    }
}

/// Rational `p/q` from integer parts.
pub fn rat(p: i64, q: i64) -> Rat {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Lossy conversion to `f64` for handing exact data to the Monte Carlo side.
pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fall back to a manual quotient when the BigInt parts overflow f64.
        let num = r.numer().to_f64().unwrap_or(f64::MAX * r.numer().signum().to_f64().unwrap());
        let den = r.denom().to_f64().unwrap_or(f64::MAX);
        num / den
    })
}

/// Parse a rational from "p/q" or a plain integer string.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if Zero::is_zero(&q) {
            return None;
        }
        Some(BigRational::new(p, q))
    } else {
        let p: BigInt = s.parse().ok()?;
        Some(BigRational::from_integer(p))
    }
}

/// Maximum coefficientwise absolute deviation between two complex slices.
pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    let n = a.len().max(b.len());
    let mut m = 0.0f64;
    for k in 0..n {
        let x = a.get(k).copied().unwrap_or_else(<C64 as Coeff>::zero);
        let y = b.get(k).copied().unwrap_or_else(<C64 as Coeff>::zero);
        m = m.max((x - y).norm());
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_roundtrip() {
        let x = rat(8, 3);
        assert_eq!(x.try_inv().unwrap(), rat(3, 8));
        assert!(parse_rat("8/3").unwrap() == x);
        assert!(parse_rat("-5").unwrap() == rat(-5, 1));
        assert!(parse_rat("1/0").is_none());
        assert!((rat_to_f64(&x) - 8.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn complex_inverse() {
        let z = Complex64::new(3.0, -4.0);
        let w = z.try_inv().unwrap();
        assert!((z * w - <C64 as Coeff>::one()).norm() < 1e-15);
        assert!(<C64 as Coeff>::zero().try_inv().is_none());
    }
}
