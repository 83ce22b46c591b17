//! Exact-order truncated power-series and Laurent-series arithmetic.
//!
//! Series are plain coefficient vectors with a declared truncation order.
//! Arithmetic never extends the order of its inputs: a product of series of
//! orders `n` and `m` carries order `min(n, m)`, and differentiation loses
//! one order. All routines are coefficient-exact over whatever [`Coeff`]
//! backend they run on.
//!
//! Conventions:
//! - [`TruncatedTaylor`]: `coeffs[k]` is the coefficient of `z^k`,
//!   `0 <= k <= order`. Local automorphisms have `coeffs[0] = 0` and
//!   `coeffs[1] != 0`; the normalized class additionally has `coeffs[1] = 1`.
//! - [`TruncatedLaurentInf`]: `lead * z + b_0 + b_1/z + ... + b_order/z^order`
//!   with `coeffs[k] = b_k`. Normalized elements have `lead = 1`.

use crate::error::{CoreError, Result};
use crate::scalar::{C64, Coeff, Rat};
use num_traits::Signed;
use serde::{Deserialize, Serialize};

/// Truncated Taylor series around the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedTaylor<T> {
    coeffs: Vec<T>,
}

/// Truncated expansion at infinity: `lead*z + b0 + b1/z + ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedLaurentInf<T> {
    pub lead: T,
    /// `coeffs[k]` is the coefficient of `z^{-k}` (so `coeffs[0] = b_0`).
    pub coeffs: Vec<T>,
}

impl<T: Coeff> TruncatedTaylor<T> {
    /// Build from coefficients of `z^0..z^order`.
    pub fn from_coeffs(coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty(), "series needs at least the constant term");
        Self { coeffs }
    }

    /// Build `a_1 z + a_2 z^2 + ...` from the tail coefficients, zero constant term.
    pub fn from_tail(tail: &[T], order: usize) -> Self {
        let mut coeffs = vec![T::zero(); order + 1];
        for (k, a) in tail.iter().enumerate() {
            if k < order {
                coeffs[k + 1] = a.clone();
            }
        }
        Self { coeffs }
    }

    /// The identity `z` at the given order.
    pub fn identity(order: usize) -> Self {
        let mut coeffs = vec![T::zero(); order + 1];
        if order >= 1 {
            coeffs[1] = T::one();
        }
        Self { coeffs }
    }

    /// Constant series.
    pub fn constant(value: T, order: usize) -> Self {
        let mut coeffs = vec![T::zero(); order + 1];
        coeffs[0] = value;
        Self { coeffs }
    }

    /// Truncated Koebe function `z + 2z^2 + 3z^3 + ...`.
    pub fn koebe(order: usize) -> Self {
        let mut coeffs = vec![T::zero(); order + 1];
        for k in 1..=order {
            coeffs[k] = T::from_int(k as i64);
        }
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn set_coeff(&mut self, k: usize, v: T) {
        assert!(k < self.coeffs.len());
        self.coeffs[k] = v;
    }

    /// Affine coordinate `c_n := a_{n+1}` of a normalized automorphism.
    pub fn affine_coord(&self, n: usize) -> T {
        self.coeff(n + 1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Truncate (or keep) to the given order.
    pub fn truncated(&self, order: usize) -> Self {
        let order = order.min(self.order());
        Self { coeffs: self.coeffs[..=order].to_vec() }
    }

    /// Explicit zero-extension, for callers treating the series as an exact
    /// polynomial. Arithmetic itself never pads.
    pub fn padded(&self, order: usize) -> Self {
        if order <= self.order() {
            return self.clone();
        }
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, T::zero());
        Self { coeffs }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let order = self.order().min(rhs.order());
        let coeffs = (0..=order).map(|k| self.coeff(k) + rhs.coeff(k)).collect();
        Self { coeffs }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let order = self.order().min(rhs.order());
        let coeffs = (0..=order).map(|k| self.coeff(k) - rhs.coeff(k)).collect();
        Self { coeffs }
    }

    pub fn neg(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| -c.clone()).collect() }
    }

    pub fn scale(&self, s: &T) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c.clone() * s.clone()).collect() }
    }

    /// Truncated product, order `min(self.order, rhs.order)`.
    pub fn mul(&self, rhs: &Self) -> Self {
        let order = self.order().min(rhs.order());
        let mut coeffs = vec![T::zero(); order + 1];
        for i in 0..=order {
            if self.coeff(i).is_zero() {
                continue;
            }
            for j in 0..=(order - i) {
                let term = self.coeff(i) * rhs.coeff(j);
                coeffs[i + j] = coeffs[i + j].clone() + term;
            }
        }
        Self { coeffs }
    }

    /// Multiply by `z^k`, shifting coefficients up (order preserved, tail dropped).
    pub fn mul_monomial(&self, k: usize) -> Self {
        let order = self.order();
        let mut coeffs = vec![T::zero(); order + 1];
        for i in 0..=order {
            if i + k <= order {
                coeffs[i + k] = self.coeff(i);
            }
        }
        Self { coeffs }
    }

    /// Reciprocal `1/self`; requires a unit constant term.
    pub fn reciprocal(&self) -> Result<Self> {
        let inv0 = self.coeff(0).try_inv().ok_or(CoreError::ZeroLeadingCoefficient)?;
        let order = self.order();
        let mut coeffs = vec![T::zero(); order + 1];
        coeffs[0] = inv0.clone();
        for k in 1..=order {
            let mut acc = T::zero();
            for j in 1..=k {
                acc = acc + self.coeff(j) * coeffs[k - j].clone();
            }
            coeffs[k] = -(inv0.clone() * acc);
        }
        Ok(Self { coeffs })
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        Ok(self.mul(&rhs.reciprocal()?))
    }

    /// Termwise derivative; order drops by one.
    pub fn derivative(&self) -> Self {
        let order = self.order();
        if order == 0 {
            return Self { coeffs: vec![T::zero()] };
        }
        let coeffs = (1..=order)
            .map(|k| self.coeff(k) * T::from_int(k as i64))
            .collect();
        Self { coeffs }
    }

    /// Logarithm of a series with constant term exactly 1.
    pub fn log(&self) -> Result<Self> {
        if self.coeff(0) != T::one() {
            return Err(CoreError::ZeroLeadingCoefficient);
        }
        let order = self.order();
        let mut l = vec![T::zero(); order + 1];
        for k in 1..=order {
            let mut acc = T::zero();
            for j in 1..k {
                acc = acc + l[j].clone() * T::from_int(j as i64) * self.coeff(k - j);
            }
            l[k] = self.coeff(k) - acc.div_int(k as i64);
        }
        Ok(Self { coeffs: l })
    }

    /// Exponential of a series with zero constant term.
    pub fn exp(&self) -> Result<Self> {
        if !self.coeff(0).is_zero() {
            return Err(CoreError::NonzeroConstantTerm);
        }
        let order = self.order();
        let mut e = vec![T::zero(); order + 1];
        e[0] = T::one();
        for k in 1..=order {
            let mut acc = T::zero();
            for j in 1..=k {
                acc = acc + self.coeff(j) * T::from_int(j as i64) * e[k - j].clone();
            }
            e[k] = acc.div_int(k as i64);
        }
        Ok(Self { coeffs: e })
    }

    /// Composition `self(inner)`; the inner series must have zero constant term.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if !inner.coeff(0).is_zero() {
            return Err(CoreError::NonzeroConstantTerm);
        }
        let order = self.order().min(inner.order());
        let mut acc = Self::constant(self.coeff(order), order);
        for k in (0..order).rev() {
            acc = acc.mul(&inner.truncated(order));
            acc.coeffs[0] = acc.coeffs[0].clone() + self.coeff(k);
        }
        Ok(acc)
    }

    /// Compositional inverse: `h` with `self(h) = z` to the shared order.
    pub fn reversion(&self) -> Result<Self> {
        if !self.coeff(0).is_zero() {
            return Err(CoreError::NonzeroConstantTerm);
        }
        let a1_inv = self.coeff(1).try_inv().ok_or(CoreError::ZeroLeadingCoefficient)?;
        let order = self.order();
        let mut h = Self::constant(T::zero(), order);
        if order >= 1 {
            h.coeffs[1] = a1_inv.clone();
        }
        for k in 2..=order {
            // With h correct mod z^k, the z^k defect of self(h) is linear in
            // the next coefficient through a factor a_1.
            let defect = self.compose(&h)?.coeff(k);
            h.coeffs[k] = -(a1_inv.clone() * defect);
        }
        Ok(h)
    }

    /// Evaluate at a point by Horner's rule.
    pub fn eval(&self, z: T) -> T {
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * z.clone() + c.clone();
        }
        acc
    }

    /// Inversion `g(z) = 1/f(1/z)` sending the normalized disc class to the
    /// class at infinity: `z - a_2 + (a_2^2 - a_3)/z + ...`.
    ///
    /// The tail of the result is determined through `b_j = B_{j+1}` where
    /// `B = 1/(a_1 + a_2 u + ...)`, so an input of order `N` yields
    /// `b_0..b_{N-2}`.
    pub fn invert_at_infinity(&self) -> Result<TruncatedLaurentInf<T>> {
        if !self.coeff(0).is_zero() {
            return Err(CoreError::NonzeroConstantTerm);
        }
        if self.coeff(1).is_zero() {
            return Err(CoreError::ZeroLeadingCoefficient);
        }
        let n = self.order();
        assert!(n >= 2, "need order >= 2 to produce any tail coefficient");
        // A(u) = a_1 + a_2 u + ... + a_N u^{N-1}
        let a = Self::from_coeffs((1..=n).map(|k| self.coeff(k)).collect());
        let b = a.reciprocal()?;
        Ok(TruncatedLaurentInf {
            lead: b.coeff(0),
            coeffs: (1..=n - 1).map(|k| b.coeff(k)).collect(),
        })
    }

    /// Coefficients of `1/f` for `f` in the disc class: the return value
    /// `v` satisfies `1/f = Σ_j v[j] z^{j-1}` (so `v[0]` multiplies `1/z`).
    pub fn reciprocal_coeffs(&self) -> Result<Vec<T>> {
        if !self.coeff(0).is_zero() || self.coeff(1).is_zero() {
            return Err(CoreError::ZeroLeadingCoefficient);
        }
        let n = self.order();
        let a = Self::from_coeffs((1..=n).map(|k| self.coeff(k)).collect());
        Ok(a.reciprocal()?.coeffs)
    }

    /// Schwarzian derivative `f'''/f' - (3/2)(f''/f')^2` as a truncated series.
    pub fn schwarzian(&self) -> Result<Self> {
        let d1 = self.derivative();
        if d1.coeff(0).is_zero() {
            return Err(CoreError::ZeroLeadingCoefficient);
        }
        let d2 = d1.derivative();
        let d3 = d2.derivative();
        let order = d3.order();
        let first = d3.div(&d1.truncated(order))?;
        let ratio = d2.truncated(order).div(&d1.truncated(order))?;
        let second = ratio.mul(&ratio).scale(&T::from_int(3).div_int(2));
        Ok(first.sub(&second))
    }
}

impl<T: Coeff> TruncatedLaurentInf<T> {
    pub fn new(lead: T, coeffs: Vec<T>) -> Self {
        Self { lead, coeffs }
    }

    /// `z` itself (all tail coefficients zero).
    pub fn identity(order: usize) -> Self {
        Self { lead: T::one(), coeffs: vec![T::zero(); order + 1] }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// `b_k`, the coefficient of `z^{-k}`.
    pub fn b(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    pub fn is_normalized(&self) -> bool {
        self.lead == T::one()
    }

    /// Inverse inversion: `f(z) = 1/g(1/z)` back in the disc class.
    /// An input with tail `b_0..b_M` determines `a_1..a_{M+2}`.
    pub fn invert_at_origin(&self) -> Result<TruncatedTaylor<T>> {
        if self.lead.is_zero() {
            return Err(CoreError::ZeroLeadingCoefficient);
        }
        let m = self.order();
        // g(1/z) = z^{-1} (lead + b_0 z + b_1 z^2 + ...)
        let mut denom = Vec::with_capacity(m + 2);
        denom.push(self.lead.clone());
        denom.extend((0..=m).map(|k| self.b(k)));
        let denom = TruncatedTaylor::from_coeffs(denom);
        let rec = denom.reciprocal()?;
        let mut coeffs = vec![T::zero(); m + 3];
        for (j, c) in rec.coeffs().iter().enumerate() {
            coeffs[j + 1] = c.clone();
        }
        Ok(TruncatedTaylor::from_coeffs(coeffs))
    }

    /// The reciprocal expansion `1/g = Σ_{n>=1} p_n z^{-n}` through the
    /// triangular recursion `p_1 = 1`, `p_k = -Σ_{i=0}^{k-2} b_i p_{k-1-i}`.
    /// Requires `lead = 1`. Returns `p_1..p_{order+2}`.
    pub fn reciprocal_coeffs(&self) -> Result<Vec<T>> {
        if self.lead != T::one() {
            return Err(CoreError::ZeroLeadingCoefficient);
        }
        let count = self.order() + 2;
        let mut p = Vec::with_capacity(count);
        p.push(T::one());
        for k in 2..=count {
            let mut acc = T::zero();
            for i in 0..=(k - 2) {
                acc = acc + self.b(i) * p[k - 2 - i].clone();
            }
            p.push(-acc);
        }
        Ok(p)
    }

    /// Evaluate at a point (away from the origin).
    pub fn eval(&self, z: T) -> T {
        let zinv = z.try_inv().expect("evaluation point must be nonzero");
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = (acc + c.clone()) * zinv.clone();
        }
        // acc now equals sum b_k z^{-k-1}; undo the extra factor.
        acc * z.clone() + self.lead.clone() * z
    }
}

/// Coefficient magnitude comparisons, available on the numeric backends.
pub trait AbsCoeff: Coeff {
    fn abs_exceeds_int(&self, bound: i64) -> bool;
}

impl AbsCoeff for C64 {
    fn abs_exceeds_int(&self, bound: i64) -> bool {
        self.norm() > bound as f64
    }
}

impl AbsCoeff for Rat {
    fn abs_exceeds_int(&self, bound: i64) -> bool {
        self.abs() > Rat::from_int(bound)
    }
}

/// Indices `n >= 1` whose affine coefficient violates `|c_n| <= n + 1`.
/// An empty result means the necessary coefficient condition passes.
pub fn debranges_check<T: AbsCoeff>(f: &TruncatedTaylor<T>) -> Vec<usize> {
    let mut out = Vec::new();
    for n in 1..f.order() {
        if f.affine_coord(n).abs_exceeds_int(n as i64 + 1) {
            out.push(n);
        }
    }
    out
}

/// Arithmetic dispatcher mirroring the batch interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArithmeticKind {
    Mul,
    Div,
    Log,
    Exp,
    Derivative,
}

pub fn arithmetic<T: Coeff>(
    f: &TruncatedTaylor<T>,
    g: Option<&TruncatedTaylor<T>>,
    kind: ArithmeticKind,
) -> Result<TruncatedTaylor<T>> {
    match kind {
        ArithmeticKind::Mul => Ok(f.mul(g.expect("mul needs two operands"))),
        ArithmeticKind::Div => f.div(g.expect("div needs two operands")),
        ArithmeticKind::Log => f.log(),
        ArithmeticKind::Exp => f.exp(),
        ArithmeticKind::Derivative => Ok(f.derivative()),
    }
}

// ---------------------------------------------------------------------------
// JSON wire format
// ---------------------------------------------------------------------------

/// Wire format: `{"order": N, "coeffs": [[re, im], ...], "kind": ...}`.
/// For `taylor`, `coeffs[k]` is the coefficient of `z^k`. For `laurent_inf`,
/// `coeffs[0]` is the coefficient of `z` and `coeffs[k]` of `z^{1-k}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesJson {
    pub order: usize,
    pub coeffs: Vec<[f64; 2]>,
    pub kind: SeriesKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    Taylor,
    LaurentInf,
}

impl SeriesJson {
    pub fn from_taylor(f: &TruncatedTaylor<C64>) -> Self {
        Self {
            order: f.order(),
            coeffs: f.coeffs().iter().map(|c| [c.re, c.im]).collect(),
            kind: SeriesKind::Taylor,
        }
    }

    pub fn from_laurent(g: &TruncatedLaurentInf<C64>) -> Self {
        let mut coeffs = vec![[g.lead.re, g.lead.im]];
        coeffs.extend(g.coeffs.iter().map(|c| [c.re, c.im]));
        Self { order: g.order(), coeffs, kind: SeriesKind::LaurentInf }
    }

    pub fn to_taylor(&self) -> Option<TruncatedTaylor<C64>> {
        if self.kind != SeriesKind::Taylor {
            return None;
        }
        Some(TruncatedTaylor::from_coeffs(
            self.coeffs.iter().map(|c| C64::new(c[0], c[1])).collect(),
        ))
    }

    pub fn to_laurent(&self) -> Option<TruncatedLaurentInf<C64>> {
        if self.kind != SeriesKind::LaurentInf || self.coeffs.is_empty() {
            return None;
        }
        Some(TruncatedLaurentInf::new(
            C64::new(self.coeffs[0][0], self.coeffs[0][1]),
            self.coeffs[1..].iter().map(|c| C64::new(c[0], c[1])).collect(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{max_abs_diff, rat};

    fn tt_rat(coeffs: &[i64]) -> TruncatedTaylor<Rat> {
        TruncatedTaylor::from_coeffs(coeffs.iter().map(|&c| Rat::from_int(c)).collect())
    }

    #[test]
    fn log_of_one_is_zero() {
        let one = tt_rat(&[1, 0, 0, 0, 0]);
        assert!(one.log().unwrap().is_zero());
    }

    #[test]
    fn koebe_derivative() {
        // d/dz (z + 2z^2 + 3z^3) = 1 + 4z + 9z^2
        let k = TruncatedTaylor::<Rat>::koebe(3);
        let d = k.derivative();
        assert_eq!(d.coeffs(), &[rat(1, 1), rat(4, 1), rat(9, 1)]);
    }

    #[test]
    fn geometric_series_product() {
        // (1 - z)(1 + z + ... + z^N) = 1 - z^{N+1}, truncated to 1.
        let n = 9;
        let mut one_minus_z = TruncatedTaylor::<Rat>::constant(Rat::one(), n);
        one_minus_z.set_coeff(1, -Rat::one());
        let geo = TruncatedTaylor::from_coeffs(vec![Rat::one(); n + 1]);
        let prod = one_minus_z.mul(&geo);
        assert_eq!(prod, TruncatedTaylor::constant(Rat::one(), n));
    }

    #[test]
    fn compose_identities() {
        let f = tt_rat(&[0, 1, 3, -2, 5, 1]);
        let id = TruncatedTaylor::<Rat>::identity(5);
        assert_eq!(f.compose(&id).unwrap(), f);
        assert_eq!(id.compose(&f).unwrap(), f);
        // compose(z + z^2, z + z^2) = z + 2z^2 + 2z^3 + z^4
        let g = tt_rat(&[0, 1, 1, 0, 0]);
        let gg = g.compose(&g).unwrap();
        assert_eq!(gg, tt_rat(&[0, 1, 2, 2, 1]));
    }

    #[test]
    fn compose_rejects_constant_term() {
        let f = tt_rat(&[0, 1, 1]);
        let bad = tt_rat(&[1, 1, 0]);
        assert!(matches!(f.compose(&bad), Err(CoreError::NonzeroConstantTerm)));
    }

    #[test]
    fn reversion_catalan() {
        // Inverse of z + z^2 has coefficients signed Catalan numbers.
        let f = tt_rat(&[0, 1, 1, 0, 0, 0]);
        let h = f.reversion().unwrap();
        assert_eq!(h, tt_rat(&[0, 1, -1, 2, -5, 14]));
        assert_eq!(TruncatedTaylor::<Rat>::identity(4).reversion().unwrap(),
                   TruncatedTaylor::identity(4));
    }

    #[test]
    fn reversion_round_trip_rational() {
        let f = tt_rat(&[0, 1, -3, 2, 7, -1, 4, 0, -2, 5, 1, 2, -6]);
        let h = f.reversion().unwrap();
        let id = TruncatedTaylor::<Rat>::identity(f.order());
        assert_eq!(f.compose(&h).unwrap(), id);
        assert_eq!(h.compose(&f).unwrap(), id);
    }

    #[test]
    fn inversion_matches_closed_form() {
        // id -> z; Koebe -> z - 2 + 1/z.
        let idg = TruncatedTaylor::<Rat>::identity(6).invert_at_infinity().unwrap();
        assert_eq!(idg.lead, Rat::one());
        assert!(idg.coeffs.iter().all(|c| c.is_zero()));

        let g = TruncatedTaylor::<Rat>::koebe(8).invert_at_infinity().unwrap();
        assert_eq!(g.lead, Rat::one());
        assert_eq!(g.b(0), rat(-2, 1));
        assert_eq!(g.b(1), rat(1, 1));
        for k in 2..=g.order() {
            assert!(g.b(k).is_zero(), "b_{k} should vanish for Koebe");
        }
    }

    #[test]
    fn inversion_round_trip() {
        let f = tt_rat(&[0, 1, 2, -1, 3, 0, -4, 1, 5, 2, -3]);
        let g = f.invert_at_infinity().unwrap();
        let back = g.invert_at_origin().unwrap();
        for k in 0..=f.order() {
            assert_eq!(back.coeff(k), f.coeff(k), "coefficient {k}");
        }
    }

    #[test]
    fn reciprocal_coeffs_disc_and_infinity() {
        // 1/Koebe = (1-z)^2/z = 1/z - 2 + z.
        let v = TruncatedTaylor::<Rat>::koebe(7).reciprocal_coeffs().unwrap();
        assert_eq!(v[0], rat(1, 1));
        assert_eq!(v[1], rat(-2, 1));
        assert_eq!(v[2], rat(1, 1));
        assert!(v[3..].iter().all(|c| c.is_zero()));

        // p_1 = 1, p_2 = -b0, p_3 = b0^2 - b1 against series division.
        let g = TruncatedLaurentInf::new(Rat::one(), vec![rat(3, 1), rat(-2, 1), rat(5, 1)]);
        let p = g.reciprocal_coeffs().unwrap();
        assert_eq!(p[0], rat(1, 1));
        assert_eq!(p[1], rat(-3, 1));
        assert_eq!(p[2], rat(9 + 2, 1)); // b0^2 - b1 = 9 - (-2)
        // Division oracle: multiply back and check 1/g * g = 1 in the z^{-n} scale.
        // Work in u = 1/z: g = u^{-1}(1 + b0 u + b1 u^2 + ...) and
        // 1/g = u (1 + b0 u + ...)^{-1} = sum p_n u^n.
        let denom = TruncatedTaylor::from_coeffs(vec![Rat::one(), rat(3, 1), rat(-2, 1), rat(5, 1)]);
        let rec = denom.reciprocal().unwrap();
        for (n, pn) in p.iter().enumerate().take(rec.order() + 1) {
            assert_eq!(*pn, rec.coeff(n), "p_{}", n + 1);
        }
    }

    #[test]
    fn exp_log_round_trip() {
        let f = tt_rat(&[0, 1, 4, -2, 3, 1, -5, 2]);
        let ratio = TruncatedTaylor::from_coeffs(
            (1..=f.order()).map(|k| f.coeff(k)).collect::<Vec<_>>(),
        );
        let back = ratio.log().unwrap().exp().unwrap();
        assert_eq!(back, ratio);
    }

    #[test]
    fn schwarzian_of_moebius_vanishes() {
        let id = TruncatedTaylor::<Rat>::identity(8);
        assert!(id.schwarzian().unwrap().is_zero());
    }

    #[test]
    fn schwarzian_quadratic_map() {
        // S(z + e z^2) = -6e^2 (1 + 2ez)^{-2}; frozen from the pre-Schwarzian
        // oracle S = (log f')'' - (1/2)((log f')')^2.
        let e = rat(1, 3);
        let mut f = TruncatedTaylor::<Rat>::identity(8);
        f.set_coeff(2, e.clone());
        let s = f.schwarzian().unwrap();
        let minus6e2 = rat(-6, 1) * e.clone() * e.clone();
        assert_eq!(s.coeff(0), minus6e2);

        // Independent route via log-derivative.
        let d1 = f.derivative();
        let lg = d1.log().unwrap();
        let pre = lg.derivative();
        let oracle = pre.derivative().sub(
            &pre.mul(&pre).truncated(pre.order().saturating_sub(1)).scale(&rat(1, 2)),
        );
        for k in 0..=s.order().min(oracle.order()) {
            assert_eq!(s.coeff(k), oracle.coeff(k), "coefficient {k}");
        }
    }

    #[test]
    fn schwarzian_koebe_against_quotient_oracle() {
        let k = TruncatedTaylor::<Rat>::koebe(11);
        let s = k.schwarzian().unwrap();
        let d1 = k.derivative();
        let lg = d1.log().unwrap();
        let pre = lg.derivative();
        let oracle = pre
            .derivative()
            .sub(&pre.mul(&pre).truncated(pre.order() - 1).scale(&rat(1, 2)));
        for i in 0..=s.order().min(oracle.order()) {
            assert_eq!(s.coeff(i), oracle.coeff(i));
        }
    }

    #[test]
    fn debranges_examples() {
        assert!(debranges_check(&TruncatedTaylor::<Rat>::koebe(10)).is_empty());
        assert!(debranges_check(&TruncatedTaylor::<Rat>::identity(10)).is_empty());
        let bad = tt_rat(&[0, 1, 5]);
        assert_eq!(debranges_check(&bad), vec![1]);
    }

    #[test]
    fn float_backend_agrees_with_rational() {
        let coeffs = [0i64, 1, -2, 3, 1, -1, 2];
        let fr = tt_rat(&coeffs);
        let fc = TruncatedTaylor::from_coeffs(
            coeffs.iter().map(|&c| C64::new(c as f64, 0.0)).collect::<Vec<_>>(),
        );
        let hr = fr.reversion().unwrap();
        let hc = fc.reversion().unwrap();
        let hr_f: Vec<C64> = hr
            .coeffs()
            .iter()
            .map(|r| C64::new(crate::scalar::rat_to_f64(r), 0.0))
            .collect();
        assert!(max_abs_diff(&hr_f, hc.coeffs()) < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let f = TruncatedTaylor::from_coeffs(vec![
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(-0.5, 0.25),
        ]);
        let js = SeriesJson::from_taylor(&f);
        let text = serde_json::to_string(&js).unwrap();
        let back: SeriesJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_taylor().unwrap(), f);

        let g = TruncatedLaurentInf::new(C64::new(1.0, 0.0), vec![C64::new(2.0, -1.0)]);
        let js = SeriesJson::from_laurent(&g);
        assert_eq!(js.to_laurent().unwrap(), g);
    }
}
