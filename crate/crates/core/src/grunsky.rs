//! Grunsky matrices, Faber polynomials, the Faber–Grunsky identities, the
//! period-map embedding into the Siegel disc, and the residue operator.
//!
//! The three log-kernels
//!
//! ```text
//! log (f(z)-f(w))/(z-w) = -Σ c_{mn} z^m w^n            |z|,|w| < 1
//! log (g(z)-g(w))/(z-w) = -Σ d_{mn} z^{-m} w^{-n}      |z|,|w| > 1
//! log (f(z)-g(w))/(z-w) = -Σ e_{mn} z^m w^{-n}         |z| < 1 < |w|
//! ```
//!
//! are computed exactly: the difference quotient is expanded by synthetic
//! division (so the diagonal never sees a 0/0), variables at infinity are
//! substituted as `1/z`, and one bivariate logarithm of a unit kernel is
//! taken per block.
//!
//! Unified coefficients (with `R = 1`): `b_{-m,-n} = c_{mn}` for `m,n >= 0`,
//! `b_{mn} = d_{mn}` for `m,n >= 1`, and the mixed block `b_{n,-m} = e_{mn}`
//! for `n >= 1, m >= 0`. In that notation the Faber polynomials satisfy
//!
//! ```text
//! G_n(g(w)) = w^n          + n Σ_{m>=1} b_{n,m}   w^{-m}
//! G_n(f(w)) = w^n + n b_{n,0} + n Σ_{m>=1} b_{n,-m} w^m
//! F_n(g(w)) = w^{-n} - n b_{-n,0} + n Σ_{m>=1} b_{m,-n} w^{-m}
//! F_n(f(w)) = w^{-n}       + n Σ_{m>=1} b_{-n,-m} w^m
//! ```
//!
//! (each with the leading `w^{±n}` term written out), which is the form the
//! identity tests verify coefficientwise.

use crate::error::{CoreError, Result};
use crate::scalar::{C64, Coeff};
use crate::series::{TruncatedLaurentInf, TruncatedTaylor};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

// ---------------------------------------------------------------------------
// Bivariate truncated polynomials
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sector {
    /// Monomials `z^i w^j`.
    PlusPlus,
    /// Monomials `z^{-i} w^{-j}`.
    MinusMinus,
    /// Monomials `z^i w^{-j}`.
    PlusMinus,
}

impl Sector {
    pub fn name(&self) -> &'static str {
        match self {
            Sector::PlusPlus => "++",
            Sector::MinusMinus => "--",
            Sector::PlusMinus => "+-",
        }
    }
}

/// Dense rectangle of coefficients `m[i][j]`, `0 <= i, j <= n`, with a fixed
/// sector convention for what the exponents mean.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariateTruncated<T> {
    n: usize,
    sector: Sector,
    data: Vec<T>,
}

impl<T: Coeff> BivariateTruncated<T> {
    pub fn zero(n: usize, sector: Sector) -> Self {
        Self { n, sector, data: vec![T::zero(); (n + 1) * (n + 1)] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if i > self.n || j > self.n {
            T::zero()
        } else {
            self.data[i * (self.n + 1) + j].clone()
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        assert!(i <= self.n && j <= self.n);
        self.data[i * (self.n + 1) + j] = v;
    }

    pub fn add_assign(&mut self, i: usize, j: usize, v: T) {
        if i <= self.n && j <= self.n {
            let idx = i * (self.n + 1) + j;
            self.data[idx] = self.data[idx].clone() + v;
        }
    }

    fn check_sector(&self, rhs: &Self) -> Result<()> {
        if self.sector != rhs.sector {
            return Err(CoreError::SectorMismatch(self.sector.name(), rhs.sector.name()));
        }
        Ok(())
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check_sector(rhs)?;
        let n = self.n.min(rhs.n);
        let mut out = Self::zero(n, self.sector);
        for i in 0..=n {
            for j in 0..=n {
                out.set(i, j, self.get(i, j) + rhs.get(i, j));
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: &T) -> Self {
        Self {
            n: self.n,
            sector: self.sector,
            data: self.data.iter().map(|x| x.clone() * s.clone()).collect(),
        }
    }

    /// Truncated product on the coefficient rectangle.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.check_sector(rhs)?;
        let n = self.n.min(rhs.n);
        let mut out = Self::zero(n, self.sector);
        for i1 in 0..=n {
            for j1 in 0..=n {
                let a = self.get(i1, j1);
                if a.is_zero() {
                    continue;
                }
                for i2 in 0..=(n - i1) {
                    for j2 in 0..=(n - j1) {
                        let b = rhs.get(i2, j2);
                        if b.is_zero() {
                            continue;
                        }
                        out.add_assign(i1 + i2, j1 + j2, a.clone() * b);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Row `i` (the `z^i` coefficient) as a polynomial in the second variable.
    fn row(&self, i: usize) -> TruncatedTaylor<T> {
        TruncatedTaylor::from_coeffs((0..=self.n).map(|j| self.get(i, j)).collect())
    }

    fn set_row(&mut self, i: usize, r: &TruncatedTaylor<T>) {
        for j in 0..=self.n {
            self.set(i, j, r.coeff(j));
        }
    }

    /// Logarithm of a kernel `Q` with `Q(0,0) = 1`, via the first-variable
    /// derivative identity `∂_z log Q = (∂_z Q) / Q` solved row by row.
    /// (The alternating `log(1+u)` series is numerically useless here: its
    /// partial sums blow up before cancelling for kernels with growing
    /// coefficients.)
    pub fn log(&self) -> Result<Self> {
        if self.get(0, 0) != T::one() {
            return Err(CoreError::DegenerateDiagonal);
        }
        let n = self.n;
        let rows: Vec<TruncatedTaylor<T>> = (0..=n).map(|i| self.row(i)).collect();
        // inv rows of Q^{-1} in the first variable, coefficients in T[w].
        let inv0 = rows[0].reciprocal()?;
        let mut inv: Vec<TruncatedTaylor<T>> = Vec::with_capacity(n + 1);
        inv.push(inv0.clone());
        for k in 1..=n {
            let mut acc = TruncatedTaylor::constant(T::zero(), n);
            for j in 1..=k {
                acc = acc.add(&rows[j].mul(&inv[k - j]));
            }
            inv.push(inv0.mul(&acc).neg());
        }
        let mut out = Self::zero(n, self.sector);
        out.set_row(0, &rows[0].log()?);
        for k in 1..=n {
            // L_k = (1/k) Σ_{j=1}^{k} j Q_j inv_{k-j}
            let mut acc = TruncatedTaylor::constant(T::zero(), n);
            for j in 1..=k {
                acc = acc.add(&rows[j].scale(&T::from_int(j as i64)).mul(&inv[k - j]));
            }
            out.set_row(k, &acc.scale(&T::one().div_int(k as i64)));
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Grunsky blocks
// ---------------------------------------------------------------------------

/// The synthetic-division expansion of `(f(z) - f(w))/(z - w)` for a disc
/// series: `Σ_k a_k Σ_{i+j=k-1} z^i w^j`, exact on the rectangle.
pub fn difference_quotient<T: Coeff>(f: &TruncatedTaylor<T>, n: usize) -> BivariateTruncated<T> {
    let mut q = BivariateTruncated::zero(n, Sector::PlusPlus);
    for k in 1..=f.order() {
        let a = f.coeff(k);
        if a.is_zero() {
            continue;
        }
        for i in 0..k {
            let j = k - 1 - i;
            q.add_assign(i, j, a.clone());
        }
    }
    q
}

/// c-block of a normalized disc map (`a_1 = 1`, so `c_{00} = 0` holds
/// exactly in any backend). Input order must be at least `2n + 1` for the
/// rectangle to be exact.
pub fn grunsky_disc<T: Coeff>(f: &TruncatedTaylor<T>, n: usize) -> Result<BivariateTruncated<T>> {
    if !f.coeff(0).is_zero() {
        return Err(CoreError::NonzeroConstantTerm);
    }
    if f.coeff(1) != T::one() {
        return Err(CoreError::ZeroLeadingCoefficient);
    }
    let q = difference_quotient(f, n);
    if q.get(0, 0).is_zero() {
        return Err(CoreError::DegenerateDiagonal);
    }
    Ok(q.log()?.scale(&-T::one()))
}

/// c-block allowing a general nonzero lead `a_1`; `c_{00} = -log a_1` enters
/// through the complex logarithm, so this entry point is float-only.
pub fn grunsky_disc_c64(f: &TruncatedTaylor<C64>, n: usize) -> Result<BivariateTruncated<C64>> {
    if !f.coeff(0).is_zero() {
        return Err(CoreError::NonzeroConstantTerm);
    }
    let a1 = f.coeff(1);
    if a1.is_zero() {
        return Err(CoreError::ZeroLeadingCoefficient);
    }
    let mut scaled = f.scale(&a1.try_inv().unwrap());
    // a_1 / a_1 must be the exact unit; floating division noise is not a
    // normalization failure.
    scaled.set_coeff(1, C64::new(1.0, 0.0));
    let mut c = grunsky_disc(&scaled, n)?;
    c.add_assign(0, 0, -a1.ln());
    Ok(c)
}

/// d-block of a map at infinity. The kernel in the substituted variables
/// `1/z, 1/w` is `lead - Σ_k b_k z w Σ_{i+j=k-1} z^i w^j`.
pub fn grunsky_infinity<T: Coeff>(
    g: &TruncatedLaurentInf<T>,
    n: usize,
) -> Result<BivariateTruncated<T>> {
    if g.lead != T::one() {
        return Err(CoreError::ZeroLeadingCoefficient);
    }
    let mut kernel = BivariateTruncated::zero(n, Sector::MinusMinus);
    kernel.set(0, 0, T::one());
    for k in 1..=g.order() {
        let b = g.b(k);
        if b.is_zero() {
            continue;
        }
        for i in 0..k {
            let j = k - 1 - i;
            kernel.add_assign(i + 1, j + 1, -b.clone());
        }
    }
    Ok(kernel.log()?.scale(&-T::one()))
}

/// d-block for a general positive lead `R`; `d_{00} = -log R`.
pub fn grunsky_infinity_c64(
    g: &TruncatedLaurentInf<C64>,
    n: usize,
) -> Result<BivariateTruncated<C64>> {
    let lead = g.lead;
    if lead.is_zero() {
        return Err(CoreError::ZeroLeadingCoefficient);
    }
    let inv = lead.try_inv().unwrap();
    let scaled = TruncatedLaurentInf::new(
        C64::new(1.0, 0.0),
        g.coeffs.iter().map(|b| b * inv).collect(),
    );
    let mut d = grunsky_infinity(&scaled, n)?;
    d.add_assign(0, 0, -lead.ln());
    Ok(d)
}

/// e-block of a complementary pair. In the variables `(z, 1/w)` the kernel is
/// `[lead + (b_0 - f(z)) w + Σ_{k>=1} b_k w^{k+1}] / (1 - z w)`;
/// this entry point requires the normalized lead `R = 1`.
pub fn grunsky_mixed<T: Coeff>(
    f: &TruncatedTaylor<T>,
    g: &TruncatedLaurentInf<T>,
    n: usize,
) -> Result<BivariateTruncated<T>> {
    if g.lead != T::one() {
        return Err(CoreError::ZeroLeadingCoefficient);
    }
    let mut numer = BivariateTruncated::zero(n, Sector::PlusMinus);
    numer.set(0, 0, T::one());
    if n >= 1 {
        numer.set(0, 1, g.b(0));
        for i in 1..=n.min(f.order()) {
            numer.set(i, 1, -f.coeff(i));
        }
        for k in 1..=g.order() {
            if k < n {
                numer.set(0, k + 1, g.b(k));
            }
        }
    }
    // 1/(1 - z w) = Σ (z w)^k on the rectangle.
    let mut geo = BivariateTruncated::zero(n, Sector::PlusMinus);
    for k in 0..=n {
        geo.set(k, k, T::one());
    }
    let kernel = numer.mul(&geo)?;
    if kernel.get(0, 0) != T::one() {
        return Err(CoreError::DegenerateDiagonal);
    }
    Ok(kernel.log()?.scale(&-T::one()))
}

/// e-block for a general lead `R != 0`: the kernel is normalized by `R` and
/// the constant picks up `e_{00} = -log R`.
pub fn grunsky_mixed_c64(
    f: &TruncatedTaylor<C64>,
    g: &TruncatedLaurentInf<C64>,
    n: usize,
) -> Result<BivariateTruncated<C64>> {
    let lead = g.lead;
    if lead.is_zero() {
        return Err(CoreError::ZeroLeadingCoefficient);
    }
    let inv = lead.try_inv().unwrap();
    // The f coefficients inside the kernel are divided by the lead as well,
    // so normalize both the map at infinity and a rescaled disc map.
    let g_norm = TruncatedLaurentInf::new(
        C64::new(1.0, 0.0),
        g.coeffs.iter().map(|b| b * inv).collect(),
    );
    let f_scaled = f.scale(&inv);
    let mut kernel = mixed_kernel_general(&f_scaled, &g_norm, n)?;
    kernel.add_assign(0, 0, -lead.ln());
    Ok(kernel)
}

fn mixed_kernel_general(
    f_over_lead: &TruncatedTaylor<C64>,
    g_norm: &TruncatedLaurentInf<C64>,
    n: usize,
) -> Result<BivariateTruncated<C64>> {
    let mut numer = BivariateTruncated::zero(n, Sector::PlusMinus);
    numer.set(0, 0, C64::new(1.0, 0.0));
    if n >= 1 {
        numer.set(0, 1, g_norm.b(0));
        for i in 1..=n.min(f_over_lead.order()) {
            numer.set(i, 1, -f_over_lead.coeff(i));
        }
        for k in 1..=g_norm.order() {
            if k < n {
                numer.set(0, k + 1, g_norm.b(k));
            }
        }
    }
    let mut geo = BivariateTruncated::zero(n, Sector::PlusMinus);
    for k in 0..=n {
        geo.set(k, k, C64::new(1.0, 0.0));
    }
    let kernel = numer.mul(&geo)?;
    Ok(kernel.log()?.scale(&C64::new(-1.0, 0.0)))
}

/// All blocks of a complementary pair, plus the leading radii.
#[derive(Debug, Clone)]
pub struct GrunskyData {
    pub n: usize,
    pub c: Option<BivariateTruncated<C64>>,
    pub d: Option<BivariateTruncated<C64>>,
    pub e: Option<BivariateTruncated<C64>>,
    pub r: f64,
    pub big_r: f64,
}

impl GrunskyData {
    pub fn pair(f: &TruncatedTaylor<C64>, g: &TruncatedLaurentInf<C64>, n: usize) -> Result<Self> {
        let r = f.coeff(1).norm();
        let big_r = g.lead.norm();
        Ok(Self {
            n,
            c: Some(grunsky_disc_c64(f, n)?),
            d: Some(grunsky_infinity_c64(g, n)?),
            e: Some(grunsky_mixed_c64(f, g, n)?),
            r,
            big_r,
        })
    }

    pub fn disc_only(f: &TruncatedTaylor<C64>, n: usize) -> Result<Self> {
        let r = f.coeff(1).norm();
        Ok(Self { n, c: Some(grunsky_disc_c64(f, n)?), d: None, e: None, r, big_r: 1.0 })
    }

    pub fn infinity_only(g: &TruncatedLaurentInf<C64>, n: usize) -> Result<Self> {
        let big_r = g.lead.norm();
        Ok(Self { n, c: None, d: None, e: None, r: 1.0, big_r }.with_d(grunsky_infinity_c64(g, n)?))
    }

    fn with_d(mut self, d: BivariateTruncated<C64>) -> Self {
        self.d = Some(d);
        self
    }

    /// Unified coefficient `b_{i,j}` (assumes `R = 1`):
    /// `b_{-m,-n} = c_{mn}`, `b_{mn} = d_{mn}`, mixed `b_{n,-m} = e_{mn}`
    /// extended symmetrically.
    pub fn b(&self, i: i64, j: i64) -> C64 {
        let zero = C64::new(0.0, 0.0);
        if i <= 0 && j <= 0 {
            self.c.as_ref().map_or(zero, |c| c.get((-i) as usize, (-j) as usize))
        } else if i > 0 && j > 0 {
            self.d.as_ref().map_or(zero, |d| d.get(i as usize, j as usize))
        } else if i > 0 {
            self.e.as_ref().map_or(zero, |e| e.get((-j) as usize, i as usize))
        } else {
            self.e.as_ref().map_or(zero, |e| e.get((-i) as usize, j as usize))
        }
    }

    /// Largest symmetry defect `max |m_{ij} - m_{ji}|` over the c and d blocks.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for block in [&self.c, &self.d].into_iter().flatten() {
            for i in 0..=block.n() {
                for j in 0..i {
                    worst = worst.max((block.get(i, j) - block.get(j, i)).norm());
                }
            }
        }
        worst
    }
}

// ---------------------------------------------------------------------------
// Faber polynomials
// ---------------------------------------------------------------------------

/// Faber polynomials of a pair: `g_polys[n-1]` is `G_n` as coefficients in
/// `w^0..w^n`; `f_polys[n-1]` is `F_n` as coefficients in `w^0, w^-1..w^-n`.
#[derive(Debug, Clone)]
pub struct FaberSet<T> {
    pub g_polys: Vec<Vec<T>>,
    pub f_polys: Vec<Vec<T>>,
}

/// `G_n` extracted from `log[(g(z) - w)/z] = -Σ G_n(w) z^{-n}/n`
/// (normalized lead). Exact for polynomial data.
pub fn faber_g<T: Coeff>(g: &TruncatedLaurentInf<T>, n: usize) -> Result<Vec<Vec<T>>> {
    if g.lead != T::one() {
        return Err(CoreError::ZeroLeadingCoefficient);
    }
    // Kernel in s = 1/z: H(s, w) = 1 + (b_0 - w) s + Σ_k b_k s^{k+1};
    // we track w-degree explicitly, so store as PlusMinus-free bivariate
    // with j meaning w^j here.
    let mut h = BivariateTruncated::zero(n, Sector::PlusPlus);
    h.set(0, 0, T::one());
    if n >= 1 {
        h.set(1, 0, g.b(0));
        h.set(1, 1, -T::one());
        for k in 1..=g.order() {
            if k < n {
                h.set(k + 1, 0, g.b(k));
            }
        }
    }
    let lg = h.log()?;
    let mut out = Vec::with_capacity(n);
    for m in 1..=n {
        let poly: Vec<T> = (0..=m)
            .map(|j| -(lg.get(m, j) * T::from_int(m as i64)))
            .collect();
        out.push(poly);
    }
    Ok(out)
}

/// `F_n` extracted from `log[(w - f(z))/w] = log(f/z) - Σ F_n(w) z^n/n`;
/// `F_n` is returned in the variable `u = 1/w`.
pub fn faber_f<T: Coeff>(f: &TruncatedTaylor<T>, n: usize) -> Result<Vec<Vec<T>>> {
    if !f.coeff(0).is_zero() || f.coeff(1) != T::one() {
        return Err(CoreError::ZeroLeadingCoefficient);
    }
    // The constant terms of F_m need log(f/z) through z^n; extend the
    // polynomial explicitly when it is shorter.
    let f = f.padded(n + 1);
    let f = &f;
    // log(1 - f(z) u) over the (z, u) rectangle.
    let mut fu = BivariateTruncated::zero(n, Sector::PlusMinus);
    fu.set(0, 0, T::one());
    for k in 1..=f.order().min(n) {
        fu.set(k, 1, -f.coeff(k));
    }
    let log_fu = fu.log()?;
    // log(f/z) univariate.
    let f_over_z = TruncatedTaylor::from_coeffs((1..=f.order()).map(|k| f.coeff(k)).collect());
    let log_fz = f_over_z.log()?;
    let mut out = Vec::with_capacity(n);
    for m in 1..=n {
        let mut poly: Vec<T> = (0..=m)
            .map(|j| -(log_fu.get(m, j) * T::from_int(m as i64)))
            .collect();
        poly[0] = poly[0].clone() + log_fz.coeff(m) * T::from_int(m as i64);
        out.push(poly);
    }
    Ok(out)
}

pub fn faber_pair<T: Coeff>(
    f: &TruncatedTaylor<T>,
    g: &TruncatedLaurentInf<T>,
    n: usize,
) -> Result<FaberSet<T>> {
    Ok(FaberSet { g_polys: faber_g(g, n)?, f_polys: faber_f(f, n)? })
}

// ---------------------------------------------------------------------------
// Symmetric Laurent slices (helper for composing polynomials with maps)
// ---------------------------------------------------------------------------

/// Coefficients of `z^k` for `k` in `-band..=band`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentSlice<T> {
    pub band: usize,
    pub coeffs: Vec<T>,
}

impl<T: Coeff> LaurentSlice<T> {
    pub fn zero(band: usize) -> Self {
        Self { band, coeffs: vec![T::zero(); 2 * band + 1] }
    }

    pub fn get(&self, k: i64) -> T {
        let idx = k + self.band as i64;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            T::zero()
        } else {
            self.coeffs[idx as usize].clone()
        }
    }

    pub fn set(&mut self, k: i64, v: T) {
        let idx = (k + self.band as i64) as usize;
        self.coeffs[idx] = v;
    }

    pub fn add_assign(&mut self, k: i64, v: T) {
        let idx = k + self.band as i64;
        if idx >= 0 && (idx as usize) < self.coeffs.len() {
            let idx = idx as usize;
            self.coeffs[idx] = self.coeffs[idx].clone() + v;
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let band = self.band.min(rhs.band);
        let mut out = Self::zero(band);
        for k in -(band as i64)..=(band as i64) {
            out.set(k, self.get(k) + rhs.get(k));
        }
        out
    }

    /// Truncated product on the band.
    pub fn mul(&self, rhs: &Self) -> Self {
        let band = self.band.min(rhs.band);
        let mut out = Self::zero(band);
        for k1 in -(self.band as i64)..=(self.band as i64) {
            let a = self.get(k1);
            if a.is_zero() {
                continue;
            }
            for k2 in -(rhs.band as i64)..=(rhs.band as i64) {
                let b = rhs.get(k2);
                if b.is_zero() {
                    continue;
                }
                out.add_assign(k1 + k2, a.clone() * b);
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64
    where
        T: Into<C64> + Copy,
    {
        self.coeffs.iter().map(|c| (*c).into().norm()).fold(0.0, f64::max)
    }

    /// Embed a map at infinity (`lead = 1`) on the band.
    pub fn from_laurent_inf(g: &TruncatedLaurentInf<T>, band: usize) -> Self {
        let mut out = Self::zero(band);
        out.add_assign(1, g.lead.clone());
        for k in 0..=g.order() {
            out.add_assign(-(k as i64), g.b(k));
        }
        out
    }

    /// Embed a disc map on the band.
    pub fn from_taylor(f: &TruncatedTaylor<T>, band: usize) -> Self {
        let mut out = Self::zero(band);
        for k in 0..=f.order().min(band) {
            out.set(k as i64, f.coeff(k));
        }
        out
    }

    /// Evaluate a polynomial in `w` (coefficients of `w^0..`) at this slice.
    pub fn eval_poly(poly: &[T], at: &Self) -> Self {
        let mut acc = Self::zero(at.band);
        for c in poly.iter().rev() {
            acc = acc.mul(at);
            acc.add_assign(0, c.clone());
        }
        acc
    }

    /// Evaluate a polynomial in `1/w` (coefficients `[u^0, u^1, ...]`) at this
    /// slice, where the reciprocal `1/at` must be supplied by the caller.
    pub fn eval_poly_reciprocal(poly: &[T], at_inv: &Self) -> Self {
        Self::eval_poly(poly, at_inv)
    }
}

/// `1/f` of a normalized disc map as a Laurent slice `z^{-1} + ...` on the band.
pub fn reciprocal_slice<T: Coeff>(f: &TruncatedTaylor<T>, band: usize) -> Result<LaurentSlice<T>> {
    let v = f.reciprocal_coeffs()?;
    let mut out = LaurentSlice::zero(band);
    for (j, c) in v.iter().enumerate() {
        out.add_assign(j as i64 - 1, c.clone());
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Siegel disc
// ---------------------------------------------------------------------------

/// Truncated normalized Grunsky operator `Z_{nm} = sqrt(nm) b_{-n,-m}`.
///
/// The symmetric square-root weighting is the normalization that turns the
/// Grunsky inequality into the operator bound `|Z| <= 1`; it is recorded in
/// the `weighting` field of every export.
#[derive(Debug, Clone)]
pub struct SiegelPoint {
    pub n: usize,
    pub z: DMatrix<C64>,
    pub weighting: &'static str,
}

pub const SIEGEL_WEIGHTING: &str = "sqrt(n*m) * b_{-n,-m}";

/// Result of the Siegel-disc membership check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SiegelCheck {
    pub symmetric: bool,
    pub spectral_gap: f64,
    pub kahler_potential: f64,
}

/// Vectors and operator of the period-map embedding.
#[derive(Debug, Clone)]
pub struct YkEmbedding {
    pub point: SiegelPoint,
    /// `w_n(z) = F_n(f(z))`, via polynomial composition with `1/f`.
    pub vectors_compose: Vec<LaurentSlice<C64>>,
    /// `w_n(z) = z^{-n} + n Σ_m b_{-n,-m} z^m`, via the Grunsky rows.
    pub vectors_grunsky: Vec<LaurentSlice<C64>>,
}

pub fn yk_embedding(f: &TruncatedTaylor<C64>, n: usize) -> Result<YkEmbedding> {
    let c = grunsky_disc(f, n)?;
    let f_polys = faber_f(f, n)?;
    // Compose on a doubled internal band: truncation during the Horner steps
    // can only contaminate the top n entries, so the [-n, n] window of the
    // folded result is exact.
    let band = n;
    let wide = 2 * n;
    let inv = reciprocal_slice(f, wide)?;

    let mut vectors_compose = Vec::with_capacity(n);
    let mut vectors_grunsky = Vec::with_capacity(n);
    for m in 1..=n {
        let composed = LaurentSlice::eval_poly_reciprocal(&f_polys[m - 1], &inv);
        let mut narrow = LaurentSlice::zero(band);
        for k in -(band as i64)..=(band as i64) {
            narrow.set(k, composed.get(k));
        }
        vectors_compose.push(narrow);
        let mut row = LaurentSlice::zero(band);
        row.set(-(m as i64), C64::new(1.0, 0.0));
        for j in 1..=n {
            if j <= band {
                row.add_assign(j as i64, C64::new(m as f64, 0.0) * c.get(m, j));
            }
        }
        vectors_grunsky.push(row);
    }

    let mut z = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for i in 1..=n {
        for j in 1..=n {
            z[(i - 1, j - 1)] = C64::new(((i * j) as f64).sqrt(), 0.0) * c.get(i, j);
        }
    }
    Ok(YkEmbedding {
        point: SiegelPoint { n, z, weighting: SIEGEL_WEIGHTING },
        vectors_compose,
        vectors_grunsky,
    })
}

/// Symmetry verdict, spectral gap `1 - λ_max(Z* Z)` and Kähler potential
/// `-tr log(1 - Z* Z)`; the potential is undefined outside the open disc.
pub fn siegel_check(point: &SiegelPoint) -> Result<SiegelCheck> {
    let n = point.n;
    let mut sym = true;
    for i in 0..n {
        for j in 0..i {
            if (point.z[(i, j)] - point.z[(j, i)]).norm() > 1e-12 {
                sym = false;
            }
        }
    }
    let zs = point.z.adjoint() * &point.z;
    let eig = zs.symmetric_eigenvalues();
    let lambda_max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let gap = 1.0 - lambda_max;
    if gap <= 0.0 {
        return Err(CoreError::NotInDisc { gap });
    }
    let potential = -eig.iter().map(|l| (1.0 - l).ln()).sum::<f64>();
    Ok(SiegelCheck { symmetric: sym, spectral_gap: gap, kahler_potential: potential })
}

// ---------------------------------------------------------------------------
// Identity verification
// ---------------------------------------------------------------------------

/// Worst coefficientwise residual of the four Faber–Grunsky composition
/// identities for an exact polynomial pair, compared on the window
/// `|power| <= m_cmp` with Faber indices up to `n_max`.
///
/// Both inputs are treated as exact polynomials (coefficients beyond their
/// stored order are zero), which is what makes the identity windows exact.
pub fn faber_grunsky_residual(
    f: &TruncatedTaylor<C64>,
    g: &TruncatedLaurentInf<C64>,
    n_max: usize,
    m_cmp: usize,
) -> Result<f64> {
    let block = n_max.max(m_cmp);
    let c = grunsky_disc(&f.padded(2 * block + 1), block)?;
    let d = grunsky_infinity(g, block)?;
    let e = grunsky_mixed(f, g, block)?;
    let g_polys = faber_g(g, n_max)?;
    let f_polys = faber_f(f, n_max)?;

    let band = 4 * block.max(4) * (g.order() + 2);
    let g_slice = LaurentSlice::from_laurent_inf(g, band);
    let f_slice = LaurentSlice::from_taylor(f, band);
    let ginv = {
        let padded = TruncatedLaurentInf::new(
            g.lead,
            (0..=band).map(|k| g.b(k)).collect::<Vec<_>>(),
        );
        let p = padded.reciprocal_coeffs()?;
        let mut out = LaurentSlice::zero(band);
        for (i, pi) in p.iter().enumerate().take(band) {
            out.add_assign(-(i as i64 + 1), *pi);
        }
        out
    };
    let finv = reciprocal_slice(&f.padded(4 * (n_max + m_cmp)), band)?;

    let mut worst = 0.0f64;
    let mut record = |x: f64| {
        if x > worst {
            worst = x;
        }
    };

    for n in 1..=n_max {
        let ni = n as i64;
        let nf = n as f64;

        // (1) G_n(g(w)) = w^n + n Σ_{m>=1} d_{nm} w^{-m}
        let lhs = LaurentSlice::eval_poly(&g_polys[n - 1], &g_slice);
        for m in -(m_cmp as i64)..=(m_cmp as i64) {
            let mut expect = C64::new(0.0, 0.0);
            if m == ni {
                expect += C64::new(1.0, 0.0);
            }
            if m <= -1 {
                expect += C64::new(nf, 0.0) * d.get(n, (-m) as usize);
            }
            record((lhs.get(m) - expect).norm());
        }

        // (2) G_n(f(w)) = w^n + n e_{0n} + n Σ_{m>=1} e_{mn} w^m
        let lhs = LaurentSlice::eval_poly(&g_polys[n - 1], &f_slice);
        for m in 0..=(m_cmp as i64) {
            let mut expect = C64::new(nf, 0.0) * e.get(m as usize, n);
            if m == ni {
                expect += C64::new(1.0, 0.0);
            }
            record((lhs.get(m) - expect).norm());
        }

        // (3) F_n(g(w)) = w^{-n} - n c_{n0} + n Σ_{m>=1} e_{nm} w^{-m}
        let lhs = LaurentSlice::eval_poly(&f_polys[n - 1], &ginv);
        for m in -(m_cmp as i64)..=0 {
            let mut expect = C64::new(0.0, 0.0);
            if m == -ni {
                expect += C64::new(1.0, 0.0);
            }
            if m == 0 {
                expect -= C64::new(nf, 0.0) * c.get(n, 0);
            }
            if m <= -1 {
                expect += C64::new(nf, 0.0) * e.get(n, (-m) as usize);
            }
            record((lhs.get(m) - expect).norm());
        }

        // (4) F_n(f(w)) = w^{-n} + n Σ_{m>=1} c_{nm} w^m
        let lhs = LaurentSlice::eval_poly(&f_polys[n - 1], &finv);
        for m in -(n as i64)..=(m_cmp as i64) {
            let mut expect = C64::new(0.0, 0.0);
            if m == -ni {
                expect += C64::new(1.0, 0.0);
            }
            if m >= 1 {
                expect += C64::new(nf, 0.0) * c.get(n, m as usize);
            }
            record((lhs.get(m) - expect).norm());
        }
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Residue operator
// ---------------------------------------------------------------------------

/// The kernel operator `h ↦ res_w (kernel(z, w) h(w) dw/w)`, realized as the
/// coefficient pairing `w^j <-> w^{-j}`.
///
/// `PlusPlus` kernels map `H_+` (inputs `h[j] ~ w^{-j}`) to `H_-` (outputs
/// `out[i] ~ z^i`); `MinusMinus` kernels map the other way. The mixed sector
/// has no residue pairing of this shape.
pub fn residue_operator<T: Coeff>(
    kernel: &BivariateTruncated<T>,
    h: &[T],
) -> Result<Vec<T>> {
    match kernel.sector() {
        Sector::PlusPlus | Sector::MinusMinus => {
            let n = kernel.n();
            let mut out = vec![T::zero(); n + 1];
            for (i, o) in out.iter_mut().enumerate() {
                for (j, hj) in h.iter().enumerate().take(n + 1) {
                    if hj.is_zero() {
                        continue;
                    }
                    *o = o.clone() + kernel.get(i, j) * hj.clone();
                }
            }
            Ok(out)
        }
        Sector::PlusMinus => Err(CoreError::SectorMismatch("++ or --", "+-")),
    }
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

/// Matrix export: `{"N": n, "block": ..., "entries": [[re, im], ...]}` row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    #[serde(rename = "N")]
    pub n: usize,
    pub block: String,
    pub rows: usize,
    pub entries: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weighting: Option<String>,
}

impl MatrixJson {
    pub fn from_bivariate(block: &str, m: &BivariateTruncated<C64>) -> Self {
        let mut entries = Vec::with_capacity((m.n() + 1) * (m.n() + 1));
        for i in 0..=m.n() {
            for j in 0..=m.n() {
                let v = m.get(i, j);
                entries.push([v.re, v.im]);
            }
        }
        Self { n: m.n(), block: block.to_string(), rows: m.n() + 1, entries, weighting: None }
    }

    pub fn from_dmatrix(block: &str, m: &DMatrix<C64>, weighting: Option<String>) -> Self {
        let entries = m
            .row_iter()
            .flat_map(|r| r.iter().map(|v| [v.re, v.im]).collect::<Vec<_>>())
            .collect();
        Self { n: m.nrows(), block: block.to_string(), rows: m.nrows(), entries, weighting }
    }

    /// CSV with interleaved re/im columns.
    pub fn to_csv(&self) -> String {
        let cols = self.entries.len() / self.rows.max(1);
        let mut out = String::new();
        for row in self.entries.chunks(cols.max(1)) {
            let line: Vec<String> = row
                .iter()
                .flat_map(|v| vec![format!("{}", v[0]), format!("{}", v[1])])
                .collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rat};

    fn koebe_c64(order: usize) -> TruncatedTaylor<C64> {
        TruncatedTaylor::koebe(order)
    }

    #[test]
    fn grunsky_identity_map_vanishes() {
        let id = TruncatedTaylor::<Rat>::identity(12);
        let c = grunsky_disc(&id, 5).unwrap();
        for i in 0..=5 {
            for j in 0..=5 {
                assert!(c.get(i, j).is_zero());
            }
        }
    }

    #[test]
    fn grunsky_pure_dilation() {
        // f = r z: c_00 = -log r, everything else zero.
        let r = 0.37f64;
        let mut f = TruncatedTaylor::<C64>::constant(C64::new(0.0, 0.0), 8);
        f.set_coeff(1, C64::new(r, 0.0));
        let c = grunsky_disc_c64(&f, 4).unwrap();
        assert!((c.get(0, 0) - C64::new(-r.ln(), 0.0)).norm() < 1e-14);
        for i in 0..=4 {
            for j in 0..=4 {
                if (i, j) != (0, 0) {
                    assert!(c.get(i, j).norm() < 1e-14, "({i},{j})");
                }
            }
        }
    }

    #[test]
    fn grunsky_koebe_closed_form_exact() {
        // c_nn = 1/n, c_m0 = c_0m = -2/m, off-diagonal zero; exact over Q.
        let n = 8usize;
        let k = TruncatedTaylor::<Rat>::koebe(2 * n + 1);
        let c = grunsky_disc(&k, n).unwrap();
        for i in 0..=n {
            for j in 0..=n {
                let expect = if i == j && i >= 1 {
                    rat(1, i as i64)
                } else if i == 0 && j >= 1 {
                    rat(-2, j as i64)
                } else if j == 0 && i >= 1 {
                    rat(-2, i as i64)
                } else {
                    rat(0, 1)
                };
                assert_eq!(c.get(i, j), expect, "({i},{j})");
            }
        }
    }

    #[test]
    fn grunsky_symmetry_against_dft_oracle() {
        // Random polynomial map; c computed by the synthetic-division route
        // must match a two-circle DFT of the analytic kernel and be symmetric.
        let n = 6usize;
        let coeffs = [0.0, 1.0, 0.21, -0.13, 0.08, 0.05, -0.03];
        let f = TruncatedTaylor::from_coeffs(
            coeffs.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>(),
        );
        let c = grunsky_disc(&f, n).unwrap();
        assert!(symmetry_defect(&c) < 1e-13);

        let (r1, r2) = (0.35f64, 0.45f64);
        let grid = 64usize;
        let mut oracle = vec![vec![C64::new(0.0, 0.0); n + 1]; n + 1];
        for (m, row) in oracle.iter_mut().enumerate() {
            for (k, entry) in row.iter_mut().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for p in 0..grid {
                    for q in 0..grid {
                        let tz = 2.0 * std::f64::consts::PI * p as f64 / grid as f64;
                        let tw = 2.0 * std::f64::consts::PI * q as f64 / grid as f64;
                        let z = C64::new(0.0, tz).exp() * r1;
                        let w = C64::new(0.0, tw).exp() * r2;
                        let val = ((f.eval(z) - f.eval(w)) / (z - w)).ln();
                        let phase = C64::new(0.0, -(m as f64 * tz + k as f64 * tw)).exp();
                        acc += val * phase;
                    }
                }
                acc /= C64::new((grid * grid) as f64, 0.0);
                acc /= C64::new(r1.powi(m as i32) * r2.powi(k as i32), 0.0);
                *entry = -acc;
            }
        }
        for m in 0..=n {
            for k in 0..=n {
                assert!(
                    (c.get(m, k) - oracle[m][k]).norm() < 1e-9,
                    "({m},{k}): {} vs {}",
                    c.get(m, k),
                    oracle[m][k]
                );
            }
        }
    }

    fn symmetry_defect(b: &BivariateTruncated<C64>) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..=b.n() {
            for j in 0..i {
                worst = worst.max((b.get(i, j) - b.get(j, i)).norm());
            }
        }
        worst
    }

    #[test]
    fn grunsky_pair_examples() {
        // f = r z, g = z: e_kk = -(1 - r^k)/k, e_00 = 0.
        let r = 0.4f64;
        let mut f = TruncatedTaylor::<C64>::constant(C64::new(0.0, 0.0), 10);
        f.set_coeff(1, C64::new(r, 0.0));
        let g = TruncatedLaurentInf::<C64>::identity(10);
        let e = grunsky_mixed(&f, &g, 6).unwrap();
        for m in 0..=6 {
            for k in 0..=6 {
                let expect = if m == k && m >= 1 {
                    -(1.0 - r.powi(m as i32)) / m as f64
                } else {
                    0.0
                };
                assert!((e.get(m, k) - C64::new(expect, 0.0)).norm() < 1e-13, "({m},{k})");
            }
        }

        // g = z + b0: the d block vanishes identically.
        let g = TruncatedLaurentInf::new(C64::new(1.0, 0.0), vec![C64::new(5.0, 1.0)]);
        let d = grunsky_infinity(&g, 6).unwrap();
        for i in 0..=6 {
            for j in 0..=6 {
                assert!(d.get(i, j).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn grunsky_pair_general_leads() {
        // f = r z, g = L z: d_00 = e_00 = -log L, c_00 = -log r, and the
        // mixed diagonal follows the scalar-log split
        // e_kk = -(1 - (r/L)^k)/k.
        let (r, lead) = (0.4f64, 2.0f64);
        let mut f = TruncatedTaylor::<C64>::constant(C64::new(0.0, 0.0), 12);
        f.set_coeff(1, C64::new(r, 0.0));
        let g = TruncatedLaurentInf::new(C64::new(lead, 0.0), vec![C64::new(0.0, 0.0); 6]);
        let data = GrunskyData::pair(&f, &g, 5).unwrap();
        assert!((data.r - r).abs() < 1e-15 && (data.big_r - lead).abs() < 1e-15);
        let c = data.c.as_ref().unwrap();
        let d = data.d.as_ref().unwrap();
        let e = data.e.as_ref().unwrap();
        assert!((c.get(0, 0) - C64::new(-r.ln(), 0.0)).norm() < 1e-14);
        assert!((d.get(0, 0) - C64::new(-lead.ln(), 0.0)).norm() < 1e-14);
        assert!((e.get(0, 0) - C64::new(-lead.ln(), 0.0)).norm() < 1e-14);
        for m in 1..=5usize {
            for k in 1..=5usize {
                let expect = if m == k {
                    -(1.0 - (r / lead).powi(m as i32)) / m as f64
                } else {
                    0.0
                };
                assert!(
                    (e.get(m, k) - C64::new(expect, 0.0)).norm() < 1e-13,
                    "e({m},{k}) = {}, expect {expect}",
                    e.get(m, k)
                );
            }
        }
    }

    #[test]
    fn grunsky_inversion_consistency() {
        // d-block of 1/f(1/z) equals the c-block of f on indices >= 1.
        let coeffs = [0.0, 1.0, 0.3, -0.12, 0.07, 0.02, -0.04, 0.01, 0.03, -0.02, 0.01];
        let f = TruncatedTaylor::from_coeffs(
            coeffs.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>(),
        );
        let n = 4usize;
        let c = grunsky_disc(&f, n).unwrap();
        let g = f.invert_at_infinity().unwrap();
        let d = grunsky_infinity(&g, n).unwrap();
        for m in 1..=n {
            for k in 1..=n {
                assert!(
                    (c.get(m, k) - d.get(m, k)).norm() < 1e-12,
                    "({m},{k}): {} vs {}",
                    c.get(m, k),
                    d.get(m, k)
                );
            }
        }
        // And d_{m0} = 0 for m >= 1.
        for m in 1..=n {
            assert!(d.get(m, 0).norm() < 1e-13);
        }
    }

    #[test]
    fn faber_trivial_and_shift() {
        // g = z: G_n(w) = w^n.
        let g = TruncatedLaurentInf::<Rat>::identity(8);
        let gs = faber_g(&g, 4).unwrap();
        for (n, poly) in gs.iter().enumerate() {
            let n = n + 1;
            for (j, c) in poly.iter().enumerate() {
                let expect = if j == n { Rat::one() } else { Rat::zero() };
                assert_eq!(*c, expect, "G_{n} coefficient {j}");
            }
        }

        // g = z + b0: G_n(w) = (w - b0)^n, checked against Pascal's triangle.
        let b0 = rat(3, 1);
        let g = TruncatedLaurentInf::new(Rat::one(), vec![b0.clone(), Rat::zero()]);
        let gs = faber_g(&g, 4).unwrap();
        for (idx, poly) in gs.iter().enumerate() {
            let n = idx + 1;
            let mut pascal = vec![Rat::one()];
            for _ in 0..n {
                let mut next = vec![Rat::one()];
                for w in pascal.windows(2) {
                    next.push(w[0].clone() + w[1].clone());
                }
                next.push(Rat::one());
                pascal = next;
            }
            for (j, c) in poly.iter().enumerate() {
                let mut expect = pascal[j].clone();
                for _ in 0..(n - j) {
                    expect *= -b0.clone();
                }
                assert_eq!(*c, expect, "G_{n} coefficient of w^{j}");
            }
        }
    }

    #[test]
    fn faber_chebyshev_identity() {
        // g = z + 1/z: G_n(g(z)) = z^n + z^{-n}; equivalently d_nn = 1/n.
        let band = 10usize;
        let g = TruncatedLaurentInf::new(Rat::one(), vec![Rat::zero(), Rat::one()]);
        let gs = faber_g(&g, 5).unwrap();
        let slice = LaurentSlice::from_laurent_inf(&g, band);
        for (idx, poly) in gs.iter().enumerate() {
            let n = (idx + 1) as i64;
            let composed = LaurentSlice::eval_poly(poly, &slice);
            for k in -(band as i64)..=(band as i64) {
                let expect = if k == n || k == -n { Rat::one() } else { Rat::zero() };
                assert_eq!(composed.get(k), expect, "G_{n} at z^{k}");
            }
        }
        let d = grunsky_infinity(&g, 5).unwrap();
        for m in 1..=5 {
            for k in 1..=5 {
                let expect = if m == k { rat(1, m as i64) } else { Rat::zero() };
                assert_eq!(d.get(m, k), expect);
            }
        }
    }

    #[test]
    fn koebe_f1_and_yk_vectors() {
        // F_1 for Koebe is 1/w + 2, and w_n(z) = z^{-n} + z^n.
        let n = 6usize;
        let k = koebe_c64(2 * n + 3);
        let fs = faber_f(&k, n).unwrap();
        assert!((fs[0][0] - C64::new(2.0, 0.0)).norm() < 1e-13);
        assert!((fs[0][1] - C64::new(1.0, 0.0)).norm() < 1e-13);

        let emb = yk_embedding(&k, n).unwrap();
        for (idx, (wc, wg)) in emb
            .vectors_compose
            .iter()
            .zip(&emb.vectors_grunsky)
            .enumerate()
        {
            let m = (idx + 1) as i64;
            for kk in -(n as i64)..=(n as i64) {
                let expect = if kk == m || kk == -m {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                };
                assert!((wc.get(kk) - expect).norm() < 1e-11, "compose w_{m} at {kk}: {}", wc.get(kk));
                assert!((wg.get(kk) - expect).norm() < 1e-11, "grunsky w_{m} at {kk}");
            }
        }
    }

    #[test]
    fn yk_vectors_two_routes_agree_generic() {
        let coeffs = [0.0, 1.0, 0.2, -0.1, 0.05, 0.03, -0.02, 0.01, 0.02, -0.01, 0.005, 0.0, 0.0];
        let f = TruncatedTaylor::from_coeffs(
            coeffs.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>(),
        );
        let n = 5usize;
        let emb = yk_embedding(&f, n).unwrap();
        for (idx, (wc, wg)) in emb.vectors_compose.iter().zip(&emb.vectors_grunsky).enumerate() {
            // Compare on the reliable window: the compose route is exact on
            // z^m for |m| <= band - pole order.
            let reliable = (n - (idx + 1)) as i64 + 1;
            for k in -(idx as i64 + 1)..=reliable {
                assert!(
                    (wc.get(k) - wg.get(k)).norm() < 1e-10,
                    "w_{} at z^{k}: {} vs {}",
                    idx + 1,
                    wc.get(k),
                    wg.get(k)
                );
            }
        }
    }

    #[test]
    fn siegel_identity_and_perturbation() {
        let id = TruncatedTaylor::<C64>::identity(20);
        let emb = yk_embedding(&id, 6).unwrap();
        let check = siegel_check(&emb.point).unwrap();
        assert!(check.symmetric);
        assert!((check.spectral_gap - 1.0).abs() < 1e-14);
        assert!(check.kahler_potential.abs() < 1e-14);

        let mut f = TruncatedTaylor::<C64>::identity(20);
        f.set_coeff(2, C64::new(0.1, 0.0));
        let emb = yk_embedding(&f, 8).unwrap();
        let check = siegel_check(&emb.point).unwrap();
        assert!(check.symmetric);
        assert!(check.spectral_gap > 0.0 && check.spectral_gap < 1.0);
        assert!(check.kahler_potential > 0.0 && check.kahler_potential.is_finite());

        // Small-perturbation eigenvalue oracle: for f = z + eps z^2 at n = 8,
        // Z ~ sqrt(nm) c_{nm} with c_{nm} = O(eps); lambda_max ~ |Z|_F^2.
        let mut frob = 0.0;
        for i in 0..8 {
            for j in 0..8 {
                frob += emb.point.z[(i, j)].norm_sqr();
            }
        }
        assert!((1.0 - check.spectral_gap) <= frob + 1e-12);
    }

    #[test]
    fn siegel_koebe_is_extremal_boundary() {
        // The Koebe point has Z = identity at every truncation (the diagonal
        // c_nn = 1/n against the sqrt(nm) weighting): gap exactly 0, outside
        // the open disc at any n. The observed trend is flat at the boundary.
        for n in [2usize, 4, 8] {
            let k = koebe_c64(2 * n + 3);
            let emb = yk_embedding(&k, n).unwrap();
            for i in 0..n {
                for j in 0..n {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((emb.point.z[(i, j)] - C64::new(expect, 0.0)).norm() < 1e-11);
                }
            }
            match siegel_check(&emb.point) {
                Err(CoreError::NotInDisc { gap }) => assert!(gap.abs() < 1e-10),
                Ok(check) => assert!(check.spectral_gap.abs() < 1e-10),
                Err(e) => panic!("unexpected error {e}"),
            }
        }
    }

    #[test]
    fn residue_operator_cases() {
        // Zero kernel annihilates; monomial kernel z^a w^b maps w^{-b} to z^a.
        let zero = BivariateTruncated::<Rat>::zero(4, Sector::PlusPlus);
        let h = vec![Rat::one(); 5];
        assert!(residue_operator(&zero, &h).unwrap().iter().all(|x| x.is_zero()));

        let mut mono = BivariateTruncated::<Rat>::zero(4, Sector::PlusPlus);
        mono.set(3, 2, Rat::one());
        let mut h = vec![Rat::zero(); 5];
        h[2] = Rat::one();
        let out = residue_operator(&mono, &h).unwrap();
        for (i, v) in out.iter().enumerate() {
            let expect = if i == 3 { Rat::one() } else { Rat::zero() };
            assert_eq!(*v, expect);
        }

        let mixed = BivariateTruncated::<Rat>::zero(4, Sector::PlusMinus);
        assert!(matches!(
            residue_operator(&mixed, &h),
            Err(CoreError::SectorMismatch(_, _))
        ));
    }

    #[test]
    fn residue_operator_matches_grunsky_rows() {
        // The log-kernel of the Koebe map applied to w^{-n} returns
        // -Σ_m c_{mn} z^m (row-equivalence of the two embeddings).
        let n = 6usize;
        let k = koebe_c64(2 * n + 3);
        let c = grunsky_disc(&k, n).unwrap();
        let kernel = c.scale(&C64::new(-1.0, 0.0)); // the log kernel itself
        for col in 1..=n {
            let mut h = vec![C64::new(0.0, 0.0); n + 1];
            h[col] = C64::new(1.0, 0.0);
            let out = residue_operator(&kernel, &h).unwrap();
            for m in 0..=n {
                let expect = -c.get(m, col);
                assert!((out[m] - expect).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn matrix_export_shapes() {
        let k = koebe_c64(9);
        let c = grunsky_disc(&k, 3).unwrap();
        let js = MatrixJson::from_bivariate("c", &c);
        assert_eq!(js.entries.len(), 16);
        let csv = js.to_csv();
        assert_eq!(csv.lines().count(), 4);
        assert_eq!(csv.lines().next().unwrap().split(',').count(), 8);
    }
}
