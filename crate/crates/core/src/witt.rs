//! Witt and Virasoro generators as differential operators on coefficient
//! polynomials, the Neretin cocycle, the dual pairing and graded kernel
//! solving.
//!
//! Coordinate representations (disc chart, `∂_k = ∂/∂c_k`):
//!
//! ```text
//! L_k  = ∂_k + Σ_n (n+1) c_n ∂_{n+k}                                k >= 1
//! L_0  = h + Σ_k k c_k ∂_k
//! L_-1 = Σ_k ((k+2) c_{k+1} - 2 c_1 c_k) ∂_k + 2 h c_1
//! L_-2 = Σ_k ((k+3) c_{k+2} - (4c_2 - c_1^2) c_k - a_k) ∂_k
//!        + h (4c_2 - c_1^2) + (c/2)(c_2 - c_1^2)
//! ```
//!
//! where `a_k` is the coefficient of `z^{k+1}` in `1/f`, generated
//! symbolically from the series reciprocal of the generic map. The positive
//! levels carry the `(n+1)` factor: it is the form forced by the Lie-field
//! action `L_k f = z^{1+k} f'` (see [`witt_lie_field`] and the cross-oracle
//! tests). With these representations the realized commutation relations are
//!
//! ```text
//! [L_m, L_n] = (m - n) L_{m+n} + (c/12)(m^3 - m) δ_{m+n,0} · id
//! ```
//!
//! i.e. structure constant `(m - n)` and a positive central defect
//! `[L_2, L_-2] - 4 L_0 = (c/2) id`; both are frozen here as
//! [`witt_structure_constant`] and [`central_defect`].

use crate::circle::{CentralParams, FourierField};
use crate::coeffpoly::{basis_monomials, Chart, CoeffPolynomial, Monomial};
use crate::error::{CoreError, Result};
use crate::scalar::{C64, Coeff, Rat};
use crate::series::TruncatedTaylor;

/// First/second-order differential operator with polynomial coefficients.
#[derive(Debug, Clone)]
pub struct LinearCoeffOperator<T> {
    chart: Chart,
    max_index: u16,
    /// Each term is `q(x) ∂_{i_1} ... ∂_{i_r}` with `r = derivs.len()`
    /// (an empty list means multiplication by `q`).
    terms: Vec<(CoeffPolynomial<T>, Vec<u16>)>,
}

impl<T: Coeff> LinearCoeffOperator<T> {
    pub fn new(chart: Chart, max_index: u16, terms: Vec<(CoeffPolynomial<T>, Vec<u16>)>) -> Self {
        Self { chart, max_index, terms }
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn max_index(&self) -> u16 {
        self.max_index
    }

    pub fn terms(&self) -> &[(CoeffPolynomial<T>, Vec<u16>)] {
        &self.terms
    }

    /// Apply to a polynomial; variables beyond the operator's truncation
    /// index are annihilated by the derivatives and dropped from products.
    pub fn apply(&self, p: &CoeffPolynomial<T>) -> Result<CoeffPolynomial<T>> {
        if let Some(chart) = p.chart() {
            if chart != self.chart {
                return Err(CoreError::ChartMismatch(self.chart.name(), chart.name()));
            }
        }
        let mut acc = CoeffPolynomial::zero_in(self.chart);
        for (q, derivs) in &self.terms {
            let mut d = p.clone();
            for &v in derivs {
                d = d.partial(v);
                if d.is_zero() {
                    break;
                }
            }
            if !d.is_zero() {
                acc = acc + q.clone() * d;
            }
        }
        Ok(acc.truncate_vars(self.max_index))
    }

    pub fn scale(&self, s: &T) -> Self {
        Self {
            chart: self.chart,
            max_index: self.max_index,
            terms: self.terms.iter().map(|(q, d)| (q.scale(s), d.clone())).collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert!(self.chart == rhs.chart);
        let mut terms = self.terms.clone();
        terms.extend(rhs.terms.iter().cloned());
        Self { chart: self.chart, max_index: self.max_index.max(rhs.max_index), terms }
    }

    /// Operator composition `self ∘ rhs` for first-order `rhs`
    /// (enough for building squares like the diffusion term).
    pub fn compose_first_order(&self, rhs: &Self) -> Self {
        assert!(self.chart == rhs.chart);
        let mut terms = Vec::new();
        for (qa, da) in &self.terms {
            for (qb, db) in &rhs.terms {
                // qa ∂_a (qb ∂_b) = qa (∂_a qb) ∂_b + qa qb ∂_a ∂_b
                assert!(da.len() <= 1, "left factor must be first order");
                if let Some(&a) = da.first() {
                    let dqb = qb.partial(a);
                    if !dqb.is_zero() {
                        terms.push((qa.clone() * dqb, db.clone()));
                    }
                    let mut dd = vec![a];
                    dd.extend(db.iter().copied());
                    terms.push((qa.clone() * qb.clone(), dd));
                } else {
                    terms.push((qa.clone() * qb.clone(), db.clone()));
                }
            }
        }
        Self { chart: self.chart, max_index: self.max_index.max(rhs.max_index), terms }
    }

    /// Lie bracket of two first-order operators, kept symbolic.
    pub fn first_order_bracket(&self, rhs: &Self) -> Self {
        let ab = self.compose_first_order(rhs);
        let ba = rhs.compose_first_order(self);
        // Keep only first-order parts; the second-order parts cancel in the
        // bracket of first-order fields, and dropping them symbolically
        // avoids relying on term-layout equality.
        let mut terms = Vec::new();
        for (q, d) in ab.terms.into_iter().filter(|(_, d)| d.len() <= 1) {
            terms.push((q, d));
        }
        for (q, d) in ba.terms.into_iter().filter(|(_, d)| d.len() <= 1) {
            terms.push((q.scale(&-T::one()), d));
        }
        Self { chart: self.chart, max_index: self.max_index.max(rhs.max_index), terms }
    }
}

/// Action of an operator (or operator expression) tabulated on the canonical
/// monomial basis of bounded weight.
#[derive(Debug, Clone)]
pub struct OpAction<T> {
    pub chart: Chart,
    pub basis: Vec<Monomial>,
    pub images: Vec<CoeffPolynomial<T>>,
}

impl<T: Coeff> OpAction<T> {
    pub fn is_zero(&self) -> bool {
        self.images.iter().all(|p| p.is_zero())
    }

    /// True when every image equals `scalar * (the basis monomial itself)`,
    /// i.e. the action is a scalar matrix.
    pub fn is_scalar_matrix(&self, scalar: &T) -> bool {
        self.basis.iter().zip(&self.images).all(|(m, img)| {
            let expect = CoeffPolynomial::from_terms(self.chart, vec![(m.clone(), scalar.clone())]);
            *img == expect
        })
    }
}

/// Tabulate `op` on all monomials of weight `<= max_weight`.
pub fn operator_action<T: Coeff>(
    op: &LinearCoeffOperator<T>,
    max_weight: u32,
) -> Result<OpAction<T>> {
    let basis = basis_monomials(op.chart(), max_weight, op.max_index());
    let images = basis
        .iter()
        .map(|m| {
            op.apply(&CoeffPolynomial::from_terms(op.chart(), vec![(m.clone(), T::one())]))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OpAction { chart: op.chart(), basis, images })
}

/// `[A, B]` tabulated on the weight-filtered basis.
pub fn commutator<T: Coeff>(
    a: &LinearCoeffOperator<T>,
    b: &LinearCoeffOperator<T>,
    max_weight: u32,
) -> Result<OpAction<T>> {
    if a.chart() != b.chart() {
        return Err(CoreError::ChartMismatch(a.chart().name(), b.chart().name()));
    }
    let basis = basis_monomials(a.chart(), max_weight, a.max_index().max(b.max_index()));
    let mut images = Vec::with_capacity(basis.len());
    for m in &basis {
        let p = CoeffPolynomial::from_terms(a.chart(), vec![(m.clone(), T::one())]);
        let ab = a.apply(&b.apply(&p)?)?;
        let ba = b.apply(&a.apply(&p)?)?;
        images.push(ab - ba);
    }
    Ok(OpAction { chart: a.chart(), basis, images })
}

/// Structure constant of the realized representation: `[L_m, L_n] = (m-n) L_{m+n} + central`.
pub fn witt_structure_constant(m: i64, n: i64) -> i64 {
    m - n
}

/// Central defect of `[L_m, L_{-m}] - 2m L_0`: the scalar `(c/12)(m^3 - m)`,
/// with the positive sign realized by the coordinate representation.
pub fn central_defect<T: Coeff>(c: &T, m: i64) -> T {
    c.clone().div_int(12) * T::from_int(m * m * m - m)
}

/// Generic normalized disc map `z + c_1 z^2 + ... + c_N z^{N+1}` over the
/// polynomial ring, zero-padded to the requested series order.
pub fn generic_disc_map<T: Coeff>(n_vars: u16, order: usize) -> TruncatedTaylor<CoeffPolynomial<T>> {
    let mut coeffs = vec![CoeffPolynomial::<T>::zero(); order + 1];
    if order >= 1 {
        coeffs[1] = CoeffPolynomial::one();
    }
    for k in 1..=n_vars {
        let deg = k as usize + 1;
        if deg <= order {
            coeffs[deg] = CoeffPolynomial::var(Chart::Disc, k);
        }
    }
    TruncatedTaylor::from_coeffs(coeffs)
}

/// Positive Witt generator `L_k = ∂_k + Σ_{n} (n+1) c_n ∂_{n+k}` on
/// polynomials in `c_1..c_N`.
pub fn witt_op<T: Coeff>(k: u16, n: u16) -> LinearCoeffOperator<T> {
    assert!(k >= 1, "positive levels only");
    let mut terms = vec![(CoeffPolynomial::one(), vec![k])];
    for m in 1..=n {
        if m + k > n {
            break;
        }
        let q = CoeffPolynomial::var(Chart::Disc, m).scale(&T::from_int(m as i64 + 1));
        terms.push((q, vec![m + k]));
    }
    LinearCoeffOperator::new(Chart::Disc, n, terms)
}

/// Virasoro generator in the disc chart for levels `-2..` (`UnsupportedLevel`
/// below `-2`, where no closed coordinate form is available).
pub fn virasoro_op<T: Coeff>(
    level: i64,
    c: &T,
    h: &T,
    n: u16,
) -> Result<LinearCoeffOperator<T>> {
    assert!(n >= 2, "need at least c_1, c_2");
    let var = |k: u16| CoeffPolynomial::<T>::var(Chart::Disc, k);
    match level {
        l if l >= 1 => Ok(witt_op(l as u16, n)),
        0 => {
            let mut terms = vec![(CoeffPolynomial::constant(h.clone()), vec![])];
            for k in 1..=n {
                terms.push((var(k).scale(&T::from_int(k as i64)), vec![k]));
            }
            Ok(LinearCoeffOperator::new(Chart::Disc, n, terms))
        }
        -1 => {
            let mut terms = Vec::new();
            for k in 1..=n {
                let mut q = -(var(1) * var(k)).scale(&T::from_int(2));
                if k < n {
                    q = q + var(k + 1).scale(&T::from_int(k as i64 + 2));
                }
                terms.push((q, vec![k]));
            }
            terms.push((var(1).scale(&(h.clone() + h.clone())), vec![]));
            Ok(LinearCoeffOperator::new(Chart::Disc, n, terms))
        }
        -2 => {
            // a_k = [z^{k+1}] (1/f), symbolic in the c's; reciprocal_coeffs
            // returns v with v[j] = [z^{j-1}] (1/f), so a_k = v[k+2].
            let f = generic_disc_map::<T>(n, n as usize + 3);
            let v = f.reciprocal_coeffs()?;
            let schlicht = var(2).scale(&T::from_int(4)) - var(1) * var(1);
            let mut terms = Vec::new();
            for k in 1..=n {
                let mut q = -(schlicht.clone() * var(k));
                if k + 2 <= n {
                    q = q + var(k + 2).scale(&T::from_int(k as i64 + 3));
                }
                let a_k = v[k as usize + 2].clone().truncate_vars(n);
                q = q - a_k;
                terms.push((q, vec![k]));
            }
            let scalar = schlicht.scale(h)
                + (var(2) - var(1) * var(1)).scale(&c.clone().div_int(2));
            terms.push((scalar, vec![]));
            Ok(LinearCoeffOperator::new(Chart::Disc, n, terms))
        }
        l => Err(CoreError::UnsupportedLevel(l)),
    }
}

/// Lie-field action of the `k`-th nonnegative Witt basis element on a map:
/// `L_k f = z^{1+k} f'`, truncated at the order of `f`. This normalization is
/// exactly the one represented by [`witt_op`] in affine coordinates.
pub fn witt_lie_field<T: Coeff>(k: usize, f: &TruncatedTaylor<T>) -> TruncatedTaylor<T> {
    let order = f.order();
    let d = f.derivative();
    let mut coeffs = vec![T::zero(); order + 1];
    for j in 0..=d.order() {
        if j + 1 + k <= order {
            coeffs[j + 1 + k] = d.coeff(j);
        }
    }
    TruncatedTaylor::from_coeffs(coeffs)
}

/// The Herglotz-kernel transform of a real trig field under the monomial
/// rules `cos nt -> z^n`, `sin nt -> -i z^n`, constants to themselves:
/// returns `a_0 + Σ_n (a_n - i b_n) z^n`.
pub fn herglotz_symbol(v: &FourierField, order: usize) -> TruncatedTaylor<C64> {
    let mut coeffs = vec![C64::new(0.0, 0.0); order + 1];
    coeffs[0] = C64::new(v.a_coeff(0), 0.0);
    for n in 1..=order.min(v.modes()) {
        coeffs[n] = C64::new(v.a_coeff(n), -v.b_coeff(n));
    }
    TruncatedTaylor::from_coeffs(coeffs)
}

/// Boundary-variation Lie field of a real trig field:
/// `ℒ_v(f)(z) = -z f'(z) * (1/2pi) ∮ K(t, z) v(t) dt`, computed exactly via
/// [`herglotz_symbol`].
pub fn lie_field(v: &FourierField, f: &TruncatedTaylor<C64>) -> TruncatedTaylor<C64> {
    let order = f.order();
    let sym = herglotz_symbol(v, order);
    witt_lie_field(0, f).mul(&sym).neg()
}

// ---------------------------------------------------------------------------
// Neretin cocycle
// ---------------------------------------------------------------------------

/// Laurent polynomial symbol of a circle field on `|w| = 1`.
#[derive(Debug, Clone)]
pub struct LaurentSymbol {
    /// Coefficient of `w^{-k}` at index `k-1`.
    neg: Vec<C64>,
    zero: C64,
    /// Coefficient of `w^{k}` at index `k-1`.
    pos: Vec<C64>,
}

impl LaurentSymbol {
    /// Real field `Σ a_k cos kt + b_k sin kt` as
    /// `Σ_k ((a_k - i b_k)/2) w^k + a_0 + Σ_k ((a_k + i b_k)/2) w^{-k}`.
    pub fn from_fourier(v: &FourierField) -> Self {
        let m = v.modes();
        let mut pos = Vec::with_capacity(m);
        let mut neg = Vec::with_capacity(m);
        for k in 1..=m {
            pos.push(C64::new(v.a_coeff(k) / 2.0, -v.b_coeff(k) / 2.0));
            neg.push(C64::new(v.a_coeff(k) / 2.0, v.b_coeff(k) / 2.0));
        }
        Self { neg, zero: C64::new(v.a_coeff(0), 0.0), pos }
    }

    /// The complexified basis field `v_k = -i e^{ikt}`.
    pub fn witt_mode(k: i64) -> Self {
        let mi = C64::new(0.0, -1.0);
        if k == 0 {
            Self { neg: vec![], zero: mi, pos: vec![] }
        } else if k > 0 {
            let mut pos = vec![C64::new(0.0, 0.0); k as usize];
            pos[k as usize - 1] = mi;
            Self { neg: vec![], zero: C64::new(0.0, 0.0), pos }
        } else {
            let mut neg = vec![C64::new(0.0, 0.0); (-k) as usize];
            neg[(-k) as usize - 1] = mi;
            Self { neg, zero: C64::new(0.0, 0.0), pos: vec![] }
        }
    }

    pub fn coeff(&self, k: i64) -> C64 {
        if k == 0 {
            self.zero
        } else if k > 0 {
            self.pos.get(k as usize - 1).copied().unwrap_or(C64::new(0.0, 0.0))
        } else {
            self.neg.get((-k) as usize - 1).copied().unwrap_or(C64::new(0.0, 0.0))
        }
    }

    pub fn eval(&self, t: f64) -> C64 {
        let mut acc = self.zero;
        for (i, c) in self.pos.iter().enumerate() {
            let k = (i + 1) as f64;
            acc += c * C64::new(0.0, k * t).exp();
        }
        for (i, c) in self.neg.iter().enumerate() {
            let k = (i + 1) as f64;
            acc += c * C64::new(0.0, -k * t).exp();
        }
        acc
    }
}

/// Scalar part of the Neretin action on the trivialized line bundle:
///
/// `Ψ = h ∮ [w f'/f]^2 v(w) dw/w + (c/12) ∮ w^2 S(f, w) v(w) dw/w + i τ c`
///
/// with `∮ . dw/w` normalized as plain coefficient extraction
/// (`∮ w^k dw/w = δ_{k,0}`), so everything reduces to residues of truncated
/// series products. The `v(w)` factor multiplies both integrands.
pub fn neretin_cocycle(
    f: &TruncatedTaylor<C64>,
    v: &LaurentSymbol,
    p: CentralParams,
    tau: f64,
) -> Result<C64> {
    if f.coeff(1).is_zero() || !f.coeff(0).is_zero() {
        return Err(CoreError::ZeroLeadingCoefficient);
    }
    let order = f.order();
    // w f'/f = f' * (f/w)^{-1}
    let f_over_z = TruncatedTaylor::from_coeffs((1..=order).map(|k| f.coeff(k)).collect());
    let d = f.derivative();
    let ratio = d.div(&f_over_z)?;
    let g1 = ratio.mul(&ratio);
    let mut psi = C64::new(0.0, 0.0);
    for j in 0..=g1.order() {
        psi += C64::new(p.h, 0.0) * g1.coeff(j) * v.coeff(-(j as i64));
    }
    if p.c != 0.0 {
        let s = f.schwarzian()?;
        // w^2 S(f, w): coefficient of w^j is S_{j-2}.
        for j in 2..=s.order() + 2 {
            psi += C64::new(p.c / 12.0, 0.0) * s.coeff(j - 2) * v.coeff(-(j as i64));
        }
    }
    psi += C64::new(0.0, tau * p.c);
    Ok(psi)
}

// ---------------------------------------------------------------------------
// Dual pairing and kernel solving
// ---------------------------------------------------------------------------

/// `⟨P, Q⟩ = P(∂) Q |_{x=0}`: on matching monomials this is the product of
/// exponent factorials, extended bilinearly.
pub fn dual_pairing<T: Coeff>(p: &CoeffPolynomial<T>, q: &CoeffPolynomial<T>) -> Result<T> {
    if let (Some(a), Some(b)) = (p.chart(), q.chart()) {
        if a != b {
            return Err(CoreError::ChartMismatch(a.name(), b.name()));
        }
    }
    let mut acc = T::zero();
    for (m, cp) in p.terms() {
        let cq = q.coeff_of(m);
        if cq.is_zero() {
            continue;
        }
        let mut fact = T::one();
        for &(_, e) in m.pairs() {
            for j in 2..=e as i64 {
                fact = fact * T::from_int(j);
            }
        }
        acc = acc + cp.clone() * cq * fact;
    }
    Ok(acc)
}

/// Exact basis of `{P : A P = 0, weight(P) <= max_weight}` over the
/// rationals, canonicalized by reduced row echelon form.
pub fn kernel_solve(op: &LinearCoeffOperator<Rat>, max_weight: u32) -> Result<Vec<CoeffPolynomial<Rat>>> {
    let chart = op.chart();
    let basis = basis_monomials(chart, max_weight, op.max_index());
    let images = basis
        .iter()
        .map(|m| op.apply(&CoeffPolynomial::from_terms(chart, vec![(m.clone(), Rat::one())])))
        .collect::<Result<Vec<_>>>()?;

    // Constraint rows indexed by every monomial appearing in any image.
    let mut row_monomials: Vec<Monomial> = Vec::new();
    for img in &images {
        for (m, _) in img.terms() {
            if !row_monomials.contains(m) {
                row_monomials.push(m.clone());
            }
        }
    }
    row_monomials.sort();
    let mut matrix: Vec<Vec<Rat>> = row_monomials
        .iter()
        .map(|row| images.iter().map(|img| img.coeff_of(row)).collect())
        .collect();

    let cols = basis.len();
    let null = rational_nullspace(&mut matrix, cols);
    Ok(null
        .into_iter()
        .map(|vec| {
            CoeffPolynomial::from_terms(
                chart,
                basis.iter().cloned().zip(vec).collect(),
            )
        })
        .collect())
}

/// Nullspace basis of a rational matrix via Gauss-Jordan elimination;
/// the result is the canonical RREF kernel basis.
fn rational_nullspace(matrix: &mut [Vec<Rat>], cols: usize) -> Vec<Vec<Rat>> {
    let rows = matrix.len();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..rows).find(|&i| !matrix[i][c].is_zero()) else {
            continue;
        };
        matrix.swap(r, pr);
        let inv = matrix[r][c].try_inv().expect("pivot is nonzero");
        for x in matrix[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for i in 0..rows {
            if i != r && !matrix[i][c].is_zero() {
                let factor = matrix[i][c].clone();
                for j in 0..cols {
                    let delta = factor.clone() * matrix[r][j].clone();
                    matrix[i][j] = matrix[i][j].clone() - delta;
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    let mut kernel = Vec::new();
    for free in 0..cols {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut v = vec![Rat::zero(); cols];
        v[free] = Rat::one();
        for (ri, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = -matrix[ri][free].clone();
        }
        kernel.push(v);
    }
    kernel
}
