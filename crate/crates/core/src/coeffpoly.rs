//! Polynomials on the coefficient body, in either affine chart.
//!
//! Disc chart: variables `c_1..c_N` (weight of `c_k` is `k`).
//! Infinity chart: variables `b_0..b_N` (weight of `b_k` is `k + 1`).
//!
//! Constants are chart-agnostic so that generic ring code can manufacture
//! zeros and ones without knowing the chart; mixing two *different* concrete
//! charts in ring arithmetic is a programming error and panics, while the
//! public operator API reports [`CoreError::ChartMismatch`].

use crate::scalar::{Coeff, Rat, rat_to_f64};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    Disc,
    Infinity,
}

impl Chart {
    pub fn var_name(&self, idx: u16) -> String {
        match self {
            Chart::Disc => format!("c{idx}"),
            Chart::Infinity => format!("b{idx}"),
        }
    }

    pub fn var_weight(&self, idx: u16) -> u32 {
        match self {
            Chart::Disc => idx as u32,
            Chart::Infinity => idx as u32 + 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Chart::Disc => "disc",
            Chart::Infinity => "infinity",
        }
    }
}

/// Exponent vector, sorted by variable index with no zero exponents.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(Vec<(u16, u16)>);

impl Monomial {
    pub fn unit() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(idx: u16) -> Self {
        Monomial(vec![(idx, 1)])
    }

    pub fn from_pairs(mut pairs: Vec<(u16, u16)>) -> Self {
        pairs.retain(|&(_, e)| e > 0);
        pairs.sort_unstable();
        Monomial(pairs)
    }

    pub fn pairs(&self) -> &[(u16, u16)] {
        &self.0
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut map: BTreeMap<u16, u16> = self.0.iter().copied().collect();
        for &(v, e) in &rhs.0 {
            *map.entry(v).or_insert(0) += e;
        }
        Monomial(map.into_iter().collect())
    }

    pub fn weight(&self, chart: Chart) -> u32 {
        self.0.iter().map(|&(v, e)| chart.var_weight(v) * e as u32).sum()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e as u32).sum()
    }

    pub fn max_var(&self) -> Option<u16> {
        self.0.last().map(|&(v, _)| v)
    }

    /// `(exponent of var, monomial with that exponent reduced by one)`.
    fn split_var(&self, var: u16) -> Option<(u16, Monomial)> {
        let pos = self.0.iter().position(|&(v, _)| v == var)?;
        let (_, e) = self.0[pos];
        let mut rest = self.0.clone();
        if e == 1 {
            rest.remove(pos);
        } else {
            rest[pos].1 = e - 1;
        }
        Some((e, Monomial(rest)))
    }
}

/// Sparse multivariate polynomial with coefficients in `T`.
#[derive(Debug, Clone)]
pub struct CoeffPolynomial<T> {
    chart: Option<Chart>,
    terms: BTreeMap<Monomial, T>,
}

impl<T: Coeff> PartialEq for CoeffPolynomial<T> {
    fn eq(&self, other: &Self) -> bool {
        // Charts only have to agree when both sides are non-constant.
        self.terms == other.terms
            && (self.chart == other.chart || self.chart.is_none() || other.chart.is_none())
    }
}

impl<T: Coeff> CoeffPolynomial<T> {
    pub fn zero_in(chart: Chart) -> Self {
        Self { chart: Some(chart), terms: BTreeMap::new() }
    }

    pub fn constant(value: T) -> Self {
        let mut terms = BTreeMap::new();
        if !value.is_zero() {
            terms.insert(Monomial::unit(), value);
        }
        Self { chart: None, terms }
    }

    pub fn var(chart: Chart, idx: u16) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::var(idx), T::one());
        Self { chart: Some(chart), terms }
    }

    pub fn from_terms(chart: Chart, terms: Vec<(Monomial, T)>) -> Self {
        let mut map = BTreeMap::new();
        for (m, c) in terms {
            if c.is_zero() {
                continue;
            }
            let entry = map.entry(m).or_insert_with(T::zero);
            *entry = entry.clone() + c;
        }
        map.retain(|_, c: &mut T| !c.is_zero());
        Self { chart: Some(chart), terms: map }
    }

    pub fn chart(&self) -> Option<Chart> {
        self.chart
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &T)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff_of(&self, m: &Monomial) -> T {
        self.terms.get(m).cloned().unwrap_or_else(T::zero)
    }

    pub fn constant_term(&self) -> T {
        self.coeff_of(&Monomial::unit())
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_unit())
    }

    fn unified_chart(&self, rhs: &Self) -> Option<Chart> {
        match (self.chart, rhs.chart) {
            (Some(a), Some(b)) => {
                assert!(a == b, "chart mismatch in polynomial arithmetic: {a:?} vs {b:?}");
                Some(a)
            }
            (Some(a), None) | (None, Some(a)) => Some(a),
            (None, None) => None,
        }
    }

    pub fn weight(&self, chart: Chart) -> u32 {
        self.terms.keys().map(|m| m.weight(chart)).max().unwrap_or(0)
    }

    pub fn scale(&self, s: &T) -> Self {
        if s.is_zero() {
            return Self { chart: self.chart, terms: BTreeMap::new() };
        }
        Self {
            chart: self.chart,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.clone() * s.clone())).collect(),
        }
    }

    /// Partial derivative with respect to the variable of the given index.
    pub fn partial(&self, var: u16) -> Self {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            if let Some((e, rest)) = m.split_var(var) {
                let coeff = c.clone() * T::from_int(e as i64);
                let entry = terms.entry(rest).or_insert_with(T::zero);
                *entry = entry.clone() + coeff;
            }
        }
        terms.retain(|_, c: &mut T| !c.is_zero());
        Self { chart: self.chart, terms }
    }

    /// Drop every term that involves a variable with index above `max_index`.
    pub fn truncate_vars(&self, max_index: u16) -> Self {
        Self {
            chart: self.chart,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.max_var().is_none_or(|v| v <= max_index))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Evaluate at a point; `point[idx]` is the value of the variable `idx`.
    pub fn eval_f64(&self, point: &[f64], to_f64: impl Fn(&T) -> f64) -> f64 {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut v = to_f64(c);
            for &(var, e) in m.pairs() {
                v *= point[var as usize].powi(e as i32);
            }
            acc += v;
        }
        acc
    }

    pub fn map_coeffs<U: Coeff>(&self, f: impl Fn(&T) -> U) -> CoeffPolynomial<U> {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let u = f(c);
            if !u.is_zero() {
                terms.insert(m.clone(), u);
            }
        }
        CoeffPolynomial { chart: self.chart, terms }
    }
}

impl CoeffPolynomial<Rat> {
    pub fn eval(&self, point: &[f64]) -> f64 {
        self.eval_f64(point, rat_to_f64)
    }
}

impl<T: Coeff> Add for CoeffPolynomial<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let chart = self.unified_chart(&rhs);
        let mut terms = self.terms;
        for (m, c) in rhs.terms {
            let entry = terms.entry(m).or_insert_with(T::zero);
            *entry = entry.clone() + c;
        }
        terms.retain(|_, c| !c.is_zero());
        Self { chart, terms }
    }
}

impl<T: Coeff> Sub for CoeffPolynomial<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<T: Coeff> Neg for CoeffPolynomial<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            chart: self.chart,
            terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect(),
        }
    }
}

impl<T: Coeff> Mul for CoeffPolynomial<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let chart = self.unified_chart(&rhs);
        let mut terms: BTreeMap<Monomial, T> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let m = ma.mul(mb);
                let c = ca.clone() * cb.clone();
                let entry = terms.entry(m).or_insert_with(T::zero);
                *entry = entry.clone() + c;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        Self { chart, terms }
    }
}

/// Polynomials form a coefficient ring themselves; this is what lets the
/// series routines run symbolically over the coefficient body.
impl<T: Coeff> Coeff for CoeffPolynomial<T> {
    fn zero() -> Self {
        Self { chart: None, terms: BTreeMap::new() }
    }
    fn one() -> Self {
        Self::constant(T::one())
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn from_int(n: i64) -> Self {
        Self::constant(T::from_int(n))
    }
    fn try_inv(&self) -> Option<Self> {
        if self.terms.len() == 1 && self.is_constant() {
            self.constant_term().try_inv().map(Self::constant)
        } else {
            None
        }
    }
    fn div_int(&self, n: i64) -> Self {
        Self {
            chart: self.chart,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.div_int(n))).collect(),
        }
    }
}

impl<T: Coeff + fmt::Display> fmt::Display for CoeffPolynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let chart = self.chart.unwrap_or(Chart::Disc);
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})", c)?;
            for &(v, e) in m.pairs() {
                if e == 1 {
                    write!(f, "*{}", chart.var_name(v))?;
                } else {
                    write!(f, "*{}^{}", chart.var_name(v), e)?;
                }
            }
        }
        Ok(())
    }
}

/// All monomials of chart-weight at most `max_weight` in the variables of
/// index at most `max_index`, sorted by (weight, monomial order) so the basis
/// enumeration is canonical.
pub fn basis_monomials(chart: Chart, max_weight: u32, max_index: u16) -> Vec<Monomial> {
    let min_var: u16 = match chart {
        Chart::Disc => 1,
        Chart::Infinity => 0,
    };
    let mut out = Vec::new();
    let mut stack: Vec<(u16, u16)> = Vec::new();
    fn rec(
        chart: Chart,
        var: u16,
        max_index: u16,
        budget: u32,
        stack: &mut Vec<(u16, u16)>,
        out: &mut Vec<Monomial>,
    ) {
        if var > max_index {
            out.push(Monomial::from_pairs(stack.clone()));
            return;
        }
        let w = chart.var_weight(var).max(1);
        let max_e = budget / w;
        for e in 0..=max_e {
            if e > 0 {
                stack.push((var, e as u16));
            }
            rec(chart, var + 1, max_index, budget - w * e, stack, out);
            if e > 0 {
                stack.pop();
            }
        }
    }
    rec(chart, min_var, max_index, max_weight, &mut stack, &mut out);
    out.sort_by_key(|m| (m.weight(chart), m.clone()));
    out.dedup();
    out
}

/// JSON form of one basis element: exponent map plus exact coefficients.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolynomialJson {
    pub chart: Chart,
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermJson {
    pub monomial: BTreeMap<String, u16>,
    pub coeff: String,
}

impl PolynomialJson {
    pub fn from_rational(p: &CoeffPolynomial<Rat>, chart: Chart) -> Self {
        let terms = p
            .terms()
            .map(|(m, c)| TermJson {
                monomial: m
                    .pairs()
                    .iter()
                    .map(|&(v, e)| (chart.var_name(v), e))
                    .collect(),
                coeff: c.to_string(),
            })
            .collect();
        Self { chart, terms }
    }
}
