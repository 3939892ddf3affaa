use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::{Monomial, MultiIndex, Rational};
use crate::error::{check_dim, Error, Result};

/// Sparse multivariate polynomial with exact rational coefficients.
///
/// Terms are keyed by exponent vector in graded-lex order; zero coefficients
/// are never stored.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PolynomialRepr", into = "PolynomialRepr")]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Polynomial {
        Polynomial {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(dim: usize) -> Polynomial {
        Polynomial::constant(dim, Rational::ONE)
    }

    pub fn constant(dim: usize, c: Rational) -> Polynomial {
        Polynomial::term(Monomial::one(dim), c)
    }

    /// The coordinate function x_{i+1} (0-based `i`).
    pub fn var(dim: usize, i: usize) -> Polynomial {
        assert!(i < dim, "variable index out of range");
        Polynomial::term(Monomial::var(dim, i), Rational::ONE)
    }

    pub fn monomial(m: Monomial) -> Polynomial {
        Polynomial::term(m, Rational::ONE)
    }

    pub fn term(m: Monomial, c: Rational) -> Polynomial {
        let dim = m.dim();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Polynomial { dim, terms }
    }

    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Polynomial>
    where
        I: IntoIterator<Item = (Monomial, Rational)>,
    {
        let mut p = Polynomial::zero(dim);
        for (m, c) in terms {
            check_dim(dim, m.dim())?;
            p.add_term(m, &c);
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_one())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(|m| m.degree())
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&Monomial::one(self.dim))
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, m: Monomial, c: &Rational) {
        if c.is_zero() {
            return;
        }
        debug_assert_eq!(m.dim(), self.dim);
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// `self += c · other`.
    pub fn add_scaled(&mut self, other: &Polynomial, c: &Rational) {
        if c.is_zero() {
            return;
        }
        for (m, a) in &other.terms {
            if c.is_one() {
                self.add_term(m.clone(), a);
            } else {
                self.add_term(m.clone(), &(a * c));
            }
        }
    }

    /// `self += c · x^m · other`.
    pub fn add_scaled_shifted(&mut self, other: &Polynomial, m: &Monomial, c: &Rational) {
        if c.is_zero() {
            return;
        }
        for (n, a) in &other.terms {
            self.add_term(n.mul(m), &(a * c));
        }
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.dim);
        }
        Polynomial {
            dim: self.dim,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn try_add(&self, other: &Polynomial) -> Result<Polynomial> {
        check_dim(self.dim, other.dim)?;
        let mut out = self.clone();
        out.add_scaled(other, &Rational::ONE);
        Ok(out)
    }

    pub fn try_mul(&self, other: &Polynomial) -> Result<Polynomial> {
        check_dim(self.dim, other.dim)?;
        let mut out = Polynomial::zero(self.dim);
        for (m, a) in &self.terms {
            for (n, b) in &other.terms {
                out.add_term(m.mul(n), &(a * b));
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut acc = Polynomial::one(self.dim);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Iterated partial derivative ∂^α.
    pub fn derive(&self, alpha: &MultiIndex) -> Polynomial {
        debug_assert_eq!(alpha.dim(), self.dim);
        let mut out = Polynomial::zero(self.dim);
        for (m, a) in &self.terms {
            if let Some((c, rest)) = m.derive(alpha) {
                out.add_term(rest, &(a * &c));
            }
        }
        out
    }

    /// ∂/∂x_{i+1} (0-based `i`).
    pub fn partial(&self, i: usize) -> Polynomial {
        self.derive(&Monomial::var(self.dim, i))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.to_f64().abs())
            .fold(0.0, f64::max)
    }

    /// Evaluate at a rational point.
    pub fn eval(&self, point: &[Rational]) -> Result<Rational> {
        check_dim(self.dim, point.len())?;
        let mut acc = Rational::ZERO;
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, e) in point.iter().zip(m.exponents()) {
                t = &t * &x.pow(e);
            }
            acc += &t;
        }
        Ok(acc)
    }

    /// Parse the literal syntax `c * x1^a1 * ... + ...`.
    pub fn parse(s: &str, dim: usize) -> Result<Polynomial> {
        super::parse::parse_polynomial(s, dim)
    }
}

impl Add<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.try_add(rhs).expect("polynomial dimension mismatch")
    }
}

impl Sub<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.dim, rhs.dim, "polynomial dimension mismatch");
        let mut out = self.clone();
        out.add_scaled(rhs, &-Rational::ONE);
        out
    }
}

impl Mul<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.try_mul(rhs).expect("polynomial dimension mismatch")
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Rational::ONE)
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial { (&self).$m(&rhs) }
        }
        impl $tr<&Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: &Polynomial) -> Polynomial { (&self).$m(rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

/// Writes `coeff · mono` with the sign handled by the caller; returns the
/// text for the absolute value of the coefficient.
pub(crate) fn format_term(c: &Rational, m: &Monomial, suffix: &str) -> String {
    let abs = c.abs();
    let mono = if m.is_one() { String::new() } else { m.to_string() };
    let mut parts: Vec<String> = Vec::new();
    if !abs.is_one() || (mono.is_empty() && suffix.is_empty()) {
        parts.push(abs.to_string());
    }
    if !mono.is_empty() {
        parts.push(mono);
    }
    if !suffix.is_empty() {
        parts.push(suffix.to_string());
    }
    parts.join(" ")
}

pub(crate) fn join_signed(terms: impl Iterator<Item = (bool, String)>) -> String {
    let mut out = String::new();
    for (i, (neg, body)) in terms.enumerate() {
        match (i, neg) {
            (0, false) => {}
            (0, true) => out.push('-'),
            (_, false) => out.push_str(" + "),
            (_, true) => out.push_str(" - "),
        }
        out.push_str(&body);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl fmt::Display for Polynomial {
    /// Highest graded-lex term first, e.g. `x1^2 - 3/2 x1 x2 + 1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = join_signed(
            self.terms
                .iter()
                .rev()
                .map(|(m, c)| (c.is_negative(), format_term(c, m, ""))),
        );
        f.write_str(&s)
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial[{}]({})", self.dim, self)
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    exponents: Vec<u32>,
    coeff: Rational,
}

#[derive(Serialize, Deserialize)]
struct PolynomialRepr {
    dim: usize,
    terms: Vec<TermRepr>,
}

impl From<Polynomial> for PolynomialRepr {
    fn from(p: Polynomial) -> Self {
        PolynomialRepr {
            dim: p.dim,
            terms: p
                .terms
                .into_iter()
                .rev()
                .map(|(m, coeff)| TermRepr {
                    exponents: m.exponents().collect(),
                    coeff,
                })
                .collect(),
        }
    }
}

impl TryFrom<PolynomialRepr> for Polynomial {
    type Error = Error;
    fn try_from(r: PolynomialRepr) -> Result<Self> {
        Polynomial::from_terms(
            r.dim,
            r.terms
                .into_iter()
                .map(|t| (Monomial::from_exponents(t.exponents), t.coeff)),
        )
    }
}
