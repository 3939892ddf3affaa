use std::fmt;

use serde::{Deserialize, Serialize};

use super::polynomial::{format_term, join_signed};
use super::{Polynomial, Rational};
use crate::error::{check_dim, Error, Result};

/// Formal power series in ν with polynomial coefficients, truncated after ν^N.
///
/// `coeffs[r]` is the coefficient of ν^r; all arithmetic is exact modulo ν^{N+1}.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SeriesRepr", into = "SeriesRepr")]
pub struct NuSeries {
    dim: usize,
    coeffs: Vec<Polynomial>,
}

impl NuSeries {
    pub fn zero(dim: usize, order: usize) -> NuSeries {
        NuSeries {
            dim,
            coeffs: vec![Polynomial::zero(dim); order + 1],
        }
    }

    pub fn one(dim: usize, order: usize) -> NuSeries {
        NuSeries::from_poly(Polynomial::one(dim), order)
    }

    pub fn from_poly(p: Polynomial, order: usize) -> NuSeries {
        let dim = p.dim();
        let mut s = NuSeries::zero(dim, order);
        s.coeffs[0] = p;
        s
    }

    /// The series `c · ν^k` (zero if k > order).
    pub fn nu_power(dim: usize, order: usize, k: usize, c: Rational) -> NuSeries {
        let mut s = NuSeries::zero(dim, order);
        if k <= order {
            s.coeffs[k] = Polynomial::constant(dim, c);
        }
        s
    }

    /// Coefficients beyond `order` are dropped; missing ones are zero.
    pub fn from_coeffs(dim: usize, order: usize, coeffs: Vec<Polynomial>) -> Result<NuSeries> {
        let mut s = NuSeries::zero(dim, order);
        for (r, c) in coeffs.into_iter().enumerate() {
            check_dim(dim, c.dim())?;
            if r <= order {
                s.coeffs[r] = c;
            }
        }
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, r: usize) -> &Polynomial {
        &self.coeffs[r]
    }

    pub fn coeff_mut(&mut self, r: usize) -> &mut Polynomial {
        &mut self.coeffs[r]
    }

    pub fn coeffs(&self) -> &[Polynomial] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Polynomial::is_zero)
    }

    /// Lowest r with a nonzero ν^r coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn truncate(&self, order: usize) -> NuSeries {
        assert!(order <= self.order(), "cannot extend a truncated series");
        NuSeries {
            dim: self.dim,
            coeffs: self.coeffs[..=order].to_vec(),
        }
    }

    fn check_compatible(&self, other: &NuSeries) -> Result<()> {
        check_dim(self.dim, other.dim)?;
        if self.order() != other.order() {
            return Err(Error::TruncationMismatch {
                expected: self.order(),
                found: other.order(),
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &NuSeries) -> Result<NuSeries> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.add_scaled(other, &Rational::ONE);
        Ok(out)
    }

    pub fn try_sub(&self, other: &NuSeries) -> Result<NuSeries> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.add_scaled(other, &-Rational::ONE);
        Ok(out)
    }

    /// `self += c · other` (orders must match).
    pub fn add_scaled(&mut self, other: &NuSeries, c: &Rational) {
        debug_assert_eq!(self.order(), other.order());
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            a.add_scaled(b, c);
        }
    }

    /// `self += c · ν^shift · other`, dropping terms beyond the truncation.
    pub fn add_shifted(&mut self, other: &NuSeries, shift: usize, c: &Rational) {
        let n = self.order();
        for (r, b) in other.coeffs.iter().enumerate() {
            if r + shift > n {
                break;
            }
            self.coeffs[r + shift].add_scaled(b, c);
        }
    }

    pub fn scale(&self, c: &Rational) -> NuSeries {
        NuSeries {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|p| p.scale(c)).collect(),
        }
    }

    pub fn neg(&self) -> NuSeries {
        self.scale(&-Rational::ONE)
    }

    /// Multiply by ν^k (truncating).
    pub fn shift(&self, k: usize) -> NuSeries {
        let mut out = NuSeries::zero(self.dim, self.order());
        out.add_shifted(self, k, &Rational::ONE);
        out
    }

    /// Cauchy product truncated at the common order.
    pub fn try_mul(&self, other: &NuSeries) -> Result<NuSeries> {
        self.check_compatible(other)?;
        let n = self.order();
        let mut out = NuSeries::zero(self.dim, n);
        for (s, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (t, b) in other.coeffs[..=n - s].iter().enumerate() {
                if !b.is_zero() {
                    let prod = a * b;
                    out.coeffs[s + t].add_scaled(&prod, &Rational::ONE);
                }
            }
        }
        Ok(out)
    }

    /// Multiplicative inverse mod ν^{N+1}; requires a nonzero constant ν⁰ term.
    pub fn invert(&self) -> Result<NuSeries> {
        let lead = &self.coeffs[0];
        if !lead.is_constant() || lead.is_zero() {
            return Err(Error::NotInvertible);
        }
        let inv0 = lead.constant_term().recip().ok_or(Error::NotInvertible)?;
        let n = self.order();
        let mut out = NuSeries::zero(self.dim, n);
        out.coeffs[0] = Polynomial::constant(self.dim, inv0.clone());
        // b_r = -a0⁻¹ Σ_{s=1..r} a_s b_{r-s}
        for r in 1..=n {
            let mut acc = Polynomial::zero(self.dim);
            for s in 1..=r {
                if !self.coeffs[s].is_zero() && !out.coeffs[r - s].is_zero() {
                    acc.add_scaled(&(&self.coeffs[s] * &out.coeffs[r - s]), &Rational::ONE);
                }
            }
            out.coeffs[r] = acc.scale(&-&inv0);
        }
        Ok(out)
    }

    /// Coefficientwise map.
    pub fn map(&self, f: impl Fn(&Polynomial) -> Polynomial) -> NuSeries {
        NuSeries {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs
            .iter()
            .map(Polynomial::max_abs_coeff)
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for NuSeries {
    /// ν-powers ascending, monomials graded-lex descending within each power:
    /// `x1 x2 + 1/2 ν - x1 ν^2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.coeffs.iter().enumerate().flat_map(|(r, p)| {
            let nu = match r {
                0 => String::new(),
                1 => "ν".to_string(),
                _ => format!("ν^{r}"),
            };
            p.terms()
                .rev()
                .map(move |(m, c)| (c.is_negative(), format_term(c, m, &nu)))
                .collect::<Vec<_>>()
        });
        f.write_str(&join_signed(terms))
    }
}

impl fmt::Debug for NuSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NuSeries[dim {}, N={}]({})", self.dim, self.order(), self)
    }
}

#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    dim: usize,
    order: usize,
    coeffs: Vec<Polynomial>,
}

impl From<NuSeries> for SeriesRepr {
    fn from(s: NuSeries) -> Self {
        SeriesRepr {
            dim: s.dim,
            order: s.order(),
            coeffs: s.coeffs,
        }
    }
}

impl TryFrom<SeriesRepr> for NuSeries {
    type Error = Error;
    fn try_from(r: SeriesRepr) -> Result<Self> {
        if r.coeffs.len() != r.order + 1 {
            return Err(Error::Invalid(format!(
                "series of order {} needs {} coefficients, found {}",
                r.order,
                r.order + 1,
                r.coeffs.len()
            )));
        }
        NuSeries::from_coeffs(r.dim, r.order, r.coeffs)
    }
}
