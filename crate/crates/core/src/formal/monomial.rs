use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

use super::Rational;

/// Exponent vector of a monomial, also used as a derivative multi-index.
///
/// Ordered graded-lexicographically: total degree first, then exponents
/// compared left to right (so `x1 > x2` and `x1^2 > x1 x2 > x2^2`).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(SmallVec<[u16; 8]>);

/// Derivative multi-indices share the exponent-vector representation.
pub type MultiIndex = Monomial;

impl Monomial {
    pub fn one(dim: usize) -> Monomial {
        Monomial(SmallVec::from_elem(0, dim))
    }

    pub fn var(dim: usize, i: usize) -> Monomial {
        let mut m = Monomial::one(dim);
        m.0[i] = 1;
        m
    }

    pub fn from_exponents<I: IntoIterator<Item = u32>>(exps: I) -> Monomial {
        Monomial(
            exps.into_iter()
                .map(|e| u16::try_from(e).expect("exponent too large"))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn exponent(&self, i: usize) -> u32 {
        self.0[i] as u32
    }

    pub fn exponents(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().map(|&e| e as u32)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.dim(), other.dim());
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Componentwise `self ≤ other`.
    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `self − other`, or `None` if some component would go negative.
    pub fn checked_sub(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = self.0.clone();
        for (o, b) in out.iter_mut().zip(&other.0) {
            *o = o.checked_sub(*b)?;
        }
        Some(Monomial(out))
    }

    pub fn with_exponent(&self, i: usize, e: u32) -> Monomial {
        let mut m = self.clone();
        m.0[i] = u16::try_from(e).expect("exponent too large");
        m
    }

    pub fn increment(&self, i: usize) -> Monomial {
        let mut m = self.clone();
        m.0[i] += 1;
        m
    }

    /// α! = ∏ αᵢ!
    pub fn factorial(&self) -> Rational {
        let mut acc = Rational::ONE;
        for &e in &self.0 {
            acc = &acc * &Rational::factorial(e as u32);
        }
        acc
    }

    /// ∂^α x^self = (self!/(self−α)!) x^(self−α), or `None` when it vanishes.
    pub fn derive(&self, alpha: &MultiIndex) -> Option<(Rational, Monomial)> {
        let rest = self.checked_sub(alpha)?;
        let mut coeff: i128 = 1;
        let mut big: Option<Rational> = None;
        for (&e, &a) in self.0.iter().zip(&alpha.0) {
            for t in 0..a {
                let f = (e - t) as i128;
                match coeff.checked_mul(f) {
                    Some(c) if big.is_none() && c < i64::MAX as i128 => coeff = c,
                    _ => {
                        let acc = big.take().unwrap_or_else(|| Rational::from_int(coeff as i64));
                        big = Some(&acc * &Rational::from_int(f as i64));
                        coeff = 1;
                    }
                }
            }
        }
        let c = match big {
            Some(b) => &b * &Rational::from_int(coeff as i64),
            None => Rational::from_int(coeff as i64),
        };
        Some((c, rest))
    }

    /// Product of binomials ∏ C(selfᵢ, βᵢ).
    pub fn binomial(&self, beta: &MultiIndex) -> Rational {
        let mut acc = Rational::ONE;
        for (&a, &b) in self.0.iter().zip(&beta.0) {
            acc = &acc * &Rational::binomial(a as u32, b as u32);
        }
        acc
    }

    /// All β ≤ self componentwise, in graded-lex order.
    pub fn divisors(&self) -> Vec<Monomial> {
        let mut out = vec![Monomial(SmallVec::new())];
        for &e in &self.0 {
            let mut next = Vec::with_capacity(out.len() * (e as usize + 1));
            for m in &out {
                for k in 0..=e {
                    let mut v = m.0.clone();
                    v.push(k);
                    next.push(Monomial(v));
                }
            }
            out = next;
        }
        out.sort();
        out
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

impl fmt::Display for Monomial {
    /// `x1^2 x3`; the empty product prints as `1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            if e == 1 {
                write!(f, "x{}", i + 1)?;
            } else {
                write!(f, "x{}^{}", i + 1, e)?;
            }
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}

/// All monomials in `dim` variables of total degree exactly `deg`, graded-lex ascending.
pub fn monomials_of_degree(dim: usize, deg: u32) -> Vec<Monomial> {
    fn rec(dim: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if prefix.len() + 1 == dim {
            prefix.push(left);
            out.push(Monomial::from_exponents(prefix.iter().copied()));
            prefix.pop();
            return;
        }
        for e in 0..=left {
            prefix.push(e);
            rec(dim, left - e, prefix, out);
            prefix.pop();
        }
    }
    if dim == 0 {
        return if deg == 0 { vec![Monomial::one(0)] } else { vec![] };
    }
    let mut out = Vec::new();
    rec(dim, deg, &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// All monomials of total degree ≤ `max_deg`, graded-lex ascending.
pub fn monomials_up_to(dim: usize, max_deg: u32) -> Vec<Monomial> {
    (0..=max_deg)
        .flat_map(|d| monomials_of_degree(dim, d))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_lex_order() {
        let m = |v: &[u32]| Monomial::from_exponents(v.iter().copied());
        assert!(m(&[2, 0]) > m(&[1, 1]));
        assert!(m(&[1, 1]) > m(&[0, 2]));
        assert!(m(&[0, 2]) > m(&[1, 0]));
        assert!(m(&[1, 0]) > m(&[0, 1]));
        assert!(m(&[0, 1]) > m(&[0, 0]));
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(monomials_up_to(4, 4).len(), 70);
        assert_eq!(monomials_of_degree(3, 2).len(), 6);
        let all = monomials_up_to(3, 3);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn derivative_of_monomial() {
        let x = Monomial::from_exponents([3, 1]);
        let (c, r) = x.derive(&Monomial::from_exponents([2, 0])).unwrap();
        assert_eq!(c, Rational::from_int(6));
        assert_eq!(r, Monomial::from_exponents([1, 1]));
        assert!(x.derive(&Monomial::from_exponents([0, 2])).is_none());
    }

    #[test]
    fn display() {
        assert_eq!(Monomial::from_exponents([2, 0, 1]).to_string(), "x1^2 x3");
        assert_eq!(Monomial::one(2).to_string(), "1");
    }
}
