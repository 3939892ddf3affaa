use std::collections::{BTreeMap, HashMap};

use crate::cochain::StarProduct;
use crate::error::{Error, Result};
use crate::formal::{NuSeries, Rational};

/// `[a, b]_* = a*b − b*a`.
pub fn star_commutator(s: &StarProduct, a: &NuSeries, b: &NuSeries) -> Result<NuSeries> {
    s.star_apply(a, b)?.try_sub(&s.star_apply(b, a)?)
}

/// `exp(ad_* a) u = Σ_j (1/j!) (ad_* a)^j u` truncated after ν^N. Every
/// star commutator raises the ν-order, so at most N + 1 terms contribute;
/// a term surviving past that is reported as non-truncating.
pub fn exp_ad(s: &StarProduct, a: &NuSeries, u: &NuSeries) -> Result<NuSeries> {
    let n = s.order();
    let mut out = u.clone();
    let mut term = u.clone();
    for j in 1..=n + 1 {
        term = star_commutator(s, a, &term)?.scale(&Rational::new(1, j as i64));
        if term.is_zero() {
            return Ok(out);
        }
        if term.valuation().is_some_and(|v| v < j) {
            return Err(Error::NonTruncating);
        }
        out = out.try_add(&term)?;
    }
    Err(Error::NonTruncating)
}

type Word = Vec<u8>;
type FreeElem = BTreeMap<Word, Rational>;

fn free_mul(x: &FreeElem, y: &FreeElem, max_len: usize) -> FreeElem {
    let mut out = FreeElem::new();
    for (u, a) in x {
        for (v, b) in y {
            if u.len() + v.len() > max_len {
                continue;
            }
            let mut w = u.clone();
            w.extend_from_slice(v);
            let e = out.entry(w).or_insert(Rational::ZERO);
            *e += &(a * b);
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn free_add_scaled(x: &mut FreeElem, y: &FreeElem, c: &Rational) {
    for (w, a) in y {
        let e = x.entry(w.clone()).or_insert(Rational::ZERO);
        *e += &(a * c);
    }
    x.retain(|_, c| !c.is_zero());
}

/// `exp(letter)` truncated at `max_len`.
fn free_exp_letter(letter: u8, max_len: usize) -> FreeElem {
    (0..=max_len)
        .map(|p| (vec![letter; p], Rational::factorial(p as u32).recip().expect("nonzero")))
        .collect()
}

/// Coefficients `c_w / |w|` such that
/// `log(e^X e^Y) = Σ_w (c_w / |w|) [w₁, [w₂, …, [w_{n−1}, w_n]…]]`
/// over words in X = 0, Y = 1 of length ≤ `max_len`, where `c_w` is the
/// coefficient of the word w in the associative series (Dynkin–Specht–Wever).
pub fn bch_lie_coefficients(max_len: usize) -> BTreeMap<Vec<u8>, Rational> {
    // Z = e^X e^Y − 1, log(1 + Z) = Σ_m (−1)^{m+1} Z^m / m
    let mut z = free_mul(&free_exp_letter(0, max_len), &free_exp_letter(1, max_len), max_len);
    z.remove(&Vec::new());
    let mut log = FreeElem::new();
    let mut power = z.clone();
    for m in 1..=max_len {
        let sign = if m % 2 == 1 { 1 } else { -1 };
        free_add_scaled(&mut log, &power, &Rational::new(sign, m as i64));
        power = free_mul(&power, &z, max_len);
    }
    log.into_iter()
        .map(|(w, c)| {
            let n = Rational::from_int(w.len() as i64);
            let c = &c / &n;
            (w, c)
        })
        .collect()
}

/// `a ∘_* b = log(e^a e^b)` in the star-commutator Lie algebra. A bracket of
/// n letters lies in ν^{n−1}, so words up to length N + 1 suffice.
pub fn star_bch(s: &StarProduct, a: &NuSeries, b: &NuSeries) -> Result<NuSeries> {
    let n = s.order();
    let coeffs = bch_lie_coefficients(n + 1);
    let letters = [a, b];
    // right-nested brackets memoized by word
    let mut cache: HashMap<Word, NuSeries> = HashMap::new();
    fn nested(
        s: &StarProduct,
        w: &[u8],
        letters: &[&NuSeries; 2],
        cache: &mut HashMap<Word, NuSeries>,
    ) -> Result<NuSeries> {
        if let Some(x) = cache.get(w) {
            return Ok(x.clone());
        }
        let x = if w.len() == 1 {
            letters[w[0] as usize].clone()
        } else {
            let inner = nested(s, &w[1..], letters, cache)?;
            if inner.is_zero() {
                inner
            } else {
                star_commutator(s, letters[w[0] as usize], &inner)?
            }
        };
        cache.insert(w.to_vec(), x.clone());
        Ok(x)
    }
    let mut out = NuSeries::zero(s.dim(), n);
    for (w, c) in &coeffs {
        let x = nested(s, w, &letters, &mut cache)?;
        out.add_scaled(&x, c);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Expand a right-nested bracket into words.
    fn expand(w: &[u8]) -> FreeElem {
        if w.len() == 1 {
            return [(w.to_vec(), Rational::ONE)].into_iter().collect();
        }
        let x: FreeElem = [(vec![w[0]], Rational::ONE)].into_iter().collect();
        let y = expand(&w[1..]);
        let mut out = free_mul(&x, &y, usize::MAX);
        free_add_scaled(&mut out, &free_mul(&y, &x, usize::MAX), &-Rational::ONE);
        out
    }

    #[test]
    fn lie_series_exponentiates_back() {
        // exp(Σ c_w [w]) = e^X e^Y in the free algebra up to length 6
        let len = 6;
        let mut z = FreeElem::new();
        for (w, c) in bch_lie_coefficients(len) {
            free_add_scaled(&mut z, &expand(&w), &c);
        }
        let mut exp = FreeElem::new();
        exp.insert(Vec::new(), Rational::ONE);
        let mut power = exp.clone();
        for m in 1..=len {
            power = free_mul(&power, &z, len);
            free_add_scaled(&mut exp, &power, &Rational::factorial(m as u32).recip().unwrap());
        }
        let target = free_mul(&free_exp_letter(0, len), &free_exp_letter(1, len), len);
        assert_eq!(exp, target);
    }

    #[test]
    fn low_order_terms() {
        // Z = X + Y + ½[X,Y] + (1/12)([X,[X,Y]] + [Y,[Y,X]]) + …
        let mut z = FreeElem::new();
        for (w, c) in bch_lie_coefficients(3) {
            free_add_scaled(&mut z, &expand(&w), &c);
        }
        let mut expect = FreeElem::new();
        for (w, c) in [
            (vec![0], Rational::ONE),
            (vec![1], Rational::ONE),
            (vec![0, 1], Rational::new(1, 2)),
            (vec![0, 0, 1], Rational::new(1, 12)),
            (vec![1, 1, 0], Rational::new(1, 12)),
        ] {
            free_add_scaled(&mut expect, &expand(&w), &c);
        }
        assert_eq!(z, expect);
    }
}
