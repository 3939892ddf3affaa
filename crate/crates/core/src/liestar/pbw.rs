use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::error::{check_dim, Error, Result};
use crate::formal::{Monomial, NuSeries, Polynomial, Rational};
use crate::poisson::LieAlgebra;

/// Arithmetic in `U(g_ν)`, the enveloping algebra of g with bracket
/// rescaled by ν, truncated after ν^N.
///
/// Two coordinate systems share the same container, a [`NuSeries`] over n
/// variables:
///
/// * *ordered*: the monomial `x^c` stands for the PBW word `X_1^{c_1}⋯X_n^{c_n}`;
/// * *symmetric*: `x^c` stands for `σ(x^c)`, the total symmetrization.
///
/// All tables are memoized; the memo is shared between threads and values
/// are inserted only after they are fully computed.
pub struct Ug {
    g: LieAlgebra,
    order: usize,
    mul_gen: Memo<(Monomial, usize)>,
    sym_sum: Memo<Monomial>,
    unsym: Memo<Monomial>,
    sym_times: Memo<(Monomial, Monomial)>,
}

type Memo<K> = RwLock<HashMap<K, Arc<NuSeries>>>;

fn memo_get<K: std::hash::Hash + Eq>(m: &Memo<K>, k: &K) -> Option<Arc<NuSeries>> {
    m.read().expect("memo lock").get(k).cloned()
}

fn memo_put<K: std::hash::Hash + Eq>(m: &Memo<K>, k: K, v: NuSeries) -> Arc<NuSeries> {
    m.write()
        .expect("memo lock")
        .entry(k)
        .or_insert_with(|| Arc::new(v))
        .clone()
}

fn last_index(c: &Monomial) -> Option<usize> {
    (0..c.dim()).rev().find(|&i| c.exponent(i) > 0)
}

impl Ug {
    pub fn new(g: LieAlgebra, order: usize) -> Ug {
        Ug {
            g,
            order,
            mul_gen: RwLock::default(),
            sym_sum: RwLock::default(),
            unsym: RwLock::default(),
            sym_times: RwLock::default(),
        }
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.g
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    fn word(&self, c: Monomial) -> NuSeries {
        NuSeries::from_poly(Polynomial::monomial(c), self.order)
    }

    /// Ordered word `X^c` times the generator `X_j`, in ordered coordinates.
    pub fn mul_gen(&self, c: &Monomial, j: usize) -> Arc<NuSeries> {
        let key = (c.clone(), j);
        if let Some(v) = memo_get(&self.mul_gen, &key) {
            return v;
        }
        let out = match last_index(c) {
            Some(l) if l > j => {
                // X^{c'} X_l X_j = (X^{c'} X_j) X_l + ν Σ_k c^k_{lj} X^{c'} X_k
                let cp = c.checked_sub(&Monomial::var(self.dim(), l)).expect("c_l > 0");
                let head = self.mul_gen(&cp, j);
                let mut out = self.mul_elem_gen(&head, l);
                for k in 0..self.dim() {
                    let s = self.g.structure_constant(l, j, k);
                    if !s.is_zero() {
                        out.add_shifted(&self.mul_gen(&cp, k), 1, s);
                    }
                }
                out
            }
            _ => self.word(c.increment(j)),
        };
        memo_put(&self.mul_gen, key, out)
    }

    /// Ordered element times a generator.
    pub fn mul_elem_gen(&self, e: &NuSeries, j: usize) -> NuSeries {
        let mut out = NuSeries::zero(self.dim(), self.order);
        for (s, p) in e.coeffs().iter().enumerate() {
            for (c, coef) in p.terms() {
                out.add_shifted(&self.mul_gen(c, j), s, coef);
            }
        }
        out
    }

    /// Ordered element times the ordered word `X^d`.
    pub fn mul_elem_word(&self, e: &NuSeries, d: &Monomial) -> NuSeries {
        let mut out = e.clone();
        for i in 0..d.dim() {
            for _ in 0..d.exponent(i) {
                out = self.mul_elem_gen(&out, i);
            }
        }
        out
    }

    /// Product of two elements in ordered coordinates.
    pub fn mul_ordered(&self, a: &NuSeries, b: &NuSeries) -> NuSeries {
        let mut out = NuSeries::zero(self.dim(), self.order);
        for (s, p) in b.coeffs().iter().enumerate() {
            for (d, coef) in p.terms() {
                out.add_shifted(&self.mul_elem_word(a, d), s, coef);
            }
        }
        out
    }

    /// Sum of all distinct orderings of the multiset word `x^a`, ordered
    /// coordinates: `S(a) = Σ_i S(a − e_i) X_i`.
    fn sym_sum(&self, a: &Monomial) -> Arc<NuSeries> {
        if let Some(v) = memo_get(&self.sym_sum, a) {
            return v;
        }
        let out = if a.is_one() {
            self.word(a.clone())
        } else {
            let mut out = NuSeries::zero(self.dim(), self.order);
            for i in 0..self.dim() {
                if let Some(prev) = a.checked_sub(&Monomial::var(self.dim(), i)) {
                    out.add_scaled(&self.mul_elem_gen(&self.sym_sum(&prev), i), &Rational::ONE);
                }
            }
            out
        };
        memo_put(&self.sym_sum, a.clone(), out)
    }

    /// `σ(x^a)` in ordered coordinates. There are |a|!/a! distinct words, so
    /// `σ(x^a) = a!/|a|! · S(a)`.
    pub fn sigma_monomial(&self, a: &Monomial) -> NuSeries {
        let w = &a.factorial() / &Rational::factorial(a.degree());
        self.sym_sum(a).scale(&w)
    }

    /// Symmetric → ordered coordinates.
    pub fn sigma(&self, s: &NuSeries) -> NuSeries {
        let mut out = NuSeries::zero(self.dim(), self.order);
        for (r, p) in s.coeffs().iter().enumerate() {
            for (a, coef) in p.terms() {
                out.add_shifted(&self.sigma_monomial(a), r, coef);
            }
        }
        out
    }

    /// `σ⁻¹(X^c)`: `X^c − σ(x^c)` is O(ν) and of lower degree, so
    /// `σ⁻¹(X^c) = x^c + σ⁻¹(X^c − σ(x^c))` terminates.
    fn unsym_word(&self, c: &Monomial) -> Arc<NuSeries> {
        if let Some(v) = memo_get(&self.unsym, c) {
            return v;
        }
        let mut rest = self.word(c.clone());
        rest.add_scaled(&self.sigma_monomial(c), &-Rational::ONE);
        debug_assert!(rest.coeff(0).is_zero());
        let mut out = self.word(c.clone());
        out.add_scaled(&self.unsym(&rest), &Rational::ONE);
        memo_put(&self.unsym, c.clone(), out)
    }

    /// Ordered → symmetric coordinates.
    pub fn unsym(&self, e: &NuSeries) -> NuSeries {
        let mut out = NuSeries::zero(self.dim(), self.order);
        for (r, p) in e.coeffs().iter().enumerate() {
            for (c, coef) in p.terms() {
                out.add_shifted(&self.unsym_word(c), r, coef);
            }
        }
        out
    }

    /// `σ(x^a) · X^d` in ordered coordinates, built up one generator at a
    /// time from the last letter of `d` so that all prefixes are shared.
    fn sigma_times_word(&self, a: &Monomial, d: &Monomial) -> Arc<NuSeries> {
        let key = (a.clone(), d.clone());
        if let Some(v) = memo_get(&self.sym_times, &key) {
            return v;
        }
        let out = match last_index(d) {
            None => self.sigma_monomial(a),
            Some(l) => {
                let prev = d.checked_sub(&Monomial::var(self.dim(), l)).expect("d_l > 0");
                self.mul_elem_gen(&self.sigma_times_word(a, &prev), l)
            }
        };
        memo_put(&self.sym_times, key, out)
    }

    /// Star product of monomials on g*: `σ⁻¹(σ(x^a) σ(x^b))`, symmetric
    /// coordinates, i.e. `x^a * x^b` for the CBH product.
    pub fn star_monomials(&self, a: &Monomial, b: &Monomial) -> NuSeries {
        let sb = self.sigma_monomial(b);
        let mut prod = NuSeries::zero(self.dim(), self.order);
        for (s, p) in sb.coeffs().iter().enumerate() {
            for (d, coef) in p.terms() {
                prod.add_shifted(&self.sigma_times_word(a, d), s, coef);
            }
        }
        self.unsym(&prod)
    }

    /// Product of two elements in symmetric coordinates.
    pub fn mul_symmetric(&self, a: &NuSeries, b: &NuSeries) -> Result<NuSeries> {
        for x in [a, b] {
            check_dim(self.dim(), x.dim())?;
            if x.order() != self.order {
                return Err(Error::TruncationMismatch {
                    expected: self.order,
                    found: x.order(),
                });
            }
        }
        let mut out = NuSeries::zero(self.dim(), self.order);
        for (r, pa) in a.coeffs().iter().enumerate() {
            for (ma, ca) in pa.terms() {
                for (s, pb) in b.coeffs().iter().enumerate() {
                    if r + s > self.order {
                        break;
                    }
                    for (mb, cb) in pb.terms() {
                        out.add_shifted(&self.star_monomials(ma, mb), r + s, &(ca * cb));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// An element of `U(g_ν)` stored by its σ-preimage in `S(g)[[ν]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PBWElement {
    pub algebra: LieAlgebra,
    pub repr: NuSeries,
}

impl PBWElement {
    pub fn new(algebra: LieAlgebra, repr: NuSeries) -> Result<PBWElement> {
        check_dim(algebra.dim(), repr.dim())?;
        Ok(PBWElement { algebra, repr })
    }

    /// The generator `X_i` (0-based).
    pub fn generator(algebra: &LieAlgebra, i: usize, order: usize) -> PBWElement {
        let repr = NuSeries::from_poly(Polynomial::var(algebra.dim(), i), order);
        PBWElement {
            algebra: algebra.clone(),
            repr,
        }
    }
}

/// `σ(a)∘σ(b)` expressed in symmetric coordinates.
pub fn ug_mul(a: &PBWElement, b: &PBWElement) -> Result<PBWElement> {
    if a.algebra != b.algebra {
        return Err(Error::InvalidLieAlgebra("operands belong to different algebras".into()));
    }
    let ug = Ug::new(a.algebra.clone(), a.repr.order());
    let repr = ug.mul_symmetric(&a.repr, &b.repr)?;
    Ok(PBWElement {
        algebra: a.algebra.clone(),
        repr,
    })
}
