use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::formal::{Monomial, MultiIndex, Polynomial, Rational};

/// One derivative multi-index per argument slot.
pub type Derivs = Vec<MultiIndex>;

/// A multidifferential operator with polynomial coefficients,
///
/// `D(u₁, …, u_p) = Σ c(x) ∂^{α₁}u₁ ⋯ ∂^{α_p}u_p`,
///
/// stored in canonical form: one coefficient per derivative tuple, zero
/// coefficients dropped. Equality of operators is equality of this form.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "OpRepr", into = "OpRepr")]
pub struct MultiDiffOp {
    arity: usize,
    dim: usize,
    terms: BTreeMap<Derivs, Polynomial>,
}

impl MultiDiffOp {
    pub fn zero(arity: usize, dim: usize) -> MultiDiffOp {
        MultiDiffOp {
            arity,
            dim,
            terms: BTreeMap::new(),
        }
    }

    /// Pointwise product of the arguments: `(u₁,…,u_p) ↦ u₁⋯u_p`.
    /// For arity 1 this is the identity operator.
    pub fn multiplication(arity: usize, dim: usize) -> MultiDiffOp {
        let mut op = MultiDiffOp::zero(arity, dim);
        op.add_term(vec![Monomial::one(dim); arity], &Polynomial::one(dim));
        op
    }

    pub fn identity(dim: usize) -> MultiDiffOp {
        MultiDiffOp::multiplication(1, dim)
    }

    /// Single term `c(x) ∂^{α₁} ⊗ ⋯ ⊗ ∂^{α_p}`.
    pub fn monomial_op(derivs: Derivs, coeff: Polynomial) -> MultiDiffOp {
        let dim = coeff.dim();
        let mut op = MultiDiffOp::zero(derivs.len(), dim);
        op.add_term(derivs, &coeff);
        op
    }

    pub fn from_terms<I>(arity: usize, dim: usize, terms: I) -> Result<MultiDiffOp>
    where
        I: IntoIterator<Item = (Derivs, Polynomial)>,
    {
        let mut op = MultiDiffOp::zero(arity, dim);
        for (d, c) in terms {
            if d.len() != arity {
                return Err(Error::ArityMismatch {
                    expected: arity,
                    found: d.len(),
                });
            }
            check_dim(dim, c.dim())?;
            for a in &d {
                check_dim(dim, a.dim())?;
            }
            op.add_term(d, &c);
        }
        Ok(op)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Derivs, &Polynomial)> {
        self.terms.iter()
    }

    pub fn coeff(&self, derivs: &Derivs) -> Polynomial {
        self.terms
            .get(derivs)
            .cloned()
            .unwrap_or_else(|| Polynomial::zero(self.dim))
    }

    pub fn add_term(&mut self, derivs: Derivs, coeff: &Polynomial) {
        self.add_term_scaled(derivs, coeff, &Rational::ONE);
    }

    /// `self += c · coeff · ∂^{derivs}`.
    pub fn add_term_scaled(&mut self, derivs: Derivs, coeff: &Polynomial, c: &Rational) {
        if coeff.is_zero() || c.is_zero() {
            return;
        }
        debug_assert_eq!(derivs.len(), self.arity);
        match self.terms.entry(derivs) {
            Entry::Vacant(v) => {
                v.insert(coeff.scale(c));
            }
            Entry::Occupied(mut o) => {
                o.get_mut().add_scaled(coeff, c);
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_same_shape(&self, other: &MultiDiffOp) -> Result<()> {
        check_dim(self.dim, other.dim)?;
        if self.arity != other.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: other.arity,
            });
        }
        Ok(())
    }

    /// `self += c · other`.
    pub fn add_scaled(&mut self, other: &MultiDiffOp, c: &Rational) {
        debug_assert!(self.check_same_shape(other).is_ok());
        for (d, p) in &other.terms {
            self.add_term_scaled(d.clone(), p, c);
        }
    }

    pub fn try_add(&self, other: &MultiDiffOp) -> Result<MultiDiffOp> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        out.add_scaled(other, &Rational::ONE);
        Ok(out)
    }

    pub fn try_sub(&self, other: &MultiDiffOp) -> Result<MultiDiffOp> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        out.add_scaled(other, &-Rational::ONE);
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> MultiDiffOp {
        let mut out = MultiDiffOp::zero(self.arity, self.dim);
        out.add_scaled(self, c);
        out
    }

    /// Multiply every coefficient by the polynomial `f`.
    pub fn mul_coeff(&self, f: &Polynomial) -> MultiDiffOp {
        let mut out = MultiDiffOp::zero(self.arity, self.dim);
        for (d, p) in &self.terms {
            out.add_term(d.clone(), &(p * f));
        }
        out
    }

    /// Highest derivative order appearing in any slot.
    pub fn max_order(&self) -> u32 {
        self.terms
            .keys()
            .flat_map(|d| d.iter().map(Monomial::degree))
            .max()
            .unwrap_or(0)
    }

    /// Highest derivative order appearing in `slot`.
    pub fn slot_order(&self, slot: usize) -> u32 {
        self.terms
            .keys()
            .map(|d| d[slot].degree())
            .max()
            .unwrap_or(0)
    }

    pub fn max_coeff_degree(&self) -> u32 {
        self.terms
            .values()
            .filter_map(Polynomial::degree)
            .max()
            .unwrap_or(0)
    }

    /// True when the operator annihilates constants placed in `slot`,
    /// i.e. no term leaves that slot underived.
    pub fn vanishes_on_constants(&self, slot: usize) -> bool {
        self.terms.keys().all(|d| !d[slot].is_one())
    }

    /// Exactly first order in every slot.
    pub fn is_one_differential(&self) -> bool {
        self.terms
            .keys()
            .all(|d| d.iter().all(|a| a.degree() == 1))
    }

    /// Evaluate on polynomial arguments.
    pub fn apply(&self, args: &[&Polynomial]) -> Result<Polynomial> {
        if args.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: args.len(),
            });
        }
        for a in args {
            check_dim(self.dim, a.dim())?;
        }
        let mut cache: Vec<HashMap<&MultiIndex, Polynomial>> = vec![HashMap::new(); self.arity];
        let mut out = Polynomial::zero(self.dim);
        'terms: for (derivs, coeff) in &self.terms {
            let mut prod = coeff.clone();
            for (slot, alpha) in derivs.iter().enumerate() {
                let d = cache[slot]
                    .entry(alpha)
                    .or_insert_with(|| args[slot].derive(alpha));
                if d.is_zero() {
                    continue 'terms;
                }
                prod = &prod * d;
            }
            out.add_scaled(&prod, &Rational::ONE);
        }
        Ok(out)
    }

    /// Permute argument slots: the result evaluated on `(u_0..u_{p-1})` equals
    /// `self` evaluated on `(u_{perm[0]}, …)`.
    pub fn permute(&self, perm: &[usize]) -> MultiDiffOp {
        assert_eq!(perm.len(), self.arity);
        let mut out = MultiDiffOp::zero(self.arity, self.dim);
        for (d, c) in &self.terms {
            let mut nd = vec![Monomial::one(self.dim); self.arity];
            for (slot, alpha) in d.iter().enumerate() {
                nd[perm[slot]] = alpha.clone();
            }
            out.add_term(nd, c);
        }
        out
    }

    /// `(u, v) ↦ C(v, u)` for a bidifferential operator.
    pub fn transpose(&self) -> MultiDiffOp {
        assert_eq!(self.arity, 2, "transpose needs arity 2");
        self.permute(&[1, 0])
    }

    /// `(u, v) ↦ ½(C(u,v) − C(v,u))`.
    pub fn skew_part(&self) -> MultiDiffOp {
        let mut out = self.scale(&Rational::new(1, 2));
        out.add_scaled(&self.transpose(), &Rational::new(-1, 2));
        out
    }

    /// `(u, v) ↦ ½(C(u,v) + C(v,u))`.
    pub fn symmetric_part(&self) -> MultiDiffOp {
        let mut out = self.scale(&Rational::new(1, 2));
        out.add_scaled(&self.transpose(), &Rational::new(1, 2));
        out
    }

    /// Hochschild coboundary, arity p → p+1:
    ///
    /// `(∂C)(u₀,…,u_p) = u₀C(u₁,…,u_p) + Σ_{r=1}^{p} (−1)^r C(…,u_{r−1}u_r,…) + (−1)^{p+1} C(u₀,…,u_{p−1})u_p`
    pub fn hochschild_d(&self) -> MultiDiffOp {
        let p = self.arity;
        let zero = Monomial::one(self.dim);
        let mut out = MultiDiffOp::zero(p + 1, self.dim);
        for (d, c) in &self.terms {
            let mut first = Vec::with_capacity(p + 1);
            first.push(zero.clone());
            first.extend(d.iter().cloned());
            out.add_term(first, c);

            for r in 1..=p {
                let sign = if r % 2 == 0 { Rational::ONE } else { -Rational::ONE };
                let alpha = &d[r - 1];
                for beta in alpha.divisors() {
                    let rest = alpha.checked_sub(&beta).expect("divisor");
                    let w = &alpha.binomial(&beta) * &sign;
                    let mut nd = Vec::with_capacity(p + 1);
                    nd.extend(d[..r - 1].iter().cloned());
                    nd.push(beta);
                    nd.push(rest);
                    nd.extend(d[r..].iter().cloned());
                    out.add_term_scaled(nd, c, &w);
                }
            }

            let sign = if (p + 1) % 2 == 0 { Rational::ONE } else { -Rational::ONE };
            let mut last: Derivs = d.clone();
            last.push(zero.clone());
            out.add_term_scaled(last, c, &sign);
        }
        out
    }

    /// `T ∘ self` for a unary operator `t`: `(u…) ↦ T(C(u…))`.
    pub fn post_compose(&self, t: &MultiDiffOp) -> Result<MultiDiffOp> {
        if t.arity != 1 {
            return Err(Error::ArityMismatch {
                expected: 1,
                found: t.arity,
            });
        }
        check_dim(self.dim, t.dim)?;
        let p = self.arity;
        let mut out = MultiDiffOp::zero(p, self.dim);
        for (td, tc) in &t.terms {
            let delta = &td[0];
            let splits = leibniz_splits(delta, p + 1);
            for (d, c) in &self.terms {
                let mut dc: HashMap<&MultiIndex, Polynomial> = HashMap::new();
                for (parts, w) in &splits {
                    let dcoef = dc.entry(&parts[0]).or_insert_with(|| c.derive(&parts[0]));
                    if dcoef.is_zero() {
                        continue;
                    }
                    let nd: Derivs = d.iter().zip(&parts[1..]).map(|(a, g)| a.mul(g)).collect();
                    out.add_term_scaled(nd, &(tc * &*dcoef), w);
                }
            }
        }
        Ok(out)
    }

    /// Replace argument `slot` by `A(u)` for a unary operator `a`.
    pub fn substitute(&self, slot: usize, a: &MultiDiffOp) -> Result<MultiDiffOp> {
        if a.arity != 1 {
            return Err(Error::ArityMismatch {
                expected: 1,
                found: a.arity,
            });
        }
        check_dim(self.dim, a.dim)?;
        assert!(slot < self.arity, "slot out of range");
        let mut out = MultiDiffOp::zero(self.arity, self.dim);
        for (d, c) in &self.terms {
            let alpha = &d[slot];
            for beta in alpha.divisors() {
                let rest = alpha.checked_sub(&beta).expect("divisor");
                let w = alpha.binomial(&beta);
                for (ad, acoef) in &a.terms {
                    let da = acoef.derive(&beta);
                    if da.is_zero() {
                        continue;
                    }
                    let mut nd = d.clone();
                    nd[slot] = rest.mul(&ad[0]);
                    out.add_term_scaled(nd, &(c * &da), &w);
                }
            }
        }
        Ok(out)
    }

    /// Composition of unary operators: `(self ∘ b)(u) = self(b(u))`.
    pub fn compose(&self, b: &MultiDiffOp) -> Result<MultiDiffOp> {
        b.post_compose(self)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms
            .values()
            .map(Polynomial::max_abs_coeff)
            .fold(0.0, f64::max)
    }

    /// Coefficientwise comparison within `tol`.
    pub fn approx_eq(&self, other: &MultiDiffOp, tol: f64) -> bool {
        match self.try_sub(other) {
            Ok(d) => d.max_abs_coeff() <= tol,
            Err(_) => false,
        }
    }
}

/// All ways to split a multi-index δ into `parts` ordered pieces, with the
/// multinomial weight δ!/(γ₁!⋯γ_k!).
pub(crate) fn leibniz_splits(delta: &MultiIndex, parts: usize) -> Vec<(Vec<MultiIndex>, Rational)> {
    // per coordinate: compositions of δ_i into `parts` pieces
    fn compositions(n: u32, parts: usize) -> Vec<Vec<u32>> {
        if parts == 1 {
            return vec![vec![n]];
        }
        let mut out = Vec::new();
        for first in 0..=n {
            for mut rest in compositions(n - first, parts - 1) {
                rest.insert(0, first);
                out.push(rest);
            }
        }
        out
    }
    let dim = delta.dim();
    let mut acc: Vec<(Vec<Vec<u32>>, Rational)> = vec![(vec![Vec::new(); parts], Rational::ONE)];
    for i in 0..dim {
        let n = delta.exponent(i);
        let comps = compositions(n, parts);
        let mut next = Vec::with_capacity(acc.len() * comps.len());
        for (pieces, w) in &acc {
            for comp in &comps {
                let mut weight = &Rational::factorial(n) * w;
                let mut np = pieces.clone();
                for (piece, &g) in np.iter_mut().zip(comp) {
                    weight = &weight / &Rational::factorial(g);
                    piece.push(g);
                }
                next.push((np, weight));
            }
        }
        acc = next;
    }
    acc.into_iter()
        .map(|(pieces, w)| {
            (
                pieces.into_iter().map(Monomial::from_exponents).collect(),
                w,
            )
        })
        .collect()
}

impl fmt::Display for MultiDiffOp {
    /// `(x3) ∂[1,0]⊗∂[0,1] + (1/2) ∂[0,0]⊗∂[2,0]`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(d, c)| {
                let ds: Vec<String> = d
                    .iter()
                    .map(|a| {
                        let e: Vec<String> = a.exponents().map(|x| x.to_string()).collect();
                        format!("∂[{}]", e.join(","))
                    })
                    .collect();
                format!("({}) {}", c, ds.join("⊗"))
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

impl fmt::Debug for MultiDiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiDiffOp[arity {}, dim {}]({})", self.arity, self.dim, self)
    }
}

#[derive(Serialize, Deserialize)]
struct OpTermRepr {
    coeff: Polynomial,
    derivs: Vec<Vec<u32>>,
}

#[derive(Serialize, Deserialize)]
struct OpRepr {
    arity: usize,
    dim: usize,
    terms: Vec<OpTermRepr>,
}

impl From<MultiDiffOp> for OpRepr {
    fn from(op: MultiDiffOp) -> Self {
        OpRepr {
            arity: op.arity,
            dim: op.dim,
            terms: op
                .terms
                .into_iter()
                .map(|(d, coeff)| OpTermRepr {
                    coeff,
                    derivs: d.iter().map(|a| a.exponents().collect()).collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<OpRepr> for MultiDiffOp {
    type Error = Error;
    fn try_from(r: OpRepr) -> Result<Self> {
        MultiDiffOp::from_terms(
            r.arity,
            r.dim,
            r.terms.into_iter().map(|t| {
                (
                    t.derivs.into_iter().map(Monomial::from_exponents).collect(),
                    t.coeff,
                )
            }),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(v: &[u32]) -> MultiIndex {
        Monomial::from_exponents(v.iter().copied())
    }

    fn p(s: &str, dim: usize) -> Polynomial {
        Polynomial::parse(s, dim).unwrap()
    }

    #[test]
    fn apply_basic() {
        let op = MultiDiffOp::monomial_op(vec![mi(&[1, 0, 0]), mi(&[0, 1, 0])], Polynomial::one(3));
        assert_eq!(op.apply(&[&p("x1", 3), &p("x2", 3)]).unwrap(), Polynomial::one(3));
        let op = MultiDiffOp::monomial_op(vec![mi(&[1, 0, 0]), mi(&[0, 1, 0])], p("x3", 3));
        assert_eq!(op.apply(&[&p("x1", 3), &p("x2", 3)]).unwrap(), p("x3", 3));
        assert!(op.apply(&[&p("x1^3 x2", 3), &Polynomial::one(3)]).unwrap().is_zero());
    }

    #[test]
    fn apply_errors() {
        let op = MultiDiffOp::multiplication(2, 2);
        assert!(matches!(
            op.apply(&[&Polynomial::one(2)]),
            Err(Error::ArityMismatch { .. })
        ));
        assert!(matches!(
            op.apply(&[&Polynomial::one(2), &Polynomial::one(3)]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn coboundary_of_derivation_vanishes() {
        let b = MultiDiffOp::monomial_op(vec![mi(&[1])], Polynomial::one(1));
        assert!(b.hochschild_d().is_zero());
    }

    #[test]
    fn coboundary_of_second_derivative() {
        // B(u) = u'' on ℝ¹ gives (∂B)(u,v) = −2u'v'
        let b = MultiDiffOp::monomial_op(vec![mi(&[2])], Polynomial::one(1));
        let expected = MultiDiffOp::monomial_op(
            vec![mi(&[1]), mi(&[1])],
            Polynomial::constant(1, Rational::from_int(-2)),
        );
        assert_eq!(b.hochschild_d(), expected);
        assert!(b.hochschild_d().hochschild_d().is_zero());
    }

    #[test]
    fn skew_and_symmetric_parts() {
        let c = MultiDiffOp::monomial_op(vec![mi(&[1, 0]), mi(&[0, 1])], Polynomial::one(2));
        let mut expected = MultiDiffOp::zero(2, 2);
        expected.add_term_scaled(vec![mi(&[1, 0]), mi(&[0, 1])], &Polynomial::one(2), &Rational::new(1, 2));
        expected.add_term_scaled(vec![mi(&[0, 1]), mi(&[1, 0])], &Polynomial::one(2), &Rational::new(-1, 2));
        assert_eq!(c.skew_part(), expected);
        let s = c.symmetric_part();
        assert!(s.skew_part().is_zero());
        assert_eq!(s.try_add(&c.skew_part()).unwrap(), c);
    }

    #[test]
    fn composition_matches_evaluation() {
        let t = MultiDiffOp::from_terms(
            1,
            2,
            [
                (vec![mi(&[2, 0])], p("x2", 2)),
                (vec![mi(&[0, 1])], p("x1^2 + 1", 2)),
            ],
        )
        .unwrap();
        let c = MultiDiffOp::from_terms(
            2,
            2,
            [
                (vec![mi(&[1, 0]), mi(&[0, 1])], p("x1", 2)),
                (vec![mi(&[0, 0]), mi(&[1, 1])], p("3", 2)),
            ],
        )
        .unwrap();
        let u = p("x1^3 x2 + x2^2", 2);
        let v = p("x1 x2^3 - 2 x1^2", 2);

        let tc = c.post_compose(&t).unwrap();
        let direct = t.apply(&[&c.apply(&[&u, &v]).unwrap()]).unwrap();
        assert_eq!(tc.apply(&[&u, &v]).unwrap(), direct);

        let ct = c.substitute(1, &t).unwrap();
        let tv = t.apply(&[&v]).unwrap();
        assert_eq!(ct.apply(&[&u, &v]).unwrap(), c.apply(&[&u, &tv]).unwrap());

        let tt = t.compose(&t).unwrap();
        let tu = t.apply(&[&u]).unwrap();
        assert_eq!(tt.apply(&[&u]).unwrap(), t.apply(&[&tu]).unwrap());
    }

    #[test]
    fn leibniz_weights() {
        let splits = leibniz_splits(&mi(&[2]), 2);
        let w: Vec<String> = splits.iter().map(|(_, w)| w.to_string()).collect();
        assert_eq!(w, ["1", "2", "1"]);
        let total: Rational = leibniz_splits(&mi(&[2, 1]), 3).iter().map(|(_, w)| w.clone()).sum();
        assert_eq!(total, Rational::from_int(27));
    }

    #[test]
    fn json_round_trip() {
        let c = MultiDiffOp::from_terms(
            2,
            2,
            [(vec![mi(&[1, 0]), mi(&[0, 1])], p("1/2 x1", 2))],
        )
        .unwrap();
        let js = serde_json::to_string(&c).unwrap();
        let back: MultiDiffOp = serde_json::from_str(&js).unwrap();
        assert_eq!(back, c);
        assert!(js.contains(r#""derivs":[[1,0],[0,1]]"#));
    }
}
