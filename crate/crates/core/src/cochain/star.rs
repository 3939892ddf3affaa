use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use super::MultiDiffOp;
use crate::error::{check_dim, Error, Result};
use crate::exec::Exec;
use crate::formal::{monomials_up_to, Monomial, NuSeries, Polynomial, Rational};
use crate::poisson::PoissonTensor;

/// `u * v = uv + Σ_{r=1}^{N} ν^r C_r(u, v)` truncated after ν^N.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "StarRepr", into = "StarRepr")]
pub struct StarProduct {
    dim: usize,
    poisson: PoissonTensor,
    cochains: Vec<MultiDiffOp>,
}

/// A monomial triple where associativity fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssocWitness {
    pub order: usize,
    pub u: Polynomial,
    pub v: Polynomial,
    pub w: Polynomial,
    pub defect: Polynomial,
}

impl StarProduct {
    /// `cochains[r-1]` is `C_r`.
    pub fn new(poisson: PoissonTensor, cochains: Vec<MultiDiffOp>) -> Result<StarProduct> {
        let dim = poisson.dim();
        for c in &cochains {
            check_dim(dim, c.dim())?;
            if c.arity() != 2 {
                return Err(Error::ArityMismatch {
                    expected: 2,
                    found: c.arity(),
                });
            }
        }
        Ok(StarProduct {
            dim,
            poisson,
            cochains,
        })
    }

    /// Pointwise multiplication, `C_r = 0` for all r ≤ N.
    pub fn commutative(dim: usize, order: usize) -> StarProduct {
        StarProduct {
            dim,
            poisson: PoissonTensor::zero(dim),
            cochains: vec![MultiDiffOp::zero(2, dim); order],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.cochains.len()
    }

    pub fn poisson(&self) -> &PoissonTensor {
        &self.poisson
    }

    pub fn cochains(&self) -> &[MultiDiffOp] {
        &self.cochains
    }

    /// `C_r` for `r ≥ 1`; `C_0` is multiplication.
    pub fn cochain(&self, r: usize) -> MultiDiffOp {
        if r == 0 {
            MultiDiffOp::multiplication(2, self.dim)
        } else {
            self.cochains[r - 1].clone()
        }
    }

    pub fn truncate(&self, order: usize) -> StarProduct {
        assert!(order <= self.order(), "cannot extend a star product");
        StarProduct {
            dim: self.dim,
            poisson: self.poisson.clone(),
            cochains: self.cochains[..order].to_vec(),
        }
    }

    fn c_apply(&self, r: usize, u: &Polynomial, v: &Polynomial) -> Polynomial {
        if r == 0 {
            u * v
        } else {
            self.cochains[r - 1].apply(&[u, v]).expect("dims checked")
        }
    }

    /// `u * v` for plain polynomials, as a series of order N.
    pub fn star_poly(&self, u: &Polynomial, v: &Polynomial) -> Result<NuSeries> {
        check_dim(self.dim, u.dim())?;
        check_dim(self.dim, v.dim())?;
        let coeffs = (0..=self.order()).map(|r| self.c_apply(r, u, v)).collect();
        NuSeries::from_coeffs(self.dim, self.order(), coeffs)
    }

    /// ν-bilinear extension to series. The result has the common order of
    /// the arguments, which must not exceed N.
    pub fn star_apply(&self, u: &NuSeries, v: &NuSeries) -> Result<NuSeries> {
        check_dim(self.dim, u.dim())?;
        check_dim(self.dim, v.dim())?;
        let n = u.order();
        if v.order() != n {
            return Err(Error::TruncationMismatch {
                expected: n,
                found: v.order(),
            });
        }
        if n > self.order() {
            return Err(Error::TruncationMismatch {
                expected: self.order(),
                found: n,
            });
        }
        let mut out = NuSeries::zero(self.dim, n);
        for a in 0..=n {
            let ua = u.coeff(a);
            if ua.is_zero() {
                continue;
            }
            for b in 0..=(n - a) {
                let vb = v.coeff(b);
                if vb.is_zero() {
                    continue;
                }
                for r in 0..=(n - a - b) {
                    let t = self.c_apply(r, ua, vb);
                    out.coeff_mut(a + b + r).add_scaled(&t, &Rational::ONE);
                }
            }
        }
        Ok(out)
    }

    /// Order-k associativity defect
    /// `(∂C_k)(u,v,w) − Σ_{r+s=k; r,s>0} [C_r(C_s(u,v),w) − C_r(u,C_s(v,w))]`.
    pub fn assoc_defect(&self, k: usize, u: &Polynomial, v: &Polynomial, w: &Polynomial) -> Result<Polynomial> {
        if k == 0 || k > self.order() {
            return Err(Error::OrderOutOfRange {
                order: k,
                max: self.order(),
            });
        }
        for x in [u, v, w] {
            check_dim(self.dim, x.dim())?;
        }
        let ck = |a: &Polynomial, b: &Polynomial| self.c_apply(k, a, b);
        let mut out = u * &ck(v, w);
        out.add_scaled(&ck(&(u * v), w), &-Rational::ONE);
        out.add_scaled(&ck(u, &(v * w)), &Rational::ONE);
        out.add_scaled(&(&ck(u, v) * w), &-Rational::ONE);
        for s in 1..k {
            let r = k - s;
            let left = self.c_apply(r, &self.c_apply(s, u, v), w);
            let right = self.c_apply(r, u, &self.c_apply(s, v, w));
            out.add_scaled(&left, &-Rational::ONE);
            out.add_scaled(&right, &Rational::ONE);
        }
        Ok(out)
    }

    /// `(u*v)*w − u*(v*w)` computed from the full products; its ν^k
    /// coefficient is minus the order-k defect.
    pub fn associator(&self, u: &NuSeries, v: &NuSeries, w: &NuSeries) -> Result<NuSeries> {
        let left = self.star_apply(&self.star_apply(u, v)?, w)?;
        let right = self.star_apply(u, &self.star_apply(v, w)?)?;
        left.try_sub(&right)
    }

    /// First `(r, slot)` with `C_r` not vanishing on constants in that slot.
    pub fn unit_violation(&self) -> Option<(usize, usize)> {
        for (i, c) in self.cochains.iter().enumerate() {
            for slot in 0..2 {
                if !c.vanishes_on_constants(slot) {
                    return Some((i + 1, slot));
                }
            }
        }
        None
    }

    /// `skew(C_1) − ½ Σ P^{ij} ∂_i⊗∂_j`; zero iff `C_1(u,v) − C_1(v,u) = {u,v}`.
    pub fn skew_mismatch(&self) -> MultiDiffOp {
        let half_p = self.poisson.bivector_op().scale(&Rational::new(1, 2));
        match self.cochains.first() {
            Some(c1) => c1.skew_part().try_sub(&half_p).expect("same shape"),
            None => MultiDiffOp::zero(2, self.dim),
        }
    }

    /// Unit and bracket normalization hold exactly.
    pub fn is_normalized(&self) -> bool {
        self.unit_violation().is_none() && (self.order() == 0 || self.skew_mismatch().is_zero())
    }

    /// Highest derivative order over all cochains.
    pub fn max_derivative_order(&self) -> u32 {
        self.cochains.iter().map(MultiDiffOp::max_order).max().unwrap_or(0)
    }

    /// Degree bound for the spanning monomial family used in operator
    /// identity checks: the highest derivative order plus two.
    pub fn family_degree(&self) -> u32 {
        self.max_derivative_order() + 2
    }

    /// Exact associativity check on all monomial triples of degree
    /// ≤ `max_degree`, orders 1..=N. Returns the first failure in
    /// (triple, order) order.
    pub fn assoc_witness(&self, max_degree: u32, exec: Exec) -> Option<AssocWitness> {
        self.assoc_witness_within(max_degree, 0.0, exec)
    }

    /// As [`assoc_witness`](Self::assoc_witness) but tolerating defect
    /// coefficients up to `tol` in absolute value.
    pub fn assoc_witness_within(&self, max_degree: u32, tol: f64, exec: Exec) -> Option<AssocWitness> {
        let table = StarTable::new(self.clone());
        let monos = monomials_up_to(self.dim, max_degree);
        let triples = triples_of(&monos);
        exec.find_first(&triples, |(a, b, c)| {
            let defects = table.assoc_defects(a, b, c);
            defects.into_iter().enumerate().find_map(|(i, d)| {
                let bad = if tol == 0.0 { !d.is_zero() } else { d.max_abs_coeff() > tol };
                bad.then(|| AssocWitness {
                    order: i + 1,
                    u: Polynomial::monomial((*a).clone()),
                    v: Polynomial::monomial((*b).clone()),
                    w: Polynomial::monomial((*c).clone()),
                    defect: d,
                })
            })
        })
    }

    /// Largest defect coefficient magnitude over the family and all orders.
    pub fn max_assoc_defect(&self, max_degree: u32, exec: Exec) -> f64 {
        let table = StarTable::new(self.clone());
        let monos = monomials_up_to(self.dim, max_degree);
        let triples = triples_of(&monos);
        exec.map(&triples, |(a, b, c)| {
            table
                .assoc_defects(a, b, c)
                .iter()
                .map(Polynomial::max_abs_coeff)
                .fold(0.0, f64::max)
        })
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Cochain-wise comparison within `tol`.
    pub fn approx_eq(&self, other: &StarProduct, tol: f64) -> bool {
        self.order() == other.order()
            && self.dim == other.dim
            && self
                .cochains
                .iter()
                .zip(&other.cochains)
                .all(|(a, b)| a.approx_eq(b, tol))
    }
}

fn triples_of(monos: &[Monomial]) -> Vec<(&Monomial, &Monomial, &Monomial)> {
    let mut out = Vec::with_capacity(monos.len().pow(3));
    for a in monos {
        for b in monos {
            for c in monos {
                out.push((a, b, c));
            }
        }
    }
    out
}

type PairKey = (Monomial, Monomial);

/// Memo of `C_r(x^a, x^b)` for monomial pairs, shared across threads.
/// Bilinear evaluation on arbitrary polynomials goes through the table term
/// by term.
pub struct StarTable {
    star: StarProduct,
    memo: RwLock<HashMap<PairKey, Arc<Vec<Polynomial>>>>,
}

impl StarTable {
    pub fn new(star: StarProduct) -> StarTable {
        StarTable {
            star,
            memo: RwLock::new(HashMap::new()),
        }
    }

    pub fn star(&self) -> &StarProduct {
        &self.star
    }

    /// `[C_0(a,b), …, C_N(a,b)]` for monomials.
    pub fn pair(&self, a: &Monomial, b: &Monomial) -> Arc<Vec<Polynomial>> {
        let key = (a.clone(), b.clone());
        if let Some(v) = self.memo.read().expect("memo lock").get(&key) {
            return v.clone();
        }
        let (pa, pb) = (Polynomial::monomial(a.clone()), Polynomial::monomial(b.clone()));
        let vals: Vec<Polynomial> = (0..=self.star.order())
            .map(|r| self.star.c_apply(r, &pa, &pb))
            .collect();
        let vals = Arc::new(vals);
        self.memo
            .write()
            .expect("memo lock")
            .entry(key)
            .or_insert(vals)
            .clone()
    }

    /// `C_r(u, v)` by bilinearity over the table.
    pub fn apply(&self, r: usize, u: &Polynomial, v: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(self.star.dim);
        for (ma, ca) in u.terms() {
            for (mb, cb) in v.terms() {
                let vals = self.pair(ma, mb);
                out.add_scaled(&vals[r], &(ca * cb));
            }
        }
        out
    }

    /// Defects at orders 1..=N for a monomial triple.
    pub fn assoc_defects(&self, a: &Monomial, b: &Monomial, c: &Monomial) -> Vec<Polynomial> {
        let n = self.star.order();
        let dim = self.star.dim;
        let (pa, pc) = (Polynomial::monomial(a.clone()), Polynomial::monomial(c.clone()));
        let ab = self.pair(a, b);
        let bc = self.pair(b, c);
        let ab_c = self.pair(&a.mul(b), c);
        let a_bc = self.pair(a, &b.mul(c));
        let mut out = Vec::with_capacity(n);
        for k in 1..=n {
            let mut d = &pa * &bc[k];
            d.add_scaled(&ab_c[k], &-Rational::ONE);
            d.add_scaled(&a_bc[k], &Rational::ONE);
            d.add_scaled(&(&ab[k] * &pc), &-Rational::ONE);
            for s in 1..k {
                let r = k - s;
                d.add_scaled(&self.apply(r, &ab[s], &pc), &-Rational::ONE);
                d.add_scaled(&self.apply(r, &pa, &bc[s]), &Rational::ONE);
            }
            debug_assert_eq!(d.dim(), dim);
            out.push(d);
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct StarRepr {
    dim: usize,
    order: usize,
    poisson: PoissonTensor,
    cochains: Vec<MultiDiffOp>,
}

impl From<StarProduct> for StarRepr {
    fn from(s: StarProduct) -> Self {
        StarRepr {
            dim: s.dim,
            order: s.order(),
            poisson: s.poisson,
            cochains: s.cochains,
        }
    }
}

impl TryFrom<StarRepr> for StarProduct {
    type Error = Error;
    fn try_from(r: StarRepr) -> Result<Self> {
        if r.cochains.len() != r.order {
            return Err(Error::Invalid(format!(
                "star product of order {} needs {} cochains, found {}",
                r.order,
                r.order,
                r.cochains.len()
            )));
        }
        check_dim(r.dim, r.poisson.dim())?;
        StarProduct::new(r.poisson, r.cochains)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str, dim: usize) -> Polynomial {
        Polynomial::parse(s, dim).unwrap()
    }

    fn mi(v: &[u32]) -> Monomial {
        Monomial::from_exponents(v.iter().copied())
    }

    /// C_1 = ∂⊗∂ on ℝ¹, C_2 = 0: symmetric first-order deformation with no
    /// second-order correction.
    fn naive() -> StarProduct {
        let c1 = MultiDiffOp::monomial_op(vec![mi(&[1]), mi(&[1])], Polynomial::one(1));
        StarProduct::new(PoissonTensor::zero(1), vec![c1, MultiDiffOp::zero(2, 1)]).unwrap()
    }

    #[test]
    fn symmetric_first_order_is_not_associative_at_order_two() {
        let s = naive();
        // oracle: with C_1 = u'v' and C_2 = 0 the order-2 defect is
        // −(C_1(C_1(u,v),w) − C_1(u,C_1(v,w))) = u'v'w'' − u''v'w'
        let oracle = |u: &Polynomial, v: &Polynomial, w: &Polynomial| {
            let d = |f: &Polynomial, k: u32| f.derive(&mi(&[k]));
            &(&(&d(u, 1) * &d(v, 1)) * &d(w, 2)) - &(&(&d(u, 2) * &d(v, 1)) * &d(w, 1))
        };
        let cases = [("x1^2", "x1^2", "x1^2"), ("x1^2", "x1", "x1"), ("x1^3", "x1^2", "x1")];
        for (u, v, w) in cases {
            let (u, v, w) = (p(u, 1), p(v, 1), p(w, 1));
            assert_eq!(s.assoc_defect(2, &u, &v, &w).unwrap(), oracle(&u, &v, &w));
        }
        // the symmetric triple x², x², x² happens to cancel; (x², x, x) does not
        let d = s.assoc_defect(2, &p("x1^2", 1), &p("x1", 1), &p("x1", 1)).unwrap();
        assert_eq!(d, p("-2", 1));

        let wit = s.assoc_witness(3, Exec::Sequential).unwrap();
        assert_eq!(wit.order, 2);
        let direct = s.assoc_defect(2, &wit.u, &wit.v, &wit.w).unwrap();
        assert_eq!(direct, wit.defect);
    }

    #[test]
    fn order_one_defect_is_coboundary_of_c1() {
        let s = naive();
        let (u, v, w) = (p("x1^2", 1), p("x1^3", 1), p("x1", 1));
        let d = s.assoc_defect(1, &u, &v, &w).unwrap();
        let dc1 = s.cochain(1).hochschild_d().apply(&[&u, &v, &w]).unwrap();
        assert_eq!(d, dc1);
        assert!(d.is_zero(), "∂(∂⊗∂) = 0 since ∂⊗∂ = −½∂(u ↦ u'')");
        assert!(matches!(s.assoc_defect(3, &u, &v, &w), Err(Error::OrderOutOfRange { .. })));
    }

    #[test]
    fn routes_agree() {
        let s = naive();
        let monos = monomials_up_to(1, 3);
        let table = StarTable::new(s.clone());
        for a in &monos {
            for b in &monos {
                for c in &monos {
                    let (u, v, w) = (
                        NuSeries::from_poly(Polynomial::monomial(a.clone()), 2),
                        NuSeries::from_poly(Polynomial::monomial(b.clone()), 2),
                        NuSeries::from_poly(Polynomial::monomial(c.clone()), 2),
                    );
                    let assoc = s.associator(&u, &v, &w).unwrap();
                    let cached = table.assoc_defects(a, b, c);
                    for k in 1..=2 {
                        let d = s.assoc_defect(k, u.coeff(0), v.coeff(0), w.coeff(0)).unwrap();
                        assert_eq!(d, -assoc.coeff(k).clone());
                        assert_eq!(d, cached[k - 1]);
                    }
                }
            }
        }
    }

    #[test]
    fn unit_and_json() {
        let s = naive();
        assert_eq!(s.unit_violation(), None);
        let u = NuSeries::from_poly(p("x1^2 + 3", 1), 2);
        assert_eq!(s.star_apply(&u, &NuSeries::one(1, 2)).unwrap(), u);
        assert_eq!(s.star_apply(&NuSeries::one(1, 2), &u).unwrap(), u);
        let js = serde_json::to_string(&s).unwrap();
        let back: StarProduct = serde_json::from_str(&js).unwrap();
        assert_eq!(back, s);

        let bad = StarProduct::new(PoissonTensor::zero(1), vec![MultiDiffOp::multiplication(2, 1)]).unwrap();
        assert_eq!(bad.unit_violation(), Some((1, 0)));
    }

    #[test]
    fn series_truncation_rules() {
        let s = naive();
        let a = NuSeries::one(1, 3);
        assert!(matches!(s.star_apply(&a, &a), Err(Error::TruncationMismatch { .. })));
        let b = NuSeries::one(1, 1);
        assert_eq!(s.star_apply(&b, &b).unwrap(), b);
    }
}
