//! Equivalences `T = Id + Σ ν^r T_r` with an optional change of parameter,
//! the order-by-order equivalence solver, and the star-commutator calculus
//! (`exp ad_*` and the composition `∘_*`).

mod bch;

pub use bch::{bch_lie_coefficients, exp_ad, star_bch, star_commutator};

use serde::{Deserialize, Serialize};

use crate::cochain::{solve_cocycle, MultiDiffOp, StarProduct};
use crate::error::{check_dim, Error, Result};
use crate::formal::{NuSeries, Rational};

/// `T = Id + Σ_{r≥1} ν^r T_r` together with `ν ↦ f(ν) = Σ_{r≥1} f_r ν^r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "EquivRepr", into = "EquivRepr")]
pub struct Equivalence {
    dim: usize,
    ops: Vec<MultiDiffOp>,
    param: Option<Vec<Rational>>,
}

#[derive(Serialize, Deserialize)]
struct EquivRepr {
    dim: usize,
    ops: Vec<MultiDiffOp>,
    #[serde(default)]
    param: Option<Vec<Rational>>,
}

impl TryFrom<EquivRepr> for Equivalence {
    type Error = Error;
    fn try_from(r: EquivRepr) -> Result<Equivalence> {
        Equivalence::new(r.dim, r.ops, r.param)
    }
}

impl From<Equivalence> for EquivRepr {
    fn from(e: Equivalence) -> EquivRepr {
        EquivRepr {
            dim: e.dim,
            ops: e.ops,
            param: e.param,
        }
    }
}

impl Equivalence {
    /// `ops[r-1]` is `T_r`; `param[r-1]` is `f_r`. Each `T_r` must be unary
    /// without a zero-order part and `f_1` must be nonzero.
    pub fn new(dim: usize, ops: Vec<MultiDiffOp>, param: Option<Vec<Rational>>) -> Result<Equivalence> {
        for (r, t) in ops.iter().enumerate() {
            check_dim(dim, t.dim())?;
            if t.arity() != 1 {
                return Err(Error::ArityMismatch {
                    expected: 1,
                    found: t.arity(),
                });
            }
            if !t.vanishes_on_constants(0) {
                return Err(Error::InvalidEquivalence(format!("T_{} does not vanish on constants", r + 1)));
            }
        }
        if let Some(f) = &param {
            if f.first().map_or(true, Rational::is_zero) {
                return Err(Error::InvalidEquivalence("parameter change needs f_1 ≠ 0".into()));
            }
        }
        Ok(Equivalence { dim, ops, param })
    }

    pub fn identity(dim: usize) -> Equivalence {
        Equivalence {
            dim,
            ops: Vec::new(),
            param: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ops(&self) -> &[MultiDiffOp] {
        &self.ops
    }

    pub fn param(&self) -> Option<&[Rational]> {
        self.param.as_deref()
    }

    /// `T_r`, zero beyond the stored operators; `T_0 = Id`.
    pub fn op(&self, r: usize) -> MultiDiffOp {
        match r {
            0 => MultiDiffOp::identity(self.dim),
            _ => self.ops.get(r - 1).cloned().unwrap_or_else(|| MultiDiffOp::zero(1, self.dim)),
        }
    }

    /// No operators and no parameter change (up to zero entries).
    pub fn is_identity(&self) -> bool {
        self.ops.iter().all(MultiDiffOp::is_zero) && self.param_is_trivial()
    }

    fn param_is_trivial(&self) -> bool {
        match &self.param {
            None => true,
            Some(f) => f.iter().enumerate().all(|(i, c)| if i == 0 { c.is_one() } else { c.is_zero() }),
        }
    }

    /// `T u = Σ_r ν^r T_r u`, truncated at the order of `u`.
    pub fn apply(&self, u: &NuSeries) -> Result<NuSeries> {
        check_dim(self.dim, u.dim())?;
        let n = u.order();
        let mut out = u.clone();
        for (i, t) in self.ops.iter().enumerate() {
            let r = i + 1;
            for a in 0..=n.saturating_sub(r) {
                if r + a > n {
                    break;
                }
                let x = t.apply(&[u.coeff(a)])?;
                out.coeff_mut(r + a).add_scaled(&x, &Rational::ONE);
            }
        }
        Ok(out)
    }
}

/// Coefficients of `f^r` for r = 0..=n, each truncated after ν^n.
fn param_powers(f: &[Rational], n: usize) -> Vec<Vec<Rational>> {
    let mut fv = vec![Rational::ZERO; n + 1];
    for (i, c) in f.iter().enumerate().take(n) {
        fv[i + 1] = c.clone();
    }
    let mut pows = vec![{
        let mut one = vec![Rational::ZERO; n + 1];
        one[0] = Rational::ONE;
        one
    }];
    for _ in 1..=n {
        let prev = pows.last().expect("non-empty");
        let mut next = vec![Rational::ZERO; n + 1];
        for (i, a) in prev.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in fv.iter().enumerate().take(n + 1 - i) {
                next[i + j] += &(a * b);
            }
        }
        pows.push(next);
    }
    pows
}

/// `u *^f v = Σ_r f(ν)^r C_r(u, v)`: `C^f_n = Σ_r [ν^n](f^r) C_r`.
pub fn substitute_parameter(s: &StarProduct, f: &[Rational]) -> Result<StarProduct> {
    if f.first().map_or(true, Rational::is_zero) {
        return Err(Error::InvalidEquivalence("parameter change needs f_1 ≠ 0".into()));
    }
    let n = s.order();
    let pows = param_powers(f, n);
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        let mut c = MultiDiffOp::zero(2, s.dim());
        for r in 1..=k {
            let w = &pows[r][k];
            if !w.is_zero() {
                c.add_scaled(&s.cochains()[r - 1], w);
            }
        }
        out.push(c);
    }
    StarProduct::new(s.poisson().scale(&f[0]), out)
}

/// The product `u *' v = T(T⁻¹u *^f T⁻¹v)`, so that `T(u *^f v) = Tu *' Tv`.
pub fn gauge(s: &StarProduct, e: &Equivalence) -> Result<StarProduct> {
    check_dim(s.dim(), e.dim())?;
    let n = s.order();
    let dim = s.dim();
    let sf = match &e.param {
        Some(f) => substitute_parameter(s, f)?,
        None => s.clone(),
    };

    // S = T⁻¹: S_0 = Id, S_m = −Σ_{a=1}^{m} T_a ∘ S_{m−a}
    let t: Vec<MultiDiffOp> = (0..=n).map(|r| e.op(r)).collect();
    let mut inv: Vec<MultiDiffOp> = vec![MultiDiffOp::identity(dim)];
    for m in 1..=n {
        let mut acc = MultiDiffOp::zero(1, dim);
        for a in 1..=m {
            if !t[a].is_zero() {
                acc.add_scaled(&t[a].compose(&inv[m - a])?, &-Rational::ONE);
            }
        }
        inv.push(acc);
    }

    // X_m = Σ_{r+b+c=m} C_r(S_b ·, S_c ·)
    let mut x: Vec<MultiDiffOp> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        let mut acc = MultiDiffOp::zero(2, dim);
        for r in 0..=m {
            let c = sf.cochain(r);
            if c.is_zero() {
                continue;
            }
            for b in 0..=m - r {
                let cc = m - r - b;
                if (b > 0 && inv[b].is_zero()) || (cc > 0 && inv[cc].is_zero()) {
                    continue;
                }
                let mut term = c.clone();
                if b > 0 {
                    term = term.substitute(0, &inv[b])?;
                }
                if cc > 0 {
                    term = term.substitute(1, &inv[cc])?;
                }
                acc.add_scaled(&term, &Rational::ONE);
            }
        }
        x.push(acc);
    }

    // C'_k = Σ_a T_a ∘ X_{k−a}
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        let mut acc = x[k].clone();
        for a in 1..=k {
            if !t[a].is_zero() && !x[k - a].is_zero() {
                acc.add_scaled(&x[k - a].post_compose(&t[a])?, &Rational::ONE);
            }
        }
        out.push(acc);
    }
    StarProduct::new(sf.poisson().clone(), out)
}

/// Find `E` with `gauge(s1, E) = s2` through the common order, one order at
/// a time. At order k the difference `D = C_k(s2) − C_k(gauge(s1, E_{<k}))`
/// must be a Hochschild cocycle; its skew part must be `λ·skew(C_1(s1))`,
/// absorbed by adding `λν^k` to the parameter; the symmetric remainder
/// `λC_1 − D` is then `∂T_k`, solved on operators of order ≤ `max_order`
/// with coefficients of degree ≤ `max_degree`.
pub fn solve_equivalence(s1: &StarProduct, s2: &StarProduct, max_order: usize, max_degree: usize) -> Result<Equivalence> {
    check_dim(s1.dim(), s2.dim())?;
    if s1.order() != s2.order() {
        return Err(Error::TruncationMismatch {
            expected: s1.order(),
            found: s2.order(),
        });
    }
    if s1.poisson() != s2.poisson() {
        return Err(Error::InvalidEquivalence("star products have different Poisson tensors".into()));
    }
    let n = s1.order();
    let dim = s1.dim();
    let c1 = s1.cochain(1);
    let skew1 = c1.skew_part();
    let mut ops: Vec<MultiDiffOp> = vec![MultiDiffOp::zero(1, dim); n];
    let mut f: Vec<Rational> = vec![Rational::ZERO; n];
    if n > 0 {
        f[0] = Rational::ONE;
    }
    for k in 1..=n {
        let current = Equivalence::new(dim, ops.clone(), Some(f.clone()))?;
        let g = gauge(s1, &current)?;
        let d = s2.cochain(k).try_sub(&g.cochain(k))?;
        if d.is_zero() {
            continue;
        }
        if !d.hochschild_d().is_zero() {
            return Err(Error::DefectNotCocycle { order: k });
        }
        let skew = d.skew_part();
        let lambda = proportionality(&skew, &skew1).ok_or(Error::SkewObstruction { order: k })?;
        let mut rhs = c1.scale(&lambda);
        rhs.add_scaled(&d, &-Rational::ONE);
        ops[k - 1] = solve_cocycle(&rhs, max_order, max_degree)?;
        f[k - 1] += &lambda;
    }
    let mut e = Equivalence::new(dim, ops, Some(f))?;
    if e.param_is_trivial() {
        e.param = None;
    }
    // the gauge must reproduce s2 exactly
    if gauge(s1, &e)? != *s2 {
        return Err(Error::AnsatzInsufficient { max_order, max_degree });
    }
    Ok(e)
}

/// λ with `a = λ b`, if any (`a = 0` gives 0).
fn proportionality(a: &MultiDiffOp, b: &MultiDiffOp) -> Option<Rational> {
    if a.is_zero() {
        return Some(Rational::ZERO);
    }
    let (derivs, coeff) = b.terms().next()?;
    let (mono, bc) = coeff.terms().next()?;
    let ac = a.coeff(derivs).coeff(mono);
    let lambda = &ac / bc;
    (b.scale(&lambda) == *a).then_some(lambda)
}
