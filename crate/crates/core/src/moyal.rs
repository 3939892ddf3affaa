//! The Moyal product for a constant Poisson tensor,
//! `C_r = Π^r / (2^r r!)` with `Π = Σ P^{ij} ∂_i ⊗ ∂_j`.

use crate::cochain::{MultiDiffOp, StarProduct};
use crate::error::{Error, Result};
use crate::formal::{NuSeries, Polynomial, Rational};
use crate::poisson::PoissonTensor;

/// Product of two constant-coefficient bidifferential operators.
fn const_product(a: &MultiDiffOp, b: &MultiDiffOp) -> MultiDiffOp {
    let mut out = MultiDiffOp::zero(2, a.dim());
    for (da, ca) in a.terms() {
        for (db, cb) in b.terms() {
            let d = vec![da[0].mul(&db[0]), da[1].mul(&db[1])];
            out.add_term(d, &(ca * cb));
        }
    }
    out
}

pub fn moyal_star(p: &PoissonTensor, order: usize) -> Result<StarProduct> {
    if let Some((i, j)) = p.non_constant_entry() {
        return Err(Error::NonConstantPoisson { i: i + 1, j: j + 1 });
    }
    let pi = p.bivector_op();
    let mut power = MultiDiffOp::multiplication(2, p.dim());
    let mut cochains = Vec::with_capacity(order);
    for r in 1..=order {
        power = const_product(&power, &pi);
        let norm = &Rational::from_int(2).pow(r as u32) * &Rational::factorial(r as u32);
        cochains.push(power.scale(&norm.recip().expect("nonzero")));
    }
    StarProduct::new(p.clone(), cochains)
}

/// `(u*v − v*u)/ν`, truncated after ν^{N−1}.
pub fn moyal_bracket(p: &PoissonTensor, u: &Polynomial, v: &Polynomial, order: usize) -> Result<NuSeries> {
    if order == 0 {
        return Err(Error::OrderOutOfRange { order, max: usize::MAX });
    }
    let s = moyal_star(p, order)?;
    let diff = s.star_poly(u, v)?.try_sub(&s.star_poly(v, u)?)?;
    NuSeries::from_coeffs(p.dim(), order - 1, diff.coeffs()[1..].to_vec())
}
