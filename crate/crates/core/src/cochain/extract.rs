use std::collections::HashMap;

use super::MultiDiffOp;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::formal::{monomials_up_to, Monomial, NuSeries, Polynomial};

/// Per-order bounds for recovering bidifferential operators from values.
#[derive(Debug, Clone, Copy)]
pub struct ExtractBounds {
    /// Derivative order allowed in each slot of `C_r`, as `slot_order * r`
    /// capped below by 1.
    pub slot_order_per_r: u32,
    /// Coefficient degree allowed in `C_r`, as `coeff_degree_per_r * r`.
    pub coeff_degree_per_r: u32,
}

impl ExtractBounds {
    fn slot_order(&self, r: usize) -> u32 {
        (self.slot_order_per_r * r as u32).max(1)
    }

    fn coeff_degree(&self, r: usize) -> u32 {
        self.coeff_degree_per_r * r as u32
    }
}

/// Recover `C_1..C_N` from a bilinear map given on monomial pairs,
/// `values(x^a, x^b) = Σ_r ν^r C_r(x^a, x^b)`.
///
/// Coefficients are solved triangularly: the value on `(x^a, x^b)` involves
/// only terms `∂^α⊗∂^β` with `α ≤ a`, `β ≤ b`, so pairs are processed by
/// increasing total degree. The result is then verified on all pairs one
/// degree beyond the ansatz bound; any mismatch or coefficient exceeding
/// the degree bound is an [`Error::ExtractionFailure`].
pub fn extract_bidifferential<F>(
    dim: usize,
    order: usize,
    bounds: ExtractBounds,
    values: F,
    exec: Exec,
) -> Result<Vec<MultiDiffOp>>
where
    F: Fn(&Monomial, &Monomial) -> NuSeries + Sync + Send,
{
    let max_slot = (1..=order).map(|r| bounds.slot_order(r)).max().unwrap_or(1);
    let monos = monomials_up_to(dim, max_slot + 1);
    let mut pairs: Vec<(Monomial, Monomial)> = Vec::with_capacity(monos.len() * monos.len());
    for a in &monos {
        for b in &monos {
            pairs.push((a.clone(), b.clone()));
        }
    }
    pairs.sort_by_key(|(a, b)| a.degree() + b.degree());
    let vals = exec.map(&pairs, |(a, b)| values(a, b));
    let table: HashMap<&(Monomial, Monomial), &NuSeries> = pairs.iter().zip(&vals).collect();

    let mut out = Vec::with_capacity(order);
    for r in 1..=order {
        let so = bounds.slot_order(r);
        let mut op = MultiDiffOp::zero(2, dim);
        for pair in &pairs {
            let (a, b) = pair;
            if a.degree() > so || b.degree() > so {
                continue;
            }
            let target = table[pair].coeff(r);
            let pa = Polynomial::monomial(a.clone());
            let pb = Polynomial::monomial(b.clone());
            let current = op.apply(&[&pa, &pb]).expect("shapes agree");
            let resid = target - &current;
            if resid.is_zero() {
                continue;
            }
            // value of c·∂^a⊗∂^b on (x^a, x^b) is c·a!·b!
            let norm = (&a.factorial() * &b.factorial()).recip().expect("nonzero");
            if resid.degree().unwrap_or(0) > bounds.coeff_degree(r) {
                return Err(Error::ExtractionFailure {
                    order: r,
                    msg: format!(
                        "coefficient of degree {} exceeds bound {}",
                        resid.degree().unwrap_or(0),
                        bounds.coeff_degree(r)
                    ),
                });
            }
            op.add_term_scaled(vec![a.clone(), b.clone()], &resid, &norm);
        }
        out.push(op);
    }

    // verification on the whole family, including the next degree up
    let failure = exec.find_first(&pairs, |pair| {
        let (a, b) = pair;
        let pa = Polynomial::monomial(a.clone());
        let pb = Polynomial::monomial(b.clone());
        let series = table[pair];
        (1..=order).find_map(|r| {
            let got = out[r - 1].apply(&[&pa, &pb]).expect("shapes agree");
            (got != *series.coeff(r)).then(|| (r, a.clone(), b.clone()))
        })
    });
    if let Some((r, a, b)) = failure {
        return Err(Error::ExtractionFailure {
            order: r,
            msg: format!("operator ansatz does not reproduce the value on ({a}, {b})"),
        });
    }
    // zeroth order must be the pointwise product
    for pair in &pairs {
        let prod = Polynomial::monomial(pair.0.mul(&pair.1));
        if *table[pair].coeff(0) != prod {
            return Err(Error::ExtractionFailure {
                order: 0,
                msg: "order-0 part is not pointwise multiplication".into(),
            });
        }
    }
    Ok(out)
}

/// `x^a` as a series of the given order.
#[cfg(test)]
pub(crate) fn monomial_series(m: &Monomial, order: usize) -> NuSeries {
    NuSeries::from_poly(Polynomial::monomial(m.clone()), order)
}
