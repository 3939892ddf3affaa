use std::collections::HashMap;

use super::{Derivs, MultiDiffOp};
use crate::error::{Error, Result};
use crate::formal::{monomials_up_to, Monomial, Polynomial, Rational};
use crate::linalg::SparseSolver;

/// Find `B` (arity 1, vanishing on constants) with `∂B = C` among operators
/// of order ≤ `max_order` with coefficients of degree ≤ `max_degree`.
///
/// The cocycle condition and the vanishing of the skew part are checked
/// first; each has its own error. `B` is determined up to derivations, and
/// the solver never returns a first-order part.
pub fn solve_coboundary(c: &MultiDiffOp, max_order: usize, max_degree: usize) -> Result<MultiDiffOp> {
    if c.arity() != 2 {
        return Err(Error::ArityMismatch {
            expected: 2,
            found: c.arity(),
        });
    }
    if !c.hochschild_d().is_zero() {
        return Err(Error::NotACocycle);
    }
    if !c.skew_part().is_zero() {
        return Err(Error::NonvanishingSkewPart);
    }
    solve_cocycle(c, max_order, max_degree)
}

/// [`solve_coboundary`] without the up-front checks; callers have already
/// established that `c` is a symmetric cocycle.
pub(crate) fn solve_cocycle(c: &MultiDiffOp, max_order: usize, max_degree: usize) -> Result<MultiDiffOp> {
    let dim = c.dim();
    let insufficient = Error::AnsatzInsufficient {
        max_order,
        max_degree,
    };
    if c.is_zero() {
        return Ok(MultiDiffOp::zero(1, dim));
    }

    // columns: x^μ ∂^δ with 2 ≤ |δ| ≤ max_order, |μ| ≤ max_degree
    let deltas: Vec<Monomial> = monomials_up_to(dim, max_order as u32)
        .into_iter()
        .filter(|d| d.degree() >= 2)
        .collect();
    let mus = monomials_up_to(dim, max_degree as u32);
    let mut columns: Vec<(Monomial, Monomial)> = Vec::with_capacity(deltas.len() * mus.len());
    for d in &deltas {
        for m in &mus {
            columns.push((d.clone(), m.clone()));
        }
    }

    // rows keyed by (derivative tuple, coefficient monomial)
    let mut row_index: HashMap<(Derivs, Monomial), usize> = HashMap::new();
    let mut rows: Vec<Vec<(usize, Rational)>> = Vec::new();
    let mut key_of = |key: (Derivs, Monomial), rows: &mut Vec<Vec<(usize, Rational)>>| {
        *row_index.entry(key).or_insert_with(|| {
            rows.push(Vec::new());
            rows.len() - 1
        })
    };
    for (j, (delta, mu)) in columns.iter().enumerate() {
        let b = MultiDiffOp::monomial_op(vec![delta.clone()], Polynomial::monomial(mu.clone()));
        for (derivs, coeff) in b.hochschild_d().terms() {
            for (m, v) in coeff.terms() {
                let r = key_of((derivs.clone(), m.clone()), &mut rows);
                rows[r].push((j, v.clone()));
            }
        }
    }
    let mut rhs: Vec<Rational> = vec![Rational::ZERO; rows.len()];
    for (derivs, coeff) in c.terms() {
        for (m, v) in coeff.terms() {
            let key = (derivs.clone(), m.clone());
            match row_index.get(&key) {
                Some(&r) => rhs[r] = v.clone(),
                // C has a term no ansatz column can produce
                None => return Err(insufficient),
            }
        }
    }

    let mut solver = SparseSolver::new(columns.len());
    for (row, b) in rows.into_iter().zip(rhs) {
        solver.push(row, b);
    }
    let x = solver.solve().ok_or(insufficient)?;

    let mut b = MultiDiffOp::zero(1, dim);
    for ((delta, mu), v) in columns.into_iter().zip(x) {
        if !v.is_zero() {
            b.add_term_scaled(vec![delta], &Polynomial::monomial(mu), &v);
        }
    }
    if b.hochschild_d() != *c {
        return Err(Error::AnsatzInsufficient {
            max_order,
            max_degree,
        });
    }
    Ok(b)
}
