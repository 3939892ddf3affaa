//! The standard (CBH) star product on g*, through the symmetrization
//! transfer from `U(g)` and through the Bernoulli-number formula for left
//! multiplication by a linear function.

mod pbw;

pub use pbw::{ug_mul, PBWElement, Ug};

use crate::cochain::{extract_bidifferential, ExtractBounds, StarProduct};
use crate::error::{check_dim, Error, Result};
use crate::exec::Exec;
use crate::formal::{Monomial, NuSeries, Polynomial, Rational};
use crate::poisson::LieAlgebra;

/// `x^a * x^b = σ⁻¹(σ(x^a)∘σ(x^b))` computed in `U(g_ν)`, then recovered as
/// bidifferential cochains with `C_r` of order ≤ r in each slot and
/// coefficient degree ≤ r.
pub fn cbh_star(g: &LieAlgebra, order: usize) -> Result<StarProduct> {
    cbh_star_with(g, order, Exec::default())
}

pub fn cbh_star_with(g: &LieAlgebra, order: usize, exec: Exec) -> Result<StarProduct> {
    let poisson = g.linear_poisson()?;
    let ug = Ug::new(g.clone(), order);
    let bounds = ExtractBounds {
        slot_order_per_r: 1,
        coeff_degree_per_r: 1,
    };
    let cochains = extract_bidifferential(g.dim(), order, bounds, |a, b| ug.star_monomials(a, b), exec)?;
    StarProduct::new(poisson, cochains)
}

/// `B_0..B_{j_max}` from `Σ_{i=0}^{j} C(j+1, i) B_i = 0`, so `B_1 = −1/2`.
pub fn bernoulli_numbers(j_max: usize) -> Vec<Rational> {
    let mut b = vec![Rational::ONE];
    for j in 1..=j_max {
        let mut s = Rational::ZERO;
        for (i, bi) in b.iter().enumerate() {
            s += &(&Rational::binomial(j as u32 + 1, i as u32) * bi);
        }
        b.push(-&(&s / &Rational::from_int(j as i64 + 1)));
    }
    b
}

/// Left star multiplication of a linear function by a monomial,
///
/// `X * X_1⋯X_k = X X_1⋯X_k + Σ_{j≥1} ((−1)^j B_j ν^j / j!) Σ [[X,X_{r_1}],…,X_{r_j}] Π_{i∉r} X_i`,
///
/// the inner sum running over ordered j-tuples of distinct positions.
pub fn bernoulli_star_left(g: &LieAlgebra, x: &Polynomial, m: &Monomial, order: usize) -> Result<NuSeries> {
    let n = g.dim();
    check_dim(n, x.dim())?;
    check_dim(n, m.dim())?;
    if x.terms().any(|(mono, _)| mono.degree() != 1) {
        return Err(Error::Invalid(format!("left factor {x} is not linear")));
    }
    let xv: Vec<Rational> = (0..n).map(|i| x.coeff(&Monomial::var(n, i))).collect();
    let letters: Vec<usize> = (0..n)
        .flat_map(|i| std::iter::repeat(i).take(m.exponent(i) as usize))
        .collect();
    let k = letters.len();
    let bern = bernoulli_numbers(k.min(order));

    let mut out = NuSeries::zero(n, order);
    *out.coeff_mut(0) = x * &Polynomial::monomial(m.clone());

    // depth-first over ordered tuples of distinct positions
    fn walk(
        g: &LieAlgebra,
        letters: &[usize],
        used: &mut Vec<bool>,
        bracket: Vec<Rational>,
        depth: usize,
        max_depth: usize,
        bern: &[Rational],
        out: &mut NuSeries,
    ) {
        if depth > 0 {
            let n = g.dim();
            let mut lin = Polynomial::zero(n);
            for (i, c) in bracket.iter().enumerate() {
                if !c.is_zero() {
                    lin.add_scaled(&Polynomial::var(n, i), c);
                }
            }
            if lin.is_zero() {
                // deeper brackets of zero stay zero
                return;
            }
            let mut rest = Monomial::one(n);
            for (pos, &l) in letters.iter().enumerate() {
                if !used[pos] {
                    rest = rest.increment(l);
                }
            }
            let sign = if depth % 2 == 0 { Rational::ONE } else { -Rational::ONE };
            let w = &(&sign * &bern[depth]) / &Rational::factorial(depth as u32);
            let term = &lin * &Polynomial::monomial(rest);
            out.coeff_mut(depth).add_scaled(&term, &w);
        }
        if depth == max_depth {
            return;
        }
        for pos in 0..letters.len() {
            if used[pos] {
                continue;
            }
            let mut e = vec![Rational::ZERO; g.dim()];
            e[letters[pos]] = Rational::ONE;
            let next = g.bracket(&bracket, &e);
            used[pos] = true;
            walk(g, letters, used, next, depth + 1, max_depth, bern, out);
            used[pos] = false;
        }
    }

    let mut used = vec![false; k];
    walk(g, &letters, &mut used, xv, 0, k.min(order), &bern, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cochain::monomial_series;
    use crate::formal::monomials_up_to;

    fn s(coeffs: &[&str], dim: usize) -> NuSeries {
        NuSeries::from_coeffs(
            dim,
            coeffs.len() - 1,
            coeffs.iter().map(|c| Polynomial::parse(c, dim).unwrap()).collect(),
        )
        .unwrap()
    }

    fn p(x: &str) -> Polynomial {
        Polynomial::parse(x, 3).unwrap()
    }

    #[test]
    fn bernoulli_values() {
        let b = bernoulli_numbers(8);
        let expect = ["1", "-1/2", "1/6", "0", "-1/30", "0", "1/42", "0", "-1/30"];
        let got: Vec<String> = b.iter().map(|x| x.to_string()).collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn heisenberg_examples() {
        let g = LieAlgebra::builtin("heisenberg3").unwrap();
        let st = cbh_star(&g, 3).unwrap();
        assert_eq!(st.star_poly(&p("x1"), &p("x2")).unwrap(), s(&["x1 x2", "1/2 x3", "0", "0"], 3));
        assert_eq!(st.star_poly(&p("x2"), &p("x1")).unwrap(), s(&["x1 x2", "-1/2 x3", "0", "0"], 3));
        assert!(st.is_normalized());
        let b = bernoulli_star_left(&g, &p("x1"), &Monomial::var(3, 1), 3).unwrap();
        assert_eq!(b, s(&["x1 x2", "1/2 x3", "0", "0"], 3));
    }

    #[test]
    fn abelian_is_pointwise() {
        let g = LieAlgebra::abelian(3);
        let st = cbh_star(&g, 3).unwrap();
        assert!(st.cochains().iter().all(|c| c.is_zero()));
        let m = Monomial::from_exponents([2, 1, 0]);
        let b = bernoulli_star_left(&g, &p("x3"), &m, 3).unwrap();
        assert_eq!(b, s(&["x1^2 x2 x3", "0", "0", "0"], 3));
    }

    #[test]
    fn routes_agree_small() {
        for name in ["heisenberg3", "so3", "sl2"] {
            let g = LieAlgebra::builtin(name).unwrap();
            let st = cbh_star(&g, 3).unwrap();
            let ug = Ug::new(g.clone(), 3);
            for m in monomials_up_to(3, 3) {
                for i in 0..3 {
                    let x = Polynomial::var(3, i);
                    let via_star = st.star_apply(&NuSeries::from_poly(x.clone(), 3), &monomial_series(&m, 3)).unwrap();
                    let via_b = bernoulli_star_left(&g, &x, &m, 3).unwrap();
                    assert_eq!(via_star, via_b, "{name} x{} * {m}", i + 1);
                    assert_eq!(via_star, ug.star_monomials(&Monomial::var(3, i), &m));
                }
            }
        }
    }

    #[test]
    fn covariance_and_differentiality() {
        let g = LieAlgebra::builtin("so3").unwrap();
        let st = cbh_star(&g, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let (xi, xj) = (Polynomial::var(3, i), Polynomial::var(3, j));
                let comm = st.star_poly(&xi, &xj).unwrap().try_sub(&st.star_poly(&xj, &xi).unwrap()).unwrap();
                let br: Vec<Rational> = g.bracket_basis(i, j);
                let mut lin = Polynomial::zero(3);
                for (k, c) in br.iter().enumerate() {
                    lin.add_scaled(&Polynomial::var(3, k), c);
                }
                assert_eq!(comm, NuSeries::from_poly(lin, 3).shift(1));
            }
        }
        for (r, c) in st.cochains().iter().enumerate() {
            assert!(c.max_coeff_degree() as usize <= r + 1);
            assert!(c.max_order() as usize <= r + 1);
        }
    }
}
