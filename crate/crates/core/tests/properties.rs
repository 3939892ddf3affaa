use proptest::prelude::*;
use starlab::equiv::{exp_ad, gauge, star_bch, star_commutator, Equivalence};
use starlab::formal::{Monomial, NuSeries, Polynomial, Rational};
use starlab::kontsevich::{weight_with, KGraph, WeightOptions};
use starlab::liestar::cbh_star;
use starlab::moyal::moyal_star;
use starlab::{Exec, LieAlgebra, MultiDiffOp, PoissonTensor, StarProduct};

fn poly(dim: usize, max_deg: u16) -> impl Strategy<Value = Polynomial> {
    let term = (prop::collection::vec(0..=max_deg, dim), -4i64..=4, 1i64..=3);
    prop::collection::vec(term, 0..4).prop_map(move |terms| {
        let mut p = Polynomial::zero(dim);
        for (e, n, d) in terms {
            let m = Monomial::from_exponents(e.into_iter().map(u32::from));
            if m.degree() <= u32::from(max_deg) {
                p.add_term(m, &Rational::new(n, d));
            }
        }
        p
    })
}

fn index(dim: usize, max_order: u16) -> impl Strategy<Value = Monomial> {
    prop::collection::vec(0..=max_order, dim)
        .prop_map(|e| Monomial::from_exponents(e.into_iter().map(u32::from)))
        .prop_filter("order bound", move |m| m.degree() <= u32::from(max_order))
}

fn cochain(arity: usize, dim: usize) -> impl Strategy<Value = MultiDiffOp> {
    let term = (prop::collection::vec(index(dim, 3), arity), poly(dim, 2));
    prop::collection::vec(term, 1..4).prop_map(move |terms| {
        let mut c = MultiDiffOp::zero(arity, dim);
        for (derivs, coeff) in terms {
            c.add_term(derivs, &coeff);
        }
        c
    })
}

fn moyal2(n: usize) -> StarProduct {
    moyal_star(&PoissonTensor::symplectic(2).unwrap(), n).unwrap()
}

fn series(p: Polynomial, n: usize) -> NuSeries {
    NuSeries::from_poly(p, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coboundary_squares_to_zero(c1 in cochain(1, 2), c2 in cochain(2, 2)) {
        prop_assert!(c1.hochschild_d().hochschild_d().is_zero());
        prop_assert!(c2.hochschild_d().hochschild_d().is_zero());
    }

    #[test]
    fn coboundary_solver_inverts_d(b in cochain(1, 2)) {
        // the solver's ansatz vanishes on constants
        let mut b0 = MultiDiffOp::zero(1, 2);
        for (derivs, coeff) in b.terms().filter(|(d, _)| !d[0].is_one()) {
            b0.add_term(derivs.clone(), coeff);
        }
        let c = b0.hochschild_d();
        let found = starlab::cochain::solve_coboundary(&c, 3, 2).unwrap();
        prop_assert_eq!(found.hochschild_d(), c);
    }

    #[test]
    fn star_products_are_unital_and_skew(u in poly(3, 3), v in poly(3, 3)) {
        let g = LieAlgebra::builtin("so3").unwrap();
        let s = cbh_star(&g, 3).unwrap();
        let one = Polynomial::one(3);
        for r in 1..=3 {
            let c = s.cochain(r);
            prop_assert!(c.apply(&[&one, &u]).unwrap().is_zero());
            prop_assert!(c.apply(&[&u, &one]).unwrap().is_zero());
        }
        let c1 = s.cochain(1);
        let skew = &c1.apply(&[&u, &v]).unwrap() - &c1.apply(&[&v, &u]).unwrap();
        prop_assert_eq!(skew, s.poisson().bracket(&u, &v).unwrap());
    }

    #[test]
    fn defect_and_associator_routes_agree(u in poly(2, 3), v in poly(2, 3), w in poly(2, 3)) {
        // a gauged Moyal product is associative but has nontrivial cochains
        let t = MultiDiffOp::monomial_op(vec![Monomial::from_exponents([1, 1])], Polynomial::var(2, 0));
        let e = Equivalence::new(2, vec![MultiDiffOp::zero(1, 2), t], None).unwrap();
        let s = gauge(&moyal2(3), &e).unwrap();
        let assoc = s.associator(&series(u.clone(), 3), &series(v.clone(), 3), &series(w.clone(), 3)).unwrap();
        for k in 1..=3 {
            let d = s.assoc_defect(k, &u, &v, &w).unwrap();
            prop_assert_eq!(&d, assoc.coeff(k));
            prop_assert!(d.is_zero());
        }
    }

    #[test]
    fn gauge_intertwines(u in poly(2, 3), v in poly(2, 3)) {
        let t1 = MultiDiffOp::monomial_op(vec![Monomial::from_exponents([0, 2])], Polynomial::var(2, 1));
        let t2 = MultiDiffOp::monomial_op(vec![Monomial::from_exponents([2, 1])], Polynomial::one(2));
        let e = Equivalence::new(2, vec![t1, t2], None).unwrap();
        let s = moyal2(3);
        let s2 = gauge(&s, &e).unwrap();
        // T(u * v) = Tu *' Tv
        let lhs = e.apply(&s.star_poly(&u, &v).unwrap()).unwrap();
        let rhs = s2.star_apply(&e.apply(&series(u, 3)).unwrap(), &e.apply(&series(v, 3)).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn bch_inverse_and_antisymmetry(a in poly(2, 2), b in poly(2, 2)) {
        let s = moyal2(4);
        let (a, b) = (series(a, 4), series(b, 4));
        let ab = star_bch(&s, &a, &b).unwrap();
        prop_assert_eq!(ab.neg(), star_bch(&s, &b.neg(), &a.neg()).unwrap());
        prop_assert_eq!(star_bch(&s, &ab, &b.neg()).unwrap(), a.clone());
        prop_assert_eq!(star_bch(&s, &a, &NuSeries::zero(2, 4)).unwrap(), a);
    }

    #[test]
    fn exp_ad_is_an_automorphism(a in poly(2, 2), u in poly(2, 2), v in poly(2, 2)) {
        let s = moyal2(4);
        let (a, u, v) = (series(a, 4), series(u, 4), series(v, 4));
        let lhs = exp_ad(&s, &a, &s.star_apply(&u, &v).unwrap()).unwrap();
        let rhs = s.star_apply(&exp_ad(&s, &a, &u).unwrap(), &exp_ad(&s, &a, &v).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        // exp_ad(−a) undoes exp_ad(a)
        prop_assert_eq!(exp_ad(&s, &a.neg(), &exp_ad(&s, &a, &u).unwrap()).unwrap(), u);
    }

    #[test]
    fn commutator_leading_term_is_bracket(u in poly(3, 3), v in poly(3, 3)) {
        let g = LieAlgebra::builtin("sl2").unwrap();
        let s = cbh_star(&g, 2).unwrap();
        let c = star_commutator(&s, &series(u.clone(), 2), &series(v.clone(), 2)).unwrap();
        prop_assert!(c.coeff(0).is_zero());
        prop_assert_eq!(c.coeff(1), &s.poisson().bracket(&u, &v).unwrap());
    }
}

/// With `{x1, x2} = 1`, `ad_* x1 = ν∂₂` exactly, so `exp_ad(x1)` shifts
/// `x2` by ν: `exp_ad(x1) x2ⁿ = (x2 + ν)ⁿ`.
#[test]
fn exp_ad_shift_oracle() {
    let n_ord = 6;
    let s = moyal2(n_ord);
    let x1 = series(Polynomial::var(2, 0), n_ord);
    for n in 0..=6u32 {
        let u = series(Polynomial::var(2, 1).pow(n), n_ord);
        let mut expect = NuSeries::zero(2, n_ord);
        for k in 0..=n.min(n_ord as u32) {
            let term = Polynomial::var(2, 1).pow(n - k).scale(&Rational::binomial(n, k));
            *expect.coeff_mut(k as usize) = term;
        }
        assert_eq!(exp_ad(&s, &x1, &u).unwrap(), expect, "n = {n}");
    }
}

#[test]
fn weights_do_not_depend_on_execution_mode() {
    let g: KGraph = "[L,R][1,R]".parse().unwrap();
    let run = |exec| {
        let opts = WeightOptions {
            threshold: 1.0,
            exec,
            ..WeightOptions::new(20_000, 3)
        };
        weight_with(&g, opts).unwrap()
    };
    let (a, b) = (run(Exec::Sequential), run(Exec::Parallel));
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.error.to_bits(), b.error.to_bits());
}

#[test]
fn assoc_checks_do_not_depend_on_execution_mode() {
    let mut c = moyal2(2).cochains().to_vec();
    c[1].add_term(vec![Monomial::from_exponents([2, 0]), Monomial::from_exponents([1, 0])], &Polynomial::one(2));
    let s = StarProduct::new(PoissonTensor::symplectic(2).unwrap(), c).unwrap();
    let a = s.assoc_witness(3, Exec::Sequential).unwrap();
    let b = s.assoc_witness(3, Exec::Parallel).unwrap();
    assert_eq!((a.order, a.u, a.v, a.w, a.defect), (b.order, b.u, b.v, b.w, b.defect));
}
