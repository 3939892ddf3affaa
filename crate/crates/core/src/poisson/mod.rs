//! Poisson tensors with polynomial entries, brackets and Jacobi checks.

mod lie;

pub use lie::LieAlgebra;

use serde::{Deserialize, Serialize};

use crate::cochain::MultiDiffOp;
use crate::error::{check_dim, Error, Result};
use crate::exec::Exec;
use crate::formal::{monomials_up_to, Monomial, Polynomial, Rational};

/// Antisymmetric m×m matrix of polynomials `P^{ij}`, with bracket
/// `{u,v} = Σ P^{ij} ∂_i u ∂_j v`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PoissonRepr", into = "PoissonRepr")]
pub struct PoissonTensor {
    dim: usize,
    entries: Vec<Polynomial>,
}

/// A failing Jacobi triple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JacobiWitness {
    pub u: Polynomial,
    pub v: Polynomial,
    pub w: Polynomial,
    pub defect: Polynomial,
}

impl PoissonTensor {
    pub fn zero(dim: usize) -> PoissonTensor {
        PoissonTensor {
            dim,
            entries: vec![Polynomial::zero(dim); dim * dim],
        }
    }

    /// Full matrix, row-major; rejected unless antisymmetric.
    pub fn from_matrix(dim: usize, entries: Vec<Polynomial>) -> Result<PoissonTensor> {
        if entries.len() != dim * dim {
            return Err(Error::Invalid(format!(
                "Poisson tensor of dimension {dim} needs {} entries, found {}",
                dim * dim,
                entries.len()
            )));
        }
        for e in &entries {
            check_dim(dim, e.dim())?;
        }
        for i in 0..dim {
            for j in i..dim {
                if entries[i * dim + j] != -&entries[j * dim + i] {
                    return Err(Error::NotAntisymmetric { i: i + 1, j: j + 1 });
                }
            }
        }
        Ok(PoissonTensor { dim, entries })
    }

    /// Build from the entries above the diagonal, `(i, j, P^{ij})` with
    /// 0-based `i < j`; the lower half follows by antisymmetry.
    pub fn from_upper<I>(dim: usize, upper: I) -> Result<PoissonTensor>
    where
        I: IntoIterator<Item = (usize, usize, Polynomial)>,
    {
        let mut p = PoissonTensor::zero(dim);
        for (i, j, v) in upper {
            check_dim(dim, v.dim())?;
            if i >= dim || j >= dim {
                return Err(Error::Invalid(format!(
                    "entry ({}, {}) outside dimension {dim}",
                    i + 1,
                    j + 1
                )));
            }
            if i == j {
                if !v.is_zero() {
                    return Err(Error::NotAntisymmetric { i: i + 1, j: j + 1 });
                }
                continue;
            }
            let (i, j, v) = if i < j { (i, j, v) } else { (j, i, -v) };
            p.entries[j * dim + i] = -&v;
            p.entries[i * dim + j] = v;
        }
        Ok(p)
    }

    /// The standard symplectic tensor on ℝ^{2n}: `P^{i,i+n} = 1`.
    pub fn symplectic(dim: usize) -> Result<PoissonTensor> {
        if dim % 2 != 0 {
            return Err(Error::Invalid(format!(
                "symplectic tensor needs an even dimension, found {dim}"
            )));
        }
        let n = dim / 2;
        PoissonTensor::from_upper(dim, (0..n).map(|i| (i, i + n, Polynomial::one(dim))))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `P^{ij}`, 0-based.
    pub fn entry(&self, i: usize, j: usize) -> &Polynomial {
        &self.entries[i * self.dim + j]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Polynomial::is_zero)
    }

    pub fn is_constant(&self) -> bool {
        self.entries.iter().all(Polynomial::is_constant)
    }

    /// First non-constant entry (0-based), if any.
    pub fn non_constant_entry(&self) -> Option<(usize, usize)> {
        let k = self.entries.iter().position(|e| !e.is_constant())?;
        Some((k / self.dim, k % self.dim))
    }

    pub fn max_entry_degree(&self) -> u32 {
        self.entries
            .iter()
            .filter_map(Polynomial::degree)
            .max()
            .unwrap_or(0)
    }

    pub fn scale(&self, s: &Rational) -> PoissonTensor {
        PoissonTensor {
            dim: self.dim,
            entries: self.entries.iter().map(|e| e.scale(s)).collect(),
        }
    }

    pub fn bracket(&self, u: &Polynomial, v: &Polynomial) -> Result<Polynomial> {
        check_dim(self.dim, u.dim())?;
        check_dim(self.dim, v.dim())?;
        let du: Vec<Polynomial> = (0..self.dim).map(|i| u.partial(i)).collect();
        let dv: Vec<Polynomial> = (0..self.dim).map(|i| v.partial(i)).collect();
        let mut out = Polynomial::zero(self.dim);
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                let p = self.entry(i, j);
                if p.is_zero() {
                    continue;
                }
                let mut t = &du[i] * &dv[j];
                t.add_scaled(&(&du[j] * &dv[i]), &-Rational::ONE);
                if !t.is_zero() {
                    out.add_scaled(&(p * &t), &Rational::ONE);
                }
            }
        }
        Ok(out)
    }

    /// `{{u,v},w} + {{v,w},u} + {{w,u},v}`.
    pub fn jacobi_defect(&self, u: &Polynomial, v: &Polynomial, w: &Polynomial) -> Result<Polynomial> {
        let a = self.bracket(&self.bracket(u, v)?, w)?;
        let b = self.bracket(&self.bracket(v, w)?, u)?;
        let c = self.bracket(&self.bracket(w, u)?, v)?;
        Ok(&(&a + &b) + &c)
    }

    /// Total-degree bound for the Jacobi spanning family, 3 + (max entry
    /// degree). The Jacobiator is a derivation in each argument, so
    /// coordinate triples already determine it; the wider family guards
    /// against a bracket that is not a biderivation.
    pub fn jacobi_family_degree(&self) -> u32 {
        3 + self.max_entry_degree()
    }

    /// Search monomial triples (each of degree 1..=`max_degree`, total degree
    /// ≤ `max_total`) for a nonzero Jacobi defect.
    pub fn jacobi_witness(&self, max_degree: u32, max_total: u32, exec: Exec) -> Option<JacobiWitness> {
        let monos: Vec<Monomial> = monomials_up_to(self.dim, max_degree)
            .into_iter()
            .filter(|m| !m.is_one())
            .collect();
        let mut triples = Vec::new();
        for (a, ma) in monos.iter().enumerate() {
            for (b, mb) in monos.iter().enumerate().skip(a) {
                for mc in monos.iter().skip(b) {
                    if ma.degree() + mb.degree() + mc.degree() <= max_total {
                        triples.push((ma, mb, mc));
                    }
                }
            }
        }
        // the defect is alternating in its arguments, so sorted triples suffice
        exec.find_first(&triples, |(a, b, c)| {
            let (u, v, w) = (
                Polynomial::monomial((*a).clone()),
                Polynomial::monomial((*b).clone()),
                Polynomial::monomial((*c).clone()),
            );
            let defect = self.jacobi_defect(&u, &v, &w).expect("dims agree");
            (!defect.is_zero()).then_some(JacobiWitness { u, v, w, defect })
        })
    }

    /// Complete Jacobi check at the family degree bound.
    pub fn check_jacobi(&self, exec: Exec) -> Option<JacobiWitness> {
        let total = self.jacobi_family_degree();
        self.jacobi_witness(total, total, exec)
    }

    /// The bidifferential operator `Σ P^{ij} ∂_i ⊗ ∂_j`.
    pub fn bivector_op(&self) -> MultiDiffOp {
        let mut op = MultiDiffOp::zero(2, self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let p = self.entry(i, j);
                if !p.is_zero() {
                    op.add_term(
                        vec![Monomial::var(self.dim, i), Monomial::var(self.dim, j)],
                        p,
                    );
                }
            }
        }
        op
    }
}

impl std::fmt::Debug for PoissonTensor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut list = f.debug_map();
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                let e = self.entry(i, j);
                if !e.is_zero() {
                    list.entry(&(i + 1, j + 1), &e.to_string());
                }
            }
        }
        list.finish()
    }
}

#[derive(Serialize, Deserialize)]
struct EntryRepr {
    i: usize,
    j: usize,
    value: String,
}

#[derive(Serialize, Deserialize)]
struct PoissonRepr {
    dim: usize,
    entries: Vec<EntryRepr>,
}

impl From<PoissonTensor> for PoissonRepr {
    fn from(p: PoissonTensor) -> Self {
        let mut entries = Vec::new();
        for i in 0..p.dim {
            for j in (i + 1)..p.dim {
                let e = p.entry(i, j);
                if !e.is_zero() {
                    entries.push(EntryRepr {
                        i: i + 1,
                        j: j + 1,
                        value: e.to_string(),
                    });
                }
            }
        }
        PoissonRepr { dim: p.dim, entries }
    }
}

impl TryFrom<PoissonRepr> for PoissonTensor {
    type Error = Error;
    fn try_from(r: PoissonRepr) -> Result<Self> {
        let mut upper = Vec::with_capacity(r.entries.len());
        for e in r.entries {
            if e.i == 0 || e.j == 0 {
                return Err(Error::Invalid("entry indices are 1-based".into()));
            }
            upper.push((e.i - 1, e.j - 1, Polynomial::parse(&e.value, r.dim)?));
        }
        PoissonTensor::from_upper(r.dim, upper)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formal::polynomial::tests::arb_poly;
    use proptest::prelude::*;

    fn p(s: &str, dim: usize) -> Polynomial {
        Polynomial::parse(s, dim).unwrap()
    }

    /// z ∂x∧∂y + x² ∂z∧∂x: the Heisenberg tensor plus a quadratic term that
    /// breaks Jacobi.
    fn perturbed() -> PoissonTensor {
        PoissonTensor::from_upper(3, [(0, 1, p("x3", 3)), (2, 0, p("x1^2", 3))]).unwrap()
    }

    #[test]
    fn perturbed_tensor_violates_jacobi() {
        let pt = perturbed();
        let d = pt.jacobi_defect(&p("x1", 3), &p("x2", 3), &p("x3", 3)).unwrap();
        assert_eq!(d, oracle_jacobi_xyz(&pt));
        // {{z,x},y} = {x²,y} = 2x{x,y} = 2xz, the other two terms vanish
        assert_eq!(d, p("2 x1 x3", 3));
        let w = pt.check_jacobi(Exec::Sequential).unwrap();
        assert!(!w.defect.is_zero());
    }

    #[test]
    fn x_squared_on_the_other_plane_is_still_poisson() {
        // z ∂x∧∂y + x² ∂y∧∂z corresponds to the curl-free field (x², 0, z)
        let pt = PoissonTensor::from_upper(3, [(0, 1, p("x3", 3)), (1, 2, p("x1^2", 3))]).unwrap();
        let d = pt.jacobi_defect(&p("x1", 3), &p("x2", 3), &p("x3", 3)).unwrap();
        assert_eq!(d, oracle_jacobi_xyz(&pt));
        assert!(d.is_zero());
        assert!(pt.check_jacobi(Exec::Sequential).is_none());
    }

    /// Independent evaluation for coordinate functions: {{x_a,x_b},x_c} = Σ_l P^{ab}_{,l} P^{lc}.
    fn oracle_jacobi_xyz(pt: &PoissonTensor) -> Polynomial {
        let mut out = Polynomial::zero(3);
        for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            for l in 0..3 {
                out = &out + &(&pt.entry(a, b).partial(l) * pt.entry(l, c));
            }
        }
        out
    }

    #[test]
    fn linear_tensors_satisfy_jacobi() {
        for name in ["heisenberg3", "so3", "sl2", "abelian(4)"] {
            let pt = LieAlgebra::builtin(name).unwrap().linear_poisson().unwrap();
            assert_eq!(pt.jacobi_family_degree(), if name == "abelian(4)" { 3 } else { 4 });
            assert!(pt.check_jacobi(Exec::Sequential).is_none(), "{name}");
        }
    }

    #[test]
    fn json_shape() {
        let h = LieAlgebra::builtin("heisenberg3").unwrap().linear_poisson().unwrap();
        let js = serde_json::to_string(&h).unwrap();
        assert_eq!(js, r#"{"dim":3,"entries":[{"i":1,"j":2,"value":"x3"}]}"#);
        let back: PoissonTensor = serde_json::from_str(&js).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn bivector_op_matches_bracket() {
        let pt = perturbed();
        let u = p("x1 x2^2 + x3", 3);
        let v = p("x2 x3 - x1^3", 3);
        assert_eq!(pt.bivector_op().apply(&[&u, &v]).unwrap(), pt.bracket(&u, &v).unwrap());
    }

    proptest! {
        #[test]
        fn leibniz_and_scaling(u in arb_poly(3, 2), v in arb_poly(3, 2), w in arb_poly(3, 2)) {
            let pt = perturbed();
            let lhs = pt.bracket(&u, &(&v * &w)).unwrap();
            let rhs = &(&pt.bracket(&u, &v).unwrap() * &w) + &(&pt.bracket(&u, &w).unwrap() * &v);
            prop_assert_eq!(lhs, rhs);
            let two = Rational::from_int(2);
            prop_assert_eq!(pt.scale(&two).bracket(&u, &v).unwrap(), pt.bracket(&u, &v).unwrap().scale(&two));
            prop_assert_eq!(pt.scale(&Rational::ONE), pt.clone());
            prop_assert!(pt.scale(&Rational::ZERO).is_zero());
        }
    }
}
