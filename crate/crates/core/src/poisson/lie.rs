use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::PoissonTensor;
use crate::error::{Error, Result};
use crate::formal::{Polynomial, Rational};

/// Finite-dimensional Lie algebra given by structure constants
/// `[X_i, X_j] = Σ_k c^k_{ij} X_k` (0-based indices internally).
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "LieRepr", into = "LieRepr")]
pub struct LieAlgebra {
    dim: usize,
    // c[(i * n + j) * n + k] = c^k_{ij}
    c: Vec<Rational>,
}

impl LieAlgebra {
    /// Build from brackets `(i, j, [(k, c^k_{ij})])` for `i < j` (0-based);
    /// antisymmetric partners are filled in. The result is validated.
    pub fn from_brackets<I, J>(dim: usize, brackets: I) -> Result<LieAlgebra>
    where
        I: IntoIterator<Item = (usize, usize, J)>,
        J: IntoIterator<Item = (usize, Rational)>,
    {
        let mut g = LieAlgebra::abelian(dim);
        for (i, j, coeffs) in brackets {
            if i >= dim || j >= dim {
                return Err(Error::InvalidLieAlgebra(format!(
                    "bracket index outside 1..={dim}"
                )));
            }
            for (k, c) in coeffs {
                if k >= dim {
                    return Err(Error::InvalidLieAlgebra(format!(
                        "structure constant index {} outside 1..={dim}",
                        k + 1
                    )));
                }
                if i == j {
                    if !c.is_zero() {
                        return Err(Error::InvalidLieAlgebra(format!(
                            "[X{0}, X{0}] must vanish",
                            i + 1
                        )));
                    }
                    continue;
                }
                let n = dim;
                g.c[(i * n + j) * n + k] = c.clone();
                g.c[(j * n + i) * n + k] = -c;
            }
        }
        g.validate()?;
        Ok(g)
    }

    /// Raw constructor for a full `c^k_{ij}` table; validated.
    pub fn from_table(dim: usize, c: Vec<Rational>) -> Result<LieAlgebra> {
        if c.len() != dim * dim * dim {
            return Err(Error::InvalidLieAlgebra(format!(
                "expected {} structure constants, found {}",
                dim * dim * dim,
                c.len()
            )));
        }
        let g = LieAlgebra { dim, c };
        g.validate()?;
        Ok(g)
    }

    pub fn abelian(dim: usize) -> LieAlgebra {
        LieAlgebra {
            dim,
            c: vec![Rational::ZERO; dim * dim * dim],
        }
    }

    /// `heisenberg3`, `so3`, `sl2` or `abelian(n)`.
    pub fn builtin(name: &str) -> Option<LieAlgebra> {
        let one = Rational::ONE;
        let g = match name {
            // [X,Y] = Z
            "heisenberg3" => LieAlgebra::from_brackets(3, [(0, 1, vec![(2, one)])]),
            // [e1,e2] = e3 and cyclic
            "so3" => LieAlgebra::from_brackets(
                3,
                [
                    (0, 1, vec![(2, one.clone())]),
                    (1, 2, vec![(0, one.clone())]),
                    (0, 2, vec![(1, -one)]),
                ],
            ),
            // basis (H, E, F): [H,E] = 2E, [H,F] = −2F, [E,F] = H
            "sl2" => LieAlgebra::from_brackets(
                3,
                [
                    (0, 1, vec![(1, Rational::from_int(2))]),
                    (0, 2, vec![(2, Rational::from_int(-2))]),
                    (1, 2, vec![(0, one)]),
                ],
            ),
            _ => {
                let n = name.strip_prefix("abelian(")?.strip_suffix(')')?;
                let n: usize = n.trim().parse().ok()?;
                if n == 0 {
                    return None;
                }
                Ok(LieAlgebra::abelian(n))
            }
        };
        Some(g.expect("built-in algebras are valid"))
    }

    pub fn is_builtin_name(name: &str) -> bool {
        LieAlgebra::builtin(name).is_some()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `c^k_{ij}`, 0-based.
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> &Rational {
        &self.c[(i * self.dim + j) * self.dim + k]
    }

    pub fn is_abelian(&self) -> bool {
        self.c.iter().all(Rational::is_zero)
    }

    /// `[X_i, X_j]` as a coefficient vector.
    pub fn bracket_basis(&self, i: usize, j: usize) -> Vec<Rational> {
        let n = self.dim;
        self.c[(i * n + j) * n..(i * n + j + 1) * n].to_vec()
    }

    /// Bracket of two elements given by coefficient vectors.
    pub fn bracket(&self, a: &[Rational], b: &[Rational]) -> Vec<Rational> {
        let n = self.dim;
        let mut out = vec![Rational::ZERO; n];
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                if bj.is_zero() {
                    continue;
                }
                let f = ai * bj;
                for (k, o) in out.iter_mut().enumerate() {
                    let c = self.structure_constant(i, j, k);
                    if !c.is_zero() {
                        *o += &(&f * c);
                    }
                }
            }
        }
        out
    }

    /// Checks antisymmetry and the Jacobi identity on the structure constants.
    pub fn validate(&self) -> Result<()> {
        let n = self.dim;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.structure_constant(i, j, k) != &-self.structure_constant(j, i, k) {
                        return Err(Error::InvalidLieAlgebra(format!(
                            "c^{}_{{{}{}}} is not antisymmetric",
                            k + 1,
                            i + 1,
                            j + 1
                        )));
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for m in 0..n {
                        let mut s = Rational::ZERO;
                        for l in 0..n {
                            s += &(self.structure_constant(i, j, l) * self.structure_constant(l, k, m));
                            s += &(self.structure_constant(j, k, l) * self.structure_constant(l, i, m));
                            s += &(self.structure_constant(k, i, l) * self.structure_constant(l, j, m));
                        }
                        if !s.is_zero() {
                            return Err(Error::InvalidLieAlgebra(format!(
                                "Jacobi identity fails for (X{}, X{}, X{})",
                                i + 1,
                                j + 1,
                                k + 1
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// The linear Poisson tensor on the dual, `P^{ij} = Σ_k c^k_{ij} x_k`.
    pub fn linear_poisson(&self) -> Result<PoissonTensor> {
        self.validate()?;
        let n = self.dim;
        let mut upper = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let mut e = Polynomial::zero(n);
                for k in 0..n {
                    let c = self.structure_constant(i, j, k);
                    if !c.is_zero() {
                        e.add_scaled(&Polynomial::var(n, k), c);
                    }
                }
                upper.push((i, j, e));
            }
        }
        PoissonTensor::from_upper(n, upper)
    }
}

impl std::fmt::Debug for LieAlgebra {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LieAlgebra(dim {}, {})", self.dim, serde_json::to_string(self).unwrap_or_default())
    }
}

#[derive(Serialize, Deserialize)]
struct BracketRepr {
    i: usize,
    j: usize,
    coeffs: BTreeMap<String, Rational>,
}

#[derive(Serialize, Deserialize)]
struct LieRepr {
    dim: usize,
    brackets: Vec<BracketRepr>,
}

impl From<LieAlgebra> for LieRepr {
    fn from(g: LieAlgebra) -> Self {
        let n = g.dim;
        let mut brackets = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let coeffs: BTreeMap<String, Rational> = (0..n)
                    .filter(|&k| !g.structure_constant(i, j, k).is_zero())
                    .map(|k| ((k + 1).to_string(), g.structure_constant(i, j, k).clone()))
                    .collect();
                if !coeffs.is_empty() {
                    brackets.push(BracketRepr {
                        i: i + 1,
                        j: j + 1,
                        coeffs,
                    });
                }
            }
        }
        LieRepr { dim: n, brackets }
    }
}

impl TryFrom<LieRepr> for LieAlgebra {
    type Error = Error;
    fn try_from(r: LieRepr) -> Result<Self> {
        let n = r.dim;
        let mut table = vec![Rational::ZERO; n * n * n];
        let mut seen = std::collections::HashSet::new();
        for b in r.brackets {
            if b.i == 0 || b.j == 0 || b.i > n || b.j > n {
                return Err(Error::InvalidLieAlgebra(format!(
                    "bracket ({}, {}) outside 1..={n}",
                    b.i, b.j
                )));
            }
            let (i, j) = (b.i - 1, b.j - 1);
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(Error::InvalidLieAlgebra(format!(
                    "bracket ({}, {}) given twice",
                    b.i, b.j
                )));
            }
            for (k, c) in b.coeffs {
                let k: usize = k
                    .parse()
                    .ok()
                    .filter(|k| (1..=n).contains(k))
                    .ok_or_else(|| Error::InvalidLieAlgebra(format!("bad basis index {k:?}")))?;
                table[(i * n + j) * n + k - 1] = c.clone();
                table[(j * n + i) * n + k - 1] = -c;
            }
        }
        LieAlgebra::from_table(n, table)
    }
}
