use std::fmt;
use std::str::FromStr;

use crate::cochain::MultiDiffOp;
use crate::error::{Error, Result};
use crate::formal::{Monomial, Polynomial};
use crate::poisson::PoissonTensor;

/// Endpoint of an edge: an aerial vertex (0-based) or one of the two ground
/// vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Target {
    L,
    R,
    Aerial(usize),
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::L => f.write_str("L"),
            Target::R => f.write_str("R"),
            Target::Aerial(i) => write!(f, "{}", i + 1),
        }
    }
}

/// Admissible graph: aerial vertex j sends two ordered edges to
/// `edges[j][0]`, `edges[j][1]`, distinct and never back to j.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KGraph {
    edges: Vec<[Target; 2]>,
}

impl KGraph {
    pub fn new(edges: Vec<[Target; 2]>) -> Result<KGraph> {
        let k = edges.len();
        for (j, [a, b]) in edges.iter().enumerate() {
            for t in [a, b] {
                match t {
                    Target::Aerial(i) if *i == j => {
                        return Err(Error::Invalid(format!("vertex {} has a loop", j + 1)))
                    }
                    Target::Aerial(i) if *i >= k => {
                        return Err(Error::Invalid(format!("edge to missing vertex {}", i + 1)))
                    }
                    _ => {}
                }
            }
            if a == b {
                return Err(Error::Invalid(format!("vertex {} has a double edge", j + 1)));
            }
        }
        Ok(KGraph { edges })
    }

    /// Number of aerial vertices.
    pub fn k(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[[Target; 2]] {
        &self.edges
    }

    /// Canonical key, e.g. `[L,R][1,L]`; the empty graph is `[]`.
    pub fn key(&self) -> String {
        self.to_string()
    }

    /// Does some edge land on the given target?
    pub fn hits(&self, t: Target) -> bool {
        self.edges.iter().any(|e| e.contains(&t))
    }
}

impl fmt::Display for KGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.edges.is_empty() {
            return f.write_str("[]");
        }
        for [a, b] in &self.edges {
            write!(f, "[{a},{b}]")?;
        }
        Ok(())
    }
}

impl FromStr for KGraph {
    type Err = Error;
    fn from_str(s: &str) -> Result<KGraph> {
        let s = s.trim();
        if s == "[]" {
            return Ok(KGraph { edges: Vec::new() });
        }
        let bad = || Error::Invalid(format!("malformed graph key {s:?}"));
        let mut edges = Vec::new();
        let mut rest = s;
        while !rest.is_empty() {
            let inner = rest.strip_prefix('[').ok_or_else(bad)?;
            let close = inner.find(']').ok_or_else(bad)?;
            let (pair, tail) = (&inner[..close], &inner[close + 1..]);
            let parts: Vec<&str> = pair.split(',').map(str::trim).collect();
            if parts.len() != 2 {
                return Err(bad());
            }
            let mut ts = [Target::L; 2];
            for (t, p) in ts.iter_mut().zip(&parts) {
                *t = match *p {
                    "L" => Target::L,
                    "R" => Target::R,
                    n => {
                        let i: usize = n.parse().map_err(|_| bad())?;
                        if i == 0 {
                            return Err(bad());
                        }
                        Target::Aerial(i - 1)
                    }
                };
            }
            edges.push(ts);
            rest = tail;
        }
        KGraph::new(edges)
    }
}

/// All admissible labelled graphs with k aerial vertices, in canonical
/// order (vertex 1 varies slowest; targets ordered L, R, 1, 2, …).
pub fn enumerate_graphs(k: usize) -> Vec<KGraph> {
    let choices: Vec<Vec<[Target; 2]>> = (0..k)
        .map(|j| {
            let mut targets = vec![Target::L, Target::R];
            targets.extend((0..k).filter(|&i| i != j).map(Target::Aerial));
            let mut pairs = Vec::new();
            for &a in &targets {
                for &b in &targets {
                    if a != b {
                        pairs.push([a, b]);
                    }
                }
            }
            pairs
        })
        .collect();
    let mut out = vec![Vec::new()];
    for c in &choices {
        let mut next = Vec::with_capacity(out.len() * c.len());
        for prefix in &out {
            for pair in c {
                let mut e: Vec<[Target; 2]> = prefix.clone();
                e.push(*pair);
                next.push(e);
            }
        }
        out = next;
    }
    out.into_iter().map(|edges| KGraph { edges }).collect()
}

/// `C_Γ(P)(u,v) = Σ_I Π_j (∂_{I(incoming)} P^{I(e_j¹) I(e_j²)}) · ∂_{I(into L)}u · ∂_{I(into R)}v`
/// as an exact bidifferential operator.
pub fn graph_operator(g: &KGraph, p: &PoissonTensor) -> MultiDiffOp {
    let m = p.dim();
    let k = g.k();
    let mut op = MultiDiffOp::zero(2, m);
    if m == 0 {
        return op;
    }
    let n_edges = 2 * k;
    let mut idx = vec![0usize; n_edges];
    loop {
        // incoming derivative multi-index per vertex (aerial 0..k, then L, R)
        let mut incoming = vec![vec![0u32; m]; k + 2];
        for (j, pair) in g.edges.iter().enumerate() {
            for (s, t) in pair.iter().enumerate() {
                let slot = match t {
                    Target::Aerial(i) => *i,
                    Target::L => k,
                    Target::R => k + 1,
                };
                incoming[slot][idx[2 * j + s]] += 1;
            }
        }
        let mut coeff = Polynomial::one(m);
        for j in 0..k {
            let entry = p.entry(idx[2 * j], idx[2 * j + 1]);
            let alpha = Monomial::from_exponents(incoming[j].iter().copied());
            let d = entry.derive(&alpha);
            if d.is_zero() {
                coeff = Polynomial::zero(m);
                break;
            }
            coeff = &coeff * &d;
        }
        if !coeff.is_zero() {
            let dl = Monomial::from_exponents(incoming[k].iter().copied());
            let dr = Monomial::from_exponents(incoming[k + 1].iter().copied());
            op.add_term(vec![dl, dr], &coeff);
        }

        // next index map
        let mut pos = 0;
        loop {
            if pos == n_edges {
                return op;
            }
            idx[pos] += 1;
            if idx[pos] < m {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formal::Rational;
    use crate::poisson::LieAlgebra;

    #[test]
    fn counts() {
        let counts: Vec<usize> = (0..=3).map(|k| enumerate_graphs(k).len()).collect();
        assert_eq!(counts, [1, 2, 36, 1728]);
        for k in 0..=3usize {
            assert_eq!(enumerate_graphs(k).len(), ((k + 1) * k).pow(k as u32));
        }
        let g1: Vec<String> = enumerate_graphs(1).iter().map(KGraph::key).collect();
        assert_eq!(g1, ["[L,R]", "[R,L]"]);
    }

    #[test]
    fn keys_round_trip() {
        for g in enumerate_graphs(2) {
            assert_eq!(g.key().parse::<KGraph>().unwrap(), g);
        }
        assert!("[1,L]".parse::<KGraph>().is_err());
        assert!("[L,L]".parse::<KGraph>().is_err());
        assert!("[L,R][3,L]".parse::<KGraph>().is_err());
        assert_eq!("[]".parse::<KGraph>().unwrap().k(), 0);
    }

    #[test]
    fn single_vertex_operators() {
        let p = LieAlgebra::builtin("so3").unwrap().linear_poisson().unwrap();
        let lr: KGraph = "[L,R]".parse().unwrap();
        let rl: KGraph = "[R,L]".parse().unwrap();
        assert_eq!(graph_operator(&lr, &p), p.bivector_op());
        assert_eq!(graph_operator(&rl, &p), p.bivector_op().scale(&-Rational::ONE));
    }

    #[test]
    fn edge_label_swap_negates() {
        let p = LieAlgebra::builtin("sl2").unwrap().linear_poisson().unwrap();
        for g in enumerate_graphs(2) {
            for j in 0..2 {
                let mut e = g.edges().to_vec();
                e[j].swap(0, 1);
                let h = KGraph::new(e).unwrap();
                assert_eq!(graph_operator(&h, &p), graph_operator(&g, &p).scale(&-Rational::ONE));
            }
        }
    }

    #[test]
    fn constant_tensor_kills_aerial_edges() {
        let p = PoissonTensor::symplectic(4).unwrap();
        for g in enumerate_graphs(2) {
            let aerial = g.edges().iter().flatten().any(|t| matches!(t, Target::Aerial(_)));
            assert_eq!(graph_operator(&g, &p).is_zero(), aerial, "{g}");
        }
    }

    #[test]
    fn linear_in_each_entry() {
        let h = LieAlgebra::builtin("heisenberg3").unwrap().linear_poisson().unwrap();
        let s = LieAlgebra::builtin("so3").unwrap().linear_poisson().unwrap();
        let g: KGraph = "[2,L][L,R]".parse().unwrap();
        // C_Γ is quadratic in P (k=2): C_Γ(2P) = 4 C_Γ(P)
        let two = Rational::from_int(2);
        assert_eq!(graph_operator(&g, &s.scale(&two)), graph_operator(&g, &s).scale(&Rational::from_int(4)));
        assert!(graph_operator(&g, &h).is_zero());
        assert!(!graph_operator(&g, &s).is_zero());
    }
}
