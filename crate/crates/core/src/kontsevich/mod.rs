//! Kontsevich's graph formula to order two: admissible graphs, their
//! bidifferential operators, numerically integrated weights and the
//! assembled star product.

mod angle;
mod graph;
mod weight;

pub use angle::{angle, angle_gradient, angle_log_formula};
pub use graph::{enumerate_graphs, graph_operator, KGraph, Target};
pub use weight::{
    simplest_rational, weight, weight_with, Weight, WeightOptions, WeightTable, COLLISION_FLOOR,
    DEFAULT_ERROR_THRESHOLD, MAX_DENOMINATOR, MAX_WEIGHT_K,
};

use crate::cochain::{AssocWitness, MultiDiffOp, StarProduct};
use crate::error::{check_dim, Error, Result};
use crate::exec::Exec;
use crate::formal::{monomials_up_to, Polynomial, Rational};
use crate::poisson::PoissonTensor;

/// How table entries become cochain coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    /// Use the `exact` entry of every contributing graph.
    Exact,
    /// Use the floating-point value, carried as an exact dyadic rational,
    /// with its error bound propagated into defect tolerances.
    Numeric,
}

/// One contributing graph: `C_Γ(P/2)`, the coefficient used and its error.
#[derive(Debug, Clone)]
pub struct GraphTerm {
    pub graph: KGraph,
    pub op: MultiDiffOp,
    pub weight: Rational,
    pub error: f64,
}

/// The assembled star product together with its per-graph decomposition.
#[derive(Debug, Clone)]
pub struct KontsevichAssembly {
    pub star: StarProduct,
    /// `terms[r-1]` lists the graphs with nonzero operator at order r.
    pub terms: Vec<Vec<GraphTerm>>,
}

/// `C_r = Σ_{Γ∈G_r} w_Γ C_Γ(P/2)` for r ≤ N ≤ 2.
///
/// The graph operators are evaluated on `P/2` so that
/// `C_1(u,v) − C_1(v,u) = {u,v}` with `w_{[L,R]} = 1/2`.
pub fn kontsevich_star(p: &PoissonTensor, order: usize, table: &WeightTable, mode: WeightMode) -> Result<KontsevichAssembly> {
    if order > MAX_WEIGHT_K {
        return Err(Error::OrderOutOfRange { order, max: MAX_WEIGHT_K });
    }
    let half = p.scale(&Rational::new(1, 2));
    let mut cochains = Vec::with_capacity(order);
    let mut terms = Vec::with_capacity(order);
    for r in 1..=order {
        let mut c = MultiDiffOp::zero(2, p.dim());
        let mut level = Vec::new();
        for g in enumerate_graphs(r) {
            let op = graph_operator(&g, &half);
            if op.is_zero() {
                continue;
            }
            let entry = table.get(&g).ok_or_else(|| Error::MissingWeight(g.key()))?;
            let (w, error) = match mode {
                WeightMode::Exact => {
                    let x = entry.exact.clone().ok_or_else(|| Error::MissingWeight(g.key()))?;
                    (x, 0.0)
                }
                WeightMode::Numeric => {
                    let x = Rational::from_f64(entry.value)
                        .ok_or_else(|| Error::Invalid(format!("weight {} is not finite", g.key())))?;
                    (x, entry.error)
                }
            };
            c.add_scaled(&op, &w);
            level.push(GraphTerm {
                graph: g,
                op,
                weight: w,
                error,
            });
        }
        cochains.push(c);
        terms.push(level);
    }
    Ok(KontsevichAssembly {
        star: StarProduct::new(p.clone(), cochains)?,
        terms,
    })
}

fn norm(p: Result<Polynomial>) -> f64 {
    p.map(|x| x.max_abs_coeff()).unwrap_or(f64::INFINITY)
}

/// `|(∂C)(u,v,w)|_∞` for a bidifferential operator.
fn coboundary_norm(c: &MultiDiffOp, u: &Polynomial, v: &Polynomial, w: &Polynomial) -> f64 {
    let ap = |a: &Polynomial, b: &Polynomial| c.apply(&[a, b]).expect("shapes checked");
    let mut out = u * &ap(v, w);
    out.add_scaled(&ap(&(u * v), w), &-Rational::ONE);
    out.add_scaled(&ap(u, &(v * w)), &Rational::ONE);
    out.add_scaled(&(&ap(u, v) * w), &-Rational::ONE);
    out.max_abs_coeff()
}

impl KontsevichAssembly {
    /// Bound on the order-k defect coefficients at `(u, v, w)` implied by
    /// the weight errors: perturbing each `w_Γ` by at most `e_Γ` moves the
    /// defect by at most the returned amount. Zero in exact mode.
    pub fn assoc_tolerance(&self, k: usize, u: &Polynomial, v: &Polynomial, w: &Polynomial) -> Result<f64> {
        if k == 0 || k > self.terms.len() {
            return Err(Error::OrderOutOfRange { order: k, max: self.terms.len() });
        }
        for x in [u, v, w] {
            check_dim(self.star.dim(), x.dim())?;
        }
        let mut tol: f64 = self.terms[k - 1]
            .iter()
            .filter(|t| t.error > 0.0)
            .map(|t| t.error * coboundary_norm(&t.op, u, v, w))
            .sum();
        if k == 2 {
            let c1 = self.star.cochain(1);
            let ap = |c: &MultiDiffOp, a: &Polynomial, b: &Polynomial| c.apply(&[a, b]);
            let first = &self.terms[0];
            for t in first.iter().filter(|t| t.error > 0.0) {
                let g = &t.op;
                let s = norm(ap(g, &ap(&c1, u, v)?, w))
                    + norm(ap(&c1, &ap(g, u, v)?, w))
                    + norm(ap(g, u, &ap(&c1, v, w)?))
                    + norm(ap(&c1, u, &ap(g, v, w)?));
                tol += t.error * s;
                for t2 in first.iter().filter(|t| t.error > 0.0) {
                    let h = &t2.op;
                    let s = norm(ap(g, &ap(h, u, v)?, w)) + norm(ap(g, u, &ap(h, v, w)?));
                    tol += t.error * t2.error * s;
                }
            }
        }
        Ok(tol)
    }

    /// First monomial triple of degree ≤ `max_degree` and order where a
    /// defect coefficient exceeds the propagated tolerance (plus `slack`),
    /// together with that tolerance.
    pub fn assoc_violation(&self, max_degree: u32, slack: f64, exec: Exec) -> Option<(AssocWitness, f64)> {
        let monos = monomials_up_to(self.star.dim(), max_degree);
        let mut triples = Vec::with_capacity(monos.len().pow(3));
        for a in &monos {
            for b in &monos {
                for c in &monos {
                    triples.push([a, b, c].map(|m| Polynomial::monomial(m.clone())));
                }
            }
        }
        exec.find_first(&triples, |[u, v, w]| {
            (1..=self.star.order()).find_map(|k| {
                let d = self.star.assoc_defect(k, u, v, w).expect("shapes checked");
                if d.is_zero() {
                    return None;
                }
                let tol = self.assoc_tolerance(k, u, v, w).expect("shapes checked") + slack;
                (d.max_abs_coeff() > tol).then(|| {
                    let wit = AssocWitness {
                        order: k,
                        u: u.clone(),
                        v: v.clone(),
                        w: w.clone(),
                        defect: d,
                    };
                    (wit, tol)
                })
            })
        })
    }

    /// Largest ratio `defect / tolerance` over the family (0 when every
    /// defect vanishes, ∞ when a defect is nonzero at zero tolerance).
    pub fn worst_assoc_ratio(&self, max_degree: u32, exec: Exec) -> f64 {
        let monos = monomials_up_to(self.star.dim(), max_degree);
        let mut triples = Vec::new();
        for a in &monos {
            for b in &monos {
                for c in &monos {
                    triples.push([a, b, c].map(|m| Polynomial::monomial(m.clone())));
                }
            }
        }
        exec.map(&triples, |[u, v, w]| {
            (1..=self.star.order())
                .map(|k| {
                    let d = self.star.assoc_defect(k, u, v, w).expect("shapes checked");
                    if d.is_zero() {
                        return 0.0;
                    }
                    d.max_abs_coeff() / self.assoc_tolerance(k, u, v, w).expect("shapes checked")
                })
                .fold(0.0, f64::max)
        })
        .into_iter()
        .fold(0.0, f64::max)
    }
}
