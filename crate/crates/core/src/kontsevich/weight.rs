//! Quasi-Monte-Carlo weights `w_Γ = (1/(k!(2π)^{2k})) ∫ ∧_j dφ_{e_j¹} ∧ dφ_{e_j²}`
//! over configurations of k distinct points in the upper half-plane.
//!
//! Each point is charted by its angles `0 < θ₀ < θ₁ < π` seen from the
//! ground vertices L = 0 and R = 1, which maps the open unit square onto
//! the half-plane. The integrand is the pulled-back 2k-form: the Jacobian
//! determinant of the edge angles in `(x₁, y₁, …, x_k, y_k)` times the chart
//! density.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::angle::{angle_gradient, PI_F};
use super::graph::{KGraph, Target};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::formal::Rational;

/// Largest number of aerial vertices for which weights are integrated.
pub const MAX_WEIGHT_K: usize = 2;
/// Configurations with two points closer than this (or a point this close
/// to the ground line) are rejected.
pub const COLLISION_FLOOR: f64 = 1e-8;
/// Default error bound above which an estimate is reported as
/// non-converged.
pub const DEFAULT_ERROR_THRESHOLD: f64 = 1e-2;
/// Largest denominator tried by rational reconstruction.
pub const MAX_DENOMINATOR: i64 = 64;
const BATCHES: usize = 32;
const ERROR_FLOOR: f64 = 1e-15;
const PRIMES: [u64; 2 * MAX_WEIGHT_K] = [2, 3, 5, 7];

#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    pub graph: KGraph,
    pub value: f64,
    pub error: f64,
    pub exact: Option<Rational>,
}

impl Weight {
    /// Exact weight with a zero error bound (k = 0, or a trusted table entry).
    pub fn exact(graph: KGraph, value: Rational) -> Weight {
        Weight {
            value: value.to_f64(),
            error: 0.0,
            exact: Some(value),
            graph,
        }
    }

    /// Attach the simplest fraction with denominator ≤ [`MAX_DENOMINATOR`]
    /// inside `value ± error`, if any.
    pub fn reconstruct(mut self) -> Weight {
        self.exact = simplest_rational(self.value - self.error, self.value + self.error, MAX_DENOMINATOR);
        self
    }
}

/// Options for [`weight_with`].
#[derive(Debug, Clone, Copy)]
pub struct WeightOptions {
    pub samples: usize,
    pub seed: u64,
    pub threshold: f64,
    pub exec: Exec,
}

impl WeightOptions {
    pub fn new(samples: usize, seed: u64) -> WeightOptions {
        WeightOptions {
            samples,
            seed,
            threshold: DEFAULT_ERROR_THRESHOLD,
            exec: Exec::default(),
        }
    }
}

/// `weight_with` at the default threshold and execution strategy.
pub fn weight(g: &KGraph, samples: usize, seed: u64) -> Result<Weight> {
    weight_with(g, WeightOptions::new(samples, seed))
}

/// Randomized QMC estimate: a Halton sequence shifted (Cranley–Patterson)
/// once per batch, with shifts drawn from a ChaCha stream keyed by
/// `(seed, batch)`. The error bound is three standard errors across batches
/// plus the rejected fraction times the mean |integrand|.
pub fn weight_with(g: &KGraph, opts: WeightOptions) -> Result<Weight> {
    let k = g.k();
    if k > MAX_WEIGHT_K {
        return Err(Error::OrderOutOfRange { order: k, max: MAX_WEIGHT_K });
    }
    if k == 0 {
        return Ok(Weight::exact(g.clone(), Rational::ONE));
    }
    if opts.samples == 0 {
        return Err(Error::Invalid("samples must be positive".into()));
    }
    let per_batch = opts.samples.div_ceil(BATCHES);
    let batches: Vec<usize> = (0..BATCHES).collect();
    let norm = factorial(k) * TAU.powi(2 * k as i32);
    let stats = opts.exec.map(&batches, |&b| {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(b as u64);
        let shift: Vec<f64> = (0..2 * k).map(|_| rng.gen::<f64>()).collect();
        let mut acc = BatchStats::default();
        let mut u = vec![0.0; 2 * k];
        for i in 1..=per_batch as u64 {
            for (d, ud) in u.iter_mut().enumerate() {
                *ud = (radical_inverse(i, PRIMES[d]) + shift[d]).fract();
            }
            match integrand(g, &u) {
                Some(f) => {
                    acc.sum += f;
                    acc.abs += f.abs();
                }
                None => acc.rejected += 1,
            }
        }
        acc.n = per_batch as u64;
        acc
    });

    // fixed reduction order
    let bmeans: Vec<f64> = stats.iter().map(|s| s.sum / s.n as f64).collect();
    let nb = bmeans.len() as f64;
    let mean = bmeans.iter().sum::<f64>() / nb;
    let var = bmeans.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (nb - 1.0);
    let total: u64 = stats.iter().map(|s| s.n).sum();
    let rejected: u64 = stats.iter().map(|s| s.rejected).sum();
    let mean_abs = stats.iter().map(|s| s.abs).sum::<f64>() / total as f64;
    let err = 3.0 * (var / nb).sqrt() + rejected as f64 / total as f64 * mean_abs;

    let value = mean / norm;
    let error = (err / norm).max(ERROR_FLOOR);
    if !value.is_finite() || !error.is_finite() || error > opts.threshold {
        return Err(Error::NonConvergence { error, threshold: opts.threshold });
    }
    Ok(Weight {
        graph: g.clone(),
        value,
        error,
        exact: None,
    })
}

#[derive(Default)]
struct BatchStats {
    n: u64,
    rejected: u64,
    sum: f64,
    abs: f64,
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    r
}

/// Pulled-back integrand at a point of `[0,1)^{2k}`; `None` for rejected
/// configurations.
pub(crate) fn integrand(g: &KGraph, u: &[f64]) -> Option<f64> {
    let k = g.k();
    let mut pts = Vec::with_capacity(k);
    let mut density = 1.0;
    for j in 0..k {
        let (s, t) = (u[2 * j], u[2 * j + 1]);
        let th1 = PI_F * s;
        let th0 = th1 * t;
        let r0 = th1.sin() / (th1 - th0).sin();
        let p = Complex64::from_polar(r0, th0);
        let r1 = (p - 1.0).norm();
        density *= r0 * r0 * r1 * r1 / p.im * PI_F * PI_F * s;
        pts.push(p);
    }
    if !density.is_finite() {
        return None;
    }
    for (j, p) in pts.iter().enumerate() {
        if p.im < COLLISION_FLOOR || p.norm() < COLLISION_FLOOR || (p - 1.0).norm() < COLLISION_FLOOR {
            return None;
        }
        if pts[..j].iter().any(|q| (p - q).norm() < COLLISION_FLOOR) {
            return None;
        }
    }
    let n = 2 * k;
    let mut m = vec![0.0; n * n];
    for (j, pair) in g.edges().iter().enumerate() {
        for (s, t) in pair.iter().enumerate() {
            let row = &mut m[(2 * j + s) * n..(2 * j + s + 1) * n];
            let q = match t {
                Target::L => Complex64::new(0.0, 0.0),
                Target::R => Complex64::new(1.0, 0.0),
                Target::Aerial(i) => pts[*i],
            };
            let grad = angle_gradient(pts[j], q);
            row[2 * j] += grad[0];
            row[2 * j + 1] += grad[1];
            if let Target::Aerial(i) = t {
                row[2 * i] += grad[2];
                row[2 * i + 1] += grad[3];
            }
        }
    }
    let f = det(&mut m, n) * density;
    f.is_finite().then_some(f)
}

/// Determinant by partial-pivot elimination (destroys `m`).
fn det(m: &mut [f64], n: usize) -> f64 {
    let mut d = 1.0;
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&a, &b| m[a * n + c].abs().total_cmp(&m[b * n + c].abs()))
            .expect("non-empty");
        if m[piv * n + c] == 0.0 {
            return 0.0;
        }
        if piv != c {
            for j in 0..n {
                m.swap(piv * n + j, c * n + j);
            }
            d = -d;
        }
        let p = m[c * n + c];
        d *= p;
        for r in c + 1..n {
            let f = m[r * n + c] / p;
            if f != 0.0 {
                for j in c..n {
                    m[r * n + j] -= f * m[c * n + j];
                }
            }
        }
    }
    d
}

/// Simplest fraction (smallest denominator, then smallest |numerator|) in
/// the closed interval `[lo, hi]` with denominator ≤ `max_den`.
pub fn simplest_rational(lo: f64, hi: f64, max_den: i64) -> Option<Rational> {
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return None;
    }
    if lo <= 0.0 && hi >= 0.0 {
        return Some(Rational::ZERO);
    }
    if hi < 0.0 {
        return simplest_rational(-hi, -lo, max_den).map(|r| -&r);
    }
    for q in 1..=max_den {
        let p = (lo * q as f64).ceil();
        if p <= hi * q as f64 {
            return Some(Rational::new(p as i64, q));
        }
    }
    None
}

/// A weight table keyed by canonical graph key.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightTable {
    entries: BTreeMap<String, Weight>,
}

#[derive(Serialize, Deserialize)]
struct EntryRepr {
    value: f64,
    error: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exact: Option<Rational>,
}

#[derive(Serialize, Deserialize)]
struct TableRepr {
    schema: String,
    weights: BTreeMap<String, EntryRepr>,
}

impl WeightTable {
    pub fn new() -> WeightTable {
        WeightTable::default()
    }

    pub fn insert(&mut self, w: Weight) {
        self.entries.insert(w.graph.key(), w);
    }

    pub fn get(&self, g: &KGraph) -> Option<&Weight> {
        self.entries.get(&g.key())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Weight> {
        self.entries.values()
    }

    /// Integrate every graph with `1..=k_max` aerial vertices, attaching
    /// reconstructed exact values.
    pub fn compute(k_max: usize, opts: WeightOptions) -> Result<WeightTable> {
        let mut t = WeightTable::new();
        for k in 1..=k_max {
            for g in super::enumerate_graphs(k) {
                t.insert(weight_with(&g, opts)?.reconstruct());
            }
        }
        Ok(t)
    }

    /// The table shipped with the crate (k ≤ 2, exact entries attached).
    pub fn builtin() -> WeightTable {
        WeightTable::from_json(include_str!("../../data/weights_k2.json")).expect("shipped table parses")
    }

    pub fn to_json(&self) -> String {
        let repr = TableRepr {
            schema: crate::SCHEMA.into(),
            weights: self
                .entries
                .iter()
                .map(|(k, w)| {
                    let e = EntryRepr {
                        value: w.value,
                        error: w.error,
                        exact: w.exact.clone(),
                    };
                    (k.clone(), e)
                })
                .collect(),
        };
        serde_json::to_string_pretty(&repr).expect("serializable")
    }

    /// Accepts the versioned document or a bare `{key: entry}` map.
    pub fn from_json(s: &str) -> Result<WeightTable> {
        let v: serde_json::Value = serde_json::from_str(s)?;
        let map: BTreeMap<String, EntryRepr> = match v.get("weights") {
            Some(w) => {
                crate::check_schema(&v)?;
                serde_json::from_value(w.clone())?
            }
            None => serde_json::from_value(v)?,
        };
        let mut t = WeightTable::new();
        for (key, e) in map {
            let graph: KGraph = key.parse()?;
            if !(e.error >= 0.0) || !e.value.is_finite() {
                return Err(Error::Invalid(format!("weight {key}: bad value or error")));
            }
            if let Some(x) = &e.exact {
                if (x.to_f64() - e.value).abs() > e.error + 1e-12 {
                    return Err(Error::Invalid(format!("weight {key}: exact {x} outside value ± error")));
                }
            }
            t.insert(Weight {
                graph,
                value: e.value,
                error: e.error,
                exact: e.exact,
            });
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> KGraph {
        s.parse().unwrap()
    }

    #[test]
    fn halton_prefix() {
        let xs: Vec<f64> = (1..=4).map(|i| radical_inverse(i, 2)).collect();
        assert_eq!(xs, [0.5, 0.25, 0.75, 0.125]);
        assert!((radical_inverse(5, 3) - (2.0 / 3.0 + 1.0 / 9.0)).abs() < 1e-15);
    }

    #[test]
    fn k1_integrand_is_constant_in_chart() {
        // dφ_L ∧ dφ_R = 4 dθ₀ ∧ dθ₁ and the chart has dθ₀dθ₁ = π² s ds dt
        for (s, t) in [(0.3, 0.2), (0.9, 0.5), (0.5, 0.99)] {
            let f = integrand(&g("[L,R]"), &[s, t]).unwrap();
            assert!((f - 4.0 * PI_F * PI_F * s).abs() < 1e-9 * f.abs(), "{f}");
        }
    }

    #[test]
    fn k1_weights() {
        let a = weight(&g("[L,R]"), 20_000, 7).unwrap();
        let b = weight(&g("[R,L]"), 20_000, 7).unwrap();
        assert!((a.value - 0.5).abs() < 1e-3 && a.error > 0.0);
        assert!((b.value + 0.5).abs() < 1e-3);
        assert_eq!(a.clone().reconstruct().exact, Some(Rational::new(1, 2)));
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let h = g("[2,L][L,R]");
        let opts = |seed| WeightOptions {
            threshold: 1.0,
            ..WeightOptions::new(4096, seed)
        };
        let run = |exec| weight_with(&h, WeightOptions { exec, ..opts(42) }).unwrap();
        let a = run(Exec::Sequential);
        let b = run(Exec::Sequential);
        let c = run(Exec::Parallel);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.value.to_bits(), c.value.to_bits());
        assert_eq!(a.error.to_bits(), c.error.to_bits());
        let d = weight_with(&h, opts(43)).unwrap();
        assert_ne!(a.value.to_bits(), d.value.to_bits());
    }

    #[test]
    fn unsupported_and_trivial_orders() {
        let three = crate::kontsevich::enumerate_graphs(3).remove(0);
        assert!(matches!(weight(&three, 10, 0), Err(Error::OrderOutOfRange { order: 3, max: 2 })));
        assert_eq!(weight(&g("[]"), 10, 0).unwrap().exact, Some(Rational::ONE));
    }

    #[test]
    fn non_convergence_reported() {
        let opts = WeightOptions {
            threshold: 1e-9,
            ..WeightOptions::new(256, 1)
        };
        assert!(matches!(weight_with(&g("[2,L][L,R]"), opts), Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn reconstruction() {
        let r = |lo, hi| simplest_rational(lo, hi, 64).map(|x| x.to_string());
        assert_eq!(r(0.4999, 0.5001).as_deref(), Some("1/2"));
        assert_eq!(r(-0.1251, -0.1249).as_deref(), Some("-1/8"));
        assert_eq!(r(0.02080, 0.02086).as_deref(), Some("1/48"));
        assert_eq!(r(-1e-4, 2e-4).as_deref(), Some("0"));
        assert_eq!(r(0.33, 0.34).as_deref(), Some("1/3"));
        assert_eq!(r(0.123456, 0.123457), None);
    }

    #[test]
    fn determinant() {
        let mut m = vec![0.0, 2.0, 1.0, 3.0];
        assert_eq!(det(&mut m, 2), -2.0);
        let mut m = vec![2.0, 0.0, 0.0, 0.0, 3.0, 0.0, 1.0, 1.0, 4.0];
        assert!((det(&mut m, 3) - 24.0).abs() < 1e-12);
    }

    #[test]
    fn table_json_round_trip() {
        let mut t = WeightTable::new();
        t.insert(Weight::exact(g("[L,R]"), Rational::new(1, 2)));
        t.insert(Weight {
            graph: g("[R,L]"),
            value: -0.4999,
            error: 3e-4,
            exact: None,
        });
        let js = t.to_json();
        assert!(js.contains("\"schema\": \"starlab/v1\""));
        assert_eq!(WeightTable::from_json(&js).unwrap(), t);
        let bare = r#"{"[L,R]": {"value": 0.5, "error": 0.001, "exact": "1/2"}}"#;
        let b = WeightTable::from_json(bare).unwrap();
        assert_eq!(b.get(&g("[L,R]")).unwrap().exact, Some(Rational::new(1, 2)));
        let bad = r#"{"[L,R]": {"value": 0.4, "error": 0.001, "exact": "1/2"}}"#;
        assert!(WeightTable::from_json(bad).is_err());
        assert!(WeightTable::from_json(r#"{"schema":"other/v9","weights":{}}"#).is_err());
    }
}
