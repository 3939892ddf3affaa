//! Exact sparse linear systems over the rationals.

use std::collections::BTreeMap;

use crate::formal::Rational;

type Row = BTreeMap<usize, Rational>;

/// Incremental row-echelon solver. Rows are reduced as they arrive; the pivot
/// of each row is its smallest surviving column, so earlier columns are
/// preferred as basic variables and free variables are set to zero.
#[derive(Debug, Default)]
pub struct SparseSolver {
    ncols: usize,
    pivots: BTreeMap<usize, (Row, Rational)>,
    inconsistent: bool,
}

impl SparseSolver {
    pub fn new(ncols: usize) -> SparseSolver {
        SparseSolver {
            ncols,
            pivots: BTreeMap::new(),
            inconsistent: false,
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_consistent(&self) -> bool {
        !self.inconsistent
    }

    /// Add the equation `Σ row[j]·x_j = rhs`.
    pub fn push(&mut self, row: impl IntoIterator<Item = (usize, Rational)>, rhs: Rational) {
        let mut r: Row = BTreeMap::new();
        for (j, c) in row {
            assert!(j < self.ncols, "column out of range");
            if c.is_zero() {
                continue;
            }
            let e = r.entry(j).or_insert(Rational::ZERO);
            *e += &c;
            if e.is_zero() {
                r.remove(&j);
            }
        }
        let mut rhs = rhs;
        loop {
            let Some((&c, lead)) = r.iter().next() else {
                if !rhs.is_zero() {
                    self.inconsistent = true;
                }
                return;
            };
            match self.pivots.get(&c) {
                Some((prow, prhs)) => {
                    let f = lead.clone();
                    for (j, v) in prow {
                        let e = r.entry(*j).or_insert(Rational::ZERO);
                        *e -= &(&f * v);
                        if e.is_zero() {
                            r.remove(j);
                        }
                    }
                    rhs -= &(&f * prhs);
                }
                None => {
                    let inv = lead.recip().expect("nonzero lead");
                    for v in r.values_mut() {
                        *v *= &inv;
                    }
                    rhs *= &inv;
                    self.pivots.insert(c, (r, rhs));
                    return;
                }
            }
        }
    }

    /// A solution with all free variables zero, or `None` if inconsistent.
    pub fn solve(&self) -> Option<Vec<Rational>> {
        if self.inconsistent {
            return None;
        }
        let mut x = vec![Rational::ZERO; self.ncols];
        for (&c, (row, rhs)) in self.pivots.iter().rev() {
            let mut v = rhs.clone();
            for (j, a) in row.range(c + 1..) {
                if !x[*j].is_zero() {
                    v -= &(a * &x[*j]);
                }
            }
            x[c] = v;
        }
        Some(x)
    }
}
