//! Multidifferential operators as Hochschild cochains, star products built
//! from them, associativity defects and the coboundary solver.

mod coboundary;
mod extract;
mod op;
mod star;

pub use coboundary::solve_coboundary;
pub(crate) use coboundary::solve_cocycle;
pub use extract::{extract_bidifferential, ExtractBounds};
#[cfg(test)]
pub(crate) use extract::monomial_series;
pub use op::{Derivs, MultiDiffOp};
pub use star::{AssocWitness, StarProduct, StarTable};
