pub mod cochain;
pub mod equiv;
pub mod error;
pub mod exec;
pub mod formal;
pub mod kontsevich;
pub mod liestar;
pub mod linalg;
pub mod moyal;
pub mod poisson;
pub mod schema;

pub use cochain::{MultiDiffOp, StarProduct};
pub use error::{Error, Result};
pub use exec::Exec;
pub use formal::{Monomial, MultiIndex, NuSeries, Polynomial, Rational};
pub use poisson::{LieAlgebra, PoissonTensor};
pub use schema::{check_schema, SCHEMA};
