//! Exact arithmetic foundation: rationals, sparse multivariate polynomials and
//! ν-truncated formal series.

mod monomial;
mod parse;
pub(crate) mod polynomial;
mod rational;
mod series;

pub use monomial::{monomials_of_degree, monomials_up_to, Monomial, MultiIndex};
pub use polynomial::Polynomial;
pub use rational::Rational;
pub use series::NuSeries;
