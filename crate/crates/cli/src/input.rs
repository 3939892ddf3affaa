//! Resolution of command-line inputs: built-in names, JSON files and
//! inline polynomial literals.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use starlab::kontsevich::WeightTable;
use starlab::schema::from_versioned_json;
use starlab::{LieAlgebra, Polynomial, PoissonTensor};

pub const WEIGHT_TABLE_ENV: &str = "STARLAB_WEIGHT_TABLE";

pub fn read_json<T: DeserializeOwned>(path: &str) -> Result<T> {
    let s = std::fs::read_to_string(path).map_err(starlab::Error::from).with_context(|| format!("reading {path}"))?;
    Ok(from_versioned_json(&s).with_context(|| format!("parsing {path}"))?)
}

/// A built-in name that also names an existing file is ambiguous.
fn reject_collision(name: &str) -> Result<()> {
    if Path::new(name).exists() {
        return Err(starlab::Error::Invalid(format!(
            "{name:?} is both a built-in name and an existing file; rename or move the file"
        ))
        .into());
    }
    Ok(())
}

pub fn algebra(spec: &str) -> Result<LieAlgebra> {
    if let Some(g) = LieAlgebra::builtin(spec) {
        reject_collision(spec)?;
        return Ok(g);
    }
    let g: LieAlgebra = read_json(spec)?;
    g.validate()?;
    Ok(g)
}

/// `symplectic` (needs `dim`) or a JSON file.
pub fn poisson(spec: &str, dim: Option<usize>) -> Result<PoissonTensor> {
    let p = if spec == "symplectic" {
        reject_collision(spec)?;
        let Some(dim) = dim else {
            bail!(starlab::Error::Invalid("--P symplectic needs --dim".into()));
        };
        PoissonTensor::symplectic(dim)?
    } else {
        read_json(spec)?
    };
    if let Some(d) = dim {
        starlab::error::check_dim(d, p.dim())?;
    }
    Ok(p)
}

/// Either `--P` or `--algebra` (the linear Poisson structure on g*).
pub fn poisson_or_algebra(p: Option<&str>, algebra_spec: Option<&str>, dim: Option<usize>) -> Result<PoissonTensor> {
    match (p, algebra_spec) {
        (Some(p), None) => poisson(p, dim),
        (None, Some(a)) => Ok(algebra(a)?.linear_poisson()?),
        _ => bail!(starlab::Error::Invalid("give exactly one of --P and --algebra".into())),
    }
}

pub fn poly(s: &str, dim: usize) -> Result<Polynomial> {
    Polynomial::parse(s, dim).with_context(|| format!("parsing polynomial {s:?}"))
}

/// `--weights`, else `$STARLAB_WEIGHT_TABLE`, else the shipped table.
pub fn weight_table(path: Option<&str>) -> Result<WeightTable> {
    let from_env = std::env::var(WEIGHT_TABLE_ENV).ok().filter(|s| !s.is_empty());
    match path.map(str::to_owned).or(from_env) {
        Some(p) => {
            let s = std::fs::read_to_string(&p).map_err(starlab::Error::from).with_context(|| format!("reading {p}"))?;
            Ok(WeightTable::from_json(&s).with_context(|| format!("parsing {p}"))?)
        }
        None => Ok(WeightTable::builtin()),
    }
}

/// Accepts `1000000`, `1e6` or `2.5e5`.
pub fn parse_count(s: &str) -> std::result::Result<usize, String> {
    if let Ok(n) = s.parse::<usize>() {
        return Ok(n);
    }
    match s.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < 1e15 => Ok(x as usize),
        _ => Err(format!("not a sample count: {s}")),
    }
}
