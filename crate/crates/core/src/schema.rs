//! Versioned JSON documents: every document carries `"schema": "starlab/v1"`.

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub const SCHEMA: &str = "starlab/v1";

/// Rejects a document whose `schema` field is present and differs from
/// [`SCHEMA`].
pub fn check_schema(v: &Value) -> Result<()> {
    match v.get("schema") {
        None => Ok(()),
        Some(Value::String(s)) if s == SCHEMA => Ok(()),
        Some(other) => Err(Error::Schema {
            expected: SCHEMA.into(),
            found: other.to_string(),
        }),
    }
}

/// Objects gain a `schema` field; other values are wrapped as
/// `{"schema": …, "value": …}`.
pub fn to_versioned_value<T: Serialize>(x: &T) -> Result<Value> {
    let v = serde_json::to_value(x)?;
    let mut out = Map::new();
    out.insert("schema".into(), Value::String(SCHEMA.into()));
    match v {
        Value::Object(m) => out.extend(m),
        other => {
            out.insert("value".into(), other);
        }
    }
    Ok(Value::Object(out))
}

pub fn to_versioned_json<T: Serialize>(x: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(&to_versioned_value(x)?)?)
}

/// Inverse of [`to_versioned_value`]; unversioned documents are accepted.
pub fn from_versioned_value<T: DeserializeOwned>(mut v: Value) -> Result<T> {
    check_schema(&v)?;
    if let Value::Object(m) = &mut v {
        m.remove("schema");
        if m.len() == 1 && m.contains_key("value") {
            return Ok(serde_json::from_value(m.remove("value").expect("present"))?);
        }
    }
    Ok(serde_json::from_value(v)?)
}

pub fn from_versioned_json<T: DeserializeOwned>(s: &str) -> Result<T> {
    from_versioned_value(serde_json::from_str(s)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formal::{NuSeries, Polynomial};
    use crate::poisson::LieAlgebra;

    #[test]
    fn round_trips() {
        let g = LieAlgebra::builtin("so3").unwrap();
        let js = to_versioned_json(&g).unwrap();
        assert!(js.contains(SCHEMA));
        assert_eq!(from_versioned_json::<LieAlgebra>(&js).unwrap(), g);
        let s = NuSeries::from_poly(Polynomial::parse("x1 x2 - 3", 2).unwrap(), 2);
        let js = to_versioned_json(&s).unwrap();
        assert_eq!(from_versioned_json::<NuSeries>(&js).unwrap(), s);
        let bare = serde_json::to_string(&g).unwrap();
        assert_eq!(from_versioned_json::<LieAlgebra>(&bare).unwrap(), g);
    }

    #[test]
    fn wrong_schema_rejected() {
        let e = from_versioned_json::<LieAlgebra>(r#"{"schema":"starlab/v0","dim":1,"brackets":[]}"#);
        assert!(matches!(e, Err(Error::Schema { .. })));
    }
}
