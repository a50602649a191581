//! Name-keyed registries of strategy constructors.
//!
//! Interaction kernels and urn reinforcement providers are selected at
//! runtime from a [`StrategySpec`]: a `name` plus a flat table of
//! parameters. Each registered factory parses its own parameter struct
//! with unknown keys rejected, so a typo in a config file fails loudly.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Params = serde_json::Map<String, serde_json::Value>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySpec {
    pub name: String,
    #[serde(flatten)]
    pub params: Params,
}

impl StrategySpec {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            params: Params::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        let value = serde_json::to_value(value).expect("parameter serializes");
        self.params.insert(key.to_owned(), value);
        self
    }
}

/// Deserialize a factory's parameter struct, naming the strategy on failure.
pub fn parse_params<P: DeserializeOwned>(name: &str, params: &Params) -> Result<P> {
    serde_json::from_value(serde_json::Value::Object(params.clone()))
        .map_err(|e| Error::param(name, e.to_string()))
}

pub type Factory<T> = fn(&Params) -> Result<Arc<T>>;

struct Entry<T: ?Sized> {
    summary: &'static str,
    build: Factory<T>,
}

pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: BTreeMap<&'static str, Entry<T>>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: &'static str, summary: &'static str, build: Factory<T>) {
        self.entries.insert(name, Entry { summary, build });
    }

    pub fn build(&self, spec: &StrategySpec) -> Result<Arc<T>> {
        let entry = self
            .entries
            .get(spec.name.as_str())
            .ok_or_else(|| Error::UnknownStrategy {
                kind: self.kind,
                name: spec.name.clone(),
                known: self.names().collect::<Vec<_>>().join(", "),
            })?;
        (entry.build)(&spec.params)
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    pub fn describe(&self) -> impl Iterator<Item = (&'static str, &'static str)> + '_ {
        self.entries.iter().map(|(k, e)| (*k, e.summary))
    }
}

impl<T: ?Sized> fmt::Debug for Registry<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Registry")
            .field("kind", &self.kind)
            .field("names", &self.entries.keys().collect::<Vec<_>>())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    trait Shape: Send + Sync {
        fn area(&self) -> f64;
    }
    struct Square(f64);
    impl Shape for Square {
        fn area(&self) -> f64 {
            self.0 * self.0
        }
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct SquareParams {
        side: f64,
    }

    fn registry() -> Registry<dyn Shape> {
        let mut r: Registry<dyn Shape> = Registry::new("shape");
        r.register("square", "a square", |p| {
            let p: SquareParams = parse_params("square", p)?;
            Ok(Arc::new(Square(p.side)))
        });
        r
    }

    #[test]
    fn builds_by_name() {
        let s = registry()
            .build(&StrategySpec::new("square").with("side", 3.0))
            .unwrap();
        assert_eq!(s.area(), 9.0);
    }

    #[test]
    fn unknown_name_lists_known() {
        let err = registry().build(&StrategySpec::new("circle")).err().unwrap();
        assert!(err.to_string().contains("known: square"), "{err}");
    }

    #[test]
    fn typo_in_key_is_rejected() {
        let err = registry()
            .build(&StrategySpec::new("square").with("sied", 3.0))
            .err()
            .unwrap();
        assert!(err.to_string().contains("sied"), "{err}");
    }
}
