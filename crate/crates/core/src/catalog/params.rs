use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Model parameters with declared defaults; unknown names are rejected.
#[derive(Debug, Clone)]
pub struct Params {
    values: BTreeMap<String, f64>,
}

impl Params {
    pub fn resolve(model: &str, given: &BTreeMap<String, f64>, defaults: &[(&str, f64)]) -> Result<Self> {
        let mut values: BTreeMap<String, f64> =
            defaults.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        for (k, v) in given {
            if !values.contains_key(k) {
                return Err(Error::InvalidParameter(format!("`{k}` is not a parameter of {model}")));
            }
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("`{k}` is not finite")));
            }
            values.insert(k.clone(), *v);
        }
        Ok(Params { values })
    }

    pub fn get(&self, k: &str) -> f64 {
        self.values[k]
    }

    pub fn positive(&self, k: &str) -> Result<f64> {
        let v = self.get(k);
        if v > 0.0 {
            Ok(v)
        } else {
            Err(Error::InvalidParameter(format!("`{k}` must be positive, got {v}")))
        }
    }

    pub fn into_map(self) -> BTreeMap<String, f64> {
        self.values
    }
}
