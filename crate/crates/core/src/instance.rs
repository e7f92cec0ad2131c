//! The instance file: an ordered stream of sizes, a bin count, and optionally
//! a known optimum.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::item::check_size;
use crate::opt::{upper_bound, CERTIFICATE_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub n: usize,
    pub items: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opt_certificate: Option<f64>,
    #[serde(default)]
    pub meta: Map<String, Value>,
}

impl Instance {
    pub fn new(n: usize, items: Vec<f64>) -> Self {
        Instance {
            n,
            items,
            opt_certificate: None,
            meta: Map::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.meta.insert(key.to_string(), value.into());
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Parameter("instance needs n >= 1".into()));
        }
        for (i, &s) in self.items.iter().enumerate() {
            check_size(i, s)?;
        }
        if let Some(c) = self.opt_certificate {
            let ub = upper_bound(&self.items, self.n);
            if !(c >= 0.0 && c <= ub + CERTIFICATE_TOLERANCE) {
                return Err(Error::Parameter(format!(
                    "opt_certificate {c} exceeds the bound min(n, sum) = {ub}"
                )));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let inst: Instance =
            serde_json::from_str(text).map_err(|e| Error::Parameter(format!("instance JSON: {e}")))?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parameter(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")
            .map_err(|e| Error::Parameter(format!("{}: {e}", path.display())))
    }
}
