//! User-declared kernels.
//!
//! ```json
//! {
//!   "name": "lazy-walk",
//!   "initial": {"0": "1/1"},
//!   "default": "walk",
//!   "overrides": [
//!     {"state": 0, "row": {"-1": "1/4", "0": "1/2", "1": "1/4"}},
//!     {"time": 3, "state": 1, "row": {"-1": "7/8", "15": "1/8"}}
//!   ]
//! }
//! ```
//!
//! Rows are looked up as: override for `(time, state)`, then the time-free
//! override for `state`, then the default row (`walk`: `x ± 1` with
//! probability 1/2 each; `hold`: stay at `x`). Masses are exact `"num/den"`
//! strings and each row must sum to exactly one.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Kernel;
use crate::error::{Error, Result};
use crate::exactprob::ratio::ratio;
use crate::exactprob::{Dist, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DefaultRow {
    Walk,
    Hold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<u32>,
    pub state: i64,
    pub row: Dist,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpecFile {
    pub name: String,
    pub initial: Dist,
    pub default: DefaultRow,
    #[serde(default)]
    pub overrides: Vec<RowOverride>,
}

#[derive(Debug, Clone)]
pub struct CustomKernel {
    name: String,
    initial: Dist,
    default: DefaultRow,
    rows: BTreeMap<(Option<u32>, State), Dist>,
}

impl CustomKernel {
    pub fn from_spec(spec: KernelSpecFile) -> Result<Self> {
        let mut rows = BTreeMap::new();
        for o in spec.overrides {
            let key = (o.time, State::from(o.state));
            if rows.insert(key, o.row).is_some() {
                return Err(Error::KernelSpec(format!(
                    "duplicate override for state {} at time {:?}",
                    o.state, o.time
                )));
            }
        }
        Ok(CustomKernel {
            name: spec.name,
            initial: spec.initial,
            default: spec.default,
            rows,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: KernelSpecFile =
            serde_json::from_str(text).map_err(|e| Error::KernelSpec(e.to_string()))?;
        Self::from_spec(spec)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

impl Kernel for CustomKernel {
    fn name(&self) -> &str {
        &self.name
    }

    fn initial(&self) -> Dist {
        self.initial.clone()
    }

    fn law(&self, n: u32, x: State) -> Dist {
        if let Some(row) = self.rows.get(&(Some(n), x)).or_else(|| self.rows.get(&(None, x))) {
            return row.clone();
        }
        match self.default {
            DefaultRow::Hold => Dist::point(x),
            DefaultRow::Walk => Dist::new([(x - 1, ratio(1, 2)), (x + 1, ratio(1, 2))])
                .expect("walk row is normalized"),
        }
    }
}
