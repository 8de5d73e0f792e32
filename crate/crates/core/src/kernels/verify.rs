use num_bigint::BigInt;
use serde::Serialize;

use super::Kernel;
use crate::error::Result;
use crate::exactprob::ratio::{serde_ratio, Rational};
use crate::exactprob::{dist_mean, State};
use crate::marginals::reachable_states;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub n: u32,
    pub x: State,
    #[serde(with = "serde_ratio")]
    pub mean: Rational,
}

#[derive(Debug, Clone, Serialize)]
pub struct MartingaleReport {
    pub kernel: String,
    pub horizon: u32,
    /// Number of `(n, x)` rows checked.
    pub checked: usize,
    pub violations: Vec<Violation>,
}

impl MartingaleReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `E[M_{n+1} | M_n = x] = x` exactly for every state reachable at
/// times `0..horizon`.
pub fn verify_martingale(kernel: &dyn Kernel, horizon: u32) -> Result<MartingaleReport> {
    let reach = reachable_states(kernel, horizon)?;
    let mut checked = 0;
    let mut violations = Vec::new();
    for (n, states) in reach.iter().enumerate().take(horizon as usize) {
        let n = n as u32;
        for &x in states {
            checked += 1;
            let mean = dist_mean(&kernel.law(n, x));
            if mean != Rational::from_integer(BigInt::from(x)) {
                violations.push(Violation { n, x, mean });
            }
        }
    }
    Ok(MartingaleReport {
        kernel: kernel.name().to_string(),
        horizon,
        checked,
        violations,
    })
}
