use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::rng::SeedPlan;
use crate::error::Result;
use crate::exactprob::io::csv_writer;

/// One estimate. `n` indexes times, `k` indexes events or schedule steps,
/// and `x` the state for marginal rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McRow {
    pub stat: String,
    pub n: Option<u64>,
    pub k: Option<u64>,
    pub x: Option<i128>,
    pub estimate: f64,
    pub radius: f64,
    pub trials: u64,
    pub reference: Option<f64>,
    pub pass: Option<bool>,
}

impl McRow {
    pub fn new(stat: &str, estimate: f64, radius: f64, trials: u64) -> Self {
        McRow {
            stat: stat.to_string(),
            n: None,
            k: None,
            x: None,
            estimate,
            radius,
            trials,
            reference: None,
            pass: None,
        }
    }

    pub fn at_n(mut self, n: u64) -> Self {
        self.n = Some(n);
        self
    }

    pub fn at_k(mut self, k: u64) -> Self {
        self.k = Some(k);
        self
    }

    pub fn at_x(mut self, x: i128) -> Self {
        self.x = Some(x);
        self
    }

    pub fn against(mut self, reference: f64, pass: bool) -> Self {
        self.reference = Some(reference);
        self.pass = Some(pass);
        self
    }
}

/// Monte Carlo results with enough provenance to rerun them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub statistic: String,
    pub source: String,
    pub master_seed: u64,
    pub paths: u64,
    pub horizon: u64,
    pub config_digest: String,
    pub rows: Vec<McRow>,
}

pub const REPORT_CSV_HEADER: [&str; 9] = [
    "stat", "n", "k", "x", "estimate", "radius", "trials", "reference", "pass",
];

/// Hex SHA-256 of a configuration description.
pub fn config_digest(description: &str) -> String {
    Sha256::digest(description.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

impl McReport {
    pub fn new(statistic: &str, source: &str, plan: SeedPlan, paths: u64, horizon: u64) -> Self {
        let description = format!(
            "statistic={statistic};source={source};seed={};paths={paths};horizon={horizon}",
            plan.master_seed
        );
        McReport {
            statistic: statistic.to_string(),
            source: source.to_string(),
            master_seed: plan.master_seed,
            paths,
            horizon,
            config_digest: config_digest(&description),
            rows: Vec::new(),
        }
    }

    /// `false` if any row that carries a verdict failed.
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass != Some(false))
    }

    pub fn failures(&self) -> impl Iterator<Item = &McRow> {
        self.rows.iter().filter(|r| r.pass == Some(false))
    }

    pub fn rows_of<'a>(&'a self, stat: &'a str) -> impl Iterator<Item = &'a McRow> + 'a {
        self.rows.iter().filter(move |r| r.stat == stat)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Rows only; the header fields go into `#`-prefixed comment lines.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# statistic={}", self.statistic)?;
        writeln!(w, "# source={}", self.source)?;
        writeln!(
            w,
            "# master_seed={} paths={} horizon={}",
            self.master_seed, self.paths, self.horizon
        )?;
        writeln!(w, "# config_digest={}", self.config_digest)?;
        let mut out = csv_writer(w);
        out.write_record(REPORT_CSV_HEADER)?;
        let opt = |v: Option<String>| v.unwrap_or_default();
        for r in &self.rows {
            out.write_record([
                r.stat.clone(),
                opt(r.n.map(|v| v.to_string())),
                opt(r.k.map(|v| v.to_string())),
                opt(r.x.map(|v| v.to_string())),
                r.estimate.to_string(),
                r.radius.to_string(),
                r.trials.to_string(),
                opt(r.reference.map(|v| v.to_string())),
                opt(r.pass.map(|v| v.to_string())),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}
