//! Run configuration: a TOML file merged under command-line flags.
//!
//! ```toml
//! chain = "excursion"
//! horizon = 64
//! paths = 100000
//! seed = 7
//! coupling = "nested"
//! prob_seq = "harmonic"
//! output = "json"
//! out_path = "tail.json"
//! stats = ["tail-check"]
//! ```

use std::path::{Path, PathBuf};

use clap::Args;
use martlab::delayedwalk::EpsRule;
use martlab::excursion::{Coupling, CouplingStrategy, ProbSeq, ProbSeqSpec};
use martlab::exactprob::ratio::parse_ratio;
use martlab::kernels::{builtin, verify_martingale, CustomKernel, Kernel};
use martlab::montecarlo::RunSpec;
use martlab::EXACT_HORIZON_CAP;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, CliError, CliResult};

pub const THREADS_ENV: &str = "MARTLAB_THREADS";

/// Everything a run can be configured with. Unset fields fall back to the
/// command's defaults.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chain: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paths: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prob_seq: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_rule: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crossings: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<Vec<String>>,
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| config_err(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config fields serialize")
    }

    /// Fields set in `self` win over `base`.
    pub fn over(self, base: RunConfig) -> RunConfig {
        RunConfig {
            chain: self.chain.or(base.chain),
            horizon: self.horizon.or(base.horizon),
            paths: self.paths.or(base.paths),
            seed: self.seed.or(base.seed),
            coupling: self.coupling.or(base.coupling),
            prob_seq: self.prob_seq.or(base.prob_seq),
            eps_rule: self.eps_rule.or(base.eps_rule),
            crossings: self.crossings.or(base.crossings),
            output: self.output.or(base.output),
            out_path: self.out_path.or(base.out_path),
            stats: self.stats.or(base.stats),
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML run configuration; flags override its fields.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// ssrw | alternating | holding | excursion | delayedwalk | custom:<file>
    #[arg(long)]
    pub chain: Option<String>,
    #[arg(long)]
    pub horizon: Option<u64>,
    #[arg(long)]
    pub paths: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// independent | nested
    #[arg(long)]
    pub coupling: Option<String>,
    /// harmonic | constant:<r> | list:<file>
    #[arg(long)]
    pub prob_seq: Option<String>,
    /// geometric:<r> | constant:<r> | list:<e1>,<e2>,...
    #[arg(long)]
    pub eps_rule: Option<String>,
    /// Number of schedule times K for the delayed walk.
    #[arg(long)]
    pub crossings: Option<usize>,
    /// csv | json
    #[arg(long)]
    pub output: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long = "out", value_name = "FILE")]
    pub out_path: Option<PathBuf>,
    /// Comma-separated statistics for `simulate`.
    #[arg(long, value_delimiter = ',')]
    pub stats: Option<Vec<String>>,
    /// Accept custom kernels that fail the martingale check.
    #[arg(long)]
    pub allow_nonmartingale: bool,
}

impl RunArgs {
    pub fn resolve(&self) -> CliResult<Resolved> {
        Resolved::new(self.merged()?, self.allow_nonmartingale)
    }

    /// The configuration file with flags applied on top.
    pub fn merged(&self) -> CliResult<RunConfig> {
        let flags = RunConfig {
            chain: self.chain.clone(),
            horizon: self.horizon,
            paths: self.paths,
            seed: self.seed,
            coupling: self.coupling.clone(),
            prob_seq: self.prob_seq.clone(),
            eps_rule: self.eps_rule.clone(),
            crossings: self.crossings,
            output: self.output.clone(),
            out_path: self.out_path.clone(),
            stats: self.stats.clone(),
        };
        let file = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        Ok(flags.over(file))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Chain {
    Builtin(String),
    Custom(PathBuf),
    Excursion,
    DelayedWalk,
}

impl Chain {
    pub fn parse(s: &str) -> CliResult<Self> {
        if let Some(path) = s.strip_prefix("custom:") {
            return Ok(Chain::Custom(PathBuf::from(path)));
        }
        match s {
            "excursion" => Ok(Chain::Excursion),
            "delayedwalk" => Ok(Chain::DelayedWalk),
            _ if builtin(s).is_some() => Ok(Chain::Builtin(s.to_string())),
            _ => Err(config_err(format!(
                "unknown chain {s:?} (expected ssrw, alternating, holding, excursion, delayedwalk or custom:<file>)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub struct Resolved {
    pub chain: Option<Chain>,
    pub horizon: Option<u64>,
    pub paths: u64,
    pub seed: u64,
    pub coupling: Coupling,
    pub prob_seq: ProbSeq,
    pub eps_rule: EpsRule,
    pub crossings: usize,
    pub output: Option<Format>,
    pub out_path: Option<PathBuf>,
    pub stats: Option<Vec<String>>,
    pub allow_nonmartingale: bool,
    pub workers: Option<usize>,
}

pub const DEFAULT_PATHS: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_CROSSINGS: usize = 6;

fn parse_prob_seq(s: &str) -> CliResult<ProbSeq> {
    if s == "harmonic" {
        return Ok(ProbSeq::harmonic());
    }
    if let Some(r) = s.strip_prefix("constant:") {
        return Ok(ProbSeq::constant(parse_ratio(r)?)?);
    }
    if let Some(path) = s.strip_prefix("list:") {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {path}: {e}")))?;
        let spec: ProbSeqSpec =
            toml::from_str(&text).map_err(|e| config_err(format!("{path}: {e}")))?;
        return Ok(ProbSeq::try_from(spec)?);
    }
    Err(config_err(format!(
        "unknown probability sequence {s:?} (expected harmonic, constant:<r> or list:<file>)"
    )))
}

fn threads_from_env() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) if v.is_empty() => Ok(None),
        Ok(v) => match v.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(config_err(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

impl Resolved {
    pub fn new(c: RunConfig, allow_nonmartingale: bool) -> CliResult<Self> {
        let output = match c.output.as_deref() {
            None => None,
            Some("csv") => Some(Format::Csv),
            Some("json") => Some(Format::Json),
            Some(o) => return Err(config_err(format!("unknown output {o:?} (expected csv or json)"))),
        };
        let coupling = match &c.coupling {
            Some(s) => s.parse()?,
            None => Coupling::Independent,
        };
        let eps_rule = match &c.eps_rule {
            Some(s) => s.parse()?,
            None => EpsRule::default(),
        };
        if c.paths == Some(0) {
            return Err(config_err("paths must be at least 1"));
        }
        Ok(Resolved {
            chain: c.chain.as_deref().map(Chain::parse).transpose()?,
            horizon: c.horizon,
            paths: c.paths.unwrap_or(DEFAULT_PATHS),
            seed: c.seed.unwrap_or(DEFAULT_SEED),
            coupling,
            prob_seq: parse_prob_seq(c.prob_seq.as_deref().unwrap_or("harmonic"))?,
            eps_rule,
            crossings: c.crossings.unwrap_or(DEFAULT_CROSSINGS),
            output,
            out_path: c.out_path,
            stats: c.stats,
            allow_nonmartingale,
            workers: threads_from_env()?,
        })
    }

    pub fn chain(&self) -> CliResult<&Chain> {
        self.chain.as_ref().ok_or_else(|| config_err("--chain is required"))
    }

    pub fn format(&self, default: Format) -> Format {
        self.output.unwrap_or(default)
    }

    pub fn run_spec(&self) -> RunSpec {
        let run = RunSpec::new(self.paths, self.seed);
        match self.workers {
            Some(w) => run.with_workers(w),
            None => run,
        }
    }

    pub fn coupling_strategy(&self) -> CliResult<CouplingStrategy> {
        Ok(CouplingStrategy::new(self.coupling, self.prob_seq.clone())?)
    }

    /// Horizon for exact work, defaulting to `default` and capped.
    pub fn exact_horizon(&self, default: u32) -> CliResult<u32> {
        let h = self.horizon.unwrap_or(default.into());
        if h > u64::from(EXACT_HORIZON_CAP) {
            return Err(martlab::Error::HorizonCap { horizon: h, cap: EXACT_HORIZON_CAP.into() }.into());
        }
        Ok(h as u32)
    }
}

/// A kernel named by the chain, with custom files checked for the
/// martingale property up to `check_horizon` unless explicitly allowed.
pub fn load_kernel(chain: &Chain, allow_nonmartingale: bool, check_horizon: u32) -> CliResult<Box<dyn Kernel>> {
    match chain {
        Chain::Builtin(name) => Ok(builtin(name).expect("parsed builtin")),
        Chain::Custom(path) => {
            let k = CustomKernel::from_path(path).map_err(|e| match e {
                martlab::Error::Io(io) => config_err(format!("cannot read {}: {io}", path.display())),
                other => CliError::Core(other),
            })?;
            if !allow_nonmartingale {
                let report = verify_martingale(&k, check_horizon.min(EXACT_HORIZON_CAP))?;
                if !report.passed() {
                    let list: Vec<String> = report
                        .violations
                        .iter()
                        .map(|v| format!("(n={}, x={}, mean={})", v.n, v.x, martlab::exactprob::format_ratio(&v.mean)))
                        .collect();
                    return Err(CliError::Failed(format!(
                        "kernel {} is not a martingale: {} (pass --allow-nonmartingale to use it anyway)",
                        k.name(),
                        list.join(", ")
                    )));
                }
            }
            Ok(Box::new(k))
        }
        Chain::Excursion | Chain::DelayedWalk => Err(config_err("not a kernel chain")),
    }
}
