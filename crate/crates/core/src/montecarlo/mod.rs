//! Deterministic, parallel path sampling and the statistics computed from
//! sampled paths.
//!
//! Path `i` of a run is a pure function of `(master_seed, i)`, so results do
//! not depend on worker count or scheduling. Aggregation only adds integer
//! counters, which makes merged statistics order-independent too.

mod kernel_report;
mod report;
mod rng;
mod runner;
mod source;
mod stats;

pub use kernel_report::{kernel_report, KernelStats, MARGINAL_TV_TOLERANCE};
pub use report::{config_digest, McReport, McRow};
pub use rng::{mix64, PathRng, SeedPlan, GOLDEN_GAMMA};
pub use runner::{run_paths, sample_path, Accumulator, PathSource, RunSpec};
pub use source::KernelSource;
pub use stats::{
    absorption_fraction, alternation_rate, empirical_marginal, AbsorptionCounts,
    AbsorptionSummary, AlternationCounts, ConditionalIncrements, EmpiricalDist, Estimate,
    MarginalCounts, MeanEstimate, PathStats, SIGMA_MULTIPLIER,
};
