//! Exact and Monte Carlo laboratory for discrete-time martingales whose
//! marginal laws coincide while their convergence behaviour differs.
//!
//! The crate is organised around six pieces:
//!
//! * [`exactprob`]: exact rationals, finite distributions and the moment,
//!   uniform-integrability and total-variation functionals.
//! * [`kernels`]: time-inhomogeneous transition kernels (simple walk, the
//!   alternating chain, the holding chain, user kernels) and an exact
//!   martingale-step verifier.
//! * [`marginals`]: forward propagation of exact marginal laws, a brute-force
//!   path enumeration oracle, and exact flow comparison.
//! * [`excursion`]: simple-walk excursions switched on by events `A_k`, with
//!   independent and nested couplings.
//! * [`delayedwalk`]: the bounded-increment construction, a time-changed walk
//!   alternating between `±1` on a calibrated schedule.
//! * [`montecarlo`]: deterministic, parallel path sampling and statistics.
//!
//! Exact claims never touch floating point. Sampling converts row masses to
//! `f64` only when building its cumulative tables.

pub mod delayedwalk;
pub mod error;
pub mod exactprob;
pub mod excursion;
pub mod kernels;
pub mod marginals;
pub mod montecarlo;

pub use error::{Error, Result};
pub use exactprob::{Dist, Rational, State};
pub use kernels::Kernel;
pub use marginals::MarginalFlow;
pub use montecarlo::{McReport, SeedPlan};

/// Largest horizon accepted by exact computations.
pub const EXACT_HORIZON_CAP: u32 = 60;
