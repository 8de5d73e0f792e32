//! A simple walk slowed down so that it alternates between `±1`.
//!
//! Between crossings the path holds at `±1`; crossing `k` starts at a
//! random time in `[t_{k+1}/2, t_{k+1})` and runs a simple walk to the
//! opposite sign. The schedule `t_k` is chosen so that
//! `P(M_{t_k} = (-1)^{k-1} M_1) ≥ 1 - ε_k`, which rules out convergence
//! in probability while increments stay in `{-1, 0, 1}`.

mod checks;
mod crossing;
mod path;
mod schedule;

pub use checks::{
    alternation_rows, collect_delayed_stats, delayed_walk_check, occupancy_check, occupancy_rows,
    DelayedStats,
};
pub use crossing::{crossing_law, CrossingLaw, PassageScan};
pub use path::{sample_delayed_path, DelayedPath, DelayedSource, Piece};
pub use schedule::{
    build_schedule, EpsRule, Schedule, ScheduleEntry, CROSSING_BUDGET_CAP, SCHEDULE_TIME_CAP,
};
