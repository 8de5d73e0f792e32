//! Exact rational probabilities and finite-support distributions on the
//! integers.

mod dist;
mod functionals;
pub mod io;
pub mod ratio;

pub use dist::{Dist, State};
pub use functionals::{abs_moment, dist_mean, tv_distance, ui_tail};
pub use ratio::{format_ratio, parse_ratio, Rational};
