//! Simple-walk excursions switched on by events `A_k`.
//!
//! `M_n` follows the walk `S_n` during its `k`-th excursion away from zero
//! when `A_k` occurs and is zero otherwise. The marginal law of `M_n` only
//! depends on `P(A_k) = p_k`; the coupling of the events (independent or
//! nested) decides whether `M_n` converges.

mod dp;
mod sample;
mod seq;

pub use dp::{excursion_marginal, joint_zero_count, JointZeroCount};
pub use sample::{
    coupling_marginal_report, event_count_check, nested_tail_check, sample_excursion_path,
    write_event_trace, zero_window_fraction, EventSource, ExcursionPath, ExcursionSource,
    EVENT_TRACE_HEADER,
};
pub use seq::{expected_event_count, Coupling, CouplingStrategy, ProbSeq, ProbSeqSpec, TailRule};
