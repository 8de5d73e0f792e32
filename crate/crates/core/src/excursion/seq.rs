use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactprob::ratio::{format_ratio, int, is_probability, parse_ratio, to_f64};
use crate::exactprob::Rational;

/// How `p_k` continues after the explicit head of a [`ProbSeq`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TailRule {
    Constant(Rational),
    /// `p_k = 1 / (slope·k + intercept)`.
    ReciprocalLinear { slope: Rational, intercept: Rational },
}

/// The probabilities `p_k = P(A_k)`, `k = 1, 2, ...`: an explicit head
/// followed by a tail rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbSeq {
    head: Vec<Rational>,
    tail: TailRule,
}

impl ProbSeq {
    pub fn new(head: Vec<Rational>, tail: TailRule) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidProbSeq(m));
        for (i, p) in head.iter().enumerate() {
            if !is_probability(p) {
                return bad(format!("p_{} = {} is outside (0, 1]", i + 1, format_ratio(p)));
            }
        }
        let first_tail = head.len() as u64 + 1;
        match &tail {
            TailRule::Constant(c) if !is_probability(c) => {
                return bad(format!("constant tail {} is outside (0, 1]", format_ratio(c)));
            }
            TailRule::ReciprocalLinear { slope, intercept } => {
                if *slope < Rational::zero() {
                    return bad("reciprocal tail needs a nonnegative slope".into());
                }
                if slope * int(first_tail) + intercept < Rational::one() {
                    return bad(format!("reciprocal tail gives p_{first_tail} > 1"));
                }
            }
            _ => {}
        }
        Ok(ProbSeq { head, tail })
    }

    /// `p_k = 1/k`.
    pub fn harmonic() -> Self {
        ProbSeq {
            head: Vec::new(),
            tail: TailRule::ReciprocalLinear {
                slope: Rational::one(),
                intercept: Rational::zero(),
            },
        }
    }

    pub fn constant(p: Rational) -> Result<Self> {
        Self::new(Vec::new(), TailRule::Constant(p))
    }

    pub fn head(&self) -> &[Rational] {
        &self.head
    }

    pub fn tail(&self) -> &TailRule {
        &self.tail
    }

    /// `p_k` for `k ≥ 1`.
    pub fn p(&self, k: u64) -> Rational {
        assert!(k >= 1, "events are indexed from 1");
        if let Some(p) = self.head.get(k as usize - 1) {
            return p.clone();
        }
        match &self.tail {
            TailRule::Constant(c) => c.clone(),
            TailRule::ReciprocalLinear { slope, intercept } => {
                Rational::one() / (slope * int(k) + intercept)
            }
        }
    }

    pub fn p_f64(&self, k: u64) -> f64 {
        to_f64(&self.p(k))
    }

    pub fn is_nonincreasing(&self) -> bool {
        let head_ok = self.head.windows(2).all(|w| w[0] >= w[1]);
        let joint_ok = match self.head.last() {
            Some(last) => *last >= self.p(self.head.len() as u64 + 1),
            None => true,
        };
        // Both tail rules are nonincreasing once validated.
        head_ok && joint_ok
    }
}

/// On-disk form of a [`ProbSeq`]:
///
/// ```toml
/// head = ["1/1", "1/2", "1/3"]
/// tail = { rule = "reciprocal", slope = "1/1", intercept = "0/1" }
/// ```
///
/// or `tail = { rule = "constant", value = "1/8" }`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbSeqSpec {
    #[serde(default)]
    pub head: Vec<String>,
    pub tail: TailSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase", deny_unknown_fields)]
pub enum TailSpec {
    Constant { value: String },
    Reciprocal { slope: String, intercept: String },
}

impl TryFrom<ProbSeqSpec> for ProbSeq {
    type Error = Error;

    fn try_from(spec: ProbSeqSpec) -> Result<Self> {
        let head = spec
            .head
            .iter()
            .map(|s| parse_ratio(s))
            .collect::<Result<Vec<_>>>()?;
        let tail = match spec.tail {
            TailSpec::Constant { value } => TailRule::Constant(parse_ratio(&value)?),
            TailSpec::Reciprocal { slope, intercept } => TailRule::ReciprocalLinear {
                slope: parse_ratio(&slope)?,
                intercept: parse_ratio(&intercept)?,
            },
        };
        ProbSeq::new(head, tail)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coupling {
    /// Independent `Bernoulli(p_k)` events.
    Independent,
    /// `A_k = {U < p_k}` for a single uniform `U`.
    Nested,
}

impl fmt::Display for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Coupling::Independent => "independent",
            Coupling::Nested => "nested",
        })
    }
}

impl FromStr for Coupling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "independent" => Ok(Coupling::Independent),
            "nested" => Ok(Coupling::Nested),
            _ => Err(Error::Invalid(format!(
                "unknown coupling {s:?} (expected independent or nested)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingStrategy {
    pub coupling: Coupling,
    pub seq: ProbSeq,
}

impl CouplingStrategy {
    pub fn new(coupling: Coupling, seq: ProbSeq) -> Result<Self> {
        if coupling == Coupling::Nested && !seq.is_nonincreasing() {
            return Err(Error::InvalidProbSeq(
                "nested events need a nonincreasing sequence".into(),
            ));
        }
        Ok(CouplingStrategy { coupling, seq })
    }

    pub fn independent(seq: ProbSeq) -> Self {
        CouplingStrategy {
            coupling: Coupling::Independent,
            seq,
        }
    }

    pub fn nested(seq: ProbSeq) -> Result<Self> {
        Self::new(Coupling::Nested, seq)
    }
}

/// `E N_K = Σ_{k ≤ K} p_k`, whatever the coupling.
pub fn expected_event_count(seq: &ProbSeq, k_max: u64) -> Rational {
    (1..=k_max).map(|k| seq.p(k)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactprob::ratio::ratio;

    #[test]
    fn harmonic_values() {
        let h = ProbSeq::harmonic();
        assert_eq!(h.p(1), int(1));
        assert_eq!(h.p(4), ratio(1, 4));
        assert!(h.is_nonincreasing());
    }

    #[test]
    fn expected_counts() {
        let h = ProbSeq::harmonic();
        assert_eq!(expected_event_count(&h, 4), ratio(25, 12));
        assert_eq!(expected_event_count(&h, 1), h.p(1));
        assert_eq!(expected_event_count(&h, 2), ratio(3, 2));
        assert_eq!(expected_event_count(&h, 8), ratio(761, 280));
    }

    #[test]
    fn validation() {
        assert!(ProbSeq::constant(int(0)).is_err());
        assert!(ProbSeq::constant(ratio(3, 2)).is_err());
        assert!(ProbSeq::new(vec![ratio(1, 2)], TailRule::ReciprocalLinear { slope: int(1), intercept: int(-2) }).is_err());
        let rising = ProbSeq::new(vec![ratio(1, 4), ratio(1, 2)], TailRule::Constant(ratio(1, 8))).unwrap();
        assert!(!rising.is_nonincreasing());
        assert!(CouplingStrategy::nested(rising.clone()).is_err());
        assert!(CouplingStrategy::new(Coupling::Independent, rising).is_ok());
    }

    #[test]
    fn spec_file_form() {
        let spec = ProbSeqSpec {
            head: vec!["1/1".into(), "1/2".into()],
            tail: TailSpec::Reciprocal { slope: "1/1".into(), intercept: "0/1".into() },
        };
        let seq = ProbSeq::try_from(spec).unwrap();
        for k in 1..20 {
            assert_eq!(seq.p(k), ProbSeq::harmonic().p(k));
        }
        let json = r#"{"head": [], "tail": {"rule": "constant", "value": "1/3"}}"#;
        let spec: ProbSeqSpec = serde_json::from_str(json).unwrap();
        assert_eq!(ProbSeq::try_from(spec).unwrap().p(7), ratio(1, 3));
    }

    #[test]
    fn coupling_names() {
        assert_eq!("nested".parse::<Coupling>().unwrap(), Coupling::Nested);
        assert_eq!(Coupling::Independent.to_string(), "independent");
        assert!("both".parse::<Coupling>().is_err());
    }
}
