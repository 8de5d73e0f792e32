use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::crossing::{quantile_from, PassageScan};
use crate::error::{Error, Result};
use crate::exactprob::ratio::{format_ratio, int, parse_ratio, serde_opt_ratio, serde_ratio};
use crate::exactprob::Rational;

/// Largest crossing length the schedule builder will scan to.
pub const CROSSING_BUDGET_CAP: u64 = 1 << 18;

/// Largest schedule time `t_k`.
pub const SCHEDULE_TIME_CAP: u64 = 1 << 40;

/// The sequence `ε_1 > ε_2 > ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EpsRule {
    /// `ε_k = r^k`.
    Geometric(Rational),
    /// `ε_k = r`; never valid for a schedule, kept so it can be rejected
    /// with a clear message.
    Constant(Rational),
    /// Explicit `ε_1, ε_2, ...`.
    List(Vec<Rational>),
}

impl Default for EpsRule {
    fn default() -> Self {
        EpsRule::Geometric(Rational::new(1.into(), 2.into()))
    }
}

impl EpsRule {
    /// `ε_1..=ε_K`, checked to lie in `(0, 1]` and strictly decrease.
    pub fn values(&self, k_max: usize) -> Result<Vec<Rational>> {
        let bad = |m: String| Err(Error::InvalidEpsRule(m));
        let eps: Vec<Rational> = match self {
            EpsRule::Geometric(r) => {
                if *r <= Rational::zero() || *r >= Rational::one() {
                    return bad(format!("geometric ratio {} is outside (0, 1)", format_ratio(r)));
                }
                let mut acc = Rational::one();
                (0..k_max)
                    .map(|_| {
                        acc = &acc * r;
                        acc.clone()
                    })
                    .collect()
            }
            EpsRule::Constant(r) => {
                if k_max > 1 {
                    return bad(format!("constant eps {} does not decrease", format_ratio(r)));
                }
                vec![r.clone()]
            }
            EpsRule::List(v) => {
                if v.len() < k_max {
                    return bad(format!("{} eps values given, {k_max} needed", v.len()));
                }
                v[..k_max].to_vec()
            }
        };
        for (i, e) in eps.iter().enumerate() {
            if *e <= Rational::zero() || *e > Rational::one() {
                return bad(format!("eps_{} = {} is outside (0, 1]", i + 1, format_ratio(e)));
            }
        }
        if let Some(i) = eps.windows(2).position(|w| w[1] >= w[0]) {
            return bad(format!("eps_{} does not decrease strictly", i + 2));
        }
        Ok(eps)
    }
}

impl fmt::Display for EpsRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpsRule::Geometric(r) => write!(f, "geometric:{}", format_ratio(r)),
            EpsRule::Constant(r) => write!(f, "constant:{}", format_ratio(r)),
            EpsRule::List(v) => {
                let items: Vec<String> = v.iter().map(format_ratio).collect();
                write!(f, "list:{}", items.join(","))
            }
        }
    }
}

/// `geometric:<r>`, `constant:<r>` or `list:<e1>,<e2>,...`.
impl FromStr for EpsRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidEpsRule(format!("{s:?} has no ':'")))?;
        match kind {
            "geometric" => Ok(EpsRule::Geometric(parse_ratio(arg)?)),
            "constant" => Ok(EpsRule::Constant(parse_ratio(arg)?)),
            "list" => Ok(EpsRule::List(
                arg.split(',').map(|e| parse_ratio(e.trim())).collect::<Result<_>>()?,
            )),
            _ => Err(Error::InvalidEpsRule(format!("unknown rule {kind:?}"))),
        }
    }
}

/// Row `k` of a schedule. `L*_k` and the certificate belong to the step from
/// `t_k` to `t_{k+1}` and are absent on the last row and on hand-made
/// schedules.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub k: u32,
    #[serde(with = "serde_ratio")]
    pub eps_k: Rational,
    #[serde(rename = "L*_k")]
    pub l_star: Option<u64>,
    pub t_k: u64,
    /// `L*_k / (t_{k+1}/2 - L*_k)`.
    #[serde(with = "serde_opt_ratio")]
    pub certificate_lhs: Option<Rational>,
    /// `ε_{k+1} / 2`.
    #[serde(with = "serde_opt_ratio")]
    pub certificate_rhs: Option<Rational>,
}

/// Times `t_1 = 1 < t_2 < ...` at which the delayed walk is forced to
/// alternate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Schedule {
    entries: Vec<ScheduleEntry>,
}

impl Schedule {
    /// A schedule with given times and no certificates, e.g. a deliberately
    /// miscalibrated one.
    pub fn manual(eps: Vec<Rational>, times: Vec<u64>) -> Result<Self> {
        if eps.len() != times.len() {
            return Err(Error::Invalid("eps and times differ in length".into()));
        }
        let entries = (1..)
            .zip(eps.into_iter().zip(times))
            .map(|(k, (eps_k, t_k))| ScheduleEntry {
                k,
                eps_k,
                l_star: None,
                t_k,
                certificate_lhs: None,
                certificate_rhs: None,
            })
            .collect();
        let s = Schedule { entries };
        s.validate()?;
        Ok(s)
    }

    /// Checks the time constraints and every recorded certificate.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Invalid(m));
        let Some(first) = self.entries.first() else {
            return bad("empty schedule".into());
        };
        if first.t_k != 1 {
            return bad(format!("t_1 = {}, expected 1", first.t_k));
        }
        for (i, e) in self.entries.iter().enumerate() {
            if e.k as usize != i + 1 {
                return bad(format!("row {} is labelled k = {}", i + 1, e.k));
            }
        }
        for w in self.entries.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if b.t_k % 2 == 1 || b.t_k / 2 <= a.t_k {
                return bad(format!("t_{} = {} breaks t/2 > t_{} = {}", b.k, b.t_k, a.k, a.t_k));
            }
            if b.eps_k >= a.eps_k {
                return bad(format!("eps_{} does not decrease", b.k));
            }
            if let Some(l) = a.l_star {
                let half = b.t_k / 2;
                let lhs = int(l) / int(half - l.min(half));
                let rhs = &b.eps_k / int(2);
                if l >= half || lhs > rhs {
                    return bad(format!("certificate fails at k = {}", a.k));
                }
                if a.certificate_lhs.as_ref() != Some(&lhs) || a.certificate_rhs.as_ref() != Some(&rhs) {
                    return bad(format!("recorded certificate at k = {} is wrong", a.k));
                }
            }
        }
        Ok(())
    }

    pub fn entries(&self) -> &[ScheduleEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn times(&self) -> Vec<u64> {
        self.entries.iter().map(|e| e.t_k).collect()
    }

    pub fn eps(&self) -> Vec<Rational> {
        self.entries.iter().map(|e| e.eps_k.clone()).collect()
    }

    pub fn last_time(&self) -> u64 {
        self.entries.last().map_or(1, |e| e.t_k)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Schedule = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }
}

/// Builds `t_1..=t_K`. For `k < K`, `L*_k` is the `ε_{k+1}/2` crossing
/// quantile and `t_{k+1} = 2h` for the least `h > t_k` with
/// `L*_k / (h - L*_k) ≤ ε_{k+1}/2`.
pub fn build_schedule(k_max: usize, rule: &EpsRule) -> Result<Schedule> {
    if k_max == 0 {
        return Err(Error::Invalid("K must be at least 1".into()));
    }
    let eps = rule.values(k_max)?;
    let mut entries = vec![ScheduleEntry {
        k: 1,
        eps_k: eps[0].clone(),
        l_star: None,
        t_k: 1,
        certificate_lhs: None,
        certificate_rhs: None,
    }];
    let mut scan = PassageScan::new();
    for k in 1..k_max {
        let half_eps = &eps[k] / int(2);
        let cap = |reason: String| Error::ScheduleCap {
            fitted: k,
            requested: k_max,
            reason,
        };
        let l_star = match quantile_from(&mut scan, &half_eps, CROSSING_BUDGET_CAP) {
            Ok(l) => l,
            Err(Error::BudgetInsufficient { budget, .. }) => {
                return Err(cap(format!("crossing quantile exceeds the budget {budget}")))
            }
            Err(e) => return Err(e),
        };
        // h - L* ≥ L* / (ε/2)
        let l = BigInt::from(l_star);
        let min_h = &l + (&l * half_eps.denom()).div_ceil(half_eps.numer());
        let prev = entries[k - 1].t_k;
        let h = min_h.max(BigInt::from(prev + 1));
        let t_next = (h * 2u32)
            .to_u64()
            .filter(|&t| t <= SCHEDULE_TIME_CAP)
            .ok_or_else(|| cap(format!("t_{} exceeds the time cap {SCHEDULE_TIME_CAP}", k + 1)))?;
        let half = t_next / 2;
        let lhs = int(l_star) / int(half - l_star);
        debug_assert!(lhs <= half_eps);
        let row = &mut entries[k - 1];
        row.l_star = Some(l_star);
        row.certificate_lhs = Some(lhs);
        row.certificate_rhs = Some(half_eps.clone());
        entries.push(ScheduleEntry {
            k: k as u32 + 1,
            eps_k: eps[k].clone(),
            l_star: None,
            t_k: t_next,
            certificate_lhs: None,
            certificate_rhs: None,
        });
    }
    let s = Schedule { entries };
    s.validate()?;
    Ok(s)
}
