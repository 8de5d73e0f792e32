//! Exact marginal laws `μ_n` of a kernel chain, a path-enumeration oracle,
//! and exact comparison of two marginal flows.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactprob::io::{csv_reader, csv_writer, parse_parts, parse_state};
use crate::exactprob::ratio::{serde_ratio, Rational};
use crate::exactprob::{tv_distance, Dist, State};
use crate::kernels::Kernel;
use crate::EXACT_HORIZON_CAP;

/// Default atom budget of [`enumerate_paths_oracle`].
pub const ENUMERATION_BUDGET: u64 = 10_000_000;

pub const FLOW_CSV_HEADER: [&str; 4] = ["n", "x", "numerator", "denominator"];

/// The exact marginal laws `mu[0..=horizon]` of one process.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarginalFlow {
    pub kernel: String,
    pub horizon: u32,
    pub mu: Vec<Dist>,
}

impl MarginalFlow {
    pub fn at(&self, n: u32) -> &Dist {
        &self.mu[n as usize]
    }

    /// CSV rows `n,x,numerator,denominator`, `n` then `x` ascending.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv_writer(w);
        out.write_record(FLOW_CSV_HEADER)?;
        for (n, d) in self.mu.iter().enumerate() {
            for (x, p) in d.atoms() {
                out.write_record([
                    n.to_string(),
                    x.to_string(),
                    p.numer().to_string(),
                    p.denom().to_string(),
                ])?;
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Reads the CSV form back; the kernel name is not part of it.
    pub fn read_csv<R: Read>(kernel: &str, r: R) -> Result<Self> {
        let mut rows: BTreeMap<u32, Vec<(State, Rational)>> = BTreeMap::new();
        for row in csv_reader(r).records() {
            let row = row?;
            if row.len() != 4 {
                return Err(Error::Invalid(format!("expected 4 columns, got {}", row.len())));
            }
            let n: u32 = row[0]
                .parse()
                .map_err(|_| Error::Invalid(format!("bad time {:?}", &row[0])))?;
            rows.entry(n)
                .or_default()
                .push((parse_state(&row[1])?, parse_parts(&row[2], &row[3])?));
        }
        let horizon = rows.keys().next_back().copied().unwrap_or(0);
        let mut mu = Vec::with_capacity(horizon as usize + 1);
        for n in 0..=horizon {
            let atoms = rows
                .remove(&n)
                .ok_or_else(|| Error::Invalid(format!("no rows for n = {n}")))?;
            mu.push(Dist::new(atoms)?);
        }
        Ok(MarginalFlow {
            kernel: kernel.to_string(),
            horizon,
            mu,
        })
    }
}

pub(crate) fn check_cap(horizon: u32) -> Result<()> {
    if horizon > EXACT_HORIZON_CAP {
        return Err(Error::HorizonCap {
            horizon: horizon.into(),
            cap: EXACT_HORIZON_CAP.into(),
        });
    }
    Ok(())
}

/// Exact forward recursion `mu[n+1](y) = Σ_x mu[n](x)·law(n,x)(y)`. No
/// pruning: every atom with positive mass is kept.
pub fn forward_marginals(kernel: &dyn Kernel, horizon: u32) -> Result<MarginalFlow> {
    check_cap(horizon)?;
    let mut mu = Vec::with_capacity(horizon as usize + 1);
    mu.push(kernel.initial());
    for n in 0..horizon {
        let mut next: BTreeMap<State, Rational> = BTreeMap::new();
        for (x, px) in mu[n as usize].atoms() {
            for (y, pxy) in kernel.law(n, x).atoms() {
                *next.entry(y).or_insert_with(Rational::zero) += px * pxy;
            }
        }
        mu.push(Dist::from_accumulated(next));
    }
    Ok(MarginalFlow {
        kernel: kernel.name().to_string(),
        horizon,
        mu,
    })
}

/// Supports of `mu[0..=horizon]` without computing masses.
pub fn reachable_states(kernel: &dyn Kernel, horizon: u32) -> Result<Vec<BTreeSet<State>>> {
    check_cap(horizon)?;
    let mut reach = Vec::with_capacity(horizon as usize + 1);
    reach.push(kernel.initial().support().collect::<BTreeSet<_>>());
    for n in 0..horizon {
        let next = reach[n as usize]
            .iter()
            .flat_map(|&x| kernel.law(n, x).support().collect::<Vec<_>>())
            .collect();
        reach.push(next);
    }
    Ok(reach)
}

/// Marginals by summing the probability of every individual path.
pub fn enumerate_paths_oracle(kernel: &dyn Kernel, horizon: u32) -> Result<MarginalFlow> {
    enumerate_paths_with_budget(kernel, horizon, ENUMERATION_BUDGET)
}

pub fn enumerate_paths_with_budget(
    kernel: &dyn Kernel,
    horizon: u32,
    budget: u64,
) -> Result<MarginalFlow> {
    check_cap(horizon)?;
    struct Walker<'a> {
        kernel: &'a dyn Kernel,
        horizon: u32,
        budget: u64,
        visited: u64,
        acc: Vec<BTreeMap<State, Rational>>,
    }

    impl Walker<'_> {
        fn descend(&mut self, n: u32, x: State, weight: Rational) -> Result<()> {
            self.visited += 1;
            if self.visited > self.budget {
                return Err(Error::EnumerationBudget { limit: self.budget });
            }
            if n == self.horizon {
                return Ok(());
            }
            for (y, p) in self.kernel.law(n, x).atoms() {
                let w = &weight * p;
                *self.acc[n as usize + 1]
                    .entry(y)
                    .or_insert_with(Rational::zero) += &w;
                self.descend(n + 1, y, w)?;
            }
            Ok(())
        }
    }

    let mut walker = Walker {
        kernel,
        horizon,
        budget,
        visited: 0,
        acc: vec![BTreeMap::new(); horizon as usize + 1],
    };
    for (x, p) in kernel.initial().atoms() {
        *walker.acc[0].entry(x).or_insert_with(Rational::zero) += p;
        walker.descend(0, x, p.clone())?;
    }
    let mu = walker
        .acc
        .into_iter()
        .map(Dist::new)
        .collect::<Result<Vec<_>>>()?;
    Ok(MarginalFlow {
        kernel: kernel.name().to_string(),
        horizon,
        mu,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomDifference {
    pub x: State,
    #[serde(with = "serde_ratio")]
    pub left: Rational,
    #[serde(with = "serde_ratio")]
    pub right: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum StepVerdict {
    Equal,
    Differ {
        #[serde(with = "serde_ratio")]
        tv: Rational,
        first: AtomDifference,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowComparison {
    pub left: String,
    pub right: String,
    pub horizon: u32,
    pub steps: Vec<StepVerdict>,
}

impl FlowComparison {
    pub fn all_equal(&self) -> bool {
        self.steps.iter().all(|s| *s == StepVerdict::Equal)
    }

    /// First `(n, verdict)` that is not equal, in `n` order.
    pub fn first_difference(&self) -> Option<(u32, &StepVerdict)> {
        self.steps
            .iter()
            .enumerate()
            .find(|(_, s)| **s != StepVerdict::Equal)
            .map(|(n, s)| (n as u32, s))
    }
}

/// Per-time exact comparison; differing steps carry the exact total
/// variation and the smallest `x` where the masses differ.
pub fn compare_flows(a: &MarginalFlow, b: &MarginalFlow) -> Result<FlowComparison> {
    if a.horizon != b.horizon {
        return Err(Error::HorizonMismatch {
            left: a.horizon,
            right: b.horizon,
        });
    }
    let steps = a
        .mu
        .iter()
        .zip(&b.mu)
        .map(|(da, db)| {
            if da == db {
                return StepVerdict::Equal;
            }
            let xs: BTreeSet<State> = da.support().chain(db.support()).collect();
            let x = xs
                .into_iter()
                .find(|&x| da.mass(x) != db.mass(x))
                .expect("unequal distributions differ somewhere");
            StepVerdict::Differ {
                tv: tv_distance(da, db),
                first: AtomDifference {
                    x,
                    left: da.mass(x),
                    right: db.mass(x),
                },
            }
        })
        .collect();
    Ok(FlowComparison {
        left: a.kernel.clone(),
        right: b.kernel.clone(),
        horizon: a.horizon,
        steps,
    })
}

/// `true` when every `mu[n]` sums to one; [`Dist`] guarantees it, so this
/// only guards deserialized flows.
pub fn masses_normalized(flow: &MarginalFlow) -> bool {
    flow.mu
        .iter()
        .all(|d| d.atoms().map(|(_, p)| p).sum::<Rational>().is_one())
}

/// Optional structural properties checked by [`check_structure`] on top of
/// normalization and zero mean.
#[derive(Debug, Clone, Copy, Default)]
pub struct Structure {
    /// `mu[n](x) == mu[n](-x)`.
    pub symmetric: bool,
    /// `mu[n](0) == 0` for `n ≥ 1`.
    pub zero_avoiding: bool,
    /// `support(mu[n]) ⊆ [-bound(n), bound(n)]`.
    pub support_bound: Option<fn(u32) -> u128>,
    /// `tv(mu[h], U(±1)) < tv(mu[h/2], U(±1))` at the horizon `h ≥ 16`.
    pub tv_to_pm1_decreases: bool,
}

impl Structure {
    /// The properties expected of a builtin kernel's flow.
    pub fn for_builtin(name: &str) -> Option<Self> {
        match name {
            "ssrw" => Some(Structure {
                symmetric: true,
                support_bound: Some(|n| u128::from(n)),
                ..Default::default()
            }),
            "alternating" | "holding" => Some(Structure {
                symmetric: true,
                zero_avoiding: true,
                support_bound: Some(|n| (1u128 << n) - 1),
                tv_to_pm1_decreases: true,
            }),
            _ => None,
        }
    }
}

/// A failed structural property at time `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureViolation {
    pub check: String,
    pub n: u32,
}

/// Checks normalization and exact zero mean at every `n`, plus whatever
/// `structure` asks for.
pub fn check_structure(flow: &MarginalFlow, structure: &Structure) -> Vec<StructureViolation> {
    let mut out = Vec::new();
    let mut fail = |check: &str, n: u32| {
        out.push(StructureViolation {
            check: check.into(),
            n,
        })
    };
    for (n, mu) in (0u32..).zip(&flow.mu) {
        if !mu.atoms().map(|(_, p)| p).sum::<Rational>().is_one() {
            fail("normalized", n);
        }
        if !crate::exactprob::dist_mean(mu).is_zero() {
            fail("mean-zero", n);
        }
        if structure.symmetric && mu.reflect() != *mu {
            fail("symmetric", n);
        }
        if structure.zero_avoiding && n >= 1 && !mu.mass(0).is_zero() {
            fail("zero-avoiding", n);
        }
        if let Some(bound) = structure.support_bound {
            if mu.support().any(|x| x.unsigned_abs() > bound(n)) {
                fail("support-bound", n);
            }
        }
    }
    let h = flow.horizon;
    if structure.tv_to_pm1_decreases && h >= 16 {
        let u = Dist::uniform_pm1();
        if tv_distance(flow.at(h), &u) >= tv_distance(flow.at(h / 2), &u) {
            fail("tv-to-uniform-pm1", h);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactprob::dist_mean;
    use crate::exactprob::ratio::{int, ratio};
    use crate::kernels::{alternating_kernel, holding_kernel, ssrw_kernel};

    fn d(atoms: &[(State, i64, i64)]) -> Dist {
        Dist::new(atoms.iter().map(|&(x, a, b)| (x, ratio(a, b)))).unwrap()
    }

    fn four_point() -> Dist {
        d(&[(-3, 1, 4), (-1, 1, 4), (1, 1, 4), (3, 1, 4)])
    }

    #[test]
    fn two_step_marginals() {
        assert_eq!(*forward_marginals(&alternating_kernel(), 2).unwrap().at(2), four_point());
        assert_eq!(*forward_marginals(&holding_kernel(), 2).unwrap().at(2), four_point());
        assert_eq!(
            *forward_marginals(&ssrw_kernel(), 2).unwrap().at(2),
            d(&[(-2, 1, 4), (0, 1, 2), (2, 1, 4)])
        );
    }

    #[test]
    fn oracle_matches_binomial() {
        let f = enumerate_paths_oracle(&ssrw_kernel(), 4).unwrap();
        assert_eq!(
            *f.at(4),
            d(&[(-4, 1, 16), (-2, 4, 16), (0, 6, 16), (2, 4, 16), (4, 1, 16)])
        );
    }

    #[test]
    fn oracle_equivalence_small() {
        for k in [&alternating_kernel() as &dyn Kernel, &holding_kernel(), &ssrw_kernel()] {
            assert_eq!(
                forward_marginals(k, 8).unwrap(),
                enumerate_paths_oracle(k, 8).unwrap(),
                "{}",
                k.name()
            );
        }
    }

    #[test]
    fn oracle_budget() {
        assert!(matches!(
            enumerate_paths_with_budget(&ssrw_kernel(), 12, 100),
            Err(Error::EnumerationBudget { limit: 100 })
        ));
    }

    #[test]
    fn comparison_reports_first_atom() {
        let alt = forward_marginals(&alternating_kernel(), 2).unwrap();
        let walk = forward_marginals(&ssrw_kernel(), 2).unwrap();
        let cmp = compare_flows(&alt, &walk).unwrap();
        assert!(!cmp.all_equal());
        let (n, v) = cmp.first_difference().unwrap();
        assert_eq!(n, 2);
        match v {
            StepVerdict::Differ { tv, first } => {
                assert_eq!(first.x, -3);
                assert_eq!(first.left, ratio(1, 4));
                assert_eq!(first.right, int(0));
                // alt {±1,±3: 1/4} vs walk {±2: 1/4, 0: 1/2} share no atoms.
                assert_eq!(*tv, int(1));
            }
            StepVerdict::Equal => unreachable!(),
        }
        assert!(compare_flows(&alt, &alt).unwrap().all_equal());
        let short = forward_marginals(&ssrw_kernel(), 1).unwrap();
        assert!(matches!(compare_flows(&alt, &short), Err(Error::HorizonMismatch { .. })));
    }

    #[test]
    fn structural_properties_of_the_two_chains() {
        for k in [&alternating_kernel() as &dyn Kernel, &holding_kernel()] {
            let flow = forward_marginals(k, 14).unwrap();
            for (n, mu) in flow.mu.iter().enumerate() {
                if n >= 1 {
                    assert_eq!(mu.mass(0), int(0), "zero avoided at n = {n}");
                    let bound = (1i128 << n) - 1;
                    assert!(mu.support().all(|x| x.abs() <= bound));
                }
                assert_eq!(*mu, mu.reflect());
                assert_eq!(dist_mean(mu), int(0));
            }
        }
    }

    #[test]
    fn structure_checks() {
        for name in ["ssrw", "alternating", "holding"] {
            let k = crate::kernels::builtin(name).unwrap();
            let flow = forward_marginals(k.as_ref(), 18).unwrap();
            let s = Structure::for_builtin(name).unwrap();
            assert!(check_structure(&flow, &s).is_empty(), "{name}");
        }
        let walk = forward_marginals(&ssrw_kernel(), 4).unwrap();
        let strict = Structure::for_builtin("holding").unwrap();
        let v = check_structure(&walk, &strict);
        assert_eq!(v[0], StructureViolation { check: "zero-avoiding".into(), n: 2 });
        assert!(Structure::for_builtin("custom").is_none());
    }

    #[test]
    fn csv_round_trip() {
        let flow = forward_marginals(&holding_kernel(), 5).unwrap();
        let mut buf = Vec::new();
        flow.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("n,x,numerator,denominator\n0,0,1,1\n1,-1,1,2\n1,1,1,2\n"));
        let back = MarginalFlow::read_csv("holding", buf.as_slice()).unwrap();
        assert_eq!(back, flow);
        assert!(masses_normalized(&back));
    }

    #[test]
    fn reachability_matches_supports() {
        let flow = forward_marginals(&alternating_kernel(), 10).unwrap();
        let reach = reachable_states(&alternating_kernel(), 10).unwrap();
        for (mu, r) in flow.mu.iter().zip(&reach) {
            assert_eq!(mu.support().collect::<BTreeSet<_>>(), *r);
        }
    }
}
