use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::seq::ProbSeq;
use crate::error::Result;
use crate::exactprob::ratio::{int, pow2_inv};
use crate::exactprob::{Dist, Rational, State};
use crate::marginals::{check_cap, MarginalFlow};

/// Joint law of the walk position and its number of returns to zero.
///
/// Stored as path counts: `q_n(x, j) = count_n(x, j) / 2^n`. Counts stay
/// below `2^60` under the exact horizon cap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointZeroCount {
    horizon: u32,
    counts: Vec<BTreeMap<(State, u32), u64>>,
}

impl JointZeroCount {
    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    /// `q_n(x, j) = P(S_n = x, exactly j returns to 0 in steps 1..n)`.
    pub fn q(&self, n: u32, x: State, j: u32) -> Rational {
        let c = self.count(n, x, j);
        if c == 0 {
            return Rational::zero();
        }
        int(c) * pow2_inv(n)
    }

    pub fn count(&self, n: u32, x: State, j: u32) -> u64 {
        self.counts
            .get(n as usize)
            .and_then(|t| t.get(&(x, j)))
            .copied()
            .unwrap_or(0)
    }

    /// Nonzero entries `((x, j), q)` at time `n`.
    pub fn entries(&self, n: u32) -> impl Iterator<Item = ((State, u32), Rational)> + '_ {
        self.counts[n as usize]
            .iter()
            .map(move |(&key, &c)| (key, int(c) * pow2_inv(n)))
    }

    /// `Σ_j q_n(x, j)`, the plain walk marginal.
    pub fn position_law(&self, n: u32) -> Dist {
        let mut acc: BTreeMap<State, Rational> = BTreeMap::new();
        for ((x, _), q) in self.entries(n) {
            *acc.entry(x).or_insert_with(Rational::zero) += q;
        }
        Dist::new(acc).expect("rows sum to one")
    }
}

/// Forward recursion over `(x, j)`: a step onto 0 increments `j`.
pub fn joint_zero_count(horizon: u32) -> Result<JointZeroCount> {
    check_cap(horizon)?;
    let mut counts = Vec::with_capacity(horizon as usize + 1);
    counts.push(BTreeMap::from([((0, 0), 1u64)]));
    for n in 0..horizon as usize {
        let mut next = BTreeMap::new();
        for (&(x, j), &c) in &counts[n] {
            for y in [x - 1, x + 1] {
                let jy = if y == 0 { j + 1 } else { j };
                *next.entry((y, jy)).or_insert(0) += c;
            }
        }
        counts.push(next);
    }
    Ok(JointZeroCount { horizon, counts })
}

/// Exact marginals of `M_n`: `mu[n](x) = Σ_j q_n(x, j)·p_{j+1}` for `x ≠ 0`,
/// with the remaining mass on 0.
pub fn excursion_marginal(seq: &ProbSeq, horizon: u32) -> Result<MarginalFlow> {
    let table = joint_zero_count(horizon)?;
    let max_j = horizon / 2 + 1;
    let p: Vec<Rational> = (1..=max_j as u64 + 1).map(|k| seq.p(k)).collect();
    let mut mu = Vec::with_capacity(horizon as usize + 1);
    for n in 0..=horizon {
        let mut acc: BTreeMap<State, Rational> = BTreeMap::new();
        let mut off_zero = Rational::zero();
        for ((x, j), q) in table.entries(n) {
            if x == 0 {
                continue;
            }
            let m = q * &p[j as usize];
            off_zero += &m;
            *acc.entry(x).or_insert_with(Rational::zero) += m;
        }
        acc.insert(0, Rational::one() - off_zero);
        mu.push(Dist::new(acc)?);
    }
    Ok(MarginalFlow {
        kernel: "excursion".into(),
        horizon,
        mu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactprob::dist_mean;
    use crate::exactprob::ratio::ratio;
    use crate::kernels::ssrw_kernel;
    use crate::marginals::forward_marginals;
    use proptest::prelude::*;

    #[test]
    fn small_table() {
        let t = joint_zero_count(2).unwrap();
        assert_eq!(t.q(1, 1, 0), ratio(1, 2));
        assert_eq!(t.q(2, 0, 1), ratio(1, 2));
        assert_eq!(t.q(2, 2, 0), ratio(1, 4));
        assert_eq!(t.q(2, 0, 0), Rational::zero());
    }

    #[test]
    fn table_shape() {
        let t = joint_zero_count(24).unwrap();
        let walk = forward_marginals(&ssrw_kernel(), 24).unwrap();
        for n in 0..=24 {
            let total: Rational = t.entries(n).map(|(_, q)| q).sum();
            assert_eq!(total, Rational::one());
            for ((x, j), _) in t.entries(n) {
                assert!(x.unsigned_abs() <= n as u128);
                assert!(j <= n / 2);
                assert_eq!((x - n as State).rem_euclid(2), 0);
            }
            assert_eq!(&t.position_law(n), walk.at(n));
        }
    }

    #[test]
    fn harmonic_small_times() {
        let flow = excursion_marginal(&ProbSeq::harmonic(), 4).unwrap();
        let mu2 = Dist::new([(-2, ratio(1, 4)), (0, ratio(1, 2)), (2, ratio(1, 4))]).unwrap();
        assert_eq!(flow.at(2), &mu2);
        let mu4 = Dist::new([
            (-4, ratio(1, 16)),
            (-2, ratio(3, 16)),
            (0, ratio(1, 2)),
            (2, ratio(3, 16)),
            (4, ratio(1, 16)),
        ])
        .unwrap();
        assert_eq!(flow.at(4), &mu4);
    }

    #[test]
    fn harmonic_n10_atom() {
        let flow = excursion_marginal(&ProbSeq::harmonic(), 10).unwrap();
        assert_eq!(flow.at(10).mass(2), ratio(191, 1920));
        assert_eq!(flow.at(10).len(), 11);
    }

    #[test]
    fn all_kept_is_the_walk() {
        let seq = ProbSeq::constant(Rational::one()).unwrap();
        let flow = excursion_marginal(&seq, 20).unwrap();
        let walk = forward_marginals(&ssrw_kernel(), 20).unwrap();
        assert_eq!(flow.mu, walk.mu);
    }

    #[test]
    fn cap() {
        assert!(joint_zero_count(61).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn marginals_are_centred(num in 1i64..8, den in 8i64..16, head in 0usize..3) {
            let seq = ProbSeq::new(
                vec![Rational::one(); head],
                crate::excursion::TailRule::Constant(ratio(num, den)),
            ).unwrap();
            let flow = excursion_marginal(&seq, 16).unwrap();
            for d in &flow.mu {
                prop_assert_eq!(dist_mean(d), Rational::zero());
                prop_assert_eq!(d.reflect(), d.clone());
            }
        }
    }
}
