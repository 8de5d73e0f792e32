use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::ratio::{format_ratio, Rational};
use crate::error::{Error, Result};

/// A state of an integer-valued chain.
///
/// The chains jump to `±(2^{n+1} - 1)`, so states are 128 bits wide; exact
/// computations additionally cap the horizon.
pub type State = i128;

/// Finite-support probability distribution on the integers with exact masses.
///
/// Every stored mass is strictly positive and the masses sum to exactly one,
/// so two distributions are equal iff their atom maps are equal.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dist {
    atoms: BTreeMap<State, Rational>,
}

impl Dist {
    /// Builds a distribution, merging repeated states and dropping zero
    /// masses. Fails on negative masses or a total different from one.
    pub fn new<I>(atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (State, Rational)>,
    {
        let mut map: BTreeMap<State, Rational> = BTreeMap::new();
        for (x, p) in atoms {
            if p.is_negative() {
                return Err(Error::InvalidDist(format!(
                    "negative mass {} at {x}",
                    format_ratio(&p)
                )));
            }
            *map.entry(x).or_insert_with(Rational::zero) += p;
        }
        map.retain(|_, p| !p.is_zero());
        let total: Rational = map.values().sum();
        if !total.is_one() {
            return Err(Error::InvalidDist(format!(
                "masses sum to {}, not 1",
                format_ratio(&total)
            )));
        }
        Ok(Dist { atoms: map })
    }

    /// Wraps an accumulated mass map whose total is known to be one.
    pub(crate) fn from_accumulated(mut atoms: BTreeMap<State, Rational>) -> Self {
        atoms.retain(|_, p| !p.is_zero());
        debug_assert!(atoms.values().all(|p| p.is_positive()));
        debug_assert!(atoms.values().sum::<Rational>().is_one());
        Dist { atoms }
    }

    pub fn point(x: State) -> Self {
        Dist {
            atoms: BTreeMap::from([(x, Rational::one())]),
        }
    }

    /// The uniform law on `{-1, +1}`.
    pub fn uniform_pm1() -> Self {
        let half = Rational::new(BigInt::one(), BigInt::from(2));
        Dist {
            atoms: BTreeMap::from([(-1, half.clone()), (1, half)]),
        }
    }

    pub fn mass(&self, x: State) -> Rational {
        self.atoms.get(&x).cloned().unwrap_or_else(Rational::zero)
    }

    /// Total mass on a set of states.
    pub fn mass_on(&self, xs: &[State]) -> Rational {
        xs.iter().filter_map(|x| self.atoms.get(x)).sum()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (State, &Rational)> + '_ {
        self.atoms.iter().map(|(&x, p)| (x, p))
    }

    pub fn support(&self) -> impl Iterator<Item = State> + '_ {
        self.atoms.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn min_state(&self) -> Option<State> {
        self.atoms.keys().next().copied()
    }

    pub fn max_state(&self) -> Option<State> {
        self.atoms.keys().next_back().copied()
    }

    /// Image under `x -> -x`.
    pub fn reflect(&self) -> Self {
        Dist {
            atoms: self.atoms.iter().map(|(&x, p)| (-x, p.clone())).collect(),
        }
    }

    pub(crate) fn as_map(&self) -> &BTreeMap<State, Rational> {
        &self.atoms
    }
}

impl fmt::Debug for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.atoms.iter().map(|(x, p)| (x, format_ratio(p))))
            .finish()
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (x, p)) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}: {}", format_ratio(p))?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactprob::ratio::{int, ratio};

    #[test]
    fn merges_and_drops_zeros() {
        let d = Dist::new([(1, ratio(1, 4)), (1, ratio(1, 4)), (2, int(0)), (3, ratio(1, 2))]).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.mass(1), ratio(1, 2));
        assert_eq!(d.mass(2), int(0));
        assert_eq!(d.support().collect::<Vec<_>>(), vec![1, 3]);
    }

    #[test]
    fn rejects_bad_totals_and_negatives() {
        assert!(Dist::new([(0, ratio(1, 2))]).is_err());
        assert!(Dist::new([(0, ratio(3, 2)), (1, ratio(-1, 2))]).is_err());
        assert!(Dist::new(Vec::new()).is_err());
    }

    #[test]
    fn reflection() {
        let d = Dist::new([(1, ratio(3, 4)), (7, ratio(1, 7)), (-7, ratio(3, 28))]).unwrap();
        let r = d.reflect();
        assert_eq!(r.mass(-1), ratio(3, 4));
        assert_eq!(r.mass(7), ratio(3, 28));
        assert_eq!(r.reflect(), d);
    }
}
