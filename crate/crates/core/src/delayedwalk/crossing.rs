use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exactprob::ratio::format_ratio;
use crate::exactprob::Rational;

/// Forward scan over `j = 1, 2, ...` of the crossing law
/// `P(L = 2j) = C_j / 4^j` (`C_j` Catalan) and the survivor counts
/// `R_j = 4^j · P(L > 2j)`, both as exact integers.
#[derive(Debug, Clone)]
pub struct PassageScan {
    j: u64,
    catalan: BigUint,
    survivors: BigUint,
}

impl Default for PassageScan {
    fn default() -> Self {
        PassageScan {
            j: 0,
            catalan: BigUint::one(),
            survivors: BigUint::one(),
        }
    }
}

impl PassageScan {
    pub fn new() -> Self {
        Self::default()
    }

    /// Advances to the next even length `2j`.
    pub fn advance(&mut self) {
        self.j += 1;
        let j = self.j;
        self.catalan = &self.catalan * (2 * (2 * j - 1)) / (j + 1);
        self.survivors = (&self.survivors << 2u32) - &self.catalan;
    }

    /// Current crossing length `m = 2j`.
    pub fn length(&self) -> u64 {
        2 * self.j
    }

    /// `P(L = m)` at the current length.
    pub fn mass(&self) -> Rational {
        self.scaled(&self.catalan)
    }

    /// `P(L > m)` at the current length.
    pub fn tail(&self) -> Rational {
        self.scaled(&self.survivors)
    }

    /// Whether `P(L > m) ≤ eps`, decided in integers.
    pub fn tail_at_most(&self, eps: &Rational) -> bool {
        let lhs = BigInt::from(self.survivors.clone()) * eps.denom();
        let rhs = eps.numer() << (2 * self.j);
        lhs <= rhs
    }

    fn scaled(&self, count: &BigUint) -> Rational {
        Rational::new(BigInt::from(count.clone()), BigInt::one() << (2 * self.j))
    }
}

/// Law of the number of walk steps `L` needed to cross from `+1` to `-1`,
/// known exactly up to a step budget. `L` is even and at least 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossingLaw {
    budget: u64,
    tail: Rational,
}

/// Crossing law truncated at `budget` steps (rounded down to even).
pub fn crossing_law(budget: u64) -> Result<CrossingLaw> {
    if budget < 2 {
        return Err(Error::Invalid(format!("crossing budget {budget} is below 2")));
    }
    let budget = budget & !1;
    let mut scan = PassageScan::new();
    while scan.length() < budget {
        scan.advance();
    }
    Ok(CrossingLaw {
        budget,
        tail: scan.tail(),
    })
}

impl CrossingLaw {
    pub fn budget(&self) -> u64 {
        self.budget
    }

    /// `P(L > budget)`, the mass outside the table.
    pub fn tail(&self) -> &Rational {
        &self.tail
    }

    fn scan_to(&self, m: u64) -> Result<PassageScan> {
        if m > self.budget {
            return Err(Error::Invalid(format!(
                "length {m} is past the budget {}",
                self.budget
            )));
        }
        let mut scan = PassageScan::new();
        while scan.length() + 2 <= m {
            scan.advance();
        }
        Ok(scan)
    }

    /// `P(L = m)` for `m ≤ budget`.
    pub fn mass(&self, m: u64) -> Result<Rational> {
        let scan = self.scan_to(m)?;
        if m == 0 || m % 2 == 1 {
            return Ok(Rational::zero());
        }
        Ok(scan.mass())
    }

    /// `P(L ≤ m)` for `m ≤ budget`.
    pub fn cdf(&self, m: u64) -> Result<Rational> {
        Ok(Rational::one() - self.scan_to(m)?.tail())
    }

    /// `P(L > m)` for `m ≤ budget`.
    pub fn survival(&self, m: u64) -> Result<Rational> {
        Ok(self.scan_to(m)?.tail())
    }

    /// All masses `(m, P(L = m))` for even `m` up to the budget.
    pub fn masses(&self) -> Vec<(u64, Rational)> {
        let mut scan = PassageScan::new();
        let mut out = Vec::with_capacity(self.budget as usize / 2);
        while scan.length() < self.budget {
            scan.advance();
            out.push((scan.length(), scan.mass()));
        }
        out
    }

    /// Smallest crossing length `m ≥ 2` with `P(L > m) ≤ eps`.
    pub fn quantile(&self, eps: &Rational) -> Result<u64> {
        let mut scan = PassageScan::new();
        quantile_from(&mut scan, eps, self.budget)
    }
}

/// Continues `scan` to the first length with tail at most `eps`. Quantiles
/// are monotone in `eps`, so one scan serves a decreasing sequence.
pub(crate) fn quantile_from(scan: &mut PassageScan, eps: &Rational, budget: u64) -> Result<u64> {
    if scan.length() == 0 {
        scan.advance();
    }
    loop {
        if scan.tail_at_most(eps) {
            return Ok(scan.length());
        }
        if scan.length() + 2 > budget {
            return Err(Error::BudgetInsufficient {
                budget,
                tail: format_ratio(&scan.tail()),
                eps: format_ratio(eps),
            });
        }
        scan.advance();
    }
}
