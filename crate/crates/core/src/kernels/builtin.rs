use num_bigint::BigInt;
use num_traits::One;

use super::{Kernel, KERNEL_TIME_CAP};
use crate::exactprob::ratio::{int, pow2_inv, ratio};
use crate::exactprob::{Dist, Rational, State};

fn walk_row(x: State) -> Dist {
    Dist::from_accumulated([(x - 1, ratio(1, 2)), (x + 1, ratio(1, 2))].into())
}

/// `2^{n+1} - 1`.
fn jump_target(n: u32) -> State {
    assert!(n <= KERNEL_TIME_CAP, "time {n} beyond the kernel cap {KERNEL_TIME_CAP}");
    (1i128 << (n + 1)) - 1
}

fn row(atoms: Vec<(State, Rational)>) -> Dist {
    Dist::new(atoms).expect("built-in kernel rows are normalized")
}

/// Simple symmetric random walk started at 0.
#[derive(Debug, Clone, Copy, Default)]
pub struct Ssrw;

pub fn ssrw_kernel() -> Ssrw {
    Ssrw
}

impl Kernel for Ssrw {
    fn name(&self) -> &str {
        "ssrw"
    }
    fn initial(&self) -> Dist {
        Dist::point(0)
    }
    fn law(&self, _n: u32, x: State) -> Dist {
        walk_row(x)
    }
}

/// Walk off `{±1}`; from `±1` flip sign with probability `1 - 2^{-n}`, else
/// jump to `±(2^{n+1} - 1)` on the same side.
#[derive(Debug, Clone, Copy, Default)]
pub struct Alternating;

pub fn alternating_kernel() -> Alternating {
    Alternating
}

impl Kernel for Alternating {
    fn name(&self) -> &str {
        "alternating"
    }
    fn initial(&self) -> Dist {
        Dist::point(0)
    }
    fn law(&self, n: u32, x: State) -> Dist {
        if x != 1 && x != -1 {
            return walk_row(x);
        }
        let jump = pow2_inv(n);
        let flip = int(1) - &jump;
        row(vec![(-x, flip), (x * jump_target(n), jump)])
    }
}

/// Same marginals as [`Alternating`], but `±1` hold with probability
/// `1 - 2^{-n}` and the jump is split between both sides by [`pn_qn`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Holding;

pub fn holding_kernel() -> Holding {
    Holding
}

impl Kernel for Holding {
    fn name(&self) -> &str {
        "holding"
    }
    fn initial(&self) -> Dist {
        Dist::point(0)
    }
    fn law(&self, n: u32, x: State) -> Dist {
        if x != 1 && x != -1 {
            return walk_row(x);
        }
        let jump = pow2_inv(n);
        let stay = int(1) - &jump;
        let PnQn { p, q, .. } = pn_qn(n);
        let far = jump_target(n);
        row(vec![(x, stay), (x * far, &jump * p), (-x * far, &jump * q)])
    }
}

/// The split `p_n = 1 / (2 - 2^{-n})`, `q_n = 1 - p_n` that puts mean 1 on
/// the two-point law `{2^{n+1} - 1: p_n, -(2^{n+1} - 1): q_n}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PnQn {
    pub n: u32,
    pub p: Rational,
    pub q: Rational,
}

pub fn pn_qn(n: u32) -> PnQn {
    let p = Rational::one() / (int(2) - pow2_inv(n));
    let q = int(1) - &p;
    PnQn { n, p, q }
}

impl PnQn {
    /// `p·(2^{n+1}-1) + q·(-(2^{n+1}-1))`.
    pub fn jump_mean(&self) -> Rational {
        let far = Rational::from_integer(BigInt::from(jump_target(self.n)));
        &self.p * &far - &self.q * &far
    }
}
