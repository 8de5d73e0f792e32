use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::{Dist, Rational, State};

/// `Σ x·d(x)`.
pub fn dist_mean(d: &Dist) -> Rational {
    d.atoms()
        .map(|(x, p)| p * Rational::from_integer(BigInt::from(x)))
        .sum()
}

/// `Σ |x|^p · d(x)` for an integer exponent `p ≥ 1`.
pub fn abs_moment(d: &Dist, p: u32) -> Rational {
    assert!(p >= 1, "moment exponent must be at least 1");
    d.atoms()
        .map(|(x, m)| m * Rational::from_integer(BigInt::from(x).abs().pow(p)))
        .sum()
}

/// Uniform-integrability tail `Σ_{|x| > y} |x| · d(x)`.
pub fn ui_tail(d: &Dist, y: u128) -> Rational {
    d.atoms()
        .filter(|(x, _)| x.unsigned_abs() > y)
        .map(|(x, m)| m * Rational::from_integer(BigInt::from(x).abs()))
        .sum()
}

/// `(1/2) Σ |a(x) - b(x)|` over the union of supports.
pub fn tv_distance(a: &Dist, b: &Dist) -> Rational {
    let (a, b) = (a.as_map(), b.as_map());
    let zero = Rational::zero();
    let mut total = Rational::zero();
    let mut xs: Vec<State> = a.keys().chain(b.keys()).copied().collect();
    xs.sort_unstable();
    xs.dedup();
    for x in xs {
        let pa = a.get(&x).unwrap_or(&zero);
        let pb = b.get(&x).unwrap_or(&zero);
        total += (pa - pb).abs();
    }
    total / Rational::from_integer(BigInt::from(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactprob::ratio::{int, ratio};
    use proptest::prelude::*;

    fn four_point() -> Dist {
        Dist::new([(-3, ratio(1, 4)), (-1, ratio(1, 4)), (1, ratio(1, 4)), (3, ratio(1, 4))]).unwrap()
    }

    #[test]
    fn mean_examples() {
        assert_eq!(dist_mean(&Dist::uniform_pm1()), int(0));
        let holding_row = Dist::new([(1, ratio(3, 4)), (7, ratio(1, 7)), (-7, ratio(3, 28))]).unwrap();
        assert_eq!(dist_mean(&holding_row), int(1));
        assert_eq!(dist_mean(&Dist::point(0)), int(0));
    }

    #[test]
    fn moment_examples() {
        assert_eq!(abs_moment(&four_point(), 1), int(2));
        assert_eq!(abs_moment(&Dist::point(0), 5), int(0));
        assert_eq!(abs_moment(&Dist::uniform_pm1(), 2), int(1));
    }

    #[test]
    fn ui_tail_examples() {
        assert_eq!(ui_tail(&Dist::uniform_pm1(), 1), int(0));
        assert_eq!(ui_tail(&four_point(), 1), ratio(3, 2));
        assert_eq!(ui_tail(&Dist::point(0), 0), int(0));
    }

    #[test]
    fn tv_examples() {
        let d = four_point();
        assert_eq!(tv_distance(&d, &d), int(0));
        assert_eq!(tv_distance(&Dist::uniform_pm1(), &Dist::point(1)), ratio(1, 2));
        assert_eq!(tv_distance(&Dist::point(0), &Dist::point(1)), int(1));
    }

    pub(crate) fn small_dist() -> impl Strategy<Value = Dist> {
        prop::collection::vec((-6i128..=6, 1u32..=9), 1..6).prop_map(|atoms| {
            let total: u32 = atoms.iter().map(|(_, w)| w).sum();
            Dist::new(
                atoms
                    .into_iter()
                    .map(|(x, w)| (x, ratio(w as i64, total as i64))),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn tv_is_a_metric(a in small_dist(), b in small_dist(), c in small_dist()) {
            prop_assert_eq!(tv_distance(&a, &b), tv_distance(&b, &a));
            prop_assert!(tv_distance(&a, &c) <= tv_distance(&a, &b) + tv_distance(&b, &c));
            prop_assert_eq!(tv_distance(&a, &a), int(0));
            prop_assert!(tv_distance(&a, &b) <= int(1));
        }

        #[test]
        fn jensen_at_p1(d in small_dist()) {
            prop_assert!(abs_moment(&d, 1) >= dist_mean(&d).abs());
        }

        #[test]
        fn ui_tail_at_zero_is_first_moment(d in small_dist()) {
            prop_assert_eq!(ui_tail(&d, 0), abs_moment(&d, 1));
        }
    }
}
