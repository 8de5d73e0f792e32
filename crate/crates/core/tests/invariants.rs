use martlab::delayedwalk::{
    build_schedule, crossing_law, sample_delayed_path, EpsRule, Schedule, CROSSING_BUDGET_CAP,
};
use martlab::excursion::{joint_zero_count, ProbSeq, TailRule};
use martlab::exactprob::ratio::{int, ratio};
use martlab::{Error, Rational};
use num_traits::{One, Zero};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn crossing_law_conserves_mass(budget in 2u64..200) {
        let law = crossing_law(budget).unwrap();
        let total: Rational = law.masses().into_iter().map(|(m, p)| {
            assert!(m % 2 == 0 && m >= 2);
            p
        }).sum();
        prop_assert_eq!(total + law.tail(), Rational::one());
    }

    #[test]
    fn quantile_is_least(num in 1i64..32, den_pow in 1u32..6) {
        let eps = ratio(num, 1 << den_pow).min(int(1));
        let law = crossing_law(1 << 13).unwrap();
        let q = law.quantile(&eps).unwrap();
        prop_assert!(q >= 2 && q % 2 == 0);
        prop_assert!(law.survival(q).unwrap() <= eps);
        if q > 2 {
            prop_assert!(law.survival(q - 2).unwrap() > eps);
        }
    }

    #[test]
    fn schedules_satisfy_their_certificates(num in 1i64..8, den in 9i64..16, k in 1usize..4) {
        let rule = EpsRule::Geometric(ratio(num, den));
        match build_schedule(k, &rule) {
            Ok(s) => {
                prop_assert!(s.validate().is_ok());
                let t = s.times();
                prop_assert_eq!(t[0], 1);
                for w in t.windows(2) {
                    prop_assert!(w[1] % 2 == 0 && w[1] / 2 > w[0]);
                }
                for e in &s.entries()[..k - 1] {
                    prop_assert!(e.certificate_lhs.as_ref().unwrap() <= e.certificate_rhs.as_ref().unwrap());
                    prop_assert!(e.l_star.unwrap() <= CROSSING_BUDGET_CAP);
                }
            }
            Err(Error::ScheduleCap { fitted, .. }) => prop_assert!(fitted < k),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn delayed_paths_have_bounded_increments(t2 in 2u64..30, t3 in 0u64..60, seed in any::<u64>()) {
        let t2 = 2 * t2;
        let t3 = 2 * (t2 / 2 + t2 + t3);
        let s = Schedule::manual(vec![ratio(1, 2), ratio(1, 4), ratio(1, 8)], vec![1, t2, t3]).unwrap();
        let p = sample_delayed_path(&s, t3 + 10, seed).unwrap();
        prop_assert!(p.increments_bounded());
        let v = p.values_upto(t3 + 10);
        prop_assert_eq!(v[0], 0);
        for w in v.windows(2) {
            prop_assert!((w[1] - w[0]).abs() <= 1);
        }
    }

    #[test]
    fn joint_table_shape(n in 0u32..40) {
        let t = joint_zero_count(n).unwrap();
        let mut total = Rational::zero();
        for ((x, j), q) in t.entries(n) {
            prop_assert!(x.unsigned_abs() <= u128::from(n));
            prop_assert!(j <= n / 2);
            prop_assert_eq!((i128::from(n) - x).rem_euclid(2), 0);
            total += q;
        }
        prop_assert_eq!(total, Rational::one());
    }

    #[test]
    fn prob_seq_values_are_probabilities(head in proptest::collection::vec(1i64..=16, 0..5), slope in 1i64..4, k in 1u64..200) {
        let head: Vec<Rational> = head.into_iter().map(|d| ratio(1, d)).collect();
        let seq = ProbSeq::new(head, TailRule::ReciprocalLinear { slope: int(slope), intercept: int(1) }).unwrap();
        let p = seq.p(k);
        prop_assert!(p > Rational::zero() && p <= Rational::one());
    }
}
