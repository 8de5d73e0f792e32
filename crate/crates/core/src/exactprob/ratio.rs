//! Helpers around [`num_rational::BigRational`], which already keeps values
//! in lowest terms with a positive denominator.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int<T: Into<BigInt>>(value: T) -> Rational {
    Rational::from_integer(value.into())
}

/// `2^-n`.
pub fn pow2_inv(n: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << n)
}

/// Canonical `"num/den"` form. The denominator is always written, so `1`
/// becomes `"1/1"`.
pub fn format_ratio(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"num/den"` or a bare integer. Non-canonical input such as `"2/4"`
/// is accepted and reduced.
pub fn parse_ratio(s: &str) -> Result<Rational> {
    let bad = || Error::ParseRational(s.to_string());
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `true` for values in the half-open interval `(0, 1]`.
pub fn is_probability(r: &Rational) -> bool {
    r.is_positive() && *r <= Rational::one()
}

/// Serde adapter writing rationals as `"num/den"` strings.
pub mod serde_ratio {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    use super::{format_ratio, parse_ratio, Rational};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_ratio(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_ratio(&s).map_err(D::Error::custom)
    }
}

/// Like [`serde_ratio`] for optional values (`null` when absent).
pub mod serde_opt_ratio {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    use super::{format_ratio, parse_ratio, Rational};

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_str(&format_ratio(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| parse_ratio(&s).map_err(D::Error::custom))
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_form() {
        assert_eq!(ratio(2, 4), ratio(1, 2));
        assert_eq!(ratio(3, -6), ratio(-1, 2));
        assert_eq!(format_ratio(&ratio(-2, 4)), "-1/2");
        assert_eq!(format_ratio(&int(1)), "1/1");
        assert_eq!(pow2_inv(3), ratio(1, 8));
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("a/2").is_err());
        assert!(parse_ratio("").is_err());
        assert_eq!(parse_ratio(" 6/8 ").unwrap(), ratio(3, 4));
        assert_eq!(parse_ratio("-5").unwrap(), int(-5));
    }

    proptest! {
        #[test]
        fn equality_is_cross_multiplication(a in -50i64..50, b in 1i64..50, c in -50i64..50, d in 1i64..50) {
            prop_assert_eq!(ratio(a, b) == ratio(c, d), a * d == c * b);
        }

        #[test]
        fn text_round_trip(a in any::<i64>(), b in 1i64..i64::MAX) {
            let r = ratio(a, b);
            let s = format_ratio(&r);
            prop_assert_eq!(parse_ratio(&s).unwrap(), r.clone());
            prop_assert_eq!(format_ratio(&parse_ratio(&s).unwrap()), s);
        }
    }
}
