//! Text forms of [`Dist`].
//!
//! CSV: a `x,numerator,denominator` header, then one row per atom in
//! ascending `x`. JSON: an object from the decimal state to `"num/den"`,
//! keys in ascending numeric order.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use num_bigint::BigInt;
use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ratio::{format_ratio, parse_ratio, Rational};
use super::{Dist, State};
use crate::error::{Error, Result};

pub const DIST_CSV_HEADER: [&str; 3] = ["x", "numerator", "denominator"];

pub(crate) fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

pub(crate) fn csv_reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(true).from_reader(r)
}

pub(crate) fn parse_state(s: &str) -> Result<State> {
    s.trim()
        .parse()
        .map_err(|_| Error::Invalid(format!("bad state {s:?}")))
}

pub(crate) fn parse_parts(num: &str, den: &str) -> Result<Rational> {
    let n: BigInt = num
        .trim()
        .parse()
        .map_err(|_| Error::ParseRational(format!("{num}/{den}")))?;
    let d: BigInt = den
        .trim()
        .parse()
        .map_err(|_| Error::ParseRational(format!("{num}/{den}")))?;
    if d == BigInt::from(0) {
        return Err(Error::ParseRational(format!("{num}/{den}")));
    }
    Ok(Rational::new(n, d))
}

pub fn write_dist_csv<W: Write>(d: &Dist, w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(DIST_CSV_HEADER)?;
    for (x, p) in d.atoms() {
        out.write_record([x.to_string(), p.numer().to_string(), p.denom().to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_dist_csv<R: Read>(r: R) -> Result<Dist> {
    let mut input = csv_reader(r);
    let mut atoms = Vec::new();
    for row in input.records() {
        let row = row?;
        if row.len() != 3 {
            return Err(Error::Invalid(format!("expected 3 columns, got {}", row.len())));
        }
        atoms.push((parse_state(&row[0])?, parse_parts(&row[1], &row[2])?));
    }
    Dist::new(atoms)
}

impl Serialize for Dist {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.len()))?;
        for (x, p) in self.atoms() {
            map.serialize_entry(&x.to_string(), &format_ratio(p))?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Dist {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = BTreeMap::<String, String>::deserialize(d)?;
        let mut atoms = Vec::with_capacity(raw.len());
        for (x, p) in raw {
            let x = parse_state(&x).map_err(D::Error::custom)?;
            let p = parse_ratio(&p).map_err(D::Error::custom)?;
            atoms.push((x, p));
        }
        Dist::new(atoms).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactprob::ratio::ratio;
    use proptest::prelude::*;

    fn holding_row() -> Dist {
        Dist::new([(1, ratio(3, 4)), (7, ratio(1, 7)), (-7, ratio(3, 28))]).unwrap()
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_dist_csv(&holding_row(), &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "x,numerator,denominator\n-7,3,28\n1,3,4\n7,1,7\n"
        );
    }

    #[test]
    fn json_layout() {
        let s = serde_json::to_string(&holding_row()).unwrap();
        assert_eq!(s, r#"{"-7":"3/28","1":"3/4","7":"1/7"}"#);
        let back: Dist = serde_json::from_str(&s).unwrap();
        assert_eq!(back, holding_row());
    }

    #[test]
    fn rejects_non_normalized_input() {
        assert!(read_dist_csv("x,numerator,denominator\n0,1,2\n".as_bytes()).is_err());
        assert!(serde_json::from_str::<Dist>(r#"{"0":"1/0"}"#).is_err());
    }

    proptest! {
        #[test]
        fn text_forms_are_bit_exact(atoms in prop::collection::vec((-1_000_000_000_000i128..1_000_000_000_000, 1u64..1000), 1..8)) {
            let total: u64 = atoms.iter().map(|(_, w)| w).sum();
            let d = Dist::new(atoms.into_iter().map(|(x, w)| (x, ratio(w as i64, total as i64)))).unwrap();

            let mut csv = Vec::new();
            write_dist_csv(&d, &mut csv).unwrap();
            let back = read_dist_csv(csv.as_slice()).unwrap();
            let mut again = Vec::new();
            write_dist_csv(&back, &mut again).unwrap();
            prop_assert_eq!(&back, &d);
            prop_assert_eq!(csv, again);

            let json = serde_json::to_string(&d).unwrap();
            let back: Dist = serde_json::from_str(&json).unwrap();
            prop_assert_eq!(serde_json::to_string(&back).unwrap(), json);
        }
    }
}
