//! Exact rationals and their string encoding (`"p/q"` or `"p"`).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serializer};

use crate::{Error, Result};

pub type Q = BigRational;

pub fn int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn frac(p: i64, q: i64) -> Q {
    Q::new(BigInt::from(p), BigInt::from(q))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

pub fn parse(s: &str) -> Result<Q> {
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| Error::input(format!("bad rational {s:?}")))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| Error::input(format!("bad rational {s:?}")))?;
    if d.is_zero() {
        return Err(Error::input(format!("zero denominator in {s:?}")));
    }
    Ok(Q::new(n, d))
}

/// Canonical `p/q` string; integers print without a denominator.
pub fn format(q: &Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Decimal rendering for human-facing output only; never used in a verdict.
pub fn to_decimal(q: &Q, digits: usize) -> String {
    let neg = q.is_negative();
    let a = q.abs();
    let int_part = a.numer() / a.denom();
    let mut rem = a.numer() % a.denom();
    let mut s = format!("{}{}", if neg { "-" } else { "" }, int_part);
    if digits > 0 {
        s.push('.');
        for _ in 0..digits {
            rem *= 10;
            let d = &rem / a.denom();
            rem %= a.denom();
            s.push_str(&d.to_string());
        }
    }
    s
}

pub fn serialize<S: Serializer>(q: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format(q))
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
    let s = String::deserialize(d)?;
    parse(&s).map_err(serde::de::Error::custom)
}

pub fn serialize_opt<S: Serializer>(q: &Option<Q>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match q {
        Some(q) => s.serialize_some(&format(q)),
        None => s.serialize_none(),
    }
}

/// Serde adapter for `Vec<Q>` as a list of rational strings.
pub mod vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for q in v {
            seq.serialize_element(&format(q))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Q>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse("3/6").unwrap(), frac(1, 2));
        assert_eq!(parse("-4").unwrap(), int(-4));
        assert_eq!(format(&frac(-2, 4)), "-1/2");
        assert_eq!(format(&int(7)), "7");
        assert!(parse("1/0").is_err());
        assert!(parse("x").is_err());
    }

    #[test]
    fn decimal() {
        assert_eq!(to_decimal(&frac(1, 3), 4), "0.3333");
        assert_eq!(to_decimal(&frac(-7, 2), 1), "-3.5");
    }
}
