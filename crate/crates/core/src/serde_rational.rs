//! Serde adapters that write rationals as `"n"` or `"n/d"` strings.

use crate::scalar::{parse_rational, rational_to_string};
use crate::Rational;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub fn serialize<S: Serializer>(v: &Rational, s: S) -> Result<S::Ok, S::Error> {
    rational_to_string(v).serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
    let text = String::deserialize(d)?;
    parse_rational(&text).ok_or_else(|| D::Error::custom(format!("bad rational {text:?}")))
}

pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(rational_to_string)
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|t| parse_rational(t).ok_or_else(|| D::Error::custom(format!("bad rational {t:?}"))))
            .collect()
    }
}
