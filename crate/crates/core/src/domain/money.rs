use std::fmt;
use std::iter::Sum;
use std::ops::Add;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A non-negative amount of Philippine pesos held as whole centavos.
///
/// Serialized as a decimal string with exactly two fractional digits
/// (`"1250.50"`) so sums stay exact end to end.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pesos(u64);

impl Pesos {
    pub const ZERO: Pesos = Pesos(0);

    pub const fn from_centavos(centavos: u64) -> Self {
        Self(centavos)
    }

    pub const fn from_whole(pesos: u64) -> Self {
        Self(pesos * 100)
    }

    pub const fn centavos(self) -> u64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error(
    "invalid peso amount {0:?}: expected a non-negative decimal with at most two fractional digits"
)]
pub struct ParsePesosError(String);

impl FromStr for Pesos {
    type Err = ParsePesosError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParsePesosError(s.to_owned());
        let trimmed = s.trim();
        let (whole, frac) = match trimmed.split_once('.') {
            Some((w, f)) => (w, f),
            None => (trimmed, ""),
        };
        if whole.is_empty() || frac.len() > 2 {
            return Err(err());
        }
        if !whole.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let whole: u64 = whole.parse().map_err(|_| err())?;
        let frac: u64 = match frac.len() {
            0 => 0,
            1 => frac.parse::<u64>().map_err(|_| err())? * 10,
            _ => frac.parse().map_err(|_| err())?,
        };
        whole
            .checked_mul(100)
            .and_then(|c| c.checked_add(frac))
            .map(Pesos)
            .ok_or_else(err)
    }
}

impl fmt::Display for Pesos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:02}", self.0 / 100, self.0 % 100)
    }
}

impl Add for Pesos {
    type Output = Pesos;

    fn add(self, rhs: Pesos) -> Pesos {
        Pesos(self.0.checked_add(rhs.0).expect("peso amount overflow"))
    }
}

impl Sum for Pesos {
    fn sum<I: Iterator<Item = Pesos>>(iter: I) -> Pesos {
        iter.fold(Pesos::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Pesos> for Pesos {
    fn sum<I: Iterator<Item = &'a Pesos>>(iter: I) -> Pesos {
        iter.copied().sum()
    }
}

impl Serialize for Pesos {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Pesos {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}
