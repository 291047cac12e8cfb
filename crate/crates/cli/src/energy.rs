//! Energies in config files: a bare number is eV, a string may carry an
//! `eV`, `meV`, `ueV` (or `μeV`) or `neV` suffix.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An energy in eV. Serialises as a plain number.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Energy(pub f64);

impl Energy {
    pub fn ev(self) -> f64 {
        self.0
    }

    pub fn from_uev(x: f64) -> Self {
        Energy(x / 1e6)
    }
}

/// Suffix and the number of its units per eV. Dividing keeps "30 ueV"
/// the correctly rounded `3e-5`.
const SUFFIXES: [(&str, f64); 6] = [
    ("ueV", 1e6),
    ("μeV", 1e6),
    ("µeV", 1e6),
    ("meV", 1e3),
    ("neV", 1e9),
    ("eV", 1.0),
];

impl FromStr for Energy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let (num, per_ev) = SUFFIXES
            .iter()
            .find_map(|&(suf, per_ev)| s.strip_suffix(suf).map(|n| (n.trim_end(), per_ev)))
            .unwrap_or((s, 1.0));
        let x: f64 = num
            .parse()
            .map_err(|_| format!("cannot read energy {s:?}"))?;
        if !x.is_finite() {
            return Err(format!("energy {s:?} is not finite"));
        }
        Ok(Energy(x / per_ev))
    }
}

impl fmt::Display for Energy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} eV", self.0)
    }
}

impl Serialize for Energy {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Energy {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(x) if x.is_finite() => Ok(Energy(x)),
            Raw::Number(x) => Err(serde::de::Error::custom(format!(
                "energy {x} is not finite"
            ))),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}
