use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::BondClassification;

/// Slow-bond exponent `β ∈ [0, ∞]`. Infinity is a distinct value so the
/// slow rate is exactly zero rather than an underflowed power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Beta {
    Finite(f64),
    Infinite,
}

impl Beta {
    pub fn finite(beta: f64) -> Result<Self> {
        if beta.is_finite() && beta >= 0.0 {
            Ok(Beta::Finite(beta))
        } else if beta == f64::INFINITY {
            Ok(Beta::Infinite)
        } else {
            Err(Error::InvalidArgument(format!("beta must lie in [0, inf], got {beta}")))
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Beta::Finite(b) => b,
            Beta::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Beta::Finite(b) => write!(f, "{b}"),
            Beta::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Beta {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" => Ok(Beta::Infinite),
            other => other
                .parse::<f64>()
                .map_err(|e| Error::InvalidArgument(format!("bad beta {s:?}: {e}")))
                .and_then(Beta::finite),
        }
    }
}

impl Serialize for Beta {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Beta::Finite(b) => s.serialize_f64(*b),
            Beta::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Beta {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(b) => Beta::finite(b),
            Raw::Text(s) => s.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// Exchange rates: one on ordinary bonds, `α N^{-β}` on slow bonds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateField {
    beta: Beta,
    alpha: f64,
    slow_rate: f64,
}

impl RateField {
    pub fn new(beta: Beta, alpha: f64, side: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
        }
        let slow_rate = match beta {
            Beta::Finite(b) => alpha * (side as f64).powf(-b),
            Beta::Infinite => 0.0,
        };
        Ok(Self {
            beta,
            alpha,
            slow_rate,
        })
    }

    pub fn beta(&self) -> Beta {
        self.beta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn slow_rate(&self) -> f64 {
        self.slow_rate
    }

    /// `ξ_b`; symmetric because it depends only on the undirected bond.
    #[inline]
    pub fn rate(&self, class: &BondClassification, bond: usize) -> f64 {
        if class.is_slow(bond) {
            self.slow_rate
        } else {
            1.0
        }
    }

    /// Largest rate present, `max(1, slow_rate)`.
    pub fn max_rate(&self) -> f64 {
        self.slow_rate.max(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slow_rates() {
        let r = RateField::new(Beta::Finite(1.0), 0.5, 8).unwrap();
        assert_eq!(r.slow_rate(), 0.0625);
        let r = RateField::new(Beta::Infinite, 0.5, 8).unwrap();
        assert_eq!(r.slow_rate(), 0.0);
        let r = RateField::new(Beta::Finite(0.0), 2.0, 512).unwrap();
        assert_eq!(r.slow_rate(), 2.0);
        assert!(RateField::new(Beta::Finite(1.0), 0.0, 8).is_err());
    }

    #[test]
    fn beta_parsing() {
        assert_eq!("inf".parse::<Beta>().unwrap(), Beta::Infinite);
        assert_eq!("0.5".parse::<Beta>().unwrap(), Beta::Finite(0.5));
        assert!("-1".parse::<Beta>().is_err());
        assert_eq!(Beta::finite(f64::INFINITY).unwrap(), Beta::Infinite);
        let b: Vec<Beta> = serde_json::from_str(r#"[0, 1.5, "inf"]"#).unwrap();
        assert_eq!(b, vec![Beta::Finite(0.0), Beta::Finite(1.5), Beta::Infinite]);
    }
}
