//! Closed-form one-dimensional solutions used as references.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::wrap_unit;

/// `ρ₀(u) = a₀ + Σ_k (c_k cos 2πku + s_k sin 2πku)` on the circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierSeries {
    pub constant: f64,
    pub cos: Vec<(u32, f64)>,
    pub sin: Vec<(u32, f64)>,
}

/// `a₀ + Σ_k a_k cos(kπ(u - ℓ)/L)` on the arc `[ℓ, ℓ + L)` (mod 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalCosine {
    pub left: f64,
    pub length: f64,
    pub constant: f64,
    pub terms: Vec<(u32, f64)>,
}

impl IntervalCosine {
    fn offset(&self, u: f64) -> Option<f64> {
        let s = wrap_unit(u - self.left);
        (s < self.length).then_some(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum AnalyticOracle {
    /// Heat equation on the circle.
    TorusFourier(FourierSeries),
    /// Heat equation with insulated ends on each arc.
    NeumannIntervalCosine { components: Vec<IntervalCosine> },
}

/// Evaluate the oracle at time `t` and point `u` (one-dimensional only).
pub fn analytic_oracle(oracle: &AnalyticOracle, t: f64, u: &[f64]) -> Result<f64> {
    if u.len() != 1 {
        return Err(Error::UnsupportedDimension(u.len()));
    }
    let u = u[0];
    match oracle {
        AnalyticOracle::TorusFourier(s) => {
            let decay = |k: u32| (-4.0 * PI * PI * (k * k) as f64 * t).exp();
            let c: f64 = s.cos.iter().map(|&(k, a)| a * decay(k) * (TAU * k as f64 * u).cos()).sum();
            let sn: f64 = s.sin.iter().map(|&(k, a)| a * decay(k) * (TAU * k as f64 * u).sin()).sum();
            Ok(s.constant + c + sn)
        }
        AnalyticOracle::NeumannIntervalCosine { components } => {
            let (comp, s) = components
                .iter()
                .find_map(|c| c.offset(u).map(|s| (c, s)))
                .ok_or_else(|| Error::InvalidArgument(format!("point {u} lies in no component")))?;
            let l = comp.length;
            Ok(comp.constant
                + comp
                    .terms
                    .iter()
                    .map(|&(k, a)| {
                        let w = k as f64 * PI / l;
                        a * (-w * w * t).exp() * (w * s).cos()
                    })
                    .sum::<f64>())
        }
    }
}
