use serde::{Deserialize, Serialize};

use super::Configuration;
use crate::error::{Error, Result};
use crate::geometry::{BondClassification, MembraneRegion, TorusLattice};
use crate::trig::{TrigPoly, Wave};

/// Test function: either smooth on the torus, or `h₁ 1_Λ + h₂ 1_{Λ^∁}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObservableKind {
    Smooth { h: TrigPoly },
    Split { inside: TrigPoly, outside: TrigPoly },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    pub name: String,
    pub kind: ObservableKind,
}

impl Observable {
    pub fn smooth(name: impl Into<String>, h: TrigPoly) -> Self {
        Self {
            name: name.into(),
            kind: ObservableKind::Smooth { h },
        }
    }

    pub fn split(name: impl Into<String>, inside: TrigPoly, outside: TrigPoly) -> Self {
        assert_eq!(inside.dim(), outside.dim());
        Self {
            name: name.into(),
            kind: ObservableKind::Split { inside, outside },
        }
    }

    /// One of the presets `one`, `cos`, `sin`, `indicator`.
    pub fn preset(name: &str, dim: usize) -> Result<Self> {
        Ok(match name {
            "one" => Self::smooth("one", TrigPoly::constant(dim, 1.0)),
            "cos" => Self::smooth("cos", TrigPoly::wave(dim, 0, Wave::Cos, 1, 1.0)),
            "sin" => Self::smooth("sin", TrigPoly::wave(dim, 0, Wave::Sin, 1, 1.0)),
            "indicator" => Self::split(
                "indicator",
                TrigPoly::constant(dim, 1.0),
                TrigPoly::constant(dim, 0.0),
            ),
            other => return Err(Error::Config(format!("unknown observable preset {other:?}"))),
        })
    }

    pub fn dim(&self) -> usize {
        self.piece(true).dim()
    }

    pub fn is_split(&self) -> bool {
        matches!(self.kind, ObservableKind::Split { .. })
    }

    /// The smooth function in force on one side (`inside` = in `Λ`).
    pub fn piece(&self, inside: bool) -> &TrigPoly {
        match &self.kind {
            ObservableKind::Smooth { h } => h,
            ObservableKind::Split { inside: h1, outside: h2 } => {
                if inside {
                    h1
                } else {
                    h2
                }
            }
        }
    }

    pub fn value(&self, u: &[f64], inside: bool) -> f64 {
        self.piece(inside).value(u)
    }

    pub fn value_in(&self, region: &MembraneRegion, u: &[f64]) -> f64 {
        self.value(u, region.contains(u))
    }

    /// `(H(u⁻), H(u⁺))` at a membrane point.
    pub fn traces(&self, u: &[f64]) -> (f64, f64) {
        (self.value(u, true), self.value(u, false))
    }

    pub fn laplacian(&self, u: &[f64], inside: bool) -> f64 {
        self.piece(inside).laplacian(u)
    }

    /// `Σ_j sup|∂_j H|²`, using the coefficient bound on each side.
    pub fn gradient_sup_sq(&self) -> f64 {
        let d = self.dim();
        (0..d)
            .map(|j| {
                let a = self.piece(true).gradient_sup_bound(j);
                let b = self.piece(false).gradient_sup_bound(j);
                a.max(b).powi(2)
            })
            .sum()
    }

    /// `H(x/N)` at every site, sided by the classification.
    pub fn site_values(&self, lattice: &TorusLattice, class: &BondClassification) -> Vec<f64> {
        let mut pos = vec![0.0; lattice.dim()];
        (0..lattice.num_sites())
            .map(|x| {
                lattice.position_into(x, &mut pos);
                self.value(&pos, class.is_inside(x))
            })
            .collect()
    }
}

/// Non-empty list of observables sharing a dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableFamily(Vec<Observable>);

impl ObservableFamily {
    pub fn new(observables: Vec<Observable>) -> Result<Self> {
        let Some(first) = observables.first() else {
            return Err(Error::Config("observable family is empty".into()));
        };
        let d = first.dim();
        if observables.iter().any(|o| o.dim() != d) {
            return Err(Error::Config("observables disagree on dimension".into()));
        }
        Ok(Self(observables))
    }

    pub fn presets(names: &[impl AsRef<str>], dim: usize) -> Result<Self> {
        Self::new(
            names
                .iter()
                .map(|n| Observable::preset(n.as_ref(), dim))
                .collect::<Result<_>>()?,
        )
    }

    /// `one, cos, sin, indicator`.
    pub fn standard(dim: usize) -> Self {
        Self::presets(&["one", "cos", "sin", "indicator"], dim).expect("presets are valid")
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Observable> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Observable] {
        &self.0
    }
}

/// `⟨π^N, H⟩ = N^{-d} Σ_x H(x/N) η(x)` with `H` given by its site values.
pub fn empirical_pairing(config: &Configuration, site_values: &[f64]) -> f64 {
    let n = config.num_sites() as f64;
    config
        .occupancy()
        .iter()
        .zip(site_values)
        .filter(|(&b, _)| b != 0)
        .map(|(_, h)| h)
        .sum::<f64>()
        / n
}
