//! Trigonometric polynomials on the unit torus with analytic derivatives.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Wave {
    Cos,
    Sin,
}

/// `coeff * prod_j wave_j(2 pi k_j u_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub coeff: f64,
    pub factors: Vec<(Wave, u32)>,
}

impl TrigTerm {
    fn factor(wave: Wave, k: u32, x: f64) -> f64 {
        let arg = TAU * k as f64 * x;
        match wave {
            Wave::Cos => arg.cos(),
            Wave::Sin => arg.sin(),
        }
    }

    fn factor_derivative(wave: Wave, k: u32, x: f64) -> f64 {
        let w = TAU * k as f64;
        match wave {
            Wave::Cos => -w * (w * x).sin(),
            Wave::Sin => w * (w * x).cos(),
        }
    }

    fn value(&self, u: &[f64]) -> f64 {
        self.factors
            .iter()
            .zip(u)
            .fold(self.coeff, |acc, (&(w, k), &x)| acc * Self::factor(w, k, x))
    }

    fn partial(&self, u: &[f64], axis: usize) -> f64 {
        let mut acc = self.coeff;
        for (j, (&(w, k), &x)) in self.factors.iter().zip(u).enumerate() {
            acc *= if j == axis {
                Self::factor_derivative(w, k, x)
            } else {
                Self::factor(w, k, x)
            };
        }
        acc
    }

    fn wavenumber_sq(&self) -> f64 {
        self.factors
            .iter()
            .map(|&(_, k)| (TAU * k as f64).powi(2))
            .sum()
    }
}

/// Finite sum of [`TrigTerm`]s in a fixed dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    dim: usize,
    terms: Vec<TrigTerm>,
}

impl TrigPoly {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: Vec::new(),
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self {
            dim,
            terms: vec![TrigTerm {
                coeff: c,
                factors: vec![(Wave::Cos, 0); dim],
            }],
        }
    }

    /// `coeff * wave(2 pi k u_axis)`.
    pub fn wave(dim: usize, axis: usize, wave: Wave, k: u32, coeff: f64) -> Self {
        let mut factors = vec![(Wave::Cos, 0); dim];
        factors[axis] = (wave, k);
        Self {
            dim,
            terms: vec![TrigTerm { coeff, factors }],
        }
    }

    pub fn from_terms(dim: usize, terms: Vec<TrigTerm>) -> Self {
        assert!(terms.iter().all(|t| t.factors.len() == dim));
        Self { dim, terms }
    }

    pub fn plus(mut self, other: TrigPoly) -> Self {
        assert_eq!(self.dim, other.dim);
        self.terms.extend(other.terms);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[TrigTerm] {
        &self.terms
    }

    pub fn value(&self, u: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.value(u)).sum()
    }

    pub fn partial(&self, u: &[f64], axis: usize) -> f64 {
        self.terms.iter().map(|t| t.partial(u, axis)).sum()
    }

    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        (0..self.dim).map(|j| self.partial(u, j)).collect()
    }

    /// Derivative along `direction`.
    pub fn directional(&self, u: &[f64], direction: &[f64]) -> f64 {
        direction
            .iter()
            .enumerate()
            .map(|(j, &n)| n * self.partial(u, j))
            .sum()
    }

    pub fn laplacian(&self, u: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| -t.wavenumber_sq() * t.value(u))
            .sum()
    }

    /// `max_j sup |d_j p|`, bounded by the sum of coefficient magnitudes.
    pub fn gradient_sup_bound(&self, axis: usize) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff.abs() * TAU * t.factors[axis].1 as f64)
            .sum()
    }

    pub fn is_constant(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.factors.iter().all(|&(w, k)| k == 0 && w == Wave::Cos))
    }
}
