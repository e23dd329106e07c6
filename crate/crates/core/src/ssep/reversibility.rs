//! Exact checks on the full state space of small one-dimensional systems.

use serde::{Deserialize, Serialize};

use super::RateField;
use crate::error::{Error, Result};
use crate::geometry::{BondClassification, TorusLattice};

/// Largest torus for which the `2^N` state space is enumerated.
pub const MAX_ENUMERATED_SIDE: usize = 10;

/// Sparse generator `N² ℒ_N` on `{0,1}^N`, states encoded as bit masks.
#[derive(Debug, Clone)]
pub struct StateSpaceGenerator {
    side: usize,
    /// `(η, η^{x,y}, rate)` for every effective exchange.
    transitions: Vec<(u32, u32, f64)>,
}

impl StateSpaceGenerator {
    pub fn new(lattice: &TorusLattice, class: &BondClassification, rates: &RateField) -> Result<Self> {
        if lattice.dim() != 1 {
            return Err(Error::UnsupportedDimension(lattice.dim()));
        }
        let side = lattice.side();
        if side > MAX_ENUMERATED_SIDE {
            return Err(Error::TooLarge { size: 1 << side });
        }
        let n2 = (side as f64).powi(2);
        let mut transitions = Vec::new();
        for eta in 0u32..(1 << side) {
            for b in 0..lattice.num_bonds() {
                let (x, y) = lattice.bond(b);
                let (ox, oy) = ((eta >> x) & 1, (eta >> y) & 1);
                let r = rates.rate(class, b);
                if ox != oy && r > 0.0 {
                    transitions.push((eta, eta ^ (1 << x) ^ (1 << y), n2 * r));
                }
            }
        }
        Ok(Self { side, transitions })
    }

    pub fn num_states(&self) -> usize {
        1 << self.side
    }

    /// `(L f)(η) = Σ rate (f(η') - f(η))`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_states()];
        for &(a, b, r) in &self.transitions {
            out[a as usize] += r * (f[b as usize] - f[a as usize]);
        }
        out
    }
}

/// Bernoulli product weight `ν_θ(η)`.
pub fn bernoulli_weight(eta: u32, side: usize, theta: f64) -> f64 {
    let k = (eta & ((1u64 << side) - 1) as u32).count_ones() as i32;
    theta.powi(k) * (1.0 - theta).powi(side as i32 - k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReversibilityReport {
    /// `max |ν(η) L(η,η') - ν(η') L(η',η)|`.
    pub detailed_balance_error: f64,
    /// `½ Σ_η ν(η) Σ_{η'} L(η,η') (f(η') - f(η))²`.
    pub dirichlet_form: f64,
    /// `⟨f, -L f⟩_ν`.
    pub quadratic_form: f64,
}

/// Check detailed balance of `N² ℒ_N` under `ν_θ` and compare the Dirichlet
/// form with `⟨f, -Lf⟩_ν` for the given test function on `{0,1}^N`.
pub fn check_reversibility(
    lattice: &TorusLattice,
    class: &BondClassification,
    rates: &RateField,
    theta: f64,
    f: &[f64],
) -> Result<ReversibilityReport> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidArgument(format!("theta must lie in [0, 1], got {theta}")));
    }
    let gen = StateSpaceGenerator::new(lattice, class, rates)?;
    if f.len() != gen.num_states() {
        return Err(Error::DimensionMismatch {
            expected: gen.num_states(),
            got: f.len(),
        });
    }
    let side = gen.side;
    let nu = |eta: u32| bernoulli_weight(eta, side, theta);

    let mut rate_of = std::collections::HashMap::with_capacity(gen.transitions.len());
    for &(a, b, r) in &gen.transitions {
        *rate_of.entry((a, b)).or_insert(0.0) += r;
    }
    let detailed_balance_error = rate_of
        .iter()
        .map(|(&(a, b), &r)| {
            let back = rate_of.get(&(b, a)).copied().unwrap_or(0.0);
            (nu(a) * r - nu(b) * back).abs()
        })
        .fold(0.0, f64::max);

    let dirichlet_form = 0.5
        * gen
            .transitions
            .iter()
            .map(|&(a, b, r)| nu(a) * r * (f[b as usize] - f[a as usize]).powi(2))
            .sum::<f64>();
    let lf = gen.apply(f);
    let quadratic_form = -(0..gen.num_states())
        .map(|eta| nu(eta as u32) * f[eta] * lf[eta])
        .sum::<f64>();
    Ok(ReversibilityReport {
        detailed_balance_error,
        dirichlet_form,
        quadratic_form,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{classify_bonds, MembraneRegion};
    use crate::ssep::Beta;

    fn setup(n: usize, beta: Beta) -> (TorusLattice, BondClassification, RateField) {
        let l = TorusLattice::new(1, n).unwrap();
        let c = classify_bonds(&l, &MembraneRegion::interval(0.25, 0.75).unwrap()).unwrap();
        let r = RateField::new(beta, 0.7, n).unwrap();
        (l, c, r)
    }

    #[test]
    fn reversible_for_every_regime() {
        for beta in [Beta::Finite(0.0), Beta::Finite(1.0), Beta::Finite(2.5), Beta::Infinite] {
            let (l, c, r) = setup(8, beta);
            let f: Vec<f64> = (0..256).map(|e| ((e * 37 % 101) as f64).sin()).collect();
            for theta in [0.2, 0.5, 0.9] {
                let rep = check_reversibility(&l, &c, &r, theta, &f).unwrap();
                assert!(rep.detailed_balance_error < 1e-12);
                assert!(rep.dirichlet_form >= 0.0);
                let scale = rep.dirichlet_form.abs().max(1.0);
                assert!((rep.dirichlet_form - rep.quadratic_form).abs() < 1e-10 * scale);
            }
        }
    }

    #[test]
    fn constants_have_zero_form() {
        let (l, c, r) = setup(8, Beta::Finite(1.0));
        let rep = check_reversibility(&l, &c, &r, 0.5, &vec![3.0; 256]).unwrap();
        assert_eq!(rep.dirichlet_form, 0.0);
        assert!(rep.quadratic_form.abs() < 1e-12);
    }

    #[test]
    fn rejects_large_or_multidimensional() {
        let (l, c, r) = setup(16, Beta::Finite(1.0));
        assert!(StateSpaceGenerator::new(&l, &c, &r).is_err());
        let l2 = TorusLattice::new(2, 16).unwrap();
        let c2 = classify_bonds(&l2, &MembraneRegion::ball(vec![0.5, 0.5], 0.3).unwrap()).unwrap();
        assert!(StateSpaceGenerator::new(&l2, &c2, &r).is_err());
    }

    #[test]
    fn bernoulli_weights_sum_to_one() {
        let s: f64 = (0u32..1024).map(|e| bernoulli_weight(e, 10, 0.3)).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }
}
