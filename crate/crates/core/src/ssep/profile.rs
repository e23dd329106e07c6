use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Configuration;
use crate::geometry::{MembraneRegion, TorusLattice};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// Independent sites, `P(η(x) = 1) = ρ₀(x/N)`.
    BernoulliProduct,
    /// `η(x) = 1` iff `ρ₀(x/N) >= 1/2`.
    DeterministicThreshold,
}

/// Initial density `ρ₀ : T^d → [0, 1]` and how to draw `η₀` from it.
#[derive(Clone)]
pub struct InitialProfile {
    rho0: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    mode: SamplingMode,
    label: String,
}

impl fmt::Debug for InitialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InitialProfile")
            .field("label", &self.label)
            .field("mode", &self.mode)
            .finish()
    }
}

impl InitialProfile {
    pub fn new(label: impl Into<String>, rho0: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            rho0: Arc::new(rho0),
            mode: SamplingMode::BernoulliProduct,
            label: label.into(),
        }
    }

    pub fn constant(theta: f64) -> Self {
        Self::new(format!("constant({theta})"), move |_| theta)
    }

    /// `mean + amplitude cos(2π u₁)`.
    pub fn cosine(mean: f64, amplitude: f64) -> Self {
        Self::new(format!("cosine({mean},{amplitude})"), move |u| {
            mean + amplitude * (std::f64::consts::TAU * u[0]).cos()
        })
    }

    /// `1_Λ`.
    pub fn indicator(region: MembraneRegion) -> Self {
        Self::new("step", move |u| if region.contains(u) { 1.0 } else { 0.0 })
    }

    pub fn with_mode(mut self, mode: SamplingMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn mode(&self) -> SamplingMode {
        self.mode
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `ρ₀(u)` clamped into `[0, 1]`.
    pub fn density(&self, u: &[f64]) -> f64 {
        (self.rho0)(u).clamp(0.0, 1.0)
    }

    /// Density sampled at every lattice site.
    pub fn discretize(&self, lattice: &TorusLattice) -> Vec<f64> {
        let mut pos = vec![0.0; lattice.dim()];
        (0..lattice.num_sites())
            .map(|x| {
                lattice.position_into(x, &mut pos);
                self.density(&pos)
            })
            .collect()
    }
}

/// Draw `η₀` associated to the profile.
pub fn sample_initial<R: Rng + ?Sized>(
    lattice: &TorusLattice,
    profile: &InitialProfile,
    rng: &mut R,
) -> Configuration {
    let rho = profile.discretize(lattice);
    match profile.mode() {
        SamplingMode::BernoulliProduct => Configuration::from_bits(rho.into_iter().map(|p| {
            // Degenerate densities consume no randomness.
            if p >= 1.0 {
                true
            } else if p <= 0.0 {
                false
            } else {
                rng.random::<f64>() < p
            }
        })),
        SamplingMode::DeterministicThreshold => {
            Configuration::from_bits(rho.into_iter().map(|p| p >= 0.5))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn degenerate_profiles() {
        let l = TorusLattice::new(2, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = sample_initial(&l, &InitialProfile::constant(1.0), &mut rng);
        assert_eq!(c.particle_count(), 256);
        let c = sample_initial(&l, &InitialProfile::constant(0.0), &mut rng);
        assert_eq!(c.particle_count(), 0);
    }

    #[test]
    fn binomial_band() {
        // Count ~ Bin(512, 1/2): mean 256, sd sqrt(128).
        let l = TorusLattice::new(1, 512).unwrap();
        let band = 4.0 * (512.0f64 * 0.25).sqrt();
        let inside = (0..100u64)
            .filter(|&s| {
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                let c = sample_initial(&l, &InitialProfile::constant(0.5), &mut rng);
                (c.particle_count() as f64 - 256.0).abs() <= band
            })
            .count();
        assert!(inside >= 95, "{inside} of 100 within band");
    }

    #[test]
    fn threshold_mode_is_deterministic() {
        let l = TorusLattice::new(1, 8).unwrap();
        let r = MembraneRegion::interval(0.25, 0.75).unwrap();
        let p = InitialProfile::cosine(0.5, 0.25).with_mode(SamplingMode::DeterministicThreshold);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = sample_initial(&TorusLattice::new(1, 6).unwrap(), &p, &mut rng);
        assert_eq!(c.occupancy(), &[1, 1, 0, 0, 0, 1]);
        let step = sample_initial(&l, &InitialProfile::indicator(r), &mut rng);
        assert_eq!(step.occupancy(), &[0, 0, 1, 1, 1, 1, 0, 0]);
    }
}
