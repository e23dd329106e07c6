use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{LevelSet, MembraneRegion};
use crate::pde::Mode;
use crate::ssep::{Beta, InitialProfile, ObservableFamily, SamplingMode};
use crate::trig::TrigPoly;

/// Membrane region as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
pub enum RegionSpec {
    Interval { a: f64, b: f64 },
    Ball { center: Vec<f64>, radius: f64 },
    /// `Λ = {phi <= 0}` with `phi` a trigonometric polynomial.
    Levelset { phi: TrigPoly, tubular_width: f64 },
}

impl RegionSpec {
    pub fn build(&self) -> Result<MembraneRegion> {
        match self {
            RegionSpec::Interval { a, b } => MembraneRegion::interval(*a, *b),
            RegionSpec::Ball { center, radius } => MembraneRegion::ball(center.clone(), *radius),
            RegionSpec::Levelset { phi, tubular_width } => {
                let (value, grad) = (phi.clone(), phi.clone());
                MembraneRegion::level_set(
                    LevelSet::new(phi.dim(), move |u: &[f64]| value.value(u), *tubular_width)
                        .with_gradient(move |u: &[f64]| grad.gradient(u)),
                )
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            RegionSpec::Interval { .. } => 1,
            RegionSpec::Ball { center, .. } => center.len(),
            RegionSpec::Levelset { phi, .. } => phi.dim(),
        }
    }
}

/// Initial density presets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProfileSpec {
    Constant {
        theta: f64,
        #[serde(default = "default_sampling")]
        sampling: SamplingMode,
    },
    /// `mean + amplitude cos(2π u₁)`.
    Cosine {
        mean: f64,
        amplitude: f64,
        #[serde(default = "default_sampling")]
        sampling: SamplingMode,
    },
    /// `1_Λ`.
    Step {
        #[serde(default = "default_sampling")]
        sampling: SamplingMode,
    },
}

fn default_sampling() -> SamplingMode {
    SamplingMode::BernoulliProduct
}

impl ProfileSpec {
    pub fn build(&self, region: &MembraneRegion) -> Result<InitialProfile> {
        let check = |v: f64, what: &str| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::Config(format!("{what} must lie in [0, 1], got {v}")))
            }
        };
        Ok(match self {
            ProfileSpec::Constant { theta, sampling } => {
                check(*theta, "theta")?;
                InitialProfile::constant(*theta).with_mode(*sampling)
            }
            ProfileSpec::Cosine {
                mean,
                amplitude,
                sampling,
            } => {
                check(mean - amplitude.abs(), "mean - |amplitude|")?;
                check(mean + amplitude.abs(), "mean + |amplitude|")?;
                InitialProfile::cosine(*mean, *amplitude).with_mode(*sampling)
            }
            ProfileSpec::Step { sampling } => InitialProfile::indicator(region.clone()).with_mode(*sampling),
        })
    }
}

fn default_observables() -> Vec<String> {
    ["one", "cos", "sin", "indicator"].map(String::from).to_vec()
}

fn default_replicas() -> usize {
    1
}

fn default_alpha() -> f64 {
    1.0
}

/// One experiment, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub d: usize,
    /// Simulation sizes, ascending.
    pub n_list: Vec<usize>,
    /// PDE grid side; defaults to `max(256, 2 max N)` in d = 1 and 128 otherwise.
    #[serde(default)]
    pub n_grid: Option<usize>,
    pub beta: Beta,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub region: RegionSpec,
    pub rho0: ProfileSpec,
    #[serde(default = "default_observables")]
    pub observables: Vec<String>,
    /// Comparison times; must start at 0 or later and increase.
    pub t_grid: Vec<f64>,
    /// Trajectory recording step; recorded times are its multiples up to
    /// the last comparison time. Defaults to the comparison grid itself.
    #[serde(default)]
    pub dt_record: Option<f64>,
    /// Local-mean window `ε` for the replacement diagnostic.
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// PDE time step; defaults to `0.25 / N_g`.
    #[serde(default)]
    pub dt: Option<f64>,
    /// β values for the phase-transition table.
    #[serde(default)]
    pub beta_list: Vec<Beta>,
    /// PDE mode for `solve-pde`; defaults to the regime of `beta`.
    #[serde(default)]
    pub mode: Option<Mode>,
    /// Largest accepted gap between the reference at `N_g` and `N_g / 2`.
    #[serde(default)]
    pub self_convergence_tol: Option<f64>,
}

/// Default reference self-convergence tolerance.
pub const SELF_CONVERGENCE_TOL: f64 = 0.01;
const TIME_MATCH_TOL: f64 = 1e-9;

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.d == 0 {
            return fail("d must be at least 1".into());
        }
        if self.region.dim() != self.d {
            return fail(format!("region has dimension {} but d = {}", self.region.dim(), self.d));
        }
        if self.n_list.is_empty() {
            return fail("n_list is empty".into());
        }
        if self.n_list.windows(2).any(|w| w[1] <= w[0]) {
            return fail("n_list must be strictly ascending".into());
        }
        if self.n_list[0] < 2 {
            return fail("lattice sizes must be at least 2".into());
        }
        if self.replicas == 0 {
            return fail("replicas must be at least 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return fail(format!("alpha must be positive, got {}", self.alpha));
        }
        if self.observables.is_empty() {
            return fail("observable family is empty".into());
        }
        if self.t_grid.is_empty() {
            return fail("t_grid is empty".into());
        }
        if self.t_grid[0] < 0.0 || self.t_grid.windows(2).any(|w| w[1] <= w[0]) {
            return fail("t_grid must be nonnegative and strictly increasing".into());
        }
        if let Some(dt) = self.dt_record {
            if !(dt > 0.0) {
                return fail("dt_record must be positive".into());
            }
            for &t in &self.t_grid {
                let k = (t / dt).round();
                if (t - k * dt).abs() > TIME_MATCH_TOL * t.max(1.0) {
                    return fail(format!("t_grid entry {t} is not a multiple of dt_record {dt}"));
                }
            }
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return fail("dt must be positive".into());
            }
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e < 1.0) {
                return fail(format!("epsilon must lie in (0, 1), got {e}"));
            }
        }
        if let Some(n) = self.n_grid {
            if n < 4 {
                return fail("n_grid must be at least 4".into());
            }
        }
        ObservableFamily::presets(&self.observables, self.d)?;
        Ok(())
    }

    pub fn region(&self) -> Result<MembraneRegion> {
        self.region.build()
    }

    pub fn profile(&self) -> Result<InitialProfile> {
        self.rho0.build(&self.region()?)
    }

    pub fn observable_family(&self) -> Result<ObservableFamily> {
        ObservableFamily::presets(&self.observables, self.d)
    }

    pub fn largest_n(&self) -> usize {
        *self.n_list.last().expect("validated non-empty")
    }

    pub fn grid_side(&self) -> usize {
        self.n_grid.unwrap_or(if self.d == 1 {
            256.max(2 * self.largest_n())
        } else {
            128
        })
    }

    pub fn pde_dt(&self) -> f64 {
        self.dt.unwrap_or(0.25 / self.grid_side() as f64)
    }

    pub fn mode(&self) -> Mode {
        self.mode.unwrap_or_else(|| Mode::for_beta(self.beta))
    }

    pub fn self_convergence_tol(&self) -> f64 {
        self.self_convergence_tol.unwrap_or(SELF_CONVERGENCE_TOL)
    }

    /// Times at which trajectories are recorded; `t_grid` is a subset.
    pub fn recorded_times(&self) -> Vec<f64> {
        let t_end = *self.t_grid.last().expect("validated non-empty");
        match self.dt_record {
            None => self.t_grid.clone(),
            Some(dt) => {
                let steps = (t_end / dt).round() as usize;
                (0..=steps).map(|k| k as f64 * dt).collect()
            }
        }
    }

    /// Indices into [`Self::recorded_times`] of the comparison times.
    pub fn comparison_indices(&self) -> Vec<usize> {
        let rec = self.recorded_times();
        self.t_grid
            .iter()
            .map(|&t| {
                rec.iter()
                    .position(|&r| (r - t).abs() <= TIME_MATCH_TOL * t.max(1.0))
                    .expect("validated subset")
            })
            .collect()
    }

    /// Copy with `master_seed` replaced.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    /// SHA-256 of the canonical JSON echo, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serialises");
        hex::encode(Sha256::digest(&json))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
d = 1
n_list = [64, 128]
beta = "inf"
region = { shape = "interval", a = 0.25, b = 0.75 }
rho0 = { preset = "step" }
t_grid = [0.0, 0.05, 0.1]
dt_record = 0.01
replicas = 4
master_seed = 7
"#;

    #[test]
    fn parses_and_defaults() {
        let c = ScenarioConfig::from_toml_str(BASIC).unwrap();
        assert_eq!(c.beta, Beta::Infinite);
        assert_eq!(c.grid_side(), 256);
        assert_eq!(c.observables.len(), 4);
        assert_eq!(c.mode(), Mode::Neumann);
        assert_eq!(c.recorded_times().len(), 11);
        assert_eq!(c.comparison_indices(), vec![0, 5, 10]);
        assert_eq!(c.pde_dt(), 0.25 / 256.0);
    }

    #[test]
    fn numeric_beta_and_ball() {
        let text = r#"
d = 2
n_list = [32]
beta = 1
alpha = 0.5
region = { shape = "ball", center = [0.5, 0.5], radius = 0.25 }
rho0 = { preset = "cosine", mean = 0.5, amplitude = 0.2 }
observables = ["one", "cos"]
t_grid = [0.1]
"#;
        let c = ScenarioConfig::from_toml_str(text).unwrap();
        assert_eq!(c.beta, Beta::Finite(1.0));
        assert_eq!(c.grid_side(), 128);
        assert_eq!(c.mode(), Mode::Robin);
        assert!(c.region().is_ok());
    }

    #[test]
    fn level_set_region() {
        let text = r#"
d = 2
n_list = [32]
beta = 2
region = { shape = "levelset", tubular_width = 0.1, phi = { dim = 2, terms = [
  { coeff = 1.0, factors = [["cos", 1], ["cos", 0]] },
  { coeff = 0.2, factors = [["cos", 0], ["cos", 0]] },
] } }
rho0 = { preset = "constant", theta = 0.3 }
t_grid = [0.1]
"#;
        let c = ScenarioConfig::from_toml_str(text).unwrap();
        let r = c.region().unwrap();
        assert!(r.contains(&[0.5, 0.5]));
        assert!(!r.contains(&[0.0, 0.5]));
    }

    #[test]
    fn validation_errors() {
        let bad = [
            BASIC.replace("observables", "x") + "observables = []\n",
            BASIC.replace("n_list = [64, 128]", "n_list = [128, 64]"),
            BASIC.replace("replicas = 4", "replicas = 0"),
            BASIC.replace("t_grid = [0.0, 0.05, 0.1]", "t_grid = [0.0, 0.055]"),
            BASIC.replace("d = 1", "d = 2"),
            BASIC.to_string() + "unknown_key = 3\n",
            BASIC.replace("observables", "x") + "observables = [\"bogus\"]\n",
        ];
        for text in bad {
            let err = ScenarioConfig::from_toml_str(&text).unwrap_err();
            assert_eq!(err.category(), "config", "{text}");
        }
    }

    #[test]
    fn hash_tracks_seed() {
        let c = ScenarioConfig::from_toml_str(BASIC).unwrap();
        assert_eq!(c.hash(), c.clone().hash());
        assert_ne!(c.hash(), c.clone().with_seed(8).hash());
        assert_eq!(c.hash().len(), 64);
    }
}
