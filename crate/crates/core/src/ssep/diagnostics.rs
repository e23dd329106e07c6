//! Dynkin martingales, their quadratic variation and the replacement
//! statistics, all integrated exactly along piecewise-constant paths.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dynamics::{Dynamics, Observer};
use super::local_mean::{box_window, sided_window, window_length};
use super::{Configuration, Observable, RateField};
use crate::error::{Error, Result};
use crate::geometry::{BondClassification, TorusLattice};

/// `𝕃_N H(x/N)`: the one-particle random-walk generator applied to site
/// values of `H` (no `N²` factor).
pub fn one_particle_generator(
    lattice: &TorusLattice,
    class: &BondClassification,
    rates: &RateField,
    values: &[f64],
) -> Vec<f64> {
    (0..lattice.num_sites())
        .map(|x| {
            (0..lattice.dim())
                .map(|j| {
                    let fwd = lattice.forward(x, j);
                    let bwd = lattice.backward(x, j);
                    let r_fwd = rates.rate(class, lattice.bond_id(x, j));
                    let r_bwd = rates.rate(class, lattice.bond_id(bwd, j));
                    r_fwd * (values[fwd] - values[x]) + r_bwd * (values[bwd] - values[x])
                })
                .sum()
        })
        .collect()
}

/// Tracks `Σ_x w_x η(x)` and its time integral.
#[derive(Debug, Clone)]
pub struct LinearTracker {
    weights: Vec<f64>,
    value: f64,
    integral: f64,
}

impl LinearTracker {
    pub fn new(weights: Vec<f64>, config: &Configuration) -> Self {
        let value = config
            .occupancy()
            .iter()
            .zip(&weights)
            .map(|(&b, w)| b as f64 * w)
            .sum();
        Self {
            weights,
            value,
            integral: 0.0,
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn integral(&self) -> f64 {
        self.integral
    }
}

impl Observer for LinearTracker {
    fn elapse(&mut self, dt: f64, _config: &Configuration) {
        self.integral += self.value * dt;
    }

    fn swapped(&mut self, x: usize, y: usize, config: &Configuration) {
        // After the swap η(x) and η(y) differ; the particle moved towards
        // whichever is now occupied.
        let dx = config.get(x) as f64 - config.get(y) as f64;
        self.value += dx * (self.weights[x] - self.weights[y]);
    }
}

/// Dynkin martingale `M_t(H)` and its predictable quadratic variation.
#[derive(Debug, Clone)]
pub struct MartingaleTracker {
    pairing: LinearTracker,
    drift: LinearTracker,
    initial_pairing: f64,
    bond_weight: Vec<f64>,
    bond_ends: Vec<(usize, usize)>,
    incident: Vec<Vec<usize>>,
    qv_rate: f64,
    qv: f64,
}

impl MartingaleTracker {
    pub fn new(
        lattice: &TorusLattice,
        class: &BondClassification,
        rates: &RateField,
        observable: &Observable,
        config: &Configuration,
    ) -> Self {
        let n = lattice.side() as f64;
        let d = lattice.dim() as i32;
        let h = observable.site_values(lattice, class);
        let vol = lattice.cell_volume();
        let pairing = LinearTracker::new(h.iter().map(|v| v * vol).collect(), config);
        let drift_weights = one_particle_generator(lattice, class, rates, &h)
            .into_iter()
            .map(|v| v * n * n * vol)
            .collect();
        let drift = LinearTracker::new(drift_weights, config);
        // ξ_b N^{2-2d} (ΔH_b)², charged while the bond's ends differ.
        let scale = n.powi(2 - 2 * d);
        let bond_weight: Vec<f64> = (0..lattice.num_bonds())
            .map(|b| {
                let (x, y) = lattice.bond(b);
                rates.rate(class, b) * scale * (h[y] - h[x]).powi(2)
            })
            .collect();
        let incident = (0..lattice.num_sites())
            .map(|x| {
                (0..lattice.dim())
                    .flat_map(|j| [lattice.bond_id(x, j), lattice.bond_id(lattice.backward(x, j), j)])
                    .collect()
            })
            .collect();
        let qv_rate = (0..lattice.num_bonds())
            .filter(|&b| {
                let (x, y) = lattice.bond(b);
                config.get(x) != config.get(y)
            })
            .map(|b| bond_weight[b])
            .sum();
        let initial_pairing = pairing.value();
        Self {
            pairing,
            drift,
            initial_pairing,
            bond_weight,
            bond_ends: (0..lattice.num_bonds()).map(|b| lattice.bond(b)).collect(),
            incident,
            qv_rate,
            qv: 0.0,
        }
    }

    /// `⟨π_t,H⟩ - ⟨π_0,H⟩ - ∫_0^t ⟨π_s, N² 𝕃_N H⟩ ds`.
    pub fn martingale(&self) -> f64 {
        self.pairing.value() - self.initial_pairing - self.drift.integral()
    }

    pub fn quadratic_variation(&self) -> f64 {
        self.qv
    }

    pub fn pairing(&self) -> f64 {
        self.pairing.value()
    }

    fn bond_charge(&self, b: usize, occ: impl Fn(usize) -> u8) -> f64 {
        let (x, y) = self.bond_ends[b];
        if occ(x) != occ(y) {
            self.bond_weight[b]
        } else {
            0.0
        }
    }
}

impl Observer for MartingaleTracker {
    fn elapse(&mut self, dt: f64, config: &Configuration) {
        self.pairing.elapse(dt, config);
        self.drift.elapse(dt, config);
        self.qv += self.qv_rate * dt;
    }

    fn swapped(&mut self, x: usize, y: usize, config: &Configuration) {
        self.pairing.swapped(x, y, config);
        self.drift.swapped(x, y, config);
        let mut bonds: Vec<usize> = self.incident[x].iter().chain(&self.incident[y]).copied().collect();
        bonds.sort_unstable();
        bonds.dedup();
        let before = |z: usize| {
            if z == x {
                config.get(y)
            } else if z == y {
                config.get(x)
            } else {
                config.get(z)
            }
        };
        let after = |z: usize| config.get(z);
        for &b in &bonds {
            self.qv_rate -= self.bond_charge(b, before);
            self.qv_rate += self.bond_charge(b, after);
        }
    }
}

/// Samples of `M_t` and `⟨M⟩_t` on a time grid for one replica.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleSeries {
    pub times: Vec<f64>,
    pub martingale: Vec<f64>,
    pub quadratic_variation: Vec<f64>,
}

/// Run one trajectory from `config` and record the Dynkin martingale of `H`.
pub fn martingale_track<R: Rng + ?Sized>(
    lattice: &TorusLattice,
    class: &BondClassification,
    rates: &RateField,
    observable: &Observable,
    mut config: Configuration,
    times: &[f64],
    rng: &mut R,
) -> MartingaleSeries {
    let dynamics = Dynamics::new(lattice, class, rates);
    let mut tracker = MartingaleTracker::new(lattice, class, rates, observable, &config);
    let mut series = MartingaleSeries {
        times: times.to_vec(),
        martingale: Vec::with_capacity(times.len()),
        quadratic_variation: Vec::with_capacity(times.len()),
    };
    let mut t = 0.0;
    for &target in times {
        dynamics.advance(&mut config, t, target, rng, &mut tracker);
        t = target;
        series.martingale.push(tracker.martingale());
        series.quadratic_variation.push(tracker.quadratic_variation());
    }
    series
}

/// Upper bound `max(1, α) t N^{-d} Σ_j ‖∂_j H‖²_∞` on `⟨M(H)⟩_t`.
pub fn quadratic_variation_cap(lattice: &TorusLattice, rates: &RateField, observable: &Observable, t: f64) -> f64 {
    rates.alpha().max(1.0) * t * lattice.cell_volume() * observable.gradient_sup_sq()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowVariant {
    /// Forward box, for `β < 1`.
    Box,
    /// Same-side box `C_N[x, εN]`, for `β ≥ 1`.
    Sided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscrepancyScaling {
    /// Sum over `Γ_N`, scaled by `N^{1-d}`.
    Membrane,
    /// Sum over all sites, scaled by `N^{-d}`.
    Bulk,
}

/// Weights `w` with `Σ_y w_y η(y) = scale Σ_x λ(x) (η^{εN}(x) - η(x))`.
pub fn replacement_weights(
    lattice: &TorusLattice,
    class: &BondClassification,
    lambda: impl Fn(usize) -> f64,
    epsilon: f64,
    variant: WindowVariant,
    scaling: DiscrepancyScaling,
) -> Result<Vec<f64>> {
    let ell = window_length(lattice, epsilon);
    if ell < 1 {
        return Err(Error::InvalidArgument(format!(
            "window ⌊εN⌋ = 0 for ε = {epsilon}, N = {}",
            lattice.side()
        )));
    }
    let n = lattice.side() as f64;
    let d = lattice.dim() as i32;
    let all: Vec<usize>;
    let (sites, scale): (&[usize], f64) = match scaling {
        DiscrepancyScaling::Membrane => (class.gamma(), n.powi(1 - d)),
        DiscrepancyScaling::Bulk => {
            all = (0..lattice.num_sites()).collect();
            (&all, n.powi(-d))
        }
    };
    let mut w = vec![0.0; lattice.num_sites()];
    for &x in sites {
        let lam = lambda(x) * scale;
        if lam == 0.0 {
            continue;
        }
        let window = match variant {
            WindowVariant::Box => box_window(lattice, x, ell),
            WindowVariant::Sided => sided_window(lattice, class, x, ell),
        };
        if window.is_empty() {
            return Err(Error::EmptyWindow { site: x });
        }
        let share = lam / window.len() as f64;
        for y in window {
            w[y] += share;
        }
        w[x] -= lam;
    }
    Ok(w)
}

/// `|∫_0^t scale Σ λ(x) (η_s^{εN}(x) - η_s(x)) ds|` along one trajectory.
#[allow(clippy::too_many_arguments)]
pub fn replacement_discrepancy<R: Rng + ?Sized>(
    lattice: &TorusLattice,
    class: &BondClassification,
    rates: &RateField,
    mut config: Configuration,
    lambda: impl Fn(usize) -> f64,
    epsilon: f64,
    variant: WindowVariant,
    scaling: DiscrepancyScaling,
    t: f64,
    rng: &mut R,
) -> Result<f64> {
    let weights = replacement_weights(lattice, class, lambda, epsilon, variant, scaling)?;
    let mut tracker = LinearTracker::new(weights, &config);
    Dynamics::new(lattice, class, rates).advance(&mut config, 0.0, t, rng, &mut tracker);
    Ok(tracker.integral().abs())
}
