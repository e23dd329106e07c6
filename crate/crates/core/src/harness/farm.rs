use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::{Error, Result};
use crate::geometry::{classify_bonds, BondClassification, MembraneRegion, TorusLattice};
use crate::ssep::{
    replacement_weights, replica_rng, sample_initial, Beta, Configuration, DiscrepancyScaling, Dynamics,
    InitialProfile, LinearTracker, ObservableFamily, RateField, WindowVariant,
};

/// Everything a replica needs about one lattice size.
#[derive(Debug, Clone)]
pub struct ParticleSystem {
    pub lattice: TorusLattice,
    pub class: BondClassification,
    pub rates: RateField,
    dynamics: Dynamics,
}

impl ParticleSystem {
    pub fn new(dim: usize, side: usize, region: &MembraneRegion, beta: Beta, alpha: f64) -> Result<Self> {
        let lattice = TorusLattice::new(dim, side)?;
        let class = classify_bonds(&lattice, region)?;
        let rates = RateField::new(beta, alpha, side)?;
        let dynamics = Dynamics::new(&lattice, &class, &rates);
        Ok(Self {
            lattice,
            class,
            rates,
            dynamics,
        })
    }

    pub fn dynamics(&self) -> &Dynamics {
        &self.dynamics
    }
}

/// What one replica recorded, indexed `[observable][time]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaTrace {
    pub replica: u64,
    pub pairings: Vec<Vec<f64>>,
    pub particle_counts: Vec<usize>,
    pub inside_counts: Vec<usize>,
    /// `|∫_0^t N^{1-d} Σ_{Γ_N} (η^{εN} - η) ds|` when a window is configured.
    pub replacement: Option<Vec<f64>>,
    pub final_config: Configuration,
}

/// Run one replica from `η₀ ~ profile` and record `⟨π_t, H⟩` for every
/// observable at every time in `times` (which must start at 0 or later).
pub fn simulate_replica(
    system: &ParticleSystem,
    profile: &InitialProfile,
    family: &ObservableFamily,
    times: &[f64],
    epsilon: Option<f64>,
    master_seed: u64,
    replica: u64,
) -> Result<ReplicaTrace> {
    let mut rng = replica_rng(master_seed, replica);
    let lattice = &system.lattice;
    let class = &system.class;
    let mut config = sample_initial(lattice, profile, &mut rng);
    let vol = lattice.cell_volume();
    let mut trackers: Vec<LinearTracker> = family
        .iter()
        .map(|h| {
            let w = h.site_values(lattice, class).into_iter().map(|v| v * vol).collect();
            LinearTracker::new(w, &config)
        })
        .collect();
    let mut replacement = match epsilon {
        Some(eps) => {
            let variant = match system.rates.beta() {
                Beta::Finite(b) if b < 1.0 => WindowVariant::Box,
                _ => WindowVariant::Sided,
            };
            let w = replacement_weights(lattice, class, |_| 1.0, eps, variant, DiscrepancyScaling::Membrane)?;
            Some(LinearTracker::new(w, &config))
        }
        None => None,
    };
    let mut trace = ReplicaTrace {
        replica,
        pairings: vec![Vec::with_capacity(times.len()); family.len()],
        particle_counts: Vec::with_capacity(times.len()),
        inside_counts: Vec::with_capacity(times.len()),
        replacement: replacement.as_ref().map(|_| Vec::with_capacity(times.len())),
        final_config: Configuration::empty(0),
    };
    let mut t = 0.0;
    for &target in times {
        if target < t {
            return Err(Error::InvalidArgument("recording times must increase".into()));
        }
        let mut observers = (&mut trackers[..], replacement.as_mut());
        system.dynamics.advance(&mut config, t, target, &mut rng, &mut observers);
        t = target;
        for (series, tr) in trace.pairings.iter_mut().zip(&trackers) {
            series.push(tr.value());
        }
        trace.particle_counts.push(config.recount());
        trace.inside_counts.push(config.inside_count(class));
        if let (Some(out), Some(tr)) = (trace.replacement.as_mut(), replacement.as_ref()) {
            out.push(tr.integral().abs());
        }
    }
    trace.final_config = config;
    Ok(trace)
}

/// A pool with `workers` threads; 0 uses one per core.
pub fn thread_pool(workers: usize) -> Result<ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))
}

/// Run replicas `0..replicas` on `pool`. Results are in replica order and
/// do not depend on the number of workers.
pub fn run_replicas(
    pool: &ThreadPool,
    system: &ParticleSystem,
    profile: &InitialProfile,
    family: &ObservableFamily,
    times: &[f64],
    epsilon: Option<f64>,
    master_seed: u64,
    replicas: usize,
) -> Result<Vec<ReplicaTrace>> {
    pool.install(|| {
        (0..replicas as u64)
            .into_par_iter()
            .map(|k| simulate_replica(system, profile, family, times, epsilon, master_seed, k))
            .collect()
    })
}
