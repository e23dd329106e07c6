use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::farm::{run_replicas, thread_pool, ParticleSystem, ReplicaTrace};
use crate::error::{Error, Result};
use crate::geometry::{
    boundary_sum, surface_integral, BondClassification, MembraneRegion, Side, SumVariant, SurfaceWeight, TorusLattice,
};
use crate::pde::{assemble, solve, DensityField, Mode, Solution};
use crate::spectral::{green_identity_check, spectrum, verify_operator, GreenResidual, OperatorReport, SpectrumReport};
use crate::ssep::{Beta, InitialProfile, ObservableFamily};
use crate::trig::{TrigPoly, Wave};

/// PDE pairings `⟨ρ_t, H⟩` on the comparison grid, indexed `[observable][time]`.
#[derive(Debug, Clone)]
pub struct Reference {
    pub mode: Mode,
    pub side: usize,
    pub pairings: Vec<Vec<f64>>,
    pub solution: Solution,
    /// `max |⟨ρ^{N_g},H⟩ - ⟨ρ^{N_g/2},H⟩|` over observables and times.
    pub self_convergence: f64,
}

fn grid_pairings(
    dim: usize,
    side: usize,
    dt: f64,
    region: &MembraneRegion,
    mode: Mode,
    alpha: f64,
    profile: &InitialProfile,
    family: &ObservableFamily,
    t_grid: &[f64],
) -> Result<(Vec<Vec<f64>>, Solution)> {
    let lattice = TorusLattice::cell_centered(dim, side)?;
    let g = assemble(&lattice, region, mode, alpha)?;
    let sol = solve(DensityField::from_profile(&lattice, profile), &g, t_grid, dt)?;
    let pairings = family
        .iter()
        .map(|h| {
            let hv = h.site_values(&lattice, g.classification());
            sol.fields.iter().map(|f| f.pairing_with(&hv)).collect()
        })
        .collect();
    Ok((pairings, sol))
}

/// Solve the reference PDE for `mode` at the configured grid and gate it on
/// agreement with the half-resolution solve.
pub fn solve_reference(cfg: &ScenarioConfig, mode: Mode) -> Result<Reference> {
    let region = cfg.region()?;
    let profile = cfg.profile()?;
    let family = cfg.observable_family()?;
    let side = cfg.grid_side();
    let (pairings, solution) = grid_pairings(
        cfg.d, side, cfg.pde_dt(), &region, mode, cfg.alpha, &profile, &family, &cfg.t_grid,
    )?;
    let half = side / 2;
    let half_dt = cfg.dt.unwrap_or(0.25 / half as f64);
    let (coarse, _) = grid_pairings(cfg.d, half, half_dt, &region, mode, cfg.alpha, &profile, &family, &cfg.t_grid)?;
    let self_convergence = max_gap(&pairings, &coarse);
    let tolerance = cfg.self_convergence_tol();
    if self_convergence > tolerance {
        return Err(Error::NotConverged {
            quantity: "reference self-convergence gap",
            value: self_convergence,
            tolerance,
        });
    }
    Ok(Reference {
        mode,
        side,
        pairings,
        solution,
        self_convergence,
    })
}

fn max_gap(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

/// Replica-mean pairings restricted to the comparison times, `[observable][time]`.
fn mean_pairings(traces: &[ReplicaTrace], indices: &[usize]) -> Vec<Vec<f64>> {
    let n_obs = traces[0].pairings.len();
    let r = traces.len() as f64;
    (0..n_obs)
        .map(|o| {
            indices
                .iter()
                .map(|&k| traces.iter().map(|tr| tr.pairings[o][k]).sum::<f64>() / r)
                .collect()
        })
        .collect()
}

fn sup_error(sim: &[f64], reference: &[f64]) -> f64 {
    sim.iter().zip(reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub beta: Beta,
    pub alpha: f64,
    pub n: usize,
    pub observable: String,
    /// `sup_t |mean_replicas ⟨π_t,H⟩ - ⟨ρ_t,H⟩|`.
    pub sup_t_error: f64,
    /// Mean and sample standard deviation over replicas of each replica's
    /// own `sup_t |⟨π_t,H⟩ - ⟨ρ_t,H⟩|`.
    pub mean: f64,
    pub std: f64,
    pub replicas: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub beta: Beta,
    pub alpha: f64,
    pub mode: Mode,
    pub config_hash: String,
    pub grid_side: usize,
    pub self_convergence: f64,
    pub max_mass_drift: f64,
    pub rows: Vec<ConvergenceRow>,
    /// Every trajectory kept its particle number.
    pub particles_conserved: bool,
    /// Every trajectory kept its number of particles in `Λ`.
    pub inside_conserved: bool,
}

impl ConvergenceReport {
    /// `max_H error(N, H)`.
    pub fn error(&self, n: usize) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.n == n)
            .map(|r| r.sup_t_error)
            .reduce(f64::max)
    }
}

fn conserved(traces: &[ReplicaTrace], pick: impl Fn(&ReplicaTrace) -> &[usize]) -> bool {
    traces.iter().all(|t| pick(t).windows(2).all(|w| w[0] == w[1]))
}

/// Simulate every `N` of the config and compare with the PDE of its regime.
pub fn run_convergence(cfg: &ScenarioConfig, workers: usize) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let mode = Mode::for_beta(cfg.beta);
    let reference = solve_reference(cfg, mode)?;
    let region = cfg.region()?;
    let profile = cfg.profile()?;
    let family = cfg.observable_family()?;
    let times = cfg.recorded_times();
    let indices = cfg.comparison_indices();
    let pool = thread_pool(workers)?;
    let mut rows = Vec::with_capacity(cfg.n_list.len() * family.len());
    let (mut particles_conserved, mut inside_conserved) = (true, true);
    for &n in &cfg.n_list {
        let system = ParticleSystem::new(cfg.d, n, &region, cfg.beta, cfg.alpha)?;
        let traces = run_replicas(&pool, &system, &profile, &family, &times, None, cfg.master_seed, cfg.replicas)?;
        particles_conserved &= conserved(&traces, |t| &t.particle_counts);
        if cfg.beta == Beta::Infinite {
            inside_conserved &= conserved(&traces, |t| &t.inside_counts);
        }
        let means = mean_pairings(&traces, &indices);
        for (o, h) in family.iter().enumerate() {
            let per_replica: Vec<f64> = traces
                .iter()
                .map(|tr| {
                    let sim: Vec<f64> = indices.iter().map(|&k| tr.pairings[o][k]).collect();
                    sup_error(&sim, &reference.pairings[o])
                })
                .collect();
            let (mean, std) = mean_std(&per_replica);
            rows.push(ConvergenceRow {
                beta: cfg.beta,
                alpha: cfg.alpha,
                n,
                observable: h.name.clone(),
                sup_t_error: sup_error(&means[o], &reference.pairings[o]),
                mean,
                std,
                replicas: cfg.replicas,
            });
        }
    }
    Ok(ConvergenceReport {
        beta: cfg.beta,
        alpha: cfg.alpha,
        mode,
        config_hash: cfg.hash(),
        grid_side: reference.side,
        self_convergence: reference.self_convergence,
        max_mass_drift: reference.solution.max_mass_drift,
        rows,
        particles_conserved,
        inside_conserved,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub beta: Beta,
    pub reference_mode: Mode,
    /// `max_H sup_t |mean ⟨π_t,H⟩ - ⟨ρ^{mode}_t,H⟩|`.
    pub error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseReport {
    pub n: usize,
    pub alpha: f64,
    pub config_hash: String,
    pub rows: Vec<PhaseRow>,
    /// The error metric between the heat and neumann references themselves.
    pub reference_gap: f64,
}

impl PhaseReport {
    /// Reference with the smallest error for `beta`.
    pub fn closest(&self, beta: Beta) -> Option<Mode> {
        self.rows
            .iter()
            .filter(|r| r.beta == beta)
            .min_by(|a, b| a.error.total_cmp(&b.error))
            .map(|r| r.reference_mode)
    }

    /// Every β is closest to the reference of its own regime.
    pub fn regimes_separate(&self) -> bool {
        let mut betas: Vec<Beta> = self.rows.iter().map(|r| r.beta).collect();
        betas.dedup();
        betas.into_iter().all(|b| self.closest(b) == Some(Mode::for_beta(b)))
    }
}

/// At the largest `N`, compare each β of `beta_list` with all three references.
pub fn run_phase_transition(cfg: &ScenarioConfig, workers: usize) -> Result<PhaseReport> {
    cfg.validate()?;
    if cfg.beta_list.is_empty() {
        return Err(Error::Config("beta_list is empty".into()));
    }
    let references: Vec<Reference> = Mode::ALL.iter().map(|&m| solve_reference(cfg, m)).collect::<Result<_>>()?;
    let ref_of = |m: Mode| references.iter().find(|r| r.mode == m).expect("all modes solved");
    let metric = |a: &[Vec<f64>], b: &[Vec<f64>]| a.iter().zip(b).map(|(x, y)| sup_error(x, y)).fold(0.0, f64::max);
    let reference_gap = metric(&ref_of(Mode::Heat).pairings, &ref_of(Mode::Neumann).pairings);

    let region = cfg.region()?;
    let profile = cfg.profile()?;
    let family = cfg.observable_family()?;
    let times = cfg.recorded_times();
    let indices = cfg.comparison_indices();
    let pool = thread_pool(workers)?;
    let n = cfg.largest_n();
    let mut rows = Vec::with_capacity(3 * cfg.beta_list.len());
    for &beta in &cfg.beta_list {
        let system = ParticleSystem::new(cfg.d, n, &region, beta, cfg.alpha)?;
        let traces = run_replicas(&pool, &system, &profile, &family, &times, None, cfg.master_seed, cfg.replicas)?;
        let means = mean_pairings(&traces, &indices);
        for r in &references {
            rows.push(PhaseRow {
                beta,
                reference_mode: r.mode,
                error: metric(&means, &r.pairings),
            });
        }
    }
    Ok(PhaseReport {
        n,
        alpha: cfg.alpha,
        config_hash: cfg.hash(),
        rows,
        reference_gap,
    })
}

/// Raw replica trajectories at the largest `N`.
#[derive(Debug, Clone)]
pub struct SimulationReport {
    pub n: usize,
    pub lattice: TorusLattice,
    pub times: Vec<f64>,
    pub observables: Vec<String>,
    pub traces: Vec<ReplicaTrace>,
    pub config_hash: String,
}

pub fn run_simulation(cfg: &ScenarioConfig, workers: usize) -> Result<SimulationReport> {
    cfg.validate()?;
    let region = cfg.region()?;
    let family = cfg.observable_family()?;
    let n = cfg.largest_n();
    let system = ParticleSystem::new(cfg.d, n, &region, cfg.beta, cfg.alpha)?;
    let times = cfg.recorded_times();
    let pool = thread_pool(workers)?;
    let traces = run_replicas(
        &pool,
        &system,
        &cfg.profile()?,
        &family,
        &times,
        cfg.epsilon,
        cfg.master_seed,
        cfg.replicas,
    )?;
    Ok(SimulationReport {
        n,
        lattice: system.lattice.clone(),
        times,
        observables: family.iter().map(|h| h.name.clone()).collect(),
        traces,
        config_hash: cfg.hash(),
    })
}

/// Fields of the configured PDE at `t_grid`.
#[derive(Debug, Clone)]
pub struct PdeReport {
    pub mode: Mode,
    pub lattice: TorusLattice,
    pub fields: Vec<DensityField>,
    pub observables: Vec<String>,
    pub pairings: Vec<Vec<f64>>,
    pub max_mass_drift: f64,
    pub max_principle_flags: usize,
    pub config_hash: String,
}

pub fn run_pde(cfg: &ScenarioConfig) -> Result<PdeReport> {
    cfg.validate()?;
    let mode = cfg.mode();
    let lattice = TorusLattice::cell_centered(cfg.d, cfg.grid_side())?;
    let g = assemble(&lattice, &cfg.region()?, mode, cfg.alpha)?;
    let sol = solve(DensityField::from_profile(&lattice, &cfg.profile()?), &g, &cfg.t_grid, cfg.pde_dt())?;
    let family = cfg.observable_family()?;
    let pairings = family
        .iter()
        .map(|h| {
            let hv = h.site_values(&lattice, g.classification());
            sol.fields.iter().map(|f| f.pairing_with(&hv)).collect()
        })
        .collect();
    Ok(PdeReport {
        mode,
        lattice,
        observables: family.iter().map(|h| h.name.clone()).collect(),
        pairings,
        max_mass_drift: sol.max_mass_drift,
        max_principle_flags: sol.max_principle_flags,
        fields: sol.fields,
        config_hash: cfg.hash(),
    })
}

/// Spectra and operator checks for all three modes.
#[derive(Debug, Clone)]
pub struct SpectrumRun {
    pub side: usize,
    pub spectra: Vec<SpectrumReport>,
    pub operators: Vec<(Mode, OperatorReport)>,
    pub config_hash: String,
}

/// Grid side for eigensolves: `n_grid` if set, else 64 in d = 1 and 16 otherwise.
pub fn spectrum_side(cfg: &ScenarioConfig) -> usize {
    cfg.n_grid.unwrap_or(if cfg.d == 1 { 64 } else { 16 })
}

pub fn run_spectrum(cfg: &ScenarioConfig) -> Result<SpectrumRun> {
    cfg.validate()?;
    let side = spectrum_side(cfg);
    let lattice = TorusLattice::cell_centered(cfg.d, side)?;
    let region = cfg.region()?;
    let mut spectra = Vec::with_capacity(3);
    let mut operators = Vec::with_capacity(3);
    for mode in Mode::ALL {
        let g = assemble(&lattice, &region, mode, cfg.alpha)?;
        operators.push((mode, verify_operator(&g, 16, cfg.master_seed)));
        let mut s = spectrum(&g, None)?;
        s.eigenvectors = None;
        spectra.push(s);
    }
    Ok(SpectrumRun {
        side,
        spectra,
        operators,
        config_hash: cfg.hash(),
    })
}

/// Lattice sum against surface quadrature for one `(N, axis)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySumRow {
    pub n: usize,
    pub axis: usize,
    pub side: Side,
    pub lattice_sum: f64,
    pub surface_integral: f64,
    pub error: f64,
}

#[derive(Debug, Clone)]
pub struct GeometryReport {
    pub lattice: TorusLattice,
    pub classification: BondClassification,
    pub boundary_sums: Vec<BoundarySumRow>,
    /// Empty when the region has no parametrisation.
    pub green: Vec<GreenResidual>,
    pub config_hash: String,
}

/// Highest Green refinement level reported by `geometry-check` in d <= 2;
/// three-dimensional balls stop two levels earlier.
pub const GREEN_LEVELS: u32 = 4;

pub fn run_geometry(cfg: &ScenarioConfig) -> Result<GeometryReport> {
    cfg.validate()?;
    let region = cfg.region()?;
    let mut boundary_sums = Vec::new();
    let mut last = None;
    for &n in &cfg.n_list {
        let lattice = TorusLattice::new(cfg.d, n)?;
        let class = crate::geometry::classify_bonds(&lattice, &region)?;
        for axis in 0..cfg.d {
            let exact = match surface_integral(&region, |_| 1.0, SurfaceWeight::AbsComponent(axis)) {
                Ok(v) => v,
                Err(Error::UnsupportedRegion(_)) => continue,
                Err(e) => return Err(e),
            };
            for side in [Side::Minus, Side::Plus] {
                let s = boundary_sum(&class, &lattice, |_| 1.0, side, axis, SumVariant::Abs);
                boundary_sums.push(BoundarySumRow {
                    n,
                    axis,
                    side,
                    lattice_sum: s,
                    surface_integral: exact,
                    error: (s - exact).abs(),
                });
            }
        }
        last = Some((lattice, class));
    }
    let (lattice, classification) = last.expect("validated non-empty n_list");
    let d = cfg.d;
    let u = TrigPoly::wave(d, 0, Wave::Cos, 1, 1.0);
    let v = TrigPoly::wave(d, d - 1, Wave::Sin, 1, 1.0).plus(TrigPoly::wave(d, 0, Wave::Cos, 2, 0.5));
    let mut green = Vec::new();
    let top = if d >= 3 { GREEN_LEVELS - 2 } else { GREEN_LEVELS };
    for level in 0..=top {
        match green_identity_check(&region, &u, &v, level) {
            Ok(rows) => green.extend(rows),
            Err(Error::UnsupportedRegion(_)) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(GeometryReport {
        lattice,
        classification,
        boundary_sums,
        green,
        config_hash: cfg.hash(),
    })
}
