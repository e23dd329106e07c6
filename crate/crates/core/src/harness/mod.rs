//! Scenario configs, seeded replica farms, the convergence and
//! phase-transition experiments, and their CSV / manifest output.

mod config;
mod experiments;
mod farm;
mod reports;

pub use config::{ProfileSpec, RegionSpec, ScenarioConfig, SELF_CONVERGENCE_TOL};
pub use experiments::{
    run_convergence, run_geometry, run_pde, run_phase_transition, run_simulation, run_spectrum, solve_reference,
    spectrum_side, BoundarySumRow, ConvergenceReport, ConvergenceRow, GeometryReport, PdeReport, PhaseReport, PhaseRow,
    Reference, SimulationReport, SpectrumRun, GREEN_LEVELS,
};
pub use farm::{run_replicas, simulate_replica, thread_pool, ParticleSystem, ReplicaTrace};
pub use reports::{
    emit_convergence, emit_geometry, emit_pde, emit_phase, emit_simulation, emit_spectrum, Manifest, MANIFEST_FILE,
};
