//! Benchmark fixtures shared by the criterion targets.

use slowbond::harness::ParticleSystem;
use slowbond::pde::{assemble, DensityField, GeneratorMatrix};
use slowbond::{Beta, InitialProfile, MembraneRegion, Mode, Result, TorusLattice};

/// The one-dimensional `[0.25, 0.75)` membrane.
pub fn interval() -> MembraneRegion {
    MembraneRegion::interval(0.25, 0.75).expect("valid interval")
}

pub fn particle_system(side: usize, beta: Beta) -> Result<ParticleSystem> {
    ParticleSystem::new(1, side, &interval(), beta, 1.0)
}

/// Generator and step initial datum on a `side`-cell grid.
pub fn pde_fixture(side: usize, mode: Mode) -> Result<(GeneratorMatrix, DensityField)> {
    let region = interval();
    let lattice = TorusLattice::cell_centered(1, side)?;
    let g = assemble(&lattice, &region, mode, 1.0)?;
    let rho = DensityField::from_profile(&lattice, &InitialProfile::indicator(region));
    Ok((g, rho))
}
