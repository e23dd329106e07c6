//! Lattice and continuum geometry of the membrane.

mod classify;
mod lattice;
mod region;
mod surface;

pub(crate) use classify::classify_unguarded;
pub use classify::{boundary_sum, classify_bonds, BondClassification, DirectionalSets, Side, SumVariant};
pub use lattice::TorusLattice;
pub use region::{wrap_delta, wrap_unit, LevelSet, MembraneRegion, Shape, BOUNDARY_TOL};
pub use surface::{surface_integral, surface_integral_with, SurfaceWeight, SURFACE_TOL};
