//! Symmetric simple exclusion on the discrete torus with slow bonds across a
//! membrane, together with the three interface PDEs it converges to.
//!
//! Bonds crossing the boundary of a region `Λ` carry rate `α N^{-β}`; every
//! other bond has rate one. Depending on `β` the density converges to the
//! periodic heat equation (`β < 1`), the heat equation with a Robin interface
//! (`β = 1`) or with a Neumann interface (`β > 1`).
//!
//! * [`geometry`]: lattice, region, slow-bond classification, surface quadrature.
//! * [`ssep`]: the particle system and its martingale diagnostics.
//! * [`pde`]: generator-matrix discretisation, Crank–Nicolson solver, oracles.
//! * [`spectral`]: operator checks, eigenstructure, Green identities.
//! * [`harness`]: scenario configs, replica farms and CSV reports.

pub mod error;
pub mod geometry;
pub mod harness;
pub mod pde;
pub mod quadrature;
pub mod spectral;
pub mod ssep;
pub mod trig;

pub use error::{Error, Result};
pub use geometry::{
    classify_bonds, BondClassification, MembraneRegion, Side, SumVariant, SurfaceWeight,
    TorusLattice,
};


pub use ssep::{Beta, Configuration, InitialProfile, Observable, RateField};
pub use pde::{DensityField, GeneratorMatrix, Mode};
