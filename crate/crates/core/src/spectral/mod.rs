//! Finite-dimensional checks of the operator theory behind uniqueness:
//! symmetry and sign of the grid operators, their eigenstructure, the decay
//! functional `R(t)`, and Green's identities on the built-in regions.

mod green;
mod operator;
mod spectrum;

pub use green::{green_identity_check, panels, write_identity_csv, GreenDomain, GreenIdentity, GreenResidual};
pub use operator::{verify_operator, OperatorReport, OPERATOR_TOL};
pub use spectrum::{
    decay_functional, spectrum, uniqueness_decay, write_spectrum_csv, DecayReport, SpectrumReport,
    MAX_DENSE_SIZE, ZERO_MODE_TOL,
};
