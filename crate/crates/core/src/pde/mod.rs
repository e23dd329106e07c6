//! Grid solvers for the three limit equations, built on the one-particle
//! generator as spatial discretisation.

mod generator;
mod oracle;
mod solver;
mod weak_form;

pub use generator::{assemble, GeneratorMatrix, Mode};
pub use oracle::{analytic_oracle, AnalyticOracle, FourierSeries, IntervalCosine};
pub use solver::{
    default_dt, implicit_euler_step, solve, step, uniform_times, write_fields_csv, DensityField, Solution, StepReport,
    CG_TOLERANCE, MAX_PRINCIPLE_SLACK, STARTUP_FRACTION, STARTUP_STEPS,
};
pub use weak_form::{fick_flux_residual, weak_form_residual};
