//! The exclusion process with slow membrane bonds.

mod configuration;
mod diagnostics;
mod dynamics;
mod local_mean;
mod observable;
mod profile;
mod rates;
mod reversibility;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use configuration::Configuration;
pub use diagnostics::{
    martingale_track, one_particle_generator, quadratic_variation_cap, replacement_discrepancy,
    replacement_weights, DiscrepancyScaling, LinearTracker, MartingaleSeries, MartingaleTracker,
    WindowVariant,
};
pub use dynamics::{total_event_rate, Dynamics, Observer};
pub use local_mean::{box_window, local_mean_box, local_mean_sided, sided_window, window_length};
pub use observable::{empirical_pairing, Observable, ObservableFamily, ObservableKind};
pub use profile::{sample_initial, InitialProfile, SamplingMode};
pub use rates::{Beta, RateField};
pub use reversibility::{
    bernoulli_weight, check_reversibility, ReversibilityReport, StateSpaceGenerator,
    MAX_ENUMERATED_SIDE,
};

/// Generator for replica `replica`: ChaCha8 seeded by the master seed, on
/// stream `replica`. Independent of scheduling order.
pub fn replica_rng(master_seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replica);
    rng
}
