//! Random inputs: Poissonized two-sample data, torus Poisson processes and
//! truncated-normal location families.

mod density;
mod rng;
mod sample;

pub use density::{ball_mass, unit_ball_volume, Density};
pub use rng::{splitmix64, SeededRng};
pub use sample::{
    label_one_probability, poisson_count, sample_fixed_pair, sample_poisson_torus, sample_poissonized_pair,
    sample_pooled_labeled, sample_truncated_normal, LabeledSample, MAX_EXPECTED_POINTS, MIN_ACCEPTANCE,
};
