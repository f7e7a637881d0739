//! Shared fixtures for the benchmarks.

use witamp_core::verifier::{haar_instance, no_instance, yes_instance};
use witamp_core::{Construction, PipelineConfig, VerifierInstance};

/// A seeded 1 + `witness_width`-qubit Haar verifier.
pub fn haar(witness_width: u32) -> VerifierInstance {
    haar_instance(witness_width, 11).expect("seeded Haar instance")
}

/// A yes-instance and a no-instance for the gap `(0.99, 0.01)`.
pub fn promise_pair() -> (VerifierInstance, VerifierInstance) {
    (
        yes_instance(0.99, 1, 11).expect("seeded yes-instance"),
        no_instance(0.01, 1, 11).expect("seeded no-instance"),
    )
}

pub fn config(construction: Construction, p: u64) -> PipelineConfig {
    PipelineConfig::new(construction, p, 0.99, 0.01)
}
