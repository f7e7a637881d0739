//! Simulation of witness-preserving amplification procedures for small
//! quantum verifiers.
//!
//! A verifier is a unitary together with an initial-state projection Δ and an
//! accepting projection Π. The maximum acceptance probability over witnesses
//! is the top eigenvalue of `M = Δ U† Π U Δ`. The [`primitives`] module wraps
//! a verifier into a larger one whose `M′` is a known function of `M`, and
//! [`pipelines`] chains those wrappers into complete error-reduction schemes.

pub mod error;
pub mod numerics;
pub mod oracle;
pub mod pipelines;
pub mod primitives;
pub mod registers;
pub mod tolerance;
pub mod verifier;

pub use error::{Error, Result};
pub use numerics::{hermitian_eigensystem, haar_random_unitary, tensor_product, DenseMatrix, EigenSystem, C64};
pub use registers::{Op, ProjectionSpec, RegisterLayout, StateVector};
pub use oracle::{branch_sum_acceptance, sampled_acceptance, Procedure};
pub use pipelines::{
    hybrid_pipeline, parameter_schedule, random_guess_pipeline, simple_pe_pipeline, Construction, Cutoff,
    ParameterSchedule, PipelineConfig,
};
pub use primitives::{
    additive_adjustment, and_type_repetition, marriott_watrous, one_shot_phase_estimation, or_type_repetition,
    reflection,
};
pub use tolerance::{Budget, Tolerances};
pub use verifier::{build_verifier, m_spectrum, acceptance_probability, ResourceReport, SpectrumReport, VerifierInstance};
