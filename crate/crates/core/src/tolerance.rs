//! Numerical tolerances shared by every module.
//!
//! All checks in the crate read their thresholds from a [`Tolerances`]
//! record so a caller can tighten or relax them in one place.

/// Thresholds for the structural checks and numerical contracts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// `‖U†U − I‖_F` bound for a matrix to count as unitary.
    pub unitarity: f64,
    /// `‖P² − P‖_F` and `‖P − P†‖_F` bound for projections.
    pub projection: f64,
    /// `‖A − A†‖_F` bound accepted by the Hermitian eigensolver.
    pub hermiticity: f64,
    /// Per-column residual `‖A v − λ v‖` allowed after eigendecomposition.
    pub eigen_residual: f64,
    /// Pairwise inner-product bound for orthonormal eigenvectors.
    pub orthonormality: f64,
    /// Eigenvalues closer than this are treated as one degenerate cluster.
    pub eigen_cluster: f64,
    /// Allowed deviation of `‖ψ‖₂` from 1 for a normalized state.
    pub state_norm: f64,
    /// Slack on `[0, 1]` before acceptance eigenvalues are clamped.
    pub spectrum_clamp: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            unitarity: 1e-10,
            projection: 1e-10,
            hermiticity: 1e-10,
            eigen_residual: 1e-9,
            orthonormality: 1e-10,
            eigen_cluster: 1e-10,
            state_norm: 1e-9,
            spectrum_clamp: 1e-10,
        }
    }
}

/// Limits on how large a simulation may grow before it is refused.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Largest statevector width, in qubits, that will be allocated.
    pub max_qubits: u32,
    /// Largest initial-subspace dimension analysed densely.
    pub max_delta_dim: usize,
    /// Largest number of measurement branches the enumeration oracle visits.
    pub max_branches: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_qubits: 22,
            max_delta_dim: 1 << 10,
            max_branches: 1 << 24,
        }
    }
}
