use serde::{Deserialize, Serialize};

/// Extra qubits and verifier calls of one wrapping stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageResources {
    pub stage: String,
    /// Qubits this stage adds to the layout.
    pub extra_qubits: u32,
    /// Growth of the forward-call count caused by this stage.
    pub calls_v: u64,
    /// Growth of the adjoint-call count caused by this stage.
    pub calls_v_dagger: u64,
    /// An alternative closed-form call estimate recorded for comparison.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_calls: Option<u64>,
}

/// Workspace and query cost of an instance relative to its base verifier.
///
/// A base instance reports all zeros; every wrapping stage appends one entry
/// and the totals are always the sums over the entries.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ResourceReport {
    pub extra_qubits: u32,
    pub calls_v: u64,
    pub calls_v_dagger: u64,
    pub stage_breakdown: Vec<StageResources>,
}

impl ResourceReport {
    /// Appends a stage given the instance's call totals after the stage.
    pub(crate) fn with_stage(
        &self,
        stage: impl Into<String>,
        extra_qubits: u32,
        totals_after: (u64, u64),
        reference_calls: Option<u64>,
    ) -> Self {
        let entry = StageResources {
            stage: stage.into(),
            extra_qubits,
            calls_v: totals_after.0 - self.calls_v,
            calls_v_dagger: totals_after.1 - self.calls_v_dagger,
            reference_calls,
        };
        let mut stage_breakdown = self.stage_breakdown.clone();
        stage_breakdown.push(entry);
        ResourceReport {
            extra_qubits: self.extra_qubits + extra_qubits,
            calls_v: totals_after.0,
            calls_v_dagger: totals_after.1,
            stage_breakdown,
        }
    }

    pub fn total_calls(&self) -> u64 {
        self.calls_v + self.calls_v_dagger
    }

    /// Whether the totals equal the sums over the breakdown.
    pub fn is_consistent(&self) -> bool {
        let q: u32 = self.stage_breakdown.iter().map(|s| s.extra_qubits).sum();
        let a: u64 = self.stage_breakdown.iter().map(|s| s.calls_v).sum();
        let b: u64 = self.stage_breakdown.iter().map(|s| s.calls_v_dagger).sum();
        q == self.extra_qubits && a == self.calls_v && b == self.calls_v_dagger
    }
}
