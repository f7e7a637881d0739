use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::resources::ResourceReport;
use crate::error::{Error, Result};
use crate::numerics::{DenseMatrix, C64};
use crate::registers::{Op, Predicate, ProjectionSpec, RegisterLayout, StateVector};
use crate::tolerance::Tolerances;

/// Name of the verifier-private register of a base instance.
pub const PRIVATE_REGISTER: &str = "V";
/// Name of the witness register.
pub const WITNESS_REGISTER: &str = "M";

/// The dense verifier unitary a composite instance is ultimately built from.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseVerifier {
    pub unitary: DenseMatrix,
    pub private_width: u32,
    pub witness_width: u32,
    /// Output qubit for the standard accepting projection; `None` for
    /// instances built with custom projections.
    pub output_qubit: Option<u32>,
}

/// A unitary verification circuit with its legal-initial-state projection
/// Δ and accepting projection Π.
#[derive(Debug, Clone)]
pub struct VerifierInstance {
    layout: RegisterLayout,
    unitary: Op,
    delta: ProjectionSpec,
    pi: ProjectionSpec,
    delta_pred: Predicate,
    pi_pred: Predicate,
    witness: Option<String>,
    base: Arc<BaseVerifier>,
    resources: ResourceReport,
}

fn validate_unitary(u: &DenseMatrix, qubits: u32, tol: &Tolerances) -> Result<()> {
    let dim = 1usize << qubits;
    if u.rows() != dim || u.cols() != dim {
        return Err(Error::validation(
            "unitary dimension",
            format!("expected {dim}x{dim}, got {}x{}", u.rows(), u.cols()),
        ));
    }
    let residual = u.unitarity_residual();
    if residual > tol.unitarity {
        return Err(Error::validation(
            "unitarity",
            format!("‖U†U − I‖_F = {residual:.3e} exceeds {:.1e}", tol.unitarity),
        ));
    }
    Ok(())
}

/// Wraps a dense unitary on `private_width + witness_width` qubits. The
/// private register occupies the low qubits; Δ requires it to be all zero
/// and Π requires the output qubit to read one.
pub fn build_verifier(
    u: DenseMatrix,
    private_width: u32,
    witness_width: u32,
    output_qubit: u32,
) -> Result<VerifierInstance> {
    build_verifier_with(u, private_width, witness_width, output_qubit, &Tolerances::default())
}

pub fn build_verifier_with(
    u: DenseMatrix,
    private_width: u32,
    witness_width: u32,
    output_qubit: u32,
    tol: &Tolerances,
) -> Result<VerifierInstance> {
    if output_qubit >= private_width {
        return Err(Error::validation(
            "output qubit",
            format!("index {output_qubit} not inside a {private_width}-qubit private register"),
        ));
    }
    let total = private_width + witness_width;
    if total > 16 {
        return Err(Error::Capacity {
            what: "base verifier qubits",
            needed: total as u64,
            budget: 16,
        });
    }
    validate_unitary(&u, total, tol)?;
    let mut layout = RegisterLayout::new(&[(PRIVATE_REGISTER, private_width)])?;
    if witness_width > 0 {
        layout.push(WITNESS_REGISTER, witness_width)?;
    }
    let op = Op::call(u.clone(), (0..total).collect())?;
    let delta = ProjectionSpec::register_zero(PRIVATE_REGISTER);
    let pi = ProjectionSpec::qubit(output_qubit, true);
    let base = BaseVerifier {
        unitary: u,
        private_width,
        witness_width,
        output_qubit: Some(output_qubit),
    };
    VerifierInstance::assemble(
        layout,
        op,
        delta,
        pi,
        (witness_width > 0).then(|| WITNESS_REGISTER.to_owned()),
        Arc::new(base),
        ResourceReport::default(),
    )
}

impl VerifierInstance {
    /// A base instance with arbitrary projections over an explicit layout.
    pub fn with_projections(
        u: DenseMatrix,
        layout: RegisterLayout,
        witness: Option<&str>,
        delta: ProjectionSpec,
        pi: ProjectionSpec,
    ) -> Result<Self> {
        validate_unitary(&u, layout.total_qubits(), &Tolerances::default())?;
        let witness_width = match witness {
            Some(w) => layout.register(w)?.width(),
            None => 0,
        };
        let op = Op::call(u.clone(), (0..layout.total_qubits()).collect())?;
        let base = BaseVerifier {
            unitary: u,
            private_width: layout.total_qubits() - witness_width,
            witness_width,
            output_qubit: None,
        };
        Self::assemble(
            layout,
            op,
            delta,
            pi,
            witness.map(str::to_owned),
            Arc::new(base),
            ResourceReport::default(),
        )
    }

    fn assemble(
        layout: RegisterLayout,
        unitary: Op,
        delta: ProjectionSpec,
        pi: ProjectionSpec,
        witness: Option<String>,
        base: Arc<BaseVerifier>,
        resources: ResourceReport,
    ) -> Result<Self> {
        let delta_pred = delta.compile(&layout)?;
        let pi_pred = pi.compile(&layout)?;
        if let Some(w) = &witness {
            let mask = layout.register(w)?.mask();
            if delta_pred.support() & mask != 0 {
                return Err(Error::validation(
                    "initial projection",
                    "Δ must leave the witness register unconstrained",
                ));
            }
        }
        Ok(VerifierInstance {
            layout,
            unitary,
            delta,
            pi,
            delta_pred,
            pi_pred,
            witness,
            base,
            resources,
        })
    }

    /// A new instance that shares this one's witness register and base.
    pub(crate) fn derive(
        &self,
        layout: RegisterLayout,
        unitary: Op,
        delta: ProjectionSpec,
        pi: ProjectionSpec,
        resources: ResourceReport,
    ) -> Result<Self> {
        Self::assemble(
            layout,
            unitary,
            delta,
            pi,
            self.witness.clone(),
            self.base.clone(),
            resources,
        )
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn unitary(&self) -> &Op {
        &self.unitary
    }

    pub fn delta(&self) -> &ProjectionSpec {
        &self.delta
    }

    pub fn pi(&self) -> &ProjectionSpec {
        &self.pi
    }

    pub fn delta_predicate(&self) -> &Predicate {
        &self.delta_pred
    }

    pub fn pi_predicate(&self) -> &Predicate {
        &self.pi_pred
    }

    pub fn witness_register(&self) -> Option<&str> {
        self.witness.as_deref()
    }

    pub fn witness_width(&self) -> u32 {
        self.base.witness_width
    }

    pub fn base(&self) -> &BaseVerifier {
        &self.base
    }

    pub fn resources(&self) -> &ResourceReport {
        &self.resources
    }

    pub fn total_qubits(&self) -> u32 {
        self.layout.total_qubits()
    }

    /// Whether this is an unwrapped base instance.
    pub fn is_base(&self) -> bool {
        self.resources.stage_breakdown.is_empty()
    }

    /// `V|ψ⟩`.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        self.check_layout(state)?;
        Ok(crate::registers::run(state, &self.unitary))
    }

    /// `V†|ψ⟩`.
    pub fn apply_adjoint(&self, state: &StateVector) -> Result<StateVector> {
        self.check_layout(state)?;
        Ok(crate::registers::run(state, &self.unitary.adjoint()))
    }

    pub(crate) fn check_layout(&self, state: &StateVector) -> Result<()> {
        if state.layout() != &self.layout {
            return Err(Error::validation(
                "state layout",
                format!("state over `{}` given to instance over `{}`", state.layout(), self.layout),
            ));
        }
        Ok(())
    }

    /// The layout of the witness register alone.
    pub fn witness_layout(&self) -> Result<RegisterLayout> {
        match &self.witness {
            Some(w) => RegisterLayout::new(&[(w.as_str(), self.layout.register(w)?.width())]),
            None => Ok(RegisterLayout::default()),
        }
    }

    /// `|0…0⟩ ⊗ |witness⟩` over the full layout.
    pub fn embed_witness(&self, witness: &StateVector) -> Result<StateVector> {
        let expected = self.witness_layout()?;
        if witness.layout().total_qubits() != expected.total_qubits() {
            return Err(Error::validation(
                "witness width",
                format!(
                    "witness has {} qubits, instance expects {}",
                    witness.layout().total_qubits(),
                    expected.total_qubits()
                ),
            ));
        }
        crate::registers::check_simulable(&self.layout)?;
        let shift = match &self.witness {
            Some(w) => self.layout.register(w)?.offset(),
            None => 0,
        };
        let mut amps = vec![C64::new(0.0, 0.0); self.layout.dim()];
        for (i, a) in witness.amplitudes().iter().enumerate() {
            amps[i << shift] = *a;
        }
        StateVector::from_amplitudes(&self.layout, amps, 1e-9)
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    format: String,
    version: u32,
    private_width: u32,
    witness_width: u32,
    output_qubit: u32,
    /// Row-major `[re, im]` pairs.
    unitary: Vec<[f64; 2]>,
}

const INSTANCE_FORMAT: &str = "witamp-instance";

impl VerifierInstance {
    /// Serializes a base instance built by [`build_verifier`].
    pub fn to_json(&self) -> Result<String> {
        let output_qubit = match (self.is_base(), self.base.output_qubit) {
            (true, Some(q)) => q,
            _ => {
                return Err(Error::Serialization(
                    "only base instances with a standard output qubit serialize".into(),
                ))
            }
        };
        let file = InstanceFile {
            format: INSTANCE_FORMAT.into(),
            version: 1,
            private_width: self.base.private_width,
            witness_width: self.base.witness_width,
            output_qubit,
            unitary: self.base.unitary.as_slice().iter().map(|z| [z.re, z.im]).collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        if file.format != INSTANCE_FORMAT || file.version != 1 {
            return Err(Error::Serialization(format!(
                "unsupported instance format `{}` version {}",
                file.format, file.version
            )));
        }
        let dim = 1usize << (file.private_width + file.witness_width).min(16);
        let entries = file.unitary.iter().map(|&[re, im]| C64::new(re, im)).collect();
        let u = DenseMatrix::from_row_major(dim, dim, entries)?;
        build_verifier(u, file.private_width, file.witness_width, file.output_qubit)
    }
}
