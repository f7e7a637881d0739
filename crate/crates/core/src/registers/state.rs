use rand::Rng;

use super::layout::RegisterLayout;
use super::projection::Predicate;
use crate::error::{Error, Result};
use crate::numerics::{complex_gaussian, C64, ONE, ZERO};

/// Hard ceiling on allocated statevectors, independent of any budget.
pub const MAX_SIMULATED_QUBITS: u32 = 30;

pub(crate) fn check_simulable(layout: &RegisterLayout) -> Result<()> {
    if layout.total_qubits() > MAX_SIMULATED_QUBITS {
        return Err(Error::Capacity {
            what: "statevector qubits",
            needed: layout.total_qubits() as u64,
            budget: MAX_SIMULATED_QUBITS as u64,
        });
    }
    Ok(())
}

/// A normalized pure state over a register layout.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: RegisterLayout,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// The all-zero basis state.
    pub fn zero(layout: &RegisterLayout) -> Result<Self> {
        Self::basis(layout, 0)
    }

    pub fn basis(layout: &RegisterLayout, index: usize) -> Result<Self> {
        check_simulable(layout)?;
        if index >= layout.dim() {
            return Err(Error::validation(
                "basis index",
                format!("{index} outside dimension {}", layout.dim()),
            ));
        }
        let mut amplitudes = vec![ZERO; layout.dim()];
        amplitudes[index] = ONE;
        Ok(StateVector {
            layout: layout.clone(),
            amplitudes,
        })
    }

    /// Wraps amplitudes that must already be normalized within `norm_tol`.
    pub fn from_amplitudes(layout: &RegisterLayout, amplitudes: Vec<C64>, norm_tol: f64) -> Result<Self> {
        check_simulable(layout)?;
        if amplitudes.len() != layout.dim() {
            return Err(Error::validation(
                "state length",
                format!("{} amplitudes for dimension {}", amplitudes.len(), layout.dim()),
            ));
        }
        let norm = norm_of(&amplitudes);
        if (norm - 1.0).abs() > norm_tol {
            return Err(Error::validation("state norm", format!("‖ψ‖ = {norm:.12}")));
        }
        Ok(StateVector {
            layout: layout.clone(),
            amplitudes,
        })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(layout: &RegisterLayout, mut amplitudes: Vec<C64>) -> Result<Self> {
        let norm = norm_of(&amplitudes);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::validation("state norm", "cannot normalize a zero vector"));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Self::from_amplitudes(layout, amplitudes, 1e-12)
    }

    /// A uniformly random pure state.
    pub fn random<R: Rng + ?Sized>(layout: &RegisterLayout, rng: &mut R) -> Result<Self> {
        check_simulable(layout)?;
        let amps = (0..layout.dim()).map(|_| complex_gaussian(rng)).collect();
        Self::normalized(layout, amps)
    }

    pub(crate) fn from_raw(layout: RegisterLayout, amplitudes: Vec<C64>) -> Self {
        debug_assert_eq!(amplitudes.len(), layout.dim());
        StateVector { layout, amplitudes }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm_of(&self.amplitudes)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        inner_of(&self.amplitudes, &other.amplitudes)
    }

    /// Probability of landing in the projection described by `p`.
    pub fn probability(&self, p: &Predicate) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| p.holds(*i as u64))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Embeds the state into a layout that extends this one with further
    /// registers, all initialized to zero.
    pub fn lift(&self, target: &RegisterLayout) -> Result<StateVector> {
        let prefix = &target.registers()[..self.layout.registers().len().min(target.registers().len())];
        if prefix != self.layout.registers() {
            return Err(Error::validation(
                "layout extension",
                format!("`{target}` does not extend `{}`", self.layout),
            ));
        }
        check_simulable(target)?;
        let mut amplitudes = self.amplitudes.clone();
        amplitudes.resize(target.dim(), ZERO);
        Ok(StateVector::from_raw(target.clone(), amplitudes))
    }
}

/// The outcome of a projection: `P|ψ⟩` without renormalization.
#[derive(Debug, Clone, PartialEq)]
pub struct SubnormalizedState {
    layout: RegisterLayout,
    amplitudes: Vec<C64>,
    probability: f64,
}

impl SubnormalizedState {
    pub(crate) fn new(layout: RegisterLayout, amplitudes: Vec<C64>) -> Self {
        let probability = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        SubnormalizedState {
            layout,
            amplitudes,
            probability,
        }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// Squared norm, i.e. the probability mass carried by this branch.
    pub fn probability(&self) -> f64 {
        self.probability
    }

    /// The conditional post-measurement state, if the branch has any mass.
    pub fn renormalize(&self) -> Option<StateVector> {
        if self.probability <= 0.0 {
            return None;
        }
        let s = self.probability.sqrt();
        Some(StateVector::from_raw(
            self.layout.clone(),
            self.amplitudes.iter().map(|a| a / s).collect(),
        ))
    }
}

pub(crate) fn norm_of(amps: &[C64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn inner_of(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
