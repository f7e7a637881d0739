use serde::Serialize;

use super::build::apply_plain;
use super::schedule::{ParameterSchedule, StageKind};
use crate::error::{Error, Result};
use crate::numerics::{hermitian_eigensystem, DenseMatrix, C64};
use crate::oracle::{record_operator, Procedure};
use crate::tolerance::{Budget, Tolerances};
use crate::verifier::{acceptance_operator, encode_operator, VerifierInstance};

/// How a stage's acceptance operator was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// The stage's circuit was simulated on a re-encoded input.
    Literal,
    /// The stage was too wide; its checks were folded backwards exactly.
    OutcomeRecord,
    /// No simulation needed: registers or guess bookkeeping only.
    Bookkeeping,
    /// Uniform average of the per-guess operators.
    Average,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GuessAcceptance {
    pub k: u64,
    pub max_acceptance: f64,
    pub top_eigenstate_acceptance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageEvaluation {
    pub index: usize,
    pub kind: StageKind,
    pub method: Method,
    pub simulated_qubits: u32,
    /// Spectrum after this stage, largest first; empty while the guess is open.
    pub eigenvalues: Vec<f64>,
    /// Largest acceptance over witnesses, and over guesses while the guess is open.
    pub max_acceptance: f64,
    /// Acceptance of the input's best witness after this stage.
    pub top_eigenstate_acceptance: f64,
    /// Largest eigenvalue of the guess-averaged operator.
    pub mixture_max: Option<f64>,
    pub per_guess: Option<Vec<GuessAcceptance>>,
}

/// Acceptance operators after every stage, on the witness space of the input.
#[derive(Debug, Clone, Serialize)]
pub struct Evaluation {
    pub base_eigenvalues: Vec<f64>,
    pub stages: Vec<StageEvaluation>,
    pub peak_simulated_qubits: u32,
    #[serde(skip)]
    pub top_eigenstate: Vec<C64>,
    /// The final operator, or one per guess while the guess is open.
    #[serde(skip)]
    pub final_operators: Vec<DenseMatrix>,
}

impl Evaluation {
    pub fn final_stage(&self) -> Option<&StageEvaluation> {
        self.stages.last()
    }

    pub fn max_acceptance(&self) -> f64 {
        self.final_stage().map_or(0.0, |s| s.max_acceptance)
    }

    pub fn top_eigenstate_acceptance(&self) -> f64 {
        self.final_stage().map_or(0.0, |s| s.top_eigenstate_acceptance)
    }

    /// Final acceptance of a witness given in the input's Δ-basis order;
    /// with the guess open, the best guess counts.
    pub fn witness_acceptance(&self, witness: &[C64]) -> Result<f64> {
        let dim = self.top_eigenstate.len();
        if witness.len() != dim {
            return Err(Error::validation(
                "witness dimension",
                format!("got {} amplitudes, expected {dim}", witness.len()),
            ));
        }
        Ok(self
            .final_operators
            .iter()
            .map(|m| expectation(m, witness))
            .fold(0.0, f64::max))
    }
}

enum State {
    Single(DenseMatrix),
    PerGuess(Vec<DenseMatrix>),
}

fn expectation(m: &DenseMatrix, v: &[C64]) -> f64 {
    let mv = m.mul_vec(v);
    v.iter().zip(&mv).map(|(a, b)| (a.conj() * b).re).sum::<f64>().clamp(0.0, 1.0)
}

fn descending(m: &DenseMatrix, tol: &Tolerances) -> Result<(Vec<f64>, Vec<C64>)> {
    let es = hermitian_eigensystem(m, tol)?;
    let n = es.dim();
    let values = (0..n).rev().map(|k| es.eigenvalues[k].clamp(0.0, 1.0)).collect();
    Ok((values, es.eigenvector(n - 1)))
}

fn procedure(kind: &StageKind) -> Option<Procedure> {
    match *kind {
        StageKind::MarriottWatrous { n, t } => Some(Procedure::MarriottWatrous { n, t }),
        StageKind::AndRepetition { n } => Some(Procedure::AndRepetition { n }),
        StageKind::OrRepetition { n } => Some(Procedure::OrRepetition { n }),
        StageKind::Additive { l, k: Some(k) } => Some(Procedure::Additive { l, k }),
        StageKind::Reflection => Some(Procedure::Reflection),
        _ => None,
    }
}

/// Re-encodes `m` as a one-private-qubit verifier and applies `kind` to it.
fn advance(m: &DenseMatrix, kind: &StageKind, budget: &Budget, tol: &Tolerances) -> Result<(DenseMatrix, Method, u32)> {
    let d = m.rows();
    let encoded = encode_operator(m, tol)?;
    let wrapped = apply_plain(&encoded, kind)?;
    let (out, method, width) = if wrapped.total_qubits() <= budget.max_qubits {
        let op = acceptance_operator(&wrapped, budget)?;
        (op.matrix, Method::Literal, wrapped.total_qubits())
    } else if let Some(proc) = procedure(kind) {
        let op = record_operator(&encoded, &proc, budget)?;
        (op.matrix, Method::OutcomeRecord, encoded.total_qubits())
    } else {
        return Err(Error::Capacity {
            what: "simulated qubits",
            needed: wrapped.total_qubits() as u64,
            budget: budget.max_qubits as u64,
        });
    };
    // Padding directions carry eigenvalue 0 and stay decoupled.
    let keep: Vec<usize> = (0..d).collect();
    Ok((out.principal_submatrix(&keep), method, width))
}

/// Exact acceptance operators after every stage of `schedule` applied to `v`.
///
/// Each stage's output is a function of its input operator alone, so the
/// input to a stage can be replaced by any verifier with the same operator.
/// The smallest such verifier has one private qubit; the stage is then
/// simulated on it, or evaluated by [`record_operator`] when even that is
/// wider than the budget. Guess stages are evaluated for every guess.
pub fn evaluate(v: &VerifierInstance, schedule: &ParameterSchedule, budget: &Budget, tol: &Tolerances) -> Result<Evaluation> {
    let base = acceptance_operator(v, budget)?;
    let (base_eigenvalues, top) = descending(&base.matrix, tol)?;
    let mut peak = v.total_qubits();
    let mut state = State::Single(base.matrix);
    let mut stages = Vec::with_capacity(schedule.stages.len());
    for stage in &schedule.stages {
        let kind = &stage.kind;
        let (next, method, width) = match (state, kind) {
            (State::Single(m), StageKind::GuessRegisters { l }) => {
                (State::PerGuess(vec![m; 1usize << l]), Method::Bookkeeping, 0)
            }
            (State::PerGuess(ms), StageKind::GuessMixture) => {
                let mut avg = DenseMatrix::zeros(ms[0].rows(), ms[0].cols());
                let w = C64::new(1.0 / ms.len() as f64, 0.0);
                for m in &ms {
                    avg = &avg + &m.scale(w);
                }
                (State::Single(avg), Method::Average, 0)
            }
            (State::PerGuess(ms), StageKind::RejectBelow { threshold }) => {
                let out = ms
                    .into_iter()
                    .enumerate()
                    .map(|(i, m)| {
                        if (i as u64) + 1 < *threshold {
                            DenseMatrix::zeros(m.rows(), m.cols())
                        } else {
                            m
                        }
                    })
                    .collect();
                (State::PerGuess(out), Method::Bookkeeping, 0)
            }
            (State::PerGuess(ms), _) => {
                let mut out = Vec::with_capacity(ms.len());
                let mut method = Method::Literal;
                let mut width = 0;
                for (i, m) in ms.iter().enumerate() {
                    let k = i as u64 + 1;
                    let kind_k = match *kind {
                        StageKind::Additive { l, k: None } => StageKind::Additive { l, k: Some(k) },
                        ref other => other.clone(),
                    };
                    let (next, mk, wk) = advance(m, &kind_k, budget, tol)?;
                    if mk == Method::OutcomeRecord {
                        method = mk;
                    }
                    width = width.max(wk);
                    out.push(next);
                }
                (State::PerGuess(out), method, width)
            }
            (State::Single(m), _) => {
                let (next, method, width) = advance(&m, kind, budget, tol)?;
                (State::Single(next), method, width)
            }
        };
        peak = peak.max(width);
        state = next;
        stages.push(summarize(stage.index, kind, method, width, &state, &top, tol)?);
    }
    let final_operators = match state {
        State::Single(m) => vec![m],
        State::PerGuess(ms) => ms,
    };
    Ok(Evaluation {
        base_eigenvalues,
        stages,
        peak_simulated_qubits: peak,
        top_eigenstate: top,
        final_operators,
    })
}

fn summarize(
    index: usize,
    kind: &StageKind,
    method: Method,
    simulated_qubits: u32,
    state: &State,
    top: &[C64],
    tol: &Tolerances,
) -> Result<StageEvaluation> {
    Ok(match state {
        State::Single(m) => {
            let (eigenvalues, _) = descending(m, tol)?;
            StageEvaluation {
                index,
                kind: kind.clone(),
                method,
                simulated_qubits,
                max_acceptance: eigenvalues[0],
                top_eigenstate_acceptance: expectation(m, top),
                eigenvalues,
                mixture_max: None,
                per_guess: None,
            }
        }
        State::PerGuess(ms) => {
            let mut per_guess = Vec::with_capacity(ms.len());
            let mut avg = DenseMatrix::zeros(ms[0].rows(), ms[0].cols());
            let w = C64::new(1.0 / ms.len() as f64, 0.0);
            for (i, m) in ms.iter().enumerate() {
                per_guess.push(GuessAcceptance {
                    k: i as u64 + 1,
                    max_acceptance: descending(m, tol)?.0[0],
                    top_eigenstate_acceptance: expectation(m, top),
                });
                avg = &avg + &m.scale(w);
            }
            StageEvaluation {
                index,
                kind: kind.clone(),
                method,
                simulated_qubits,
                eigenvalues: Vec::new(),
                max_acceptance: per_guess.iter().map(|g| g.max_acceptance).fold(0.0, f64::max),
                top_eigenstate_acceptance: per_guess.iter().map(|g| g.top_eigenstate_acceptance).fold(0.0, f64::max),
                mixture_max: Some(descending(&avg, tol)?.0[0]),
                per_guess: Some(per_guess),
            }
        }
    })
}
