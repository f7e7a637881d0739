//! Reference evaluation of the procedures by explicit measurement branching.
//!
//! Nothing here builds counters or composed circuits. The procedures are
//! replayed step by step on the input verifier's own layout, with every
//! intermediate measurement split into its outcomes.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{DenseMatrix, C64, ZERO};
use crate::registers::StateVector;
use crate::tolerance::Budget;
use crate::verifier::{delta_basis, dense_unitary, state_acceptance, RestrictedOperator, VerifierInstance};

/// A procedure replayed by the oracle, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "procedure", rename_all = "kebab-case")]
pub enum Procedure {
    AndRepetition { n: u64 },
    OrRepetition { n: u64 },
    MarriottWatrous { n: u64, t: u64 },
    Additive { l: u32, k: u64 },
    Reflection,
}

impl Procedure {
    fn validate(&self) -> Result<()> {
        match *self {
            Procedure::AndRepetition { n } | Procedure::OrRepetition { n } if n == 0 => {
                Err(Error::validation("repetition count", "N must be at least 1"))
            }
            Procedure::MarriottWatrous { n, t } if n == 0 || t == 0 || t > 2 * n => Err(Error::validation(
                "agreement threshold",
                format!("need N ≥ 1 and 1 ≤ t ≤ 2N, got N = {n}, t = {t}"),
            )),
            Procedure::Additive { l, k } if l == 0 || l > 30 || k == 0 || k > 1u64 << l => {
                Err(Error::validation("guess", format!("need 1 ≤ k ≤ 2^l, got l = {l}, k = {k}")))
            }
            _ => Ok(()),
        }
    }

    fn rounds(&self) -> Option<u64> {
        match *self {
            Procedure::AndRepetition { n } | Procedure::OrRepetition { n } | Procedure::MarriottWatrous { n, .. } => {
                Some(n)
            }
            _ => None,
        }
    }
}

/// What a procedure remembers about the checks so far. AND and OR only track
/// whether their counter left zero; MW tracks the agreement count and the
/// latest outcome bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Record {
    count: u64,
    last: bool,
}

impl Procedure {
    fn start(&self) -> Record {
        Record { count: 0, last: false }
    }

    fn advance(&self, r: Record, failed: bool, pi_step: bool) -> Record {
        match self {
            Procedure::AndRepetition { .. } => Record {
                count: (r.count + failed as u64).min(1),
                last: false,
            },
            Procedure::OrRepetition { .. } => {
                let bump = if pi_step { !failed } else { failed };
                Record {
                    count: (r.count + bump as u64).min(1),
                    last: false,
                }
            }
            Procedure::MarriottWatrous { .. } => Record {
                count: r.count + (failed == r.last) as u64,
                last: failed,
            },
            _ => r,
        }
    }

    fn accepts(&self, r: Record) -> bool {
        match *self {
            Procedure::AndRepetition { .. } => r.count == 0,
            Procedure::OrRepetition { .. } => r.count != 0,
            Procedure::MarriottWatrous { t, .. } => r.count >= t,
            _ => false,
        }
    }
}

/// One complete measurement history.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Branch {
    /// Outcome labels in measurement order.
    pub outcomes: Vec<u64>,
    pub probability: f64,
    pub accepted: bool,
}

/// Result of a branch summation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchSum {
    pub acceptance: f64,
    pub total_probability: f64,
    pub branches: u64,
}

fn input_state(v: &VerifierInstance, input: &StateVector) -> Result<StateVector> {
    if input.layout() == v.layout() {
        Ok(input.clone())
    } else {
        v.embed_witness(input)
    }
}

fn branch_count(proc: &Procedure) -> u64 {
    match *proc {
        Procedure::Additive { l, .. } => 2 + (1u64 << l),
        Procedure::Reflection => 2,
        _ => {
            let n = proc.rounds().unwrap_or(0);
            if n >= 32 {
                u64::MAX
            } else {
                1u64 << (2 * n)
            }
        }
    }
}

fn norm_sqr(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

fn split(amps: &[C64], keep: &[bool]) -> (Vec<C64>, Vec<C64>) {
    let pass = amps.iter().zip(keep).map(|(&a, &k)| if k { a } else { ZERO }).collect();
    let fail = amps.iter().zip(keep).map(|(&a, &k)| if k { ZERO } else { a }).collect();
    (pass, fail)
}

/// Calls `visit` on every measurement history of `proc` applied to `input`.
pub fn for_each_branch(
    v: &VerifierInstance,
    proc: &Procedure,
    input: &StateVector,
    budget: &Budget,
    mut visit: impl FnMut(Branch),
) -> Result<()> {
    proc.validate()?;
    let needed = branch_count(proc);
    if needed > budget.max_branches {
        return Err(Error::Capacity {
            what: "oracle branches",
            needed,
            budget: budget.max_branches,
        });
    }
    let psi = input_state(v, input)?;
    let dim = v.layout().dim();
    let pi = v.pi_predicate().table(dim);
    let delta = v.delta_predicate().table(dim);
    let amps = psi.amplitudes().to_vec();

    match *proc {
        Procedure::Additive { l, k } => {
            // B = 0: run the verifier and measure Π.
            let mut out = amps;
            v.unitary().apply(&mut out);
            let (pass, fail) = split(&out, &pi);
            visit(Branch { outcomes: vec![0, 1], probability: 0.5 * norm_sqr(&pass), accepted: true });
            visit(Branch { outcomes: vec![0, 0], probability: 0.5 * norm_sqr(&fail), accepted: false });
            // B = 1: the verdict depends only on the uniformly random R.
            let size = 1u64 << l;
            for r in 1..=size {
                visit(Branch {
                    outcomes: vec![1, r],
                    probability: 0.5 / size as f64,
                    accepted: r > k,
                });
            }
        }
        Procedure::Reflection => {
            // U†(I − 2Π)U ψ = ψ − 2 U†ΠU ψ.
            let mut out = amps.clone();
            v.unitary().apply(&mut out);
            let (mut pass, _) = split(&out, &pi);
            v.unitary().apply_adjoint(&mut pass);
            let reflected: Vec<C64> = amps.iter().zip(&pass).map(|(&a, &p)| a - p * 2.0).collect();
            let (inside, outside) = split(&reflected, &delta);
            visit(Branch { outcomes: vec![0], probability: norm_sqr(&inside), accepted: false });
            visit(Branch { outcomes: vec![1], probability: norm_sqr(&outside), accepted: true });
        }
        _ => {
            let steps = 2 * proc.rounds().unwrap_or(0) as usize;
            let mut history = Vec::with_capacity(steps);
            descend(v, proc, &pi, &delta, amps, proc.start(), steps, &mut history, &mut visit);
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn descend(
    v: &VerifierInstance,
    proc: &Procedure,
    pi: &[bool],
    delta: &[bool],
    mut amps: Vec<C64>,
    record: Record,
    steps: usize,
    history: &mut Vec<u64>,
    visit: &mut impl FnMut(Branch),
) {
    let i = history.len();
    if i == steps {
        visit(Branch {
            outcomes: history.clone(),
            probability: norm_sqr(&amps),
            accepted: proc.accepts(record),
        });
        return;
    }
    let pi_step = i.is_multiple_of(2);
    if pi_step {
        v.unitary().apply(&mut amps);
    } else {
        v.unitary().apply_adjoint(&mut amps);
    }
    let (pass, fail) = split(&amps, if pi_step { pi } else { delta });
    for (failed, part) in [(false, pass), (true, fail)] {
        history.push(failed as u64);
        descend(v, proc, pi, delta, part, proc.advance(record, failed, pi_step), steps, history, visit);
        history.pop();
    }
}

/// Every measurement history with its probability, in canonical order.
pub fn branches(v: &VerifierInstance, proc: &Procedure, input: &StateVector, budget: &Budget) -> Result<Vec<Branch>> {
    let mut out = Vec::new();
    for_each_branch(v, proc, input, budget, |b| out.push(b))?;
    Ok(out)
}

/// Acceptance probability of `proc` on `input`, summed over accepting histories.
///
/// `input` is either a state on the full layout of `v` or a witness state,
/// which is padded with zero private qubits.
pub fn branch_sum_acceptance(
    v: &VerifierInstance,
    proc: &Procedure,
    input: &StateVector,
    budget: &Budget,
) -> Result<BranchSum> {
    let mut sum = BranchSum {
        acceptance: 0.0,
        total_probability: 0.0,
        branches: 0,
    };
    for_each_branch(v, proc, input, budget, |b| {
        sum.total_probability += b.probability;
        sum.branches += 1;
        if b.accepted {
            sum.acceptance += b.probability;
        }
    })?;
    sum.acceptance = sum.acceptance.clamp(0.0, 1.0);
    Ok(sum)
}

/// `K† X K` with `K = P U`, where `P` keeps the flagged basis states.
fn sandwich(x: &DenseMatrix, keep: &[bool], u: &DenseMatrix, u_dag: &DenseMatrix) -> DenseMatrix {
    let masked = DenseMatrix::from_fn(x.rows(), x.cols(), |r, c| if keep[r] && keep[c] { x[(r, c)] } else { ZERO });
    &(u_dag * &masked) * u
}

/// The acceptance operator of `proc` wrapped around `v`, on the Δ-subspace of `v`.
///
/// The measurement histories are folded backwards: `E(r)` is the effect that
/// leads to acceptance from record `r`, and each check contributes
/// `Σ_o K_o† E(next(r, o)) K_o`. The result equals the Δ′-restricted operator
/// of the corresponding combinator without allocating its ancillas.
pub fn record_operator(v: &VerifierInstance, proc: &Procedure, budget: &Budget) -> Result<RestrictedOperator> {
    proc.validate()?;
    let basis = delta_basis(v, budget)?;
    let u = dense_unitary(v, budget)?;
    let u_dag = u.adjoint();
    let dim = u.rows();
    let pi = v.pi_predicate().table(dim);
    let delta = v.delta_predicate().table(dim);
    let not = |t: &[bool]| t.iter().map(|b| !b).collect::<Vec<_>>();
    let (not_pi, not_delta) = (not(&pi), not(&delta));
    let id = DenseMatrix::identity(dim);

    let full = match *proc {
        Procedure::Additive { l, k } => {
            let m = sandwich(&id, &pi, &u, &u_dag);
            let shift = (((1u64 << l) - k) as f64) / (1u64 << l) as f64;
            (&m.scale(C64::new(0.5, 0.0))) + &id.scale(C64::new(0.5 * shift, 0.0))
        }
        Procedure::Reflection => {
            let m = sandwich(&id, &pi, &u, &u_dag);
            let r = &id - &m.scale(C64::new(2.0, 0.0));
            let keep = DenseMatrix::from_fn(dim, dim, |a, b| if a == b && not_delta[a] { C64::new(1.0, 0.0) } else { ZERO });
            &(&r.adjoint() * &keep) * &r
        }
        _ => {
            let steps = 2 * proc.rounds().unwrap_or(0) as usize;
            // Records reachable after each number of checks.
            let mut layers = vec![vec![proc.start()]];
            for i in 0..steps {
                let mut next: Vec<Record> = layers[i]
                    .iter()
                    .flat_map(|&r| [false, true].map(|f| proc.advance(r, f, i % 2 == 0)))
                    .collect();
                next.sort();
                next.dedup();
                layers.push(next);
            }
            let zero = DenseMatrix::zeros(dim, dim);
            let mut effects: BTreeMap<Record, DenseMatrix> = layers[steps]
                .iter()
                .map(|&r| (r, if proc.accepts(r) { id.clone() } else { zero.clone() }))
                .collect();
            for i in (0..steps).rev() {
                let pi_step = i % 2 == 0;
                // The Π check follows U, so K = P U; the Δ check follows U†, so K = P U†.
                let (k, k_dag) = if pi_step { (&u, &u_dag) } else { (&u_dag, &u) };
                let (pass, fail) = if pi_step { (&pi, &not_pi) } else { (&delta, &not_delta) };
                let mut prev = BTreeMap::new();
                for &r in &layers[i] {
                    let e_pass = &effects[&proc.advance(r, false, pi_step)];
                    let e_fail = &effects[&proc.advance(r, true, pi_step)];
                    let e = &sandwich(e_pass, pass, k, k_dag) + &sandwich(e_fail, fail, k, k_dag);
                    prev.insert(r, e);
                }
                effects = prev;
            }
            effects.remove(&proc.start()).unwrap_or(zero)
        }
    };
    let m = full.principal_submatrix(&basis);
    let sym = (&m + &m.adjoint()).scale(C64::new(0.5, 0.0));
    Ok(RestrictedOperator { basis, matrix: sym })
}

/// A sampled acceptance estimate with its 95% Wilson half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampledAcceptance {
    pub estimate: f64,
    pub half_width: f64,
    pub shots: u64,
    pub accepted: u64,
}

/// Simulates `shots` runs of `v` on `input` and a final Π measurement each.
pub fn sampled_acceptance(v: &VerifierInstance, input: &StateVector, shots: u64, seed: u64) -> Result<SampledAcceptance> {
    if shots == 0 {
        return Err(Error::validation("shots", "need at least one shot"));
    }
    let psi = input_state(v, input)?;
    let p = state_acceptance(v, &psi)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Binomial::new(shots, p).map_err(|e| Error::validation("acceptance probability", e.to_string()))?;
    let accepted = dist.sample(&mut rng);
    let n = shots as f64;
    let estimate = accepted as f64 / n;
    let z = 1.959_963_984_540_054;
    let z2 = z * z;
    let half_width = z / (1.0 + z2 / n) * (estimate * (1.0 - estimate) / n + z2 / (4.0 * n * n)).sqrt();
    Ok(SampledAcceptance {
        estimate,
        half_width,
        shots,
        accepted,
    })
}

#[cfg(test)]
mod tests;
