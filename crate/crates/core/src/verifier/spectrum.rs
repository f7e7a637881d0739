use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::instance::{build_verifier, VerifierInstance};
use crate::error::{Error, Result};
use crate::numerics::{haar_random_unitary_with, hermitian_eigensystem, DenseMatrix, C64, ZERO};
use crate::registers::{check_simulable, StateVector};
use crate::tolerance::{Budget, Tolerances};

/// `M = Δ U† Π U Δ` written in the basis of the Δ-subspace.
///
/// Every projection in this crate is diagonal in the computational basis,
/// so the Δ-subspace is spanned by the basis states satisfying Δ.
#[derive(Debug, Clone)]
pub struct RestrictedOperator {
    /// Basis indices spanning the Δ-subspace, ascending.
    pub basis: Vec<usize>,
    pub matrix: DenseMatrix,
}

/// Eigenpairs of `M` on the Δ-subspace, largest eigenvalue first.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub eigenstates: Vec<StateVector>,
    pub max_acceptance: f64,
}

fn check_budget(v: &VerifierInstance, budget: &Budget) -> Result<()> {
    if v.total_qubits() > budget.max_qubits {
        return Err(Error::Capacity {
            what: "simulated qubits",
            needed: v.total_qubits() as u64,
            budget: budget.max_qubits as u64,
        });
    }
    check_simulable(v.layout())
}

/// Indices of the basis states in the Δ-subspace.
pub fn delta_basis(v: &VerifierInstance, budget: &Budget) -> Result<Vec<usize>> {
    check_budget(v, budget)?;
    let pred = v.delta_predicate();
    let basis: Vec<usize> = (0..v.layout().dim()).filter(|&i| pred.holds(i as u64)).collect();
    if basis.len() > budget.max_delta_dim {
        return Err(Error::Capacity {
            what: "Δ-subspace dimension",
            needed: basis.len() as u64,
            budget: budget.max_delta_dim as u64,
        });
    }
    Ok(basis)
}

/// Computes `M` column by column as `U† Π U |e_j⟩`, one state at a time.
pub fn acceptance_operator(v: &VerifierInstance, budget: &Budget) -> Result<RestrictedOperator> {
    let basis = delta_basis(v, budget)?;
    let d = basis.len();
    let dim = v.layout().dim();
    let pi = v.pi_predicate().table(dim);
    let mut m = DenseMatrix::zeros(d, d);
    let mut psi = vec![ZERO; dim];
    for (j, &bj) in basis.iter().enumerate() {
        psi.iter_mut().for_each(|a| *a = ZERO);
        psi[bj] = C64::new(1.0, 0.0);
        v.unitary().apply(&mut psi);
        for (a, &keep) in psi.iter_mut().zip(&pi) {
            if !keep {
                *a = ZERO;
            }
        }
        v.unitary().apply_adjoint(&mut psi);
        for (i, &bi) in basis.iter().enumerate() {
            m[(i, j)] = psi[bi];
        }
    }
    let sym = (&m + &m.adjoint()).scale(C64::new(0.5, 0.0));
    Ok(RestrictedOperator { basis, matrix: sym })
}

/// Spectrum of `M` with the default budget and tolerances.
pub fn m_spectrum(v: &VerifierInstance) -> Result<SpectrumReport> {
    m_spectrum_with(v, &Budget::default(), &Tolerances::default())
}

pub fn m_spectrum_with(v: &VerifierInstance, budget: &Budget, tol: &Tolerances) -> Result<SpectrumReport> {
    let op = acceptance_operator(v, budget)?;
    spectrum_of(v, &op, tol)
}

/// Eigen-analysis of an already computed restricted operator.
pub fn spectrum_of(v: &VerifierInstance, op: &RestrictedOperator, tol: &Tolerances) -> Result<SpectrumReport> {
    let es = hermitian_eigensystem(&op.matrix, tol)?;
    let n = es.dim();
    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenstates = Vec::with_capacity(n);
    for k in (0..n).rev() {
        let ev = es.eigenvalues[k];
        if ev < -tol.spectrum_clamp || ev > 1.0 + tol.spectrum_clamp {
            return Err(Error::validation(
                "acceptance spectrum",
                format!("eigenvalue {ev:.3e} outside [0, 1]"),
            ));
        }
        eigenvalues.push(ev.clamp(0.0, 1.0));
        let mut amps = vec![ZERO; v.layout().dim()];
        for (i, &b) in op.basis.iter().enumerate() {
            amps[b] = es.eigenvectors[(i, k)];
        }
        eigenstates.push(StateVector::normalized(v.layout(), amps)?);
    }
    let max_acceptance = eigenvalues.first().copied().unwrap_or(0.0);
    Ok(SpectrumReport {
        eigenvalues,
        eigenstates,
        max_acceptance,
    })
}

/// Acceptance probability of a full-layout input state: `‖Π U |ψ⟩‖²`.
pub fn state_acceptance(v: &VerifierInstance, state: &StateVector) -> Result<f64> {
    let out = v.apply(state)?;
    Ok(out.probability(v.pi_predicate()).clamp(0.0, 1.0))
}

/// Acceptance probability of a witness with all private qubits zero.
pub fn acceptance_probability(v: &VerifierInstance, witness: &StateVector) -> Result<f64> {
    if (witness.norm() - 1.0).abs() > Tolerances::default().state_norm {
        return Err(Error::validation("witness norm", format!("‖ψ‖ = {}", witness.norm())));
    }
    state_acceptance(v, &v.embed_witness(witness)?)
}

/// The instance's circuit as a dense matrix.
pub fn dense_unitary(v: &VerifierInstance, budget: &Budget) -> Result<DenseMatrix> {
    check_budget(v, budget)?;
    if v.total_qubits() > 12 {
        return Err(Error::Capacity {
            what: "dense unitary qubits",
            needed: v.total_qubits() as u64,
            budget: 12,
        });
    }
    Ok(v.unitary().to_dense(v.total_qubits()))
}

/// `Δ U† Π U Δ` as a dense matrix on the whole layout.
pub fn dense_acceptance_operator(v: &VerifierInstance, budget: &Budget) -> Result<DenseMatrix> {
    let u = dense_unitary(v, budget)?;
    let dim = u.rows();
    let diagonal = |table: Vec<bool>| {
        let d: Vec<C64> = table.into_iter().map(|b| C64::new(if b { 1.0 } else { 0.0 }, 0.0)).collect();
        DenseMatrix::from_diagonal(&d)
    };
    let delta = diagonal(v.delta_predicate().table(dim));
    let pi = diagonal(v.pi_predicate().table(dim));
    Ok(&(&(&(&delta * &u.adjoint()) * &pi) * &u) * &delta)
}

/// `R(θ) = [[cos θ, −sin θ], [sin θ, cos θ]]`, so `|⟨1|R(θ)|0⟩|² = sin² θ`.
fn rotation(lambda: f64) -> [[f64; 2]; 2] {
    let theta = lambda.clamp(0.0, 1.0).sqrt().asin();
    let (s, c) = theta.sin_cos();
    [[c, -s], [s, c]]
}

/// A one-private-qubit base instance whose acceptance operator is `m`.
///
/// With `m = Σ λᵢ |φᵢ⟩⟨φᵢ|`, the unitary is `Σ R(θᵢ) ⊗ |φᵢ⟩⟨φᵢ|` with
/// `sin² θᵢ = λᵢ`. The dimension of `m` is padded to a power of two with
/// zero eigenvalues.
pub fn encode_operator(m: &DenseMatrix, tol: &Tolerances) -> Result<VerifierInstance> {
    let es = hermitian_eigensystem(m, tol)?;
    let d = es.dim();
    let w = d.next_power_of_two().trailing_zeros();
    let wd = 1usize << w;
    let mut vectors: Vec<Vec<C64>> = (0..d)
        .map(|k| {
            let mut v = es.eigenvector(k);
            v.resize(wd, ZERO);
            v
        })
        .collect();
    let mut lambdas: Vec<f64> = es.eigenvalues.clone();
    for k in d..wd {
        let mut e = vec![ZERO; wd];
        e[k] = C64::new(1.0, 0.0);
        vectors.push(e);
        lambdas.push(0.0);
    }
    for &l in &lambdas {
        if l < -tol.spectrum_clamp || l > 1.0 + tol.spectrum_clamp {
            return Err(Error::validation(
                "encoded spectrum",
                format!("eigenvalue {l:.3e} outside [0, 1]"),
            ));
        }
    }
    build_verifier(rotation_unitary(&lambdas, &vectors), 1, w, 0)
}

fn rotation_unitary(lambdas: &[f64], vectors: &[Vec<C64>]) -> DenseMatrix {
    let wd = vectors.len();
    let mut u = DenseMatrix::zeros(2 * wd, 2 * wd);
    for (l, phi) in lambdas.iter().zip(vectors) {
        let r = rotation(*l);
        for i in 0..wd {
            for j in 0..wd {
                let outer = phi[i] * phi[j].conj();
                if outer == ZERO {
                    continue;
                }
                for a in 0..2 {
                    for b in 0..2 {
                        u[(a + 2 * i, b + 2 * j)] += outer * r[a][b];
                    }
                }
            }
        }
    }
    u
}

/// A random base instance with one private qubit whose acceptance operator
/// has exactly the given eigenvalues, in a Haar-random eigenbasis. A random
/// unitary that commutes with Π scrambles the accepting branch.
pub fn engineered_instance(eigenvalues: &[f64], seed: u64) -> Result<VerifierInstance> {
    let d = eigenvalues.len();
    if d == 0 || !d.is_power_of_two() {
        return Err(Error::validation(
            "engineered spectrum",
            format!("need a power-of-two number of eigenvalues, got {d}"),
        ));
    }
    if let Some(bad) = eigenvalues.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(Error::validation("engineered spectrum", format!("eigenvalue {bad} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = haar_random_unitary_with(d, &mut rng)?;
    let vectors: Vec<Vec<C64>> = (0..d).map(|k| basis.column(k)).collect();
    let core = rotation_unitary(eigenvalues, &vectors);
    let w0 = haar_random_unitary_with(d, &mut rng)?;
    let w1 = haar_random_unitary_with(d, &mut rng)?;
    let scramble = DenseMatrix::from_fn(2 * d, 2 * d, |r, c| {
        if r % 2 != c % 2 {
            ZERO
        } else if r % 2 == 0 {
            w0[(r / 2, c / 2)]
        } else {
            w1[(r / 2, c / 2)]
        }
    });
    build_verifier(&scramble * &core, 1, d.trailing_zeros(), 0)
}

/// A Haar-random base instance with one private and `witness_width` witness qubits.
pub fn haar_instance(witness_width: u32, seed: u64) -> Result<VerifierInstance> {
    let u = crate::numerics::haar_random_unitary(1usize << (1 + witness_width), seed)?;
    build_verifier(u, 1, witness_width, 0)
}
