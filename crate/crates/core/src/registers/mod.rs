//! Named multi-register statevectors with matrix-free circuit application.
//!
//! Registers are laid out in declaration order starting from the least
//! significant qubit, and every register reads as a little-endian integer.

mod layout;
mod op;
mod projection;
mod state;

pub use layout::{Register, RegisterLayout, MAX_LAYOUT_QUBITS};
pub use op::Op;
pub use projection::{Comparison, Operand, Predicate, ProjectionSpec, Reading};
pub use state::{StateVector, SubnormalizedState, MAX_SIMULATED_QUBITS};

pub(crate) use state::check_simulable;

use crate::error::Result;
use crate::numerics::DenseMatrix;

/// Applies `op` to the concatenation of `targets`; the first target holds
/// the least-significant bits of the operator's index.
pub fn apply_unitary<S: AsRef<str>>(state: &StateVector, op: &DenseMatrix, targets: &[S]) -> Result<StateVector> {
    let qubits = state.layout().qubits_of(targets)?;
    let gate = Op::gate(op.clone(), qubits)?;
    Ok(run(state, &gate))
}

/// Applies `control·op + (I − control)·I`.
pub fn apply_controlled<S: AsRef<str>>(
    state: &StateVector,
    control: &ProjectionSpec,
    op: &DenseMatrix,
    targets: &[S],
) -> Result<StateVector> {
    let qubits = state.layout().qubits_of(targets)?;
    let pred = control.compile(state.layout())?;
    let gate = Op::controlled(pred, Op::gate(op.clone(), qubits)?)?;
    Ok(run(state, &gate))
}

/// `|j⟩ ↦ |(j + 1) mod 2^l⟩` on the named register.
pub fn increment_mod(state: &StateVector, counter: &str) -> Result<StateVector> {
    let qubits = state.layout().register(counter)?.qubits();
    Ok(run(state, &Op::increment(qubits)?))
}

/// `P|ψ⟩` together with its probability `‖P|ψ⟩‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projected {
    pub residual: SubnormalizedState,
    pub probability: f64,
}

pub fn project(state: &StateVector, p: &ProjectionSpec) -> Result<Projected> {
    let pred = p.compile(state.layout())?;
    let amps = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, &a)| if pred.holds(i as u64) { a } else { crate::numerics::ZERO })
        .collect();
    let residual = SubnormalizedState::new(state.layout().clone(), amps);
    let probability = residual.probability();
    Ok(Projected { residual, probability })
}

/// Runs a circuit on a copy of `state`.
pub fn run(state: &StateVector, op: &Op) -> StateVector {
    let mut out = state.clone();
    op.apply(out.amplitudes_mut());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{haar_random_unitary, tensor_product, C64, ONE, ZERO};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn x_gate() -> DenseMatrix {
        DenseMatrix::from_row_major(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap()
    }

    fn dist(a: &[C64], b: &[C64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
    }

    fn random_state(layout: &RegisterLayout, seed: u64) -> StateVector {
        StateVector::random(layout, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    fn diagonal_projector(spec: &ProjectionSpec, layout: &RegisterLayout) -> DenseMatrix {
        let p = spec.compile(layout).unwrap();
        let diag: Vec<C64> = (0..layout.dim())
            .map(|i| if p.holds(i as u64) { ONE } else { ZERO })
            .collect();
        DenseMatrix::from_diagonal(&diag)
    }

    #[test]
    fn identity_leaves_state_unchanged() {
        let l = RegisterLayout::new(&[("A", 1), ("B", 2)]).unwrap();
        let s = random_state(&l, 1);
        let out = apply_unitary(&s, &DenseMatrix::identity(4), &["B"]).unwrap();
        assert_eq!(out.amplitudes(), s.amplitudes());
    }

    #[test]
    fn x_on_qubit_zero() {
        let l = RegisterLayout::new(&[("A", 1), ("B", 1)]).unwrap();
        let s = StateVector::zero(&l).unwrap();
        let out = apply_unitary(&s, &x_gate(), &["A"]).unwrap();
        assert_eq!(out, StateVector::basis(&l, 0b01).unwrap());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let l = RegisterLayout::new(&[("A", 1), ("B", 2)]).unwrap();
        let s = StateVector::zero(&l).unwrap();
        assert!(apply_unitary(&s, &x_gate(), &["B"]).is_err());
        assert!(apply_unitary(&s, &x_gate(), &["Z"]).is_err());
    }

    #[test]
    fn haar_on_two_qubits_matches_dense() {
        let l = RegisterLayout::new(&[("T", 2), ("E", 3)]).unwrap();
        let u = haar_random_unitary(4, 17).unwrap();
        let s = random_state(&l, 5);
        let out = apply_unitary(&s, &u, &["T"]).unwrap();
        assert!((out.norm() - 1.0).abs() <= 1e-10);
        let dense = tensor_product(&DenseMatrix::identity(8), &u);
        let expected = dense.mul_vec(s.amplitudes());
        assert!(dist(out.amplitudes(), &expected) <= 1e-10);
    }

    #[test]
    fn controlled_never_satisfied() {
        let l = RegisterLayout::new(&[("C", 1), ("T", 1)]).unwrap();
        let s = random_state(&l, 2);
        let out = apply_controlled(&s, &ProjectionSpec::Never, &x_gate(), &["T"]).unwrap();
        assert_eq!(out.amplitudes(), s.amplitudes());
    }

    #[test]
    fn controlled_on_one() {
        let l = RegisterLayout::new(&[("C", 1), ("T", 1)]).unwrap();
        let u = haar_random_unitary(2, 8).unwrap();
        let psi = [C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        let amps = vec![ZERO, psi[0], ZERO, psi[1]];
        let s = StateVector::from_amplitudes(&l, amps, 1e-12).unwrap();
        let out = apply_controlled(&s, &ProjectionSpec::qubit(0, true), &u, &["T"]).unwrap();
        let upsi = u.mul_vec(&psi);
        assert!(dist(out.amplitudes(), &[ZERO, upsi[0], ZERO, upsi[1]]) <= 1e-12);
    }

    #[test]
    fn controlled_rejects_overlap() {
        let l = RegisterLayout::new(&[("C", 1), ("T", 1)]).unwrap();
        let s = StateVector::zero(&l).unwrap();
        assert!(apply_controlled(&s, &ProjectionSpec::qubit(1, true), &x_gate(), &["T"]).is_err());
    }

    #[test]
    fn increment_examples() {
        let l = RegisterLayout::new(&[("C", 2)]).unwrap();
        let out = increment_mod(&StateVector::basis(&l, 0).unwrap(), "C").unwrap();
        assert_eq!(out, StateVector::basis(&l, 1).unwrap());
        let out = increment_mod(&StateVector::basis(&l, 3).unwrap(), "C").unwrap();
        assert_eq!(out, StateVector::basis(&l, 0).unwrap());
        assert!(increment_mod(&out, "D").is_err());
    }

    #[test]
    fn increment_has_order_two_to_the_l() {
        let l = RegisterLayout::new(&[("A", 1), ("C", 3)]).unwrap();
        let s = random_state(&l, 9);
        let mut t = s.clone();
        for _ in 0..8 {
            t = increment_mod(&t, "C").unwrap();
        }
        assert!(dist(t.amplitudes(), s.amplitudes()) <= 1e-12);
    }

    #[test]
    fn project_examples() {
        let l = RegisterLayout::new(&[("Q", 1), ("W", 2)]).unwrap();
        let phi = random_state(&RegisterLayout::new(&[("W", 2)]).unwrap(), 4);
        let mut amps = vec![ZERO; 8];
        for (w, a) in phi.amplitudes().iter().enumerate() {
            amps[w << 1] = *a;
        }
        let s = StateVector::from_amplitudes(&l, amps, 1e-12).unwrap();
        let pr = project(&s, &ProjectionSpec::qubit(0, false)).unwrap();
        assert!((pr.probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn one_based_greater_than_on_uniform_register() {
        for l_bits in 1..=4u32 {
            let l = RegisterLayout::new(&[("R", l_bits)]).unwrap();
            let h = DenseMatrix::from_fn(2, 2, |i, j| {
                C64::new(if i == 1 && j == 1 { -1.0 } else { 1.0 } * std::f64::consts::FRAC_1_SQRT_2, 0.0)
            });
            let mut s = StateVector::zero(&l).unwrap();
            for q in 0..l_bits {
                let gate = Op::gate(h.clone(), vec![q]).unwrap();
                s = run(&s, &gate);
            }
            for k in 1..=(1u64 << l_bits) {
                let spec = ProjectionSpec::Compare {
                    lhs: Operand::one_based("R"),
                    cmp: Comparison::Gt,
                    rhs: Operand::Constant(k),
                };
                let p = project(&s, &spec).unwrap().probability;
                let size = (1u64 << l_bits) as f64;
                assert!((p - (size - k as f64) / size).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fig2_composite_matches_dense() {
        // [Π⊗I + (I−Π)⊗INCR] with Π = (Q qubit 0 is 1), counter C of 2 qubits.
        let l = RegisterLayout::new(&[("Q", 2), ("C", 2)]).unwrap();
        let pi = ProjectionSpec::qubit(0, true);
        let op = Op::controlled(
            pi.complement().compile(&l).unwrap(),
            Op::increment(vec![2, 3]).unwrap(),
        )
        .unwrap();
        let mut incr = DenseMatrix::zeros(4, 4);
        for j in 0..4 {
            incr[((j + 1) % 4, j)] = ONE;
        }
        let pq = DenseMatrix::from_diagonal(&[ZERO, ONE, ZERO, ONE]);
        let not_pq = &DenseMatrix::identity(4) - &pq;
        let dense = &tensor_product(&DenseMatrix::identity(4), &pq) + &tensor_product(&incr, &not_pq);
        for seed in 0..5 {
            let s = random_state(&l, seed);
            let out = run(&s, &op);
            assert!(dist(out.amplitudes(), &dense.mul_vec(s.amplitudes())) <= 1e-10);
        }
        assert!(op.to_dense(4).distance(&dense) <= 1e-12);
    }

    #[test]
    fn inverse_fourier_is_adjoint_of_fourier() {
        let l = RegisterLayout::new(&[("A", 1), ("P", 3)]).unwrap();
        let f = Op::fourier(vec![1, 2, 3], false).unwrap();
        let g = Op::fourier(vec![1, 2, 3], true).unwrap();
        let s = random_state(&l, 12);
        let back = run(&run(&s, &f), &g);
        assert!(dist(back.amplitudes(), s.amplitudes()) <= 1e-12);
        // Inverse QFT of a phase ramp with exact frequency y lands on |y⟩.
        let m = 8usize;
        let y = 3usize;
        let amps: Vec<C64> = (0..m)
            .flat_map(|k| {
                let ph = C64::from_polar(1.0 / (m as f64).sqrt(), 2.0 * std::f64::consts::PI * (y * k) as f64 / m as f64);
                [ph, ZERO]
            })
            .collect();
        let s = StateVector::from_amplitudes(&l, amps, 1e-12).unwrap();
        let out = run(&s, &g);
        assert!((out.amplitudes()[y << 1].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn call_counting_follows_adjoints_and_repeats() {
        let v = Op::call(DenseMatrix::identity(2), vec![0]).unwrap();
        let q = Op::seq(vec![v.clone(), v.adjoint()]);
        let ladder = Op::seq(vec![Op::repeat(q.clone(), 3), q.adjoint(), v.adjoint()]);
        assert_eq!(ladder.call_counts(), (4, 5));
    }

    proptest! {
        #[test]
        fn unitary_application_preserves_norm(seed in any::<u64>(), q in 0u32..4) {
            let l = RegisterLayout::new(&[("A", 1), ("B", 1), ("C", 1), ("D", 1)]).unwrap();
            let u = haar_random_unitary(2, seed).unwrap();
            let s = random_state(&l, seed ^ 0x5a5a);
            let name = ["A", "B", "C", "D"][q as usize];
            let out = apply_unitary(&s, &u, &[name]).unwrap();
            prop_assert!((out.norm() - 1.0).abs() <= 1e-10);
        }

        #[test]
        fn projections_are_complete_and_idempotent(seed in any::<u64>(), v in 0u64..8, w in 0u64..4) {
            let l = RegisterLayout::new(&[("A", 3), ("B", 2)]).unwrap();
            let s = random_state(&l, seed);
            let spec = ProjectionSpec::or(vec![
                ProjectionSpec::register_ge("A", v),
                ProjectionSpec::and(vec![ProjectionSpec::register_eq("B", w), ProjectionSpec::qubit(0, true)]),
            ]);
            let p = project(&s, &spec).unwrap().probability;
            let q = project(&s, &spec.complement()).unwrap().probability;
            prop_assert!((p + q - 1.0).abs() <= 1e-10);

            let once = project(&s, &spec).unwrap().residual;
            let renorm = StateVector::from_raw(l.clone(), once.amplitudes().to_vec());
            let twice = project(&renorm, &spec).unwrap().residual;
            prop_assert!(dist(once.amplitudes(), twice.amplitudes()) <= 1e-12);

            let dense = diagonal_projector(&spec, &l);
            prop_assert!(dist(once.amplitudes(), &dense.mul_vec(s.amplitudes())) <= 1e-10);
        }

        #[test]
        fn engine_matches_dense_controlled(seed in any::<u64>()) {
            let l = RegisterLayout::new(&[("C", 2), ("T", 2)]).unwrap();
            let u = haar_random_unitary(4, seed).unwrap();
            let control = ProjectionSpec::register_ge("C", 2);
            let s = random_state(&l, seed.wrapping_add(1));
            let out = apply_controlled(&s, &control, &u, &["T"]).unwrap();
            let pc = diagonal_projector(&control, &RegisterLayout::new(&[("C", 2)]).unwrap());
            let not_pc = &DenseMatrix::identity(4) - &pc;
            let dense = &tensor_product(&u, &pc) + &tensor_product(&DenseMatrix::identity(4), &not_pc);
            prop_assert!(dist(out.amplitudes(), &dense.mul_vec(s.amplitudes())) <= 1e-10);
        }
    }
}
