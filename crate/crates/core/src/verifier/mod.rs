//! Verifier instances, their acceptance operator `M = Δ U† Π U Δ`, and
//! direct acceptance-probability evaluation.

mod instance;
mod resources;
mod spectrum;

pub use instance::{build_verifier, build_verifier_with, BaseVerifier, VerifierInstance, PRIVATE_REGISTER, WITNESS_REGISTER};
pub use resources::{ResourceReport, StageResources};
pub use spectrum::{
    acceptance_operator, acceptance_probability, delta_basis, dense_acceptance_operator, dense_unitary, encode_operator, engineered_instance,
    haar_instance, m_spectrum, m_spectrum_with, spectrum_of, state_acceptance, RestrictedOperator, SpectrumReport,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

fn spectrum_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15)
}

/// A random instance whose best witness is accepted with probability in `[c, 1]`.
pub fn yes_instance(c: f64, witness_width: u32, seed: u64) -> Result<VerifierInstance> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::validation("completeness", format!("c = {c} outside [0, 1]")));
    }
    let mut rng = spectrum_rng(seed);
    let d = 1usize << witness_width;
    let top = c + (1.0 - c) * rng.random::<f64>();
    let mut lambdas = vec![top];
    lambdas.extend((1..d).map(|_| top * rng.random::<f64>()));
    engineered_instance(&lambdas, seed)
}

/// A random instance on which every witness is accepted with probability at most `s`.
pub fn no_instance(s: f64, witness_width: u32, seed: u64) -> Result<VerifierInstance> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::validation("soundness", format!("s = {s} outside [0, 1]")));
    }
    let mut rng = spectrum_rng(seed);
    let d = 1usize << witness_width;
    let lambdas: Vec<f64> = (0..d).map(|_| s * rng.random::<f64>()).collect();
    engineered_instance(&lambdas, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{haar_random_unitary, DenseMatrix, C64, ONE, ZERO};
    use crate::registers::{ProjectionSpec, RegisterLayout, StateVector};
    use crate::tolerance::{Budget, Tolerances};
    use proptest::prelude::*;

    fn x_on_output() -> DenseMatrix {
        DenseMatrix::from_row_major(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap()
    }

    #[test]
    fn identity_never_accepts() {
        let v = build_verifier(DenseMatrix::identity(2), 1, 0, 0).unwrap();
        let sp = m_spectrum(&v).unwrap();
        assert_eq!(sp.eigenvalues, vec![0.0]);
        let w = StateVector::zero(&RegisterLayout::default()).unwrap();
        assert_eq!(acceptance_probability(&v, &w).unwrap(), 0.0);
    }

    #[test]
    fn x_always_accepts() {
        let v = build_verifier(x_on_output(), 1, 0, 0).unwrap();
        assert_eq!(m_spectrum(&v).unwrap().eigenvalues, vec![1.0]);
        let w = StateVector::zero(&RegisterLayout::default()).unwrap();
        assert_eq!(acceptance_probability(&v, &w).unwrap(), 1.0);
    }

    #[test]
    fn haar_build_has_two_eigenvalues() {
        let v = build_verifier(haar_random_unitary(4, 3).unwrap(), 1, 1, 0).unwrap();
        let sp = m_spectrum(&v).unwrap();
        assert_eq!(sp.eigenvalues.len(), 2);
        assert!(sp.eigenvalues[0] >= sp.eigenvalues[1]);
        assert_eq!(v.resources(), &ResourceReport::default());
    }

    #[test]
    fn build_rejects_bad_shapes() {
        assert!(build_verifier(DenseMatrix::identity(4), 1, 0, 0).is_err());
        assert!(build_verifier(DenseMatrix::identity(4), 1, 1, 1).is_err());
        let mut not_unitary = DenseMatrix::identity(2);
        not_unitary[(0, 1)] = C64::new(0.5, 0.0);
        assert!(build_verifier(not_unitary, 1, 0, 0).is_err());
    }

    #[test]
    fn trivial_projections_give_all_ones() {
        let layout = RegisterLayout::new(&[("V", 1), ("M", 1)]).unwrap();
        let u = haar_random_unitary(4, 10).unwrap();
        let v = VerifierInstance::with_projections(u, layout, None, ProjectionSpec::Always, ProjectionSpec::Always)
            .unwrap();
        let sp = m_spectrum(&v).unwrap();
        assert_eq!(sp.eigenvalues.len(), 4);
        for ev in sp.eigenvalues {
            assert!((ev - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cnot_from_witness_to_output() {
        // Index = output + 2·witness; flip the output when the witness is 1.
        let mut u = DenseMatrix::zeros(4, 4);
        u[(0, 0)] = ONE;
        u[(1, 1)] = ONE;
        u[(3, 2)] = ONE;
        u[(2, 3)] = ONE;
        let v = build_verifier(u, 1, 1, 0).unwrap();
        let sp = m_spectrum(&v).unwrap();
        assert_eq!(sp.eigenvalues, vec![1.0, 0.0]);
        let one = StateVector::basis(&RegisterLayout::new(&[("M", 1)]).unwrap(), 1).unwrap();
        assert_eq!(acceptance_probability(&v, &one).unwrap(), 1.0);
    }

    #[test]
    fn max_eigenvalue_dominates_sampled_witnesses() {
        let v = haar_instance(1, 21).unwrap();
        let sp = m_spectrum(&v).unwrap();
        let wl = v.witness_layout().unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let mut best: f64 = 0.0;
        for _ in 0..10_000 {
            let w = StateVector::random(&wl, &mut rng).unwrap();
            let p = acceptance_probability(&v, &w).unwrap();
            assert!(p <= sp.max_acceptance + 1e-9);
            best = best.max(p);
        }
        assert!((sp.max_acceptance - best).abs() <= 1e-3);
    }

    #[test]
    fn witness_width_mismatch() {
        let v = haar_instance(1, 2).unwrap();
        let w = StateVector::zero(&RegisterLayout::new(&[("M", 2)]).unwrap()).unwrap();
        assert!(acceptance_probability(&v, &w).is_err());
    }

    #[test]
    fn delta_cap_is_enforced() {
        let v = haar_instance(3, 2).unwrap();
        let tight = Budget {
            max_delta_dim: 4,
            ..Budget::default()
        };
        assert!(matches!(acceptance_operator(&v, &tight), Err(Error::Capacity { .. })));
    }

    #[test]
    fn engineered_spectrum_is_exact() {
        let lambdas = [0.9, 0.3, 0.55, 0.0];
        let v = engineered_instance(&lambdas, 77).unwrap();
        let sp = m_spectrum(&v).unwrap();
        let mut sorted = lambdas.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in sp.eigenvalues.iter().zip(&sorted) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn encoding_reproduces_operator() {
        let v = haar_instance(2, 8).unwrap();
        let m = acceptance_operator(&v, &Budget::default()).unwrap().matrix;
        let e = encode_operator(&m, &Tolerances::default()).unwrap();
        let m2 = acceptance_operator(&e, &Budget::default()).unwrap().matrix;
        assert!(m.distance(&m2) < 1e-12);
    }

    #[test]
    fn yes_and_no_generators_respect_bounds() {
        for seed in 0..20 {
            let y = m_spectrum(&yes_instance(0.9, 1, seed).unwrap()).unwrap();
            assert!(y.max_acceptance >= 0.9 - 1e-12);
            let n = m_spectrum(&no_instance(0.1, 1, seed).unwrap()).unwrap();
            assert!(n.max_acceptance <= 0.1 + 1e-12);
        }
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let v = haar_instance(1, 5).unwrap();
        let text = v.to_json().unwrap();
        let back = VerifierInstance::from_json(&text).unwrap();
        assert_eq!(back.base().unitary.as_slice(), v.base().unitary.as_slice());
        assert_eq!(back.to_json().unwrap(), text);
        assert!(VerifierInstance::from_json("{}").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn eigenstates_reproduce_eigenvalues(seed in any::<u64>(), w in 0u32..3) {
            let v = haar_instance(w, seed).unwrap();
            let sp = m_spectrum(&v).unwrap();
            for (ev, st) in sp.eigenvalues.iter().zip(&sp.eigenstates) {
                prop_assert!(st.probability(v.delta_predicate()) > 1.0 - 1e-9);
                let p = state_acceptance(&v, st).unwrap();
                prop_assert!((p - ev).abs() <= 1e-9);
            }
        }

        #[test]
        fn forward_then_adjoint_is_identity(seed in any::<u64>()) {
            let v = haar_instance(1, seed).unwrap();
            let s = StateVector::random(v.layout(), &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let back = v.apply_adjoint(&v.apply(&s).unwrap()).unwrap();
            prop_assert!((back.inner(&s).norm() - 1.0).abs() <= 1e-9);
        }
    }
}
