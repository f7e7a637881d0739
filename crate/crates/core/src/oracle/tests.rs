use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::primitives::{additive_adjustment, and_type_repetition, marriott_watrous, or_type_repetition, reflection};
use crate::verifier::{acceptance_operator, engineered_instance, haar_instance, m_spectrum};

fn budget() -> Budget {
    Budget::default()
}

fn combinator(v: &VerifierInstance, proc: &Procedure) -> VerifierInstance {
    match *proc {
        Procedure::AndRepetition { n } => and_type_repetition(v, n),
        Procedure::OrRepetition { n } => or_type_repetition(v, n),
        Procedure::MarriottWatrous { n, t } => marriott_watrous(v, n, t),
        Procedure::Additive { l, k } => additive_adjustment(v, l, k),
        Procedure::Reflection => reflection(v),
    }
    .unwrap()
}

fn top_eigenstate(v: &VerifierInstance) -> StateVector {
    m_spectrum(v).unwrap().eigenstates.remove(0)
}

fn combinator_acceptance(v: &VerifierInstance, proc: &Procedure, input: &StateVector) -> f64 {
    let w = combinator(v, proc);
    state_acceptance(&w, &input.lift(w.layout()).unwrap()).unwrap()
}

#[test]
fn and_examples() {
    let one = engineered_instance(&[1.0, 0.2], 1).unwrap();
    let s = branch_sum_acceptance(&one, &Procedure::AndRepetition { n: 3 }, &top_eigenstate(&one), &budget()).unwrap();
    assert!((s.acceptance - 1.0).abs() < 1e-9);
    let v = engineered_instance(&[0.75, 0.2], 2).unwrap();
    let s = branch_sum_acceptance(&v, &Procedure::AndRepetition { n: 1 }, &top_eigenstate(&v), &budget()).unwrap();
    assert!((s.acceptance - 9.0 / 16.0).abs() < 1e-9);
    assert_eq!(s.branches, 4);
}

#[test]
fn marriott_watrous_matches_combinator() {
    let v = engineered_instance(&[0.75, 0.1], 3).unwrap();
    let proc = Procedure::MarriottWatrous { n: 2, t: 2 };
    let phi = top_eigenstate(&v);
    let s = branch_sum_acceptance(&v, &proc, &phi, &budget()).unwrap();
    // Tail of Binomial(4, 3/4) at 2.
    let tail = 1.0 - 0.25f64.powi(4) - 4.0 * 0.75 * 0.25f64.powi(3);
    assert!((s.acceptance - tail).abs() < 1e-9);
    assert!((s.acceptance - combinator_acceptance(&v, &proc, &phi)).abs() < 1e-9);
}

fn procedures() -> Vec<Procedure> {
    vec![
        Procedure::AndRepetition { n: 2 },
        Procedure::OrRepetition { n: 3 },
        Procedure::MarriottWatrous { n: 2, t: 3 },
        Procedure::MarriottWatrous { n: 3, t: 2 },
        Procedure::Additive { l: 3, k: 5 },
        Procedure::Reflection,
    ]
}

#[test]
fn oracle_agrees_with_combinators() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for seed in 0..50 {
        let v = haar_instance(1, seed).unwrap();
        let input = v.embed_witness(&StateVector::random(&v.witness_layout().unwrap(), &mut rng).unwrap()).unwrap();
        for proc in procedures() {
            let s = branch_sum_acceptance(&v, &proc, &input, &budget()).unwrap();
            let c = combinator_acceptance(&v, &proc, &input);
            assert!((s.acceptance - c).abs() < 1e-9, "{proc:?}, seed {seed}: {} vs {c}", s.acceptance);
            assert!((s.total_probability - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn record_operator_matches_combinators() {
    for seed in 0..6 {
        let v = haar_instance(2, 100 + seed).unwrap();
        for proc in procedures() {
            let dp = record_operator(&v, &proc, &budget()).unwrap();
            let lit = acceptance_operator(&combinator(&v, &proc), &budget()).unwrap();
            assert_eq!(dp.basis.len(), lit.basis.len());
            assert!(dp.matrix.distance(&lit.matrix) < 1e-9, "{proc:?}");
        }
    }
}

#[test]
fn branch_list_is_canonical() {
    let v = haar_instance(1, 9).unwrap();
    let input = top_eigenstate(&v);
    let b = branches(&v, &Procedure::AndRepetition { n: 1 }, &input, &budget()).unwrap();
    let outcomes: Vec<Vec<u64>> = b.iter().map(|x| x.outcomes.clone()).collect();
    assert_eq!(outcomes, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    assert_eq!(b.iter().filter(|x| x.accepted).count(), 1);
}

#[test]
fn branch_cap() {
    let v = haar_instance(0, 1).unwrap();
    let input = top_eigenstate(&v);
    let err = branch_sum_acceptance(&v, &Procedure::AndRepetition { n: 13 }, &input, &budget()).unwrap_err();
    assert!(matches!(err, Error::Capacity { .. }));
    assert!(branch_sum_acceptance(&v, &Procedure::MarriottWatrous { n: 2, t: 5 }, &input, &budget()).is_err());
}

#[test]
fn sampling_examples() {
    let yes = engineered_instance(&[1.0, 1.0], 1).unwrap();
    let s = sampled_acceptance(&yes, &top_eigenstate(&yes), 100, 1).unwrap();
    assert_eq!(s.estimate, 1.0);
    let no = engineered_instance(&[0.0, 0.0], 1).unwrap();
    let s = sampled_acceptance(&no, &top_eigenstate(&no), 100, 1).unwrap();
    assert_eq!(s.estimate, 0.0);

    let half = engineered_instance(&[0.5, 0.1], 8).unwrap();
    let r = reflection(&half).unwrap();
    let phi = top_eigenstate(&half).lift(r.layout()).unwrap();
    let s = sampled_acceptance(&r, &phi, 100_000, 11).unwrap();
    assert!((s.estimate - 1.0).abs() <= s.half_width.max(1e-12));
    assert_eq!(s, sampled_acceptance(&r, &phi, 100_000, 11).unwrap());
    assert!(sampled_acceptance(&r, &phi, 0, 11).is_err());
}

#[test]
fn sampling_covers_truth() {
    let v = haar_instance(1, 77).unwrap();
    let phi = top_eigenstate(&v);
    let p = state_acceptance(&v, &phi).unwrap();
    let mut covered = 0;
    for seed in 0..200 {
        let s = sampled_acceptance(&v, &phi, 2000, seed).unwrap();
        if (s.estimate - p).abs() <= s.half_width {
            covered += 1;
        }
    }
    assert!(covered >= 180, "coverage {covered}/200");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn probabilities_sum_to_one(seed in any::<u64>(), n in 1u64..4, l in 1u32..4) {
        let v = haar_instance(1, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let input = StateVector::random(v.layout(), &mut rng).unwrap();
        let procs = [
            Procedure::AndRepetition { n },
            Procedure::OrRepetition { n },
            Procedure::MarriottWatrous { n, t: n },
            Procedure::Additive { l, k: 1 },
            Procedure::Reflection,
        ];
        for proc in procs {
            let s = branch_sum_acceptance(&v, &proc, &input, &budget()).unwrap();
            prop_assert!((s.total_probability - 1.0).abs() < 1e-9);
            prop_assert!((0.0..=1.0).contains(&s.acceptance));
        }
    }
}
