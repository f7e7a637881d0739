use proptest::prelude::*;

use super::*;
use crate::numerics::DenseMatrix;
use crate::tolerance::{Budget, Tolerances};
use crate::verifier::{acceptance_operator, engineered_instance, m_spectrum, state_acceptance, SpectrumReport};

const LAWS: [f64; 4] = [0.9, 0.75, 0.5, 0.2];

fn spectrum(v: &VerifierInstance) -> SpectrumReport {
    m_spectrum(v).unwrap()
}

/// Acceptance of `wrapped` on each eigenstate of `base`, lifted with zero ancillas.
fn lifted_acceptances(base: &VerifierInstance, wrapped: &VerifierInstance) -> Vec<(f64, f64)> {
    let s = spectrum(base);
    s.eigenvalues
        .iter()
        .zip(&s.eigenstates)
        .map(|(&l, phi)| (l, state_acceptance(wrapped, &phi.lift(wrapped.layout()).unwrap()).unwrap()))
        .collect()
}

fn check_law(wrapped: impl Fn(&VerifierInstance) -> VerifierInstance, law: impl Fn(f64) -> f64) {
    let base = engineered_instance(&LAWS, 7).unwrap();
    let out = wrapped(&base);
    for (l, acc) in lifted_acceptances(&base, &out) {
        assert!((acc - law(l)).abs() < 1e-9, "λ = {l}: got {acc}, want {}", law(l));
    }
}

fn binomial_tail(n: u64, p: f64, t: u64) -> f64 {
    let mut total = 0.0;
    for k in t..=n {
        let mut c = 1.0;
        for i in 0..k {
            c *= (n - i) as f64 / (i + 1) as f64;
        }
        total += c * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
    }
    total
}

fn single(lambda: f64) -> VerifierInstance {
    engineered_instance(&[lambda, 0.0], 3).unwrap()
}

fn top(v: &VerifierInstance) -> f64 {
    spectrum(v).max_acceptance
}

#[test]
fn and_examples() {
    for n in 1..4 {
        assert!((top(&and_type_repetition(&single(1.0), n).unwrap()) - 1.0).abs() < 1e-9);
    }
    let v = and_type_repetition(&single(0.75), 1).unwrap();
    assert!((top(&v) - 0.5625).abs() < 1e-9);
}

#[test]
fn or_examples() {
    let v = or_type_repetition(&engineered_instance(&[0.0, 0.0], 1).unwrap(), 2).unwrap();
    assert!(top(&v).abs() < 1e-9);
    let v = or_type_repetition(&single(0.5), 1).unwrap();
    assert!((top(&v) - 0.75).abs() < 1e-9);
}

#[test]
fn eigenvalue_laws() {
    check_law(|v| and_type_repetition(v, 2).unwrap(), |l| l.powi(4));
    check_law(|v| or_type_repetition(v, 3).unwrap(), |l| 1.0 - (1.0 - l).powi(6));
    check_law(|v| additive_adjustment(v, 2, 3).unwrap(), |l| 0.5 + 0.5 * (l - 0.75));
    check_law(|v| reflection(v).unwrap(), |l| 4.0 * l * (1.0 - l));
    check_law(|v| marriott_watrous(v, 2, 3).unwrap(), |l| binomial_tail(4, l, 3));
}

fn restricted(v: &VerifierInstance) -> DenseMatrix {
    acceptance_operator(v, &Budget::default()).unwrap().matrix
}

#[test]
fn and_operator_identity() {
    let base = crate::verifier::haar_instance(2, 11).unwrap();
    let m = restricted(&base);
    let out = restricted(&and_type_repetition(&base, 2).unwrap());
    // The counter sits above the base qubits, so Δ′ has the same basis order.
    assert!(out.distance(&m.pow(4)) < 1e-9);
}

#[test]
fn or_operator_identity() {
    let base = crate::verifier::haar_instance(2, 12).unwrap();
    let m = restricted(&base);
    let id = DenseMatrix::identity(m.rows());
    let out = restricted(&or_type_repetition(&base, 2).unwrap());
    let want = &id - &(&id - &m).pow(4);
    assert!(out.distance(&want) < 1e-9);
}

#[test]
fn phase_estimation_examples() {
    // λ = 1 has phase exactly zero.
    let v = one_shot_phase_estimation(&single(1.0), 0.25, 2, 0.25).unwrap();
    assert!(top(&v) > 1.0 - 1e-9);
    let zero = engineered_instance(&[0.0, 0.0], 5).unwrap();
    let v = one_shot_phase_estimation(&zero, 0.25, 2, 0.25).unwrap();
    assert!(top(&v) <= 0.25 + 1e-9);

    // c = 0.9, s = 0.1: l = 3 and t = 2/8.
    let base = engineered_instance(&[0.97, 0.92, 0.08, 0.01], 9).unwrap();
    let v = one_shot_phase_estimation(&base, 0.25, 3, 0.25).unwrap();
    for (l, acc) in lifted_acceptances(&base, &v) {
        if l >= 0.9 {
            assert!(acc >= 0.75, "λ = {l}: {acc}");
        } else {
            assert!(acc <= 0.25, "λ = {l}: {acc}");
        }
    }
    let sound = engineered_instance(&[0.1, 0.07, 0.03, 0.0], 10).unwrap();
    let v = one_shot_phase_estimation(&sound, 0.25, 3, 0.25).unwrap();
    assert!(top(&v) <= 0.25 + 1e-9);
}

#[test]
fn phase_estimation_validation() {
    let v = single(0.5);
    assert!(one_shot_phase_estimation(&v, 0.3, 2, 0.25).is_err());
    assert!(one_shot_phase_estimation(&v, 0.75, 2, 0.25).is_err());
    assert!(one_shot_phase_estimation(&v, 0.25, 2, 0.0).is_err());
    assert!(one_shot_phase_estimation(&v, 0.25, 2, 1.0).is_err());
    assert!(one_shot_phase_estimation(&v, 0.25, 0, 0.5).is_err());
}

#[test]
fn phase_estimation_resources() {
    let v = one_shot_phase_estimation(&single(0.5), 0.25, 2, 0.25).unwrap();
    let m = phase_register_width(2, 0.25);
    assert_eq!(m, 4);
    let r = v.resources();
    assert_eq!(r.extra_qubits, m);
    assert_eq!(r.calls_v, (1 << m) - 1);
    assert_eq!(r.calls_v_dagger, (1 << m) - 1);
    assert_eq!(r.stage_breakdown[0].reference_calls, Some(quoted_phase_estimation_calls(2, 0.25)));
    assert_eq!(quoted_phase_estimation_calls(2, 0.25), 4 * 4 - 1);
}

#[test]
fn marriott_watrous_examples() {
    assert!((top(&marriott_watrous(&single(1.0), 2, 2).unwrap()) - 1.0).abs() < 1e-9);
    let zero = engineered_instance(&[0.0, 0.0], 4).unwrap();
    assert!(top(&marriott_watrous(&zero, 2, 2).unwrap()) < 1e-9);
    let v = marriott_watrous(&single(0.75), 3, 3).unwrap();
    let acc = top(&v);
    assert!((acc - binomial_tail(6, 0.75, 3)).abs() < 1e-9);
    assert!(acc > 1.0 - (-4.0 * 0.0625 * 3.0f64).exp());
}

#[test]
fn marriott_watrous_validation() {
    let v = single(0.5);
    assert!(marriott_watrous(&v, 2, 0).is_err());
    assert!(marriott_watrous(&v, 2, 5).is_err());
    assert!(marriott_watrous(&v, 0, 1).is_err());
    let r = marriott_watrous(&v, 2, 4).unwrap();
    assert_eq!(r.resources().extra_qubits, 5 + counter_width(2));
    assert_eq!((r.resources().calls_v, r.resources().calls_v_dagger), (2, 2));
}

#[test]
fn additive_examples() {
    let v = additive_adjustment(&single(1.0), 2, 4).unwrap();
    assert!((top(&v) - 0.5).abs() < 1e-9);
    let v = additive_adjustment(&single(0.5), 2, 2).unwrap();
    assert!((top(&v) - 0.5).abs() < 1e-9);
    let base = single(0.9);
    let v = additive_adjustment(&base, 3, 8).unwrap();
    let acc = lifted_acceptances(&base, &v);
    assert!((acc[0].1 - 0.45).abs() < 1e-10);
    assert!(additive_adjustment(&base, 2, 0).is_err());
    assert!(additive_adjustment(&base, 2, 5).is_err());
    assert_eq!(v.resources().extra_qubits, 4);
    assert_eq!((v.resources().calls_v, v.resources().calls_v_dagger), (1, 0));
}

#[test]
fn reflection_examples() {
    assert!(top(&reflection(&engineered_instance(&[0.0, 0.0], 1).unwrap()).unwrap()) < 1e-9);
    assert!(top(&reflection(&engineered_instance(&[1.0, 1.0], 1).unwrap()).unwrap()) < 1e-9);
    assert!((top(&reflection(&single(0.5)).unwrap()) - 1.0).abs() < 1e-9);
    let base = single(0.45);
    let acc = lifted_acceptances(&base, &reflection(&base).unwrap());
    assert!((acc[0].1 - 0.99).abs() < 1e-10);
    let r = reflection(&base).unwrap();
    assert_eq!(r.resources().extra_qubits, 0);
    assert_eq!((r.resources().calls_v, r.resources().calls_v_dagger), (1, 1));
}

#[test]
fn reflection_soundness_gap() {
    let eps = 0.2;
    let base = engineered_instance(&[0.95, 0.72, 0.25, 0.1], 21).unwrap();
    assert!(top(&reflection(&base).unwrap()) <= 1.0 - 4.0 * eps * eps + 1e-9);
}

#[test]
fn rejecting_wrappers() {
    let base = single(0.8);
    let r = reject_all(&and_type_repetition(&base, 1).unwrap()).unwrap();
    assert!(top(&r) < 1e-12);
    assert_eq!((r.resources().calls_v, r.resources().calls_v_dagger), (1, 1));
    assert!(r.resources().is_consistent());

    let (g, regs) = attach_guess_registers(&base, 1).unwrap();
    let cond = ProjectionSpec::register_eq(&regs.guess, 1);
    let r = reject_when(&g, &cond).unwrap();
    // Guess 0 keeps the verdict, guess 1 always rejects; the idle partner
    // register doubles every eigenvalue.
    let s = spectrum(&r);
    assert!((s.eigenvalues[0] - 0.8).abs() < 1e-9);
    assert_eq!(s.eigenvalues.iter().filter(|&&l| l > 1e-9).count(), 2);
}

#[test]
fn uniform_guess_averages_branches() {
    let base = engineered_instance(&LAWS, 31).unwrap();
    let (g, regs) = attach_guess_registers(&base, 1).unwrap();
    let adj = additive_adjustment_with(&g, 1, &Threshold::Register(regs.guess.clone())).unwrap();
    let mixed = uniform_guess(&adj, &regs).unwrap();
    // One-based guesses 1 and 2 of 2 average to k/2^l = 3/4.
    let got = spectrum(&mixed).eigenvalues;
    let want: Vec<f64> = LAWS.iter().map(|l| 0.5 + 0.5 * (l - 0.75)).collect();
    assert_eq!(got.len(), want.len());
    for (a, b) in got.iter().zip(&want) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
    assert_eq!(mixed.resources().extra_qubits, 2 + 2);
    assert!(mixed.resources().is_consistent());
}

#[test]
fn guess_register_as_constant() {
    let base = engineered_instance(&LAWS, 32).unwrap();
    let (g, regs) = attach_guess_registers(&base, 2).unwrap();
    let coherent = additive_adjustment_with(&g, 2, &Threshold::Register(regs.guess.clone())).unwrap();
    let op = restricted(&coherent);
    let basis = acceptance_operator(&coherent, &Budget::default()).unwrap().basis;
    let g = coherent.layout().register(&regs.guess).unwrap().clone();
    let h = coherent.layout().register(&regs.partner).unwrap().clone();
    for guess in 0..4u64 {
        let idx: Vec<usize> = (0..basis.len())
            .filter(|&i| g.value(basis[i] as u64) == guess && h.value(basis[i] as u64) == 0)
            .collect();
        let block = op.principal_submatrix(&idx);
        let direct = restricted(&additive_adjustment(&base, 2, guess + 1).unwrap());
        assert!(block.distance(&direct) < 1e-9);
    }
}

#[test]
fn combinators_compose() {
    let base = engineered_instance(&[0.8, 0.3], 41).unwrap();
    let v = or_type_repetition(&and_type_repetition(&reflection(&base).unwrap(), 1).unwrap(), 1).unwrap();
    let r = v.resources();
    assert!(r.is_consistent());
    assert_eq!(r.stage_breakdown.len(), 3);
    assert_eq!((r.calls_v, r.calls_v_dagger), (4, 4));
    let law = |l: f64| {
        let x = 4.0 * l * (1.0 - l);
        1.0 - (1.0 - x * x).powi(2)
    };
    for (l, acc) in lifted_acceptances(&base, &v) {
        assert!((acc - law(l)).abs() < 1e-9);
    }
    let s = spectrum(&v);
    let tol = Tolerances::default();
    assert!(s.eigenvalues.iter().all(|&l| (-tol.spectrum_clamp..=1.0).contains(&l)));
}

#[test]
fn repetition_validation() {
    let v = single(0.5);
    assert!(and_type_repetition(&v, 0).is_err());
    assert!(or_type_repetition(&v, 0).is_err());
    let r = and_type_repetition(&v, 3).unwrap();
    assert_eq!(r.resources().extra_qubits, 3);
    assert_eq!((r.resources().calls_v, r.resources().calls_v_dagger), (3, 3));
}

#[test]
fn grid_numerators() {
    assert_eq!(grid_numerator(0.25, 3).unwrap(), 2);
    assert_eq!(grid_numerator(0.0, 1).unwrap(), 0);
    assert_eq!(grid_numerator(0.5, 1).unwrap(), 1);
    assert!(grid_numerator(0.1, 3).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn soundness_is_monotone(seed in any::<u64>(), eps in 0.05f64..0.6) {
        let lambdas: Vec<f64> = (0..4).map(|i| eps * ((seed >> (8 * i)) & 0xff) as f64 / 255.0).collect();
        let base = engineered_instance(&lambdas, seed).unwrap();
        prop_assert!(top(&and_type_repetition(&base, 2).unwrap()) <= eps.powi(4) + 1e-9);
        prop_assert!(top(&or_type_repetition(&base, 2).unwrap()) <= 1.0 - (1.0 - eps).powi(4) + 1e-9);
        prop_assert!(top(&additive_adjustment(&base, 2, 1).unwrap()) <= 0.5 + 0.5 * (eps - 0.25) + 1e-9);
    }

    #[test]
    fn and_or_laws_random(seed in any::<u64>(), n in 1u64..3) {
        let base = crate::verifier::haar_instance(1, seed).unwrap();
        let a = and_type_repetition(&base, n).unwrap();
        let o = or_type_repetition(&base, n).unwrap();
        for (l, acc) in lifted_acceptances(&base, &a) {
            prop_assert!((acc - l.powi(2 * n as i32)).abs() < 1e-9);
        }
        for (l, acc) in lifted_acceptances(&base, &o) {
            prop_assert!((acc - (1.0 - (1.0 - l).powi(2 * n as i32))).abs() < 1e-9);
        }
    }
}
