//! Procedures that wrap a verifier into a larger verifier whose acceptance
//! operator is a fixed function of the original one.
//!
//! Every combinator appends its new registers above the existing layout, so
//! qubit positions of the wrapped circuit stay valid and an eigenstate of
//! the input lifts to the output by padding with zeros.

use crate::error::{Error, Result};
use crate::numerics::{ceil_log2, ceil_log2_real, ceil_real, DenseMatrix, C64, ONE, ZERO};
use crate::registers::{Comparison, Op, Operand, ProjectionSpec, RegisterLayout};
use crate::verifier::{ResourceReport, VerifierInstance};

/// Largest phase register the phase-estimation combinator will build.
pub const MAX_PHASE_QUBITS: u32 = 24;

pub(crate) fn hadamard() -> DenseMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    DenseMatrix::from_row_major(2, 2, vec![C64::new(h, 0.0), C64::new(h, 0.0), C64::new(h, 0.0), C64::new(-h, 0.0)])
        .unwrap()
}

fn pauli_x() -> DenseMatrix {
    DenseMatrix::from_row_major(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap()
}

/// CNOT with the control on the gate's low qubit.
fn cnot() -> DenseMatrix {
    let mut m = DenseMatrix::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(2, 2)] = ONE;
    m[(3, 1)] = ONE;
    m[(1, 3)] = ONE;
    m
}

fn hadamards(qubits: &[u32]) -> Result<Vec<Op>> {
    qubits.iter().map(|&q| Op::gate(hadamard(), vec![q])).collect()
}

/// Counter width `⌈log₂(2N + 1)⌉` for a procedure with `N` rounds.
pub fn counter_width(n: u64) -> u32 {
    ceil_log2(2 * n + 1)
}

/// Phase-register width `l + ⌈log₂(2 + 1/(2ε))⌉`.
pub fn phase_register_width(l: u32, eps: f64) -> u32 {
    l + ceil_log2_real(2.0 + 1.0 / (2.0 * eps)) as u32
}

/// The call count `2^l · ⌈1/(2ε) + 2⌉ − 1` quoted for one-shot phase estimation.
pub fn quoted_phase_estimation_calls(l: u32, eps: f64) -> u64 {
    (1u64 << l) * ceil_real(1.0 / (2.0 * eps) + 2.0) as u64 - 1
}

fn push(layout: &mut RegisterLayout, name: &str, width: u32) -> Result<Vec<u32>> {
    Ok(layout.push(name, width)?.qubits())
}

fn counter(v: &VerifierInstance, n: u64) -> Result<(RegisterLayout, String, Vec<u32>, u32)> {
    if n == 0 {
        return Err(Error::validation("repetition count", "N must be at least 1"));
    }
    let l = counter_width(n);
    // The counter never wraps: at most 2N increments fit below 2^l.
    if 2 * n >= 1u64 << l {
        return Err(Error::validation("counter width", format!("2N = {} does not fit {l} qubits", 2 * n)));
    }
    let mut layout = v.layout().clone();
    let name = layout.fresh_name("C");
    let qubits = push(&mut layout, &name, l)?;
    Ok((layout, name, qubits, l))
}

fn stage(
    v: &VerifierInstance,
    name: &str,
    extra: u32,
    op: &Op,
    reference: Option<u64>,
) -> ResourceReport {
    v.resources().with_stage(name, extra, op.call_counts(), reference)
}

/// One round of the repetition loop: `U`, a check of `after_u` that bumps the
/// counter, `U†`, and a Δ-failure check that bumps the counter.
fn repetition_round(
    v: &VerifierInstance,
    layout: &RegisterLayout,
    after_u: &ProjectionSpec,
    counter: &[u32],
) -> Result<Op> {
    let inc = Op::increment(counter.to_vec())?;
    Ok(Op::seq(vec![
        v.unitary().clone(),
        Op::controlled(after_u.compile(layout)?, inc.clone())?,
        v.unitary().adjoint(),
        Op::controlled(v.delta().complement().compile(layout)?, inc)?,
    ]))
}

/// Conjunction of `2N` coherent Π/Δ checks; eigenvalue `λ ↦ λ^{2N}`.
pub fn and_type_repetition(v: &VerifierInstance, n: u64) -> Result<VerifierInstance> {
    let (layout, c, qubits, l) = counter(v, n)?;
    let round = repetition_round(v, &layout, &v.pi().complement(), &qubits)?;
    let op = Op::repeat(round, n);
    let delta = ProjectionSpec::and(vec![v.delta().clone(), ProjectionSpec::register_zero(&c)]);
    let pi = ProjectionSpec::register_zero(&c);
    let resources = stage(v, "and-repetition", l, &op, None);
    v.derive(layout, op, delta, pi, resources)
}

/// Disjunction of `2N` coherent attempts; eigenvalue `λ ↦ 1 − (1 − λ)^{2N}`.
pub fn or_type_repetition(v: &VerifierInstance, n: u64) -> Result<VerifierInstance> {
    let (layout, c, qubits, l) = counter(v, n)?;
    let round = repetition_round(v, &layout, v.pi(), &qubits)?;
    let op = Op::repeat(round, n);
    let delta = ProjectionSpec::and(vec![v.delta().clone(), ProjectionSpec::register_zero(&c)]);
    let pi = ProjectionSpec::compare(&c, Comparison::Ne, 0);
    let resources = stage(v, "or-repetition", l, &op, None);
    v.derive(layout, op, delta, pi, resources)
}

/// Numerator of `t` on the `l`-bit grid, validating `t ∈ [0, ½]`.
pub fn grid_numerator(t: f64, l: u32) -> Result<u64> {
    if !(0.0..=0.5).contains(&t) {
        return Err(Error::validation("phase threshold", format!("t = {t} outside [0, 1/2]")));
    }
    let scaled = t * (1u64 << l) as f64;
    let k = scaled.round();
    if (scaled - k).abs() > 1e-9 {
        return Err(Error::validation(
            "phase threshold",
            format!("t = {t} is not a multiple of 2^-{l}"),
        ));
    }
    Ok(k as u64)
}

/// One-shot phase estimation of `Q = (2U†ΠU − I)(2Δ − I)`, accepting when the
/// estimated phase lies strictly inside `(−t, t)`.
pub fn one_shot_phase_estimation(v: &VerifierInstance, t: f64, l: u32, eps: f64) -> Result<VerifierInstance> {
    if l == 0 {
        return Err(Error::validation("phase precision", "l must be at least 1"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::validation("failure probability", format!("ε = {eps} outside (0, 1)")));
    }
    let t_num = grid_numerator(t, l)?;
    let m = phase_register_width(l, eps);
    if m > MAX_PHASE_QUBITS {
        return Err(Error::Capacity {
            what: "phase register qubits",
            needed: m as u64,
            budget: MAX_PHASE_QUBITS as u64,
        });
    }
    let mut layout = v.layout().clone();
    let p = layout.fresh_name("P");
    let phase = push(&mut layout, &p, m)?;

    // (2U†ΠU − I)(2Δ − I) = U† (2Π − I) U (2Δ − I); each factor flips the
    // sign of the complementary subspace.
    let q = Op::seq(vec![
        Op::phase_flip(v.delta().complement().compile(&layout)?),
        v.unitary().clone(),
        Op::phase_flip(v.pi().complement().compile(&layout)?),
        v.unitary().adjoint(),
    ]);
    let mut ops = hadamards(&phase)?;
    for (j, &qubit) in phase.iter().enumerate() {
        let control = ProjectionSpec::qubit(qubit, true).compile(&layout)?;
        ops.push(Op::controlled(control, Op::repeat(q.clone(), 1u64 << j))?);
    }
    ops.push(Op::fourier(phase.clone(), true)?);
    let op = Op::seq(ops);

    let delta = ProjectionSpec::and(vec![v.delta().clone(), ProjectionSpec::register_zero(&p)]);
    let pi = ProjectionSpec::phase_window(&p, t_num, l);
    let resources = stage(v, "phase-estimation", m, &op, Some(quoted_phase_estimation_calls(l, eps)));
    v.derive(layout, op, delta, pi, resources)
}

/// Marriott-Watrous style amplification: record `2N` alternating Π/Δ check
/// outcomes in fresh qubits, count agreements between neighbours, and accept
/// when at least `t` agree.
pub fn marriott_watrous(v: &VerifierInstance, n: u64, t: u64) -> Result<VerifierInstance> {
    if n == 0 {
        return Err(Error::validation("repetition count", "N must be at least 1"));
    }
    if t == 0 || t > 2 * n {
        return Err(Error::validation("agreement threshold", format!("t = {t} outside [1, {}]", 2 * n)));
    }
    let mut layout = v.layout().clone();
    let prefix = layout.fresh_prefix("B");
    let mut b = Vec::with_capacity(2 * n as usize + 1);
    for j in 0..=2 * n {
        let name = format!("{prefix}.{j}");
        let q = push(&mut layout, &name, 1)?[0];
        b.push((name, q));
    }
    let l = counter_width(n);
    let c = layout.fresh_name("C");
    let counter = push(&mut layout, &c, l)?;

    let not_pi = v.pi().complement().compile(&layout)?;
    let not_delta = v.delta().complement().compile(&layout)?;
    let mut ops = Vec::new();
    for j in 1..=n as usize {
        ops.push(v.unitary().clone());
        ops.push(Op::controlled(not_pi.clone(), Op::gate(pauli_x(), vec![b[2 * j - 1].1])?)?);
        ops.push(v.unitary().adjoint());
        ops.push(Op::controlled(not_delta.clone(), Op::gate(pauli_x(), vec![b[2 * j].1])?)?);
    }
    let inc = Op::increment(counter)?;
    for j in 1..=2 * n as usize {
        let same = ProjectionSpec::Compare {
            lhs: Operand::register(&b[j].0),
            cmp: Comparison::Eq,
            rhs: Operand::register(&b[j - 1].0),
        };
        ops.push(Op::controlled(same.compile(&layout)?, inc.clone())?);
    }
    let op = Op::seq(ops);

    let mut zeros: Vec<&str> = b.iter().map(|(name, _)| name.as_str()).collect();
    zeros.push(&c);
    let delta = ProjectionSpec::and(vec![v.delta().clone(), ProjectionSpec::all_zero(&zeros)]);
    let pi = ProjectionSpec::register_ge(&c, t);
    let resources = stage(v, "marriott-watrous", 2 * n as u32 + 1 + l, &op, None);
    v.derive(layout, op, delta, pi, resources)
}

/// What the comparison register of the additive adjustment is tested against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Threshold {
    /// A fixed guess `k ∈ {1, …, 2^l}`.
    Constant(u64),
    /// The one-based content of an `l`-qubit register, for a coherent guess.
    Register(String),
}

/// Additive adjustment with a fixed `k`; eigenvalue `λ ↦ ½ + ½(λ − k/2^l)`.
pub fn additive_adjustment(v: &VerifierInstance, l: u32, k: u64) -> Result<VerifierInstance> {
    additive_adjustment_with(v, l, &Threshold::Constant(k))
}

pub fn additive_adjustment_with(v: &VerifierInstance, l: u32, threshold: &Threshold) -> Result<VerifierInstance> {
    if l == 0 || l > 30 {
        return Err(Error::validation("comparison width", format!("l = {l} outside [1, 30]")));
    }
    let rhs = match threshold {
        Threshold::Constant(k) => {
            if *k == 0 || *k > 1u64 << l {
                return Err(Error::validation("guess", format!("k = {k} outside [1, {}]", 1u64 << l)));
            }
            Operand::Constant(*k)
        }
        Threshold::Register(name) => {
            let w = v.layout().register(name)?.width();
            if w != l {
                return Err(Error::validation("guess register", format!("`{name}` has {w} qubits, expected {l}")));
            }
            Operand::one_based(name)
        }
    };
    let mut layout = v.layout().clone();
    let b = layout.fresh_name("B");
    let coin = push(&mut layout, &b, 1)?;
    let r = layout.fresh_name("R");
    let reg = push(&mut layout, &r, l)?;

    let mut ops = hadamards(&coin)?;
    ops.extend(hadamards(&reg)?);
    ops.push(v.unitary().clone());
    let op = Op::seq(ops);

    let pi = ProjectionSpec::or(vec![
        ProjectionSpec::and(vec![ProjectionSpec::register_zero(&b), v.pi().clone()]),
        ProjectionSpec::and(vec![
            ProjectionSpec::register_eq(&b, 1),
            ProjectionSpec::Compare {
                lhs: Operand::one_based(&r),
                cmp: Comparison::Gt,
                rhs,
            },
        ]),
    ]);
    let delta = ProjectionSpec::and(vec![
        v.delta().clone(),
        ProjectionSpec::register_zero(&b),
        ProjectionSpec::register_zero(&r),
    ]);
    let resources = stage(v, "additive-adjustment", l + 1, &op, None);
    v.derive(layout, op, delta, pi, resources)
}

/// `U`, a phase flip on Π, `U†`, then reject inside Δ; eigenvalue `λ ↦ 4λ(1 − λ)`.
pub fn reflection(v: &VerifierInstance) -> Result<VerifierInstance> {
    let layout = v.layout().clone();
    let op = Op::seq(vec![
        v.unitary().clone(),
        Op::phase_flip(v.pi().compile(&layout)?),
        v.unitary().adjoint(),
    ]);
    let pi = v.delta().complement();
    let resources = stage(v, "reflection", 0, &op, None);
    v.derive(layout, op, v.delta().clone(), pi, resources)
}

/// The same circuit with an empty accepting projection.
pub fn reject_all(v: &VerifierInstance) -> Result<VerifierInstance> {
    reject_when(v, &ProjectionSpec::Always)
}

/// Rejects whenever `condition` holds, otherwise keeps the verdict.
pub fn reject_when(v: &VerifierInstance, condition: &ProjectionSpec) -> Result<VerifierInstance> {
    let pi = match condition {
        ProjectionSpec::Always => ProjectionSpec::Never,
        c => ProjectionSpec::and(vec![v.pi().clone(), c.complement()]),
    };
    let resources = stage(v, "reject", 0, v.unitary(), None);
    v.derive(v.layout().clone(), v.unitary().clone(), v.delta().clone(), pi, resources)
}

/// Names of the guess register and its purifying partner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuessRegisters {
    pub guess: String,
    pub partner: String,
    pub width: u32,
}

/// Appends an `l`-qubit guess register and an `l`-qubit partner. Until
/// [`uniform_guess`] is applied both are left unconstrained by Δ, so inner
/// stages treat the guess as a classical parameter.
pub fn attach_guess_registers(v: &VerifierInstance, l: u32) -> Result<(VerifierInstance, GuessRegisters)> {
    if l == 0 {
        return Err(Error::validation("guess width", "l must be at least 1"));
    }
    let mut layout = v.layout().clone();
    let guess = layout.fresh_name("G");
    push(&mut layout, &guess, l)?;
    let partner = layout.fresh_name("H");
    push(&mut layout, &partner, l)?;
    let resources = stage(v, "guess-registers", 2 * l, v.unitary(), None);
    let out = v.derive(layout, v.unitary().clone(), v.delta().clone(), v.pi().clone(), resources)?;
    Ok((out, GuessRegisters { guess, partner, width: l }))
}

/// Prepares the guess register in uniform superposition, entangled with its
/// partner, before running `v`. The acceptance operator becomes the uniform
/// average over guesses of the per-guess operators.
pub fn uniform_guess(v: &VerifierInstance, regs: &GuessRegisters) -> Result<VerifierInstance> {
    let layout = v.layout().clone();
    let g = layout.register(&regs.guess)?.qubits();
    let h = layout.register(&regs.partner)?.qubits();
    if v.unitary().support() & (layout.register(&regs.partner)?.mask()) != 0 {
        return Err(Error::validation("guess partner", "the partner register must stay idle"));
    }
    let mut ops = hadamards(&g)?;
    for (&a, &b) in g.iter().zip(&h) {
        ops.push(Op::gate(cnot(), vec![a, b])?);
    }
    ops.push(v.unitary().clone());
    let op = Op::seq(ops);
    let delta = ProjectionSpec::and(vec![
        v.delta().clone(),
        ProjectionSpec::all_zero(&[regs.guess.as_str(), regs.partner.as_str()]),
    ]);
    let resources = stage(v, "uniform-guess", 0, &op, None);
    v.derive(layout, op, delta, v.pi().clone(), resources)
}

#[cfg(test)]
mod tests;
