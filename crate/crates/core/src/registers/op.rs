use std::fmt;
use std::sync::Arc;

use rustfft::FftPlanner;

use super::projection::Predicate;
use crate::error::{Error, Result};
use crate::numerics::{DenseMatrix, C64, ZERO};

#[derive(Debug)]
struct Gate {
    matrix: DenseMatrix,
    adjoint: DenseMatrix,
}

#[derive(Debug)]
enum Kind {
    /// A dense unitary on the listed qubits; `qubits[0]` is the least
    /// significant bit of the matrix index. `call` marks applications of the
    /// base verifier, which are the ones resource accounting counts.
    Unitary {
        gate: Arc<Gate>,
        qubits: Vec<u32>,
        call: bool,
    },
    Increment {
        qubits: Vec<u32>,
    },
    PhaseFlip(Predicate),
    /// Quantum Fourier transform, `|y⟩ ↦ 2^{-w/2} Σ_k e^{±2πi yk/2^w} |k⟩`.
    Fourier {
        qubits: Vec<u32>,
        inverse: bool,
    },
    Controlled {
        control: Predicate,
        body: Op,
    },
    Seq(Vec<Op>),
    Repeat {
        body: Op,
        times: u64,
    },
    Adjoint(Op),
}

/// A unitary circuit over a fixed set of qubit positions, built as a tree of
/// shared nodes so composite procedures can embed an inner circuit many times
/// without copying it.
#[derive(Debug, Clone)]
pub struct Op(Arc<Kind>);

fn check_qubits(qubits: &[u32], what: &'static str) -> Result<()> {
    let mut seen = 0u64;
    for &q in qubits {
        if q >= 62 || seen & (1 << q) != 0 {
            return Err(Error::validation(what, format!("invalid or repeated qubit {q}")));
        }
        seen |= 1 << q;
    }
    Ok(())
}

impl Op {
    fn new(kind: Kind) -> Self {
        Op(Arc::new(kind))
    }

    pub fn identity() -> Self {
        Op::new(Kind::Seq(Vec::new()))
    }

    /// A fixed gate that does not count as a verifier call.
    pub fn gate(matrix: DenseMatrix, qubits: Vec<u32>) -> Result<Self> {
        Self::unitary(matrix, qubits, false)
    }

    /// One application of the base verifier unitary.
    pub fn call(matrix: DenseMatrix, qubits: Vec<u32>) -> Result<Self> {
        Self::unitary(matrix, qubits, true)
    }

    fn unitary(matrix: DenseMatrix, qubits: Vec<u32>, call: bool) -> Result<Self> {
        check_qubits(&qubits, "gate qubits")?;
        if !matrix.is_square() || matrix.rows() != 1usize << qubits.len() {
            return Err(Error::validation(
                "gate dimension",
                format!(
                    "{}x{} matrix on {} qubits",
                    matrix.rows(),
                    matrix.cols(),
                    qubits.len()
                ),
            ));
        }
        let adjoint = matrix.adjoint();
        Ok(Op::new(Kind::Unitary {
            gate: Arc::new(Gate { matrix, adjoint }),
            qubits,
            call,
        }))
    }

    /// `|j⟩ ↦ |(j + 1) mod 2^w⟩` on the register formed by `qubits`.
    pub fn increment(qubits: Vec<u32>) -> Result<Self> {
        check_qubits(&qubits, "counter qubits")?;
        Ok(Op::new(Kind::Increment { qubits }))
    }

    /// `I − 2P` for the projection `P` described by `p`.
    pub fn phase_flip(p: Predicate) -> Self {
        Op::new(Kind::PhaseFlip(p))
    }

    pub fn fourier(qubits: Vec<u32>, inverse: bool) -> Result<Self> {
        check_qubits(&qubits, "fourier qubits")?;
        Ok(Op::new(Kind::Fourier { qubits, inverse }))
    }

    /// `P ⊗ body + (I − P) ⊗ I`. The control must not read any qubit the
    /// body acts on, otherwise the block operator is not unitary.
    pub fn controlled(control: Predicate, body: Op) -> Result<Self> {
        let overlap = control.support() & body.support();
        if overlap != 0 {
            return Err(Error::validation(
                "controlled operation",
                format!("control and target share qubits (mask {overlap:#b})"),
            ));
        }
        Ok(Op::new(Kind::Controlled { control, body }))
    }

    pub fn seq(ops: Vec<Op>) -> Self {
        Op::new(Kind::Seq(ops))
    }

    pub fn repeat(body: Op, times: u64) -> Self {
        Op::new(Kind::Repeat { body, times })
    }

    pub fn adjoint(&self) -> Self {
        match &*self.0 {
            Kind::Adjoint(inner) => inner.clone(),
            _ => Op::new(Kind::Adjoint(self.clone())),
        }
    }

    /// Bit mask of every qubit the circuit may touch.
    pub fn support(&self) -> u64 {
        match &*self.0 {
            Kind::Unitary { qubits, .. } | Kind::Increment { qubits } | Kind::Fourier { qubits, .. } => {
                qubits.iter().fold(0, |m, q| m | 1 << q)
            }
            Kind::PhaseFlip(p) => p.support(),
            Kind::Controlled { control, body } => control.support() | body.support(),
            Kind::Seq(ops) => ops.iter().fold(0, |m, o| m | o.support()),
            Kind::Repeat { body, .. } | Kind::Adjoint(body) => body.support(),
        }
    }

    /// `(calls of V, calls of V†)` made by one application of the circuit.
    pub fn call_counts(&self) -> (u64, u64) {
        self.counts(false)
    }

    fn counts(&self, adjoint: bool) -> (u64, u64) {
        match &*self.0 {
            Kind::Unitary { call: true, .. } => {
                if adjoint {
                    (0, 1)
                } else {
                    (1, 0)
                }
            }
            Kind::Unitary { call: false, .. }
            | Kind::Increment { .. }
            | Kind::PhaseFlip(_)
            | Kind::Fourier { .. } => (0, 0),
            Kind::Controlled { body, .. } => body.counts(adjoint),
            Kind::Seq(ops) => ops.iter().fold((0, 0), |(a, b), o| {
                let (x, y) = o.counts(adjoint);
                (a + x, b + y)
            }),
            Kind::Repeat { body, times } => {
                let (x, y) = body.counts(adjoint);
                (x * times, y * times)
            }
            Kind::Adjoint(inner) => inner.counts(!adjoint),
        }
    }

    /// Applies the circuit in place to a full amplitude vector.
    pub fn apply(&self, amps: &mut [C64]) {
        self.run(amps, false);
    }

    pub fn apply_adjoint(&self, amps: &mut [C64]) {
        self.run(amps, true);
    }

    fn run(&self, amps: &mut [C64], adjoint: bool) {
        match &*self.0 {
            Kind::Unitary { gate, qubits, .. } => {
                let m = if adjoint { &gate.adjoint } else { &gate.matrix };
                apply_matrix(amps, m, qubits);
            }
            Kind::Increment { qubits } => {
                for_each_fiber(amps, qubits, |buf| {
                    if adjoint {
                        buf.rotate_left(1)
                    } else {
                        buf.rotate_right(1)
                    }
                });
            }
            Kind::PhaseFlip(p) => {
                for (i, a) in amps.iter_mut().enumerate() {
                    if p.holds(i as u64) {
                        *a = -*a;
                    }
                }
            }
            Kind::Fourier { qubits, inverse } => {
                // The inverse transform uses e^{-2πi yk/N}, which is the
                // conventional forward FFT.
                let forward_fft = *inverse != adjoint;
                apply_fourier(amps, qubits, forward_fft);
            }
            Kind::Controlled { control, body } => {
                let mut scratch = amps.to_vec();
                body.run(&mut scratch, adjoint);
                for (i, (a, s)) in amps.iter_mut().zip(scratch).enumerate() {
                    if control.holds(i as u64) {
                        *a = s;
                    }
                }
            }
            Kind::Seq(ops) => {
                if adjoint {
                    ops.iter().rev().for_each(|o| o.run(amps, true));
                } else {
                    ops.iter().for_each(|o| o.run(amps, false));
                }
            }
            Kind::Repeat { body, times } => {
                for _ in 0..*times {
                    body.run(amps, adjoint);
                }
            }
            Kind::Adjoint(inner) => inner.run(amps, !adjoint),
        }
    }

    /// Dense matrix of the circuit on `qubits` total qubits, built column by
    /// column from basis states.
    pub fn to_dense(&self, qubits: u32) -> DenseMatrix {
        let dim = 1usize << qubits;
        let mut out = DenseMatrix::zeros(dim, dim);
        let mut col = vec![ZERO; dim];
        for j in 0..dim {
            col.iter_mut().for_each(|c| *c = ZERO);
            col[j] = C64::new(1.0, 0.0);
            self.apply(&mut col);
            for (i, &c) in col.iter().enumerate() {
                out[(i, j)] = c;
            }
        }
        out
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Kind::Unitary { qubits, call, .. } => {
                write!(f, "{}{:?}", if *call { "V" } else { "G" }, qubits)
            }
            Kind::Increment { qubits } => write!(f, "INC{qubits:?}"),
            Kind::PhaseFlip(_) => write!(f, "FLIP"),
            Kind::Fourier { qubits, inverse } => {
                write!(f, "{}{qubits:?}", if *inverse { "IQFT" } else { "QFT" })
            }
            Kind::Controlled { body, .. } => write!(f, "C({body})"),
            Kind::Seq(ops) => {
                write!(f, "[")?;
                for (i, o) in ops.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{o}")?;
                }
                write!(f, "]")
            }
            Kind::Repeat { body, times } => write!(f, "({body})^{times}"),
            Kind::Adjoint(inner) => write!(f, "({inner})†"),
        }
    }
}

/// Offsets of the `2^k` basis states of `qubits` within a full index.
fn deposit_table(qubits: &[u32]) -> Vec<usize> {
    (0..1usize << qubits.len())
        .map(|g| {
            qubits
                .iter()
                .enumerate()
                .filter(|(b, _)| g >> b & 1 == 1)
                .fold(0usize, |acc, (_, &q)| acc | 1 << q)
        })
        .collect()
}

/// Calls `f` on each fiber of `qubits`: the amplitudes obtained by fixing
/// every other qubit, ordered by the register value they encode.
fn for_each_fiber(amps: &mut [C64], qubits: &[u32], mut f: impl FnMut(&mut [C64])) {
    let offsets = deposit_table(qubits);
    let mask = *offsets.last().unwrap();
    let mut buf = vec![ZERO; offsets.len()];
    let dim = amps.len();
    let mut base = 0usize;
    while base < dim {
        for (b, &o) in buf.iter_mut().zip(&offsets) {
            *b = amps[base | o];
        }
        f(&mut buf);
        for (b, &o) in buf.iter().zip(&offsets) {
            amps[base | o] = *b;
        }
        base = ((base | mask) + 1) & !mask;
    }
}

fn apply_matrix(amps: &mut [C64], m: &DenseMatrix, qubits: &[u32]) {
    let n = m.rows();
    let mut out = vec![ZERO; n];
    for_each_fiber(amps, qubits, |buf| {
        for (i, o) in out.iter_mut().enumerate() {
            *o = m.row(i).iter().zip(buf.iter()).map(|(a, b)| a * b).sum();
        }
        buf.copy_from_slice(&out);
    });
}

fn apply_fourier(amps: &mut [C64], qubits: &[u32], forward_fft: bool) {
    let n = 1usize << qubits.len();
    let mut planner = FftPlanner::new();
    let fft = if forward_fft {
        planner.plan_fft_forward(n)
    } else {
        planner.plan_fft_inverse(n)
    };
    let scale = 1.0 / (n as f64).sqrt();
    let mut scratch = vec![ZERO; fft.get_inplace_scratch_len()];
    for_each_fiber(amps, qubits, |buf| {
        fft.process_with_scratch(buf, &mut scratch);
        buf.iter_mut().for_each(|z| *z *= scale);
    });
}
