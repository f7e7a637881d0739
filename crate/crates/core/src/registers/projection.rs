use std::fmt;

use serde::{Deserialize, Serialize};

use super::layout::RegisterLayout;
use crate::error::{Error, Result};

/// How a register's bits are read as an integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Reading {
    /// Little-endian binary value in `0..2^w`.
    #[default]
    Binary,
    /// Binary value plus one, so contents range over `1..=2^w`.
    OneBased,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Comparison {
    fn holds(self, a: u64, b: u64) -> bool {
        match self {
            Comparison::Eq => a == b,
            Comparison::Ne => a != b,
            Comparison::Lt => a < b,
            Comparison::Le => a <= b,
            Comparison::Gt => a > b,
            Comparison::Ge => a >= b,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Comparison::Eq => "=",
            Comparison::Ne => "≠",
            Comparison::Lt => "<",
            Comparison::Le => "≤",
            Comparison::Gt => ">",
            Comparison::Ge => "≥",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Operand {
    Register { name: String, reading: Reading },
    Constant(u64),
}

impl Operand {
    pub fn register(name: &str) -> Self {
        Operand::Register {
            name: name.to_owned(),
            reading: Reading::Binary,
        }
    }

    pub fn one_based(name: &str) -> Self {
        Operand::Register {
            name: name.to_owned(),
            reading: Reading::OneBased,
        }
    }
}

/// A projection diagonal in the computational basis, written as a boolean
/// formula over per-register conditions.
///
/// Every formula denotes the projector onto the span of the basis states
/// that satisfy it, so any combination is idempotent and Hermitian.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectionSpec {
    /// The identity.
    Always,
    /// The zero projection.
    Never,
    /// Qubit `qubit` (a global index in the layout) equals `bit`.
    Qubit { qubit: u32, bit: bool },
    Compare {
        lhs: Operand,
        cmp: Comparison,
        rhs: Operand,
    },
    /// Register content `y` satisfies `min(y, 2^w − y) < τ·2^w` where
    /// `τ = numerator / 2^denominator_log2`.
    PhaseWindow {
        register: String,
        numerator: u64,
        denominator_log2: u32,
    },
    Not(Box<ProjectionSpec>),
    All(Vec<ProjectionSpec>),
    Any(Vec<ProjectionSpec>),
}

impl ProjectionSpec {
    pub fn qubit(qubit: u32, bit: bool) -> Self {
        ProjectionSpec::Qubit { qubit, bit }
    }

    pub fn compare(register: &str, cmp: Comparison, value: u64) -> Self {
        ProjectionSpec::Compare {
            lhs: Operand::register(register),
            cmp,
            rhs: Operand::Constant(value),
        }
    }

    pub fn register_eq(register: &str, value: u64) -> Self {
        Self::compare(register, Comparison::Eq, value)
    }

    pub fn register_zero(register: &str) -> Self {
        Self::register_eq(register, 0)
    }

    pub fn register_ge(register: &str, value: u64) -> Self {
        Self::compare(register, Comparison::Ge, value)
    }

    pub fn register_gt(register: &str, value: u64) -> Self {
        Self::compare(register, Comparison::Gt, value)
    }

    pub fn phase_window(register: &str, numerator: u64, denominator_log2: u32) -> Self {
        ProjectionSpec::PhaseWindow {
            register: register.to_owned(),
            numerator,
            denominator_log2,
        }
    }

    /// All listed registers hold zero.
    pub fn all_zero<S: AsRef<str>>(registers: &[S]) -> Self {
        ProjectionSpec::and(registers.iter().map(|r| Self::register_zero(r.as_ref())).collect())
    }

    pub fn and(mut parts: Vec<ProjectionSpec>) -> Self {
        parts.retain(|p| *p != ProjectionSpec::Always);
        match parts.len() {
            0 => ProjectionSpec::Always,
            1 => parts.pop().unwrap(),
            _ => ProjectionSpec::All(parts),
        }
    }

    pub fn or(mut parts: Vec<ProjectionSpec>) -> Self {
        parts.retain(|p| *p != ProjectionSpec::Never);
        match parts.len() {
            0 => ProjectionSpec::Never,
            1 => parts.pop().unwrap(),
            _ => ProjectionSpec::Any(parts),
        }
    }

    /// The complementary projection `I − P`.
    pub fn complement(&self) -> Self {
        match self {
            ProjectionSpec::Always => ProjectionSpec::Never,
            ProjectionSpec::Never => ProjectionSpec::Always,
            ProjectionSpec::Not(inner) => (**inner).clone(),
            other => ProjectionSpec::Not(Box::new(other.clone())),
        }
    }

    /// Resolves register names against `layout`.
    pub fn compile(&self, layout: &RegisterLayout) -> Result<Predicate> {
        let node = match self {
            ProjectionSpec::Always => Node::Const(true),
            ProjectionSpec::Never => Node::Const(false),
            ProjectionSpec::Qubit { qubit, bit } => {
                if *qubit >= layout.total_qubits() {
                    return Err(Error::validation(
                        "projection qubit",
                        format!("qubit {qubit} outside a {}-qubit layout", layout.total_qubits()),
                    ));
                }
                Node::Qubit { shift: *qubit, bit: *bit }
            }
            ProjectionSpec::Compare { lhs, cmp, rhs } => Node::Compare {
                lhs: compile_operand(lhs, layout)?,
                cmp: *cmp,
                rhs: compile_operand(rhs, layout)?,
            },
            ProjectionSpec::PhaseWindow {
                register,
                numerator,
                denominator_log2,
            } => {
                let r = layout.register(register)?;
                if r.width() + denominator_log2 >= 64 {
                    return Err(Error::validation(
                        "phase window",
                        "register width plus precision exceeds 63 bits",
                    ));
                }
                Node::Window {
                    shift: r.offset(),
                    width: r.width(),
                    numerator: *numerator,
                    denominator_log2: *denominator_log2,
                }
            }
            ProjectionSpec::Not(inner) => Node::Not(Box::new(inner.compile(layout)?.node)),
            ProjectionSpec::All(parts) => Node::All(
                parts
                    .iter()
                    .map(|p| p.compile(layout).map(|c| c.node))
                    .collect::<Result<_>>()?,
            ),
            ProjectionSpec::Any(parts) => Node::Any(
                parts
                    .iter()
                    .map(|p| p.compile(layout).map(|c| c.node))
                    .collect::<Result<_>>()?,
            ),
        };
        Ok(Predicate { node })
    }
}

fn compile_operand(op: &Operand, layout: &RegisterLayout) -> Result<Value> {
    Ok(match op {
        Operand::Constant(v) => Value::Constant(*v),
        Operand::Register { name, reading } => {
            let r = layout.register(name)?;
            Value::Register {
                shift: r.offset(),
                mask: (1u64 << r.width()) - 1,
                plus: u64::from(*reading == Reading::OneBased),
            }
        }
    })
}

impl fmt::Display for ProjectionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn operand(o: &Operand) -> String {
            match o {
                Operand::Constant(v) => v.to_string(),
                Operand::Register { name, reading: Reading::Binary } => name.clone(),
                Operand::Register { name, reading: Reading::OneBased } => format!("{name}⁺"),
            }
        }
        fn join(f: &mut fmt::Formatter<'_>, parts: &[ProjectionSpec], sep: &str) -> fmt::Result {
            write!(f, "(")?;
            for (i, p) in parts.iter().enumerate() {
                if i > 0 {
                    write!(f, " {sep} ")?;
                }
                write!(f, "{p}")?;
            }
            write!(f, ")")
        }
        match self {
            ProjectionSpec::Always => write!(f, "⊤"),
            ProjectionSpec::Never => write!(f, "⊥"),
            ProjectionSpec::Qubit { qubit, bit } => write!(f, "q{qubit}={}", u8::from(*bit)),
            ProjectionSpec::Compare { lhs, cmp, rhs } => {
                write!(f, "{}{}{}", operand(lhs), cmp.symbol(), operand(rhs))
            }
            ProjectionSpec::PhaseWindow {
                register,
                numerator,
                denominator_log2,
            } => write!(f, "|{register}| < {numerator}/2^{denominator_log2}"),
            ProjectionSpec::Not(inner) => write!(f, "¬{inner}"),
            ProjectionSpec::All(parts) => join(f, parts, "∧"),
            ProjectionSpec::Any(parts) => join(f, parts, "∨"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Value {
    Constant(u64),
    Register { shift: u32, mask: u64, plus: u64 },
}

impl Value {
    #[inline]
    fn eval(&self, index: u64) -> u64 {
        match *self {
            Value::Constant(v) => v,
            Value::Register { shift, mask, plus } => ((index >> shift) & mask) + plus,
        }
    }

    fn support(&self) -> u64 {
        match *self {
            Value::Constant(_) => 0,
            Value::Register { shift, mask, .. } => mask << shift,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Node {
    Const(bool),
    Qubit { shift: u32, bit: bool },
    Compare { lhs: Value, cmp: Comparison, rhs: Value },
    Window { shift: u32, width: u32, numerator: u64, denominator_log2: u32 },
    Not(Box<Node>),
    All(Vec<Node>),
    Any(Vec<Node>),
}

impl Node {
    fn holds(&self, index: u64) -> bool {
        match self {
            Node::Const(b) => *b,
            Node::Qubit { shift, bit } => ((index >> shift) & 1 == 1) == *bit,
            Node::Compare { lhs, cmp, rhs } => cmp.holds(lhs.eval(index), rhs.eval(index)),
            Node::Window {
                shift,
                width,
                numerator,
                denominator_log2,
            } => {
                let size = 1u64 << width;
                let y = (index >> shift) & (size - 1);
                let dist = y.min(size - y);
                // dist / 2^w < numerator / 2^d, cross-multiplied.
                (dist << denominator_log2) < numerator.saturating_mul(size)
            }
            Node::Not(inner) => !inner.holds(index),
            Node::All(parts) => parts.iter().all(|p| p.holds(index)),
            Node::Any(parts) => parts.iter().any(|p| p.holds(index)),
        }
    }

    fn support(&self) -> u64 {
        match self {
            Node::Const(_) => 0,
            Node::Qubit { shift, .. } => 1 << shift,
            Node::Compare { lhs, rhs, .. } => lhs.support() | rhs.support(),
            Node::Window { shift, width, .. } => ((1u64 << width) - 1) << shift,
            Node::Not(inner) => inner.support(),
            Node::All(parts) | Node::Any(parts) => parts.iter().fold(0, |m, p| m | p.support()),
        }
    }
}

/// A [`ProjectionSpec`] bound to concrete qubit positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predicate {
    node: Node,
}

impl Predicate {
    pub fn always() -> Self {
        Predicate { node: Node::Const(true) }
    }

    /// Whether basis state `index` lies in the projection's range.
    #[inline]
    pub fn holds(&self, index: u64) -> bool {
        self.node.holds(index)
    }

    /// Bit mask of the qubits the predicate reads.
    pub fn support(&self) -> u64 {
        self.node.support()
    }

    pub fn negate(&self) -> Self {
        Predicate {
            node: Node::Not(Box::new(self.node.clone())),
        }
    }

    /// Membership table over all `dim` basis states.
    pub fn table(&self, dim: usize) -> Vec<bool> {
        (0..dim as u64).map(|i| self.holds(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout() -> RegisterLayout {
        RegisterLayout::new(&[("A", 2), ("B", 3)]).unwrap()
    }

    #[test]
    fn register_comparisons() {
        let l = layout();
        let ge = ProjectionSpec::register_ge("B", 5).compile(&l).unwrap();
        assert!(ge.holds(5 << 2));
        assert!(!ge.holds(4 << 2 | 3));
        let one_based = ProjectionSpec::Compare {
            lhs: Operand::one_based("B"),
            cmp: Comparison::Gt,
            rhs: Operand::Constant(5),
        }
        .compile(&l)
        .unwrap();
        assert!(one_based.holds(5 << 2));
        assert!(!one_based.holds(4 << 2));
        assert_eq!(ge.support(), 0b11100);
    }

    #[test]
    fn phase_window_is_symmetric() {
        let l = RegisterLayout::new(&[("P", 3)]).unwrap();
        // τ = 1/4 on a 3-qubit register: accept y with min(y, 8 − y) < 2.
        let w = ProjectionSpec::phase_window("P", 1, 2).compile(&l).unwrap();
        let accepted: Vec<u64> = (0..8).filter(|&y| w.holds(y)).collect();
        assert_eq!(accepted, vec![0, 1, 7]);
    }

    #[test]
    fn boolean_structure() {
        let l = layout();
        let spec = ProjectionSpec::or(vec![
            ProjectionSpec::and(vec![ProjectionSpec::qubit(0, false), ProjectionSpec::register_zero("B")]),
            ProjectionSpec::qubit(1, true),
        ]);
        let p = spec.compile(&l).unwrap();
        assert!(p.holds(0));
        assert!(p.holds(0b10 | 7 << 2));
        assert!(!p.holds(0b01 | 1 << 2));
        assert_eq!(spec.complement().complement(), spec);
        assert!(ProjectionSpec::register_zero("Z").compile(&l).is_err());
        assert!(ProjectionSpec::qubit(5, true).compile(&l).is_err());
    }

    #[test]
    fn register_against_register() {
        let l = RegisterLayout::new(&[("R", 2), ("G", 2)]).unwrap();
        let p = ProjectionSpec::Compare {
            lhs: Operand::register("R"),
            cmp: Comparison::Ge,
            rhs: Operand::one_based("G"),
        }
        .compile(&l)
        .unwrap();
        // R ≥ G + 1
        assert!(p.holds(1));
        assert!(!p.holds(1 | 1 << 2));
        assert!(p.holds(3 | 2 << 2));
    }
}
