use std::fmt;

use crate::error::{Error, Result};

/// Largest layout the engine will describe; support masks are `u64`.
pub const MAX_LAYOUT_QUBITS: u32 = 62;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Register {
    name: String,
    width: u32,
    offset: u32,
}

impl Register {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    /// Index of the register's least-significant qubit.
    pub fn offset(&self) -> u32 {
        self.offset
    }

    pub fn qubits(&self) -> Vec<u32> {
        (self.offset..self.offset + self.width).collect()
    }

    pub fn mask(&self) -> u64 {
        ((1u64 << self.width) - 1) << self.offset
    }

    /// The register's content in basis state `index`, little-endian.
    pub fn value(&self, index: u64) -> u64 {
        (index >> self.offset) & ((1u64 << self.width) - 1)
    }
}

/// An ordered list of named registers. The first register occupies the
/// least-significant qubits of a basis index.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RegisterLayout {
    registers: Vec<Register>,
    total: u32,
}

impl RegisterLayout {
    pub fn new<S: AsRef<str>>(registers: &[(S, u32)]) -> Result<Self> {
        let mut layout = RegisterLayout::default();
        for (name, width) in registers {
            layout.push(name.as_ref(), *width)?;
        }
        Ok(layout)
    }

    /// Appends a register above every existing one.
    pub fn push(&mut self, name: &str, width: u32) -> Result<&Register> {
        if width == 0 {
            return Err(Error::validation("register width", format!("`{name}` has width 0")));
        }
        if name.is_empty() {
            return Err(Error::validation("register name", "names must be non-empty"));
        }
        if self.contains(name) {
            return Err(Error::validation("register name", format!("`{name}` declared twice")));
        }
        if self.total + width > MAX_LAYOUT_QUBITS {
            return Err(Error::Capacity {
                what: "layout qubits",
                needed: (self.total + width) as u64,
                budget: MAX_LAYOUT_QUBITS as u64,
            });
        }
        self.registers.push(Register {
            name: name.to_owned(),
            width,
            offset: self.total,
        });
        self.total += width;
        Ok(self.registers.last().unwrap())
    }

    /// A name derived from `stem` that no register uses yet.
    pub fn fresh_name(&self, stem: &str) -> String {
        if !self.contains(stem) {
            return stem.to_owned();
        }
        (2..)
            .map(|i| format!("{stem}{i}"))
            .find(|n| !self.contains(n))
            .unwrap()
    }

    /// A prefix `p` such that no register is named `p` or starts with `p.`.
    pub fn fresh_prefix(&self, stem: &str) -> String {
        let taken = |p: &str| {
            self.registers
                .iter()
                .any(|r| r.name == p || r.name.starts_with(&format!("{p}.")))
        };
        if !taken(stem) {
            return stem.to_owned();
        }
        (2..).map(|i| format!("{stem}{i}")).find(|p| !taken(p)).unwrap()
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn contains(&self, name: &str) -> bool {
        self.registers.iter().any(|r| r.name == name)
    }

    pub fn register(&self, name: &str) -> Result<&Register> {
        self.registers
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| Error::UnknownRegister(name.to_owned()))
    }

    /// Qubit indices of the named registers, concatenated in the given order.
    pub fn qubits_of<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<u32>> {
        let mut out = Vec::new();
        for n in names {
            out.extend(self.register(n.as_ref())?.qubits());
        }
        Ok(out)
    }

    pub fn total_qubits(&self) -> u32 {
        self.total
    }

    /// `2^total_qubits`; only meaningful for layouts small enough to simulate.
    pub fn dim(&self) -> usize {
        1usize << self.total
    }

    pub fn value(&self, index: u64, name: &str) -> Result<u64> {
        Ok(self.register(name)?.value(index))
    }
}

impl fmt::Display for RegisterLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .registers
            .iter()
            .map(|r| format!("{}[{}]", r.name, r.width))
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}
