use std::ops::Range;

use crate::error::{Error, Result};

/// A named group of `count` identical subsystems of dimension `dim`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Register {
    pub name: String,
    pub dim: usize,
    pub count: usize,
}

/// Ordered mixed-radix register layout. Subsystems are flattened register by
/// register; the first subsystem is the most significant digit of a basis
/// index.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RegisterLayout {
    registers: Vec<Register>,
}

impl RegisterLayout {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(name: &str, dim: usize) -> Self {
        Self::new().with(name, dim, 1)
    }

    /// Builder form of [`push`](Self::push). Panics on invalid input, so only
    /// use it with literal arguments.
    pub fn with(mut self, name: &str, dim: usize, count: usize) -> Self {
        self.push(name, dim, count).expect("invalid register");
        self
    }

    pub fn push(&mut self, name: &str, dim: usize, count: usize) -> Result<()> {
        if dim == 0 || count == 0 {
            return Err(Error::InvalidArgument(format!(
                "register `{name}` needs dim ≥ 1 and count ≥ 1"
            )));
        }
        if self.registers.iter().any(|r| r.name == name) {
            return Err(Error::InvalidArgument(format!("duplicate register `{name}`")));
        }
        self.registers.push(Register { name: name.to_string(), dim, count });
        Ok(())
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn register(&self, name: &str) -> Result<&Register> {
        self.registers
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| Error::UnknownRegister(name.to_string()))
    }

    /// Flat list of subsystem dimensions.
    pub fn dims(&self) -> Vec<usize> {
        self.registers
            .iter()
            .flat_map(|r| std::iter::repeat(r.dim).take(r.count))
            .collect()
    }

    pub fn num_subsystems(&self) -> usize {
        self.registers.iter().map(|r| r.count).sum()
    }

    pub fn total_dim(&self) -> usize {
        self.registers.iter().map(|r| r.dim.pow(r.count as u32)).product()
    }

    /// Flat subsystem indices of a register.
    pub fn subsystems(&self, name: &str) -> Result<Range<usize>> {
        let mut start = 0;
        for r in &self.registers {
            if r.name == name {
                return Ok(start..start + r.count);
            }
            start += r.count;
        }
        Err(Error::UnknownRegister(name.to_string()))
    }

    /// Flat subsystem indices of the named registers, in layout order.
    pub fn select<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        for n in names {
            self.register(n.as_ref())?;
        }
        let mut out = Vec::new();
        let mut start = 0;
        for r in &self.registers {
            if names.iter().any(|n| n.as_ref() == r.name) {
                out.extend(start..start + r.count);
            }
            start += r.count;
        }
        Ok(out)
    }

    /// Layout made of the named registers only, in layout order.
    pub fn restrict<S: AsRef<str>>(&self, names: &[S]) -> Result<Self> {
        for n in names {
            self.register(n.as_ref())?;
        }
        Ok(Self {
            registers: self
                .registers
                .iter()
                .filter(|r| names.iter().any(|n| n.as_ref() == r.name))
                .cloned()
                .collect(),
        })
    }

    /// Concatenation; colliding names in `other` get a numeric suffix.
    pub fn concat(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for r in &other.registers {
            let mut name = r.name.clone();
            let mut k = 2;
            while out.registers.iter().any(|x| x.name == name) {
                name = format!("{}_{k}", r.name);
                k += 1;
            }
            out.registers.push(Register { name, dim: r.dim, count: r.count });
        }
        out
    }

    /// Layout with one count-1 register per flat subsystem, named
    /// `<register><index>` (or just the register name when count is 1).
    pub fn flattened(&self) -> Self {
        let mut out = Self::new();
        for r in &self.registers {
            for k in 0..r.count {
                let name = if r.count == 1 { r.name.clone() } else { format!("{}{k}", r.name) };
                out.registers.push(Register { name, dim: r.dim, count: 1 });
            }
        }
        out
    }
}

/// Big-endian strides for a list of subsystem dimensions.
pub fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Offsets of every joint basis state of the subsystems `subs` (in the given
/// order) inside the full index space described by `dims`.
pub fn offsets(dims: &[usize], subs: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let mut out = vec![0usize];
    for &s in subs {
        let mut next = Vec::with_capacity(out.len() * dims[s]);
        for &base in &out {
            for digit in 0..dims[s] {
                next.push(base + digit * st[s]);
            }
        }
        out = next;
    }
    out
}
