use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Integer partition with weakly decreasing positive parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.iter().any(|&p| p == 0) || parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(format!("{parts:?} is not a partition")));
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Number of rows ℓ(λ).
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn conjugate(&self) -> Self {
        let cols = self.parts.first().copied().unwrap_or(0);
        Self { parts: (0..cols).map(|c| self.parts.iter().filter(|&&p| p > c).count()).collect() }
    }

    /// Boxes as (row, col), row-major.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parts.iter().enumerate().flat_map(|(r, &len)| (0..len).map(move |c| (r, c)))
    }

    pub fn hook_length(&self, row: usize, col: usize) -> usize {
        let arm = self.parts[row] - col - 1;
        let leg = self.parts[row + 1..].iter().filter(|&&p| p > col).count();
        arm + leg + 1
    }

    /// `n! / Π hooks`.
    pub fn dim_specht(&self) -> usize {
        let num: u128 = (1..=self.n() as u128).product();
        let hooks: u128 = self.cells().map(|(r, c)| self.hook_length(r, c) as u128).product();
        (num / hooks) as usize
    }

    /// `Π (d + c − r) / hook` over boxes, zero when ℓ(λ) > d.
    pub fn dim_gl(&self, d: usize) -> usize {
        if self.len() > d {
            return 0;
        }
        let num: u128 = self.cells().map(|(r, c)| (d + c - r) as u128).product();
        let den: u128 = self.cells().map(|(r, c)| self.hook_length(r, c) as u128).product();
        (num / den) as usize
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", body.join(","))
    }
}

/// All partitions of `n` in reverse lexicographic order, starting at (n).
pub fn partitions(n: usize) -> Vec<Partition> {
    fn rec(rest: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if rest == 0 {
            out.push(Partition { parts: prefix.clone() });
            return;
        }
        for p in (1..=rest.min(max)).rev() {
            prefix.push(p);
            rec(rest - p, p, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(n, n, &mut Vec::new(), &mut out);
    }
    out
}

/// Partitions of `n` with at most `rows` parts.
pub fn partitions_with_rows(n: usize, rows: usize) -> Vec<Partition> {
    partitions(n).into_iter().filter(|p| p.len() <= rows).collect()
}
