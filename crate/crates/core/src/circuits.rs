//! Qudit gates and circuits applied by contraction over target digits.

use crate::error::{Error, Result};
use crate::qcore::linalg::{self, c64, ComplexMatrix, ONE, ZERO};
use crate::qcore::state::{apply_local_slice, permute_local_slice};
use crate::qcore::{RegisterLayout, StateVector};

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    /// Qubit Hadamard.
    Hadamard,
    /// Cyclic increment `|a⟩ → |a+1 mod d⟩` (Pauli-X on a qubit).
    X,
    /// Exchange of two equal-dimension subsystems; controlled when the gate
    /// carries a control qubit.
    CSwap,
    /// `|a₁,…,aₙ⟩ → |a₂,…,aₙ,a₁⟩`.
    Shift,
    /// `|k⟩ → |k+1 mod 2^w⟩` over `w` big-endian qubits.
    Add1,
    Custom(ComplexMatrix),
}

/// A gate on flat subsystem indices. The optional control is a qubit and
/// the gate fires when it reads 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    kind: GateKind,
    targets: Vec<usize>,
    local_dims: Vec<usize>,
    control: Option<usize>,
}

pub fn shift_gate(n: usize, d: usize) -> Gate {
    assert!(n >= 1, "shift_gate needs n ≥ 1");
    Gate { kind: GateKind::Shift, targets: (0..n).collect(), local_dims: vec![d; n], control: None }
}

pub fn add1_gate(width: usize) -> Gate {
    assert!(width >= 1, "add1_gate needs width ≥ 1");
    Gate { kind: GateKind::Add1, targets: (0..width).collect(), local_dims: vec![2; width], control: None }
}

/// `⌈log₂(n+1)⌉`, the counter width that holds 0..=n.
pub fn counter_width(n: usize) -> usize {
    (usize::BITS - n.leading_zeros()).max(1) as usize
}

fn ceil_log2(d: usize) -> usize {
    if d <= 1 {
        0
    } else {
        (usize::BITS - (d - 1).leading_zeros()) as usize
    }
}

impl Gate {
    pub fn hadamard(target: usize) -> Self {
        Self { kind: GateKind::Hadamard, targets: vec![target], local_dims: vec![2], control: None }
    }

    pub fn x(target: usize, d: usize) -> Self {
        Self { kind: GateKind::X, targets: vec![target], local_dims: vec![d], control: None }
    }

    pub fn swap(a: usize, b: usize, d: usize) -> Self {
        Self { kind: GateKind::CSwap, targets: vec![a, b], local_dims: vec![d, d], control: None }
    }

    pub fn cswap(control: usize, a: usize, b: usize, d: usize) -> Self {
        Self::swap(a, b, d).controlled_by(control)
    }

    pub fn custom(targets: Vec<usize>, local_dims: Vec<usize>, matrix: ComplexMatrix) -> Result<Self> {
        let dim: usize = local_dims.iter().product();
        if targets.len() != local_dims.len() {
            return Err(Error::InvalidArgument("one local dimension per target required".into()));
        }
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: matrix.nrows() });
        }
        let res = linalg::unitarity_residual(&matrix);
        if res > 1e-10 {
            return Err(Error::InvalidArgument(format!("custom gate is not unitary (residual {res:e})")));
        }
        Ok(Self { kind: GateKind::Custom(matrix), targets, local_dims, control: None })
    }

    /// Same gate on different subsystems.
    pub fn on(mut self, targets: &[usize]) -> Self {
        assert_eq!(targets.len(), self.targets.len(), "retargeting must keep the arity");
        self.targets = targets.to_vec();
        self
    }

    pub fn controlled_by(mut self, control: usize) -> Self {
        self.control = Some(control);
        self
    }

    pub fn kind(&self) -> &GateKind {
        &self.kind
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn local_dims(&self) -> &[usize] {
        &self.local_dims
    }

    pub fn control(&self) -> Option<usize> {
        self.control
    }

    pub fn local_dim(&self) -> usize {
        self.local_dims.iter().product()
    }

    /// Basis map `perm[in] = out` for permutation gates.
    pub fn permutation(&self) -> Option<Vec<usize>> {
        let dims = &self.local_dims;
        let total = self.local_dim();
        match self.kind {
            GateKind::X => Some((0..total).map(|a| (a + 1) % total).collect()),
            GateKind::Add1 => Some((0..total).map(|a| (a + 1) % total).collect()),
            GateKind::CSwap => {
                let d = dims[0];
                Some((0..total).map(|ab| (ab % d) * d + ab / d).collect())
            }
            GateKind::Shift => Some(
                (0..total)
                    .map(|index| {
                        let digits = to_digits(index, dims);
                        let mut rotated = digits[1..].to_vec();
                        rotated.push(digits[0]);
                        from_digits(&rotated, dims)
                    })
                    .collect(),
            ),
            GateKind::Hadamard | GateKind::Custom(_) => None,
        }
    }

    /// Matrix on the target subsystems, ignoring the control.
    pub fn local_matrix(&self) -> ComplexMatrix {
        if let Some(perm) = self.permutation() {
            let n = perm.len();
            let mut m = ComplexMatrix::zeros(n, n);
            for (a, &b) in perm.iter().enumerate() {
                m[(b, a)] = ONE;
            }
            return m;
        }
        match &self.kind {
            GateKind::Hadamard => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                ComplexMatrix::from_row_slice(2, 2, &[c64(h, 0.0), c64(h, 0.0), c64(h, 0.0), c64(-h, 0.0)])
            }
            GateKind::Custom(m) => m.clone(),
            _ => unreachable!("permutation gates handled above"),
        }
    }

    /// Matrix on (control, targets...) with the control as the leading qubit.
    pub fn realized_matrix(&self) -> ComplexMatrix {
        let g = self.local_matrix();
        match self.control {
            None => g,
            Some(_) => {
                let n = g.nrows();
                let mut m = ComplexMatrix::zeros(2 * n, 2 * n);
                m.view_mut((0, 0), (n, n)).copy_from(&linalg::identity(n));
                m.view_mut((n, n), (n, n)).copy_from(&g);
                m
            }
        }
    }

    /// Count in one- and two-qubit gates: a qudit swap costs ⌈log₂ d⌉ qubit
    /// swaps, a shift over n copies is n−1 qudit swaps and the counter
    /// increment costs one gate per bit.
    pub fn elementary_cost(&self) -> usize {
        let bits = |d: usize| ceil_log2(d).max(1);
        match &self.kind {
            GateKind::Hadamard => 1,
            GateKind::X => bits(self.local_dims[0]),
            GateKind::CSwap => bits(self.local_dims[0]),
            GateKind::Shift => self.targets.len().saturating_sub(1) * bits(self.local_dims[0]),
            GateKind::Add1 => self.targets.len(),
            GateKind::Custom(_) => 1,
        }
    }

    pub(crate) fn validate(&self, dims: &[usize]) -> Result<()> {
        let n = dims.len();
        let mut used = vec![false; n];
        for (&t, &d) in self.targets.iter().zip(&self.local_dims) {
            if t >= n {
                return Err(Error::InvalidArgument(format!("target {t} outside {n} subsystems")));
            }
            if used[t] {
                return Err(Error::InvalidArgument(format!("repeated target {t}")));
            }
            used[t] = true;
            if dims[t] != d {
                return Err(Error::DimensionMismatch { expected: dims[t], found: d });
            }
        }
        if let Some(c) = self.control {
            if c >= n || used[c] {
                return Err(Error::InvalidArgument(format!("invalid control {c}")));
            }
            if dims[c] != 2 {
                return Err(Error::DimensionMismatch { expected: 2, found: dims[c] });
            }
        }
        if self.kind == GateKind::Hadamard && self.local_dims != [2] {
            return Err(Error::InvalidArgument("Hadamard acts on a qubit".into()));
        }
        Ok(())
    }

    pub fn apply_to_slice(&self, amps: &mut [num_complex::Complex64], dims: &[usize]) {
        match self.permutation() {
            Some(perm) => permute_local_slice(amps, dims, &self.targets, &perm, self.control),
            None => apply_local_slice(amps, dims, &self.targets, &self.local_matrix(), self.control),
        }
    }
}

fn to_digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        digits[k] = index % dims[k];
        index /= dims[k];
    }
    digits
}

fn from_digits(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (a, d)| acc * d + a)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    layout: RegisterLayout,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(layout: RegisterLayout) -> Self {
        Self { layout, gates: Vec::new() }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(&self.layout.dims())?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn elementary_gate_count(&self) -> usize {
        self.gates.iter().map(Gate::elementary_cost).sum()
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        let dims = self.layout.dims();
        if state.layout().dims() != dims {
            return Err(Error::LayoutMismatch(format!(
                "state dims {:?} vs circuit dims {dims:?}",
                state.layout().dims()
            )));
        }
        let mut out = state.clone();
        let amps = out.amplitudes_mut().as_mut_slice();
        for gate in &self.gates {
            gate.apply_to_slice(amps, &dims);
        }
        Ok(out)
    }

    /// Full unitary, one column per basis input. Small circuits only.
    pub fn unitary(&self) -> Result<ComplexMatrix> {
        let dim = self.layout.total_dim();
        crate::qcore::check_capacity(dim * dim)?;
        let mut u = ComplexMatrix::zeros(dim, dim);
        let dims = self.layout.dims();
        for j in 0..dim {
            let mut col = vec![ZERO; dim];
            col[j] = ONE;
            for gate in &self.gates {
                gate.apply_to_slice(&mut col, &dims);
            }
            for (i, z) in col.into_iter().enumerate() {
                u[(i, j)] = z;
            }
        }
        Ok(u)
    }
}
