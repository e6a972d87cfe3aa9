use crate::circuits::Gate;
use crate::error::{Error, Result};
use crate::qcore::linalg::ComplexMatrix;
use crate::qcore::state::apply_local_slice;
use crate::qcore::{DensityMatrix, RegisterLayout, StateVector};

use super::oracle::StatePrepOracle;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleDirection {
    Forward,
    Inverse,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Gate(Gate),
    /// Oracle call on flat subsystems: the last target is B, the rest form
    /// Â in listed order.
    Oracle { direction: OracleDirection, targets: Vec<usize> },
}

/// A circuit of gates and state-preparation oracle calls, followed by
/// discarding every register not named in `keep`.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryCircuit {
    layout: RegisterLayout,
    steps: Vec<Step>,
    keep: Vec<String>,
}

impl QueryCircuit {
    pub fn new(layout: RegisterLayout) -> Self {
        let keep = layout.registers().iter().map(|r| r.name.clone()).collect();
        Self { layout, steps: Vec::new(), keep }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn keep(&self) -> &[String] {
        &self.keep
    }

    pub fn push_gate(&mut self, gate: Gate) -> Result<()> {
        gate.validate(&self.layout.dims())?;
        self.steps.push(Step::Gate(gate));
        Ok(())
    }

    pub fn push_oracle(&mut self, direction: OracleDirection, targets: Vec<usize>) -> Result<()> {
        let n = self.layout.num_subsystems();
        if targets.len() < 2 {
            return Err(Error::InvalidArgument("oracle needs an ancilla and a system target".into()));
        }
        let mut seen = vec![false; n];
        for &t in &targets {
            if t >= n || seen[t] {
                return Err(Error::InvalidArgument(format!("invalid oracle target {t}")));
            }
            seen[t] = true;
        }
        // One fixed oracle register block per circuit.
        if let Some(Step::Oracle { targets: first, .. }) = self.steps.iter().find(|s| matches!(s, Step::Oracle { .. })) {
            if *first != targets {
                return Err(Error::InvalidArgument(format!("oracle targets {targets:?} differ from earlier call {first:?}")));
            }
        }
        self.steps.push(Step::Oracle { direction, targets });
        Ok(())
    }

    pub fn set_keep<S: AsRef<str>>(&mut self, names: &[S]) -> Result<()> {
        self.layout.select(names)?;
        self.keep = names.iter().map(|s| s.as_ref().to_string()).collect();
        Ok(())
    }

    /// Number of oracle calls, forward and inverse alike.
    pub fn query_count(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s, Step::Oracle { .. })).count()
    }

    /// Checks every oracle call site against the oracle's dimensions.
    pub fn check_oracle(&self, ancilla_dim: usize, system_dim: usize) -> Result<()> {
        let dims = self.layout.dims();
        for step in &self.steps {
            if let Step::Oracle { targets, .. } = step {
                let (b, anc) = targets.split_last().expect("validated on push");
                let a: usize = anc.iter().map(|&t| dims[t]).product();
                if a != ancilla_dim {
                    return Err(Error::DimensionMismatch { expected: ancilla_dim, found: a });
                }
                if dims[*b] != system_dim {
                    return Err(Error::DimensionMismatch { expected: system_dim, found: dims[*b] });
                }
            }
        }
        Ok(())
    }

    fn check_input(&self, dims: &[usize]) -> Result<()> {
        if dims != self.layout.dims() {
            return Err(Error::LayoutMismatch(format!("input dims {dims:?} vs circuit dims {:?}", self.layout.dims())));
        }
        Ok(())
    }

    /// Runs the circuit on a pure input with `oracle` at every call site and
    /// returns the kept marginal.
    pub fn exact_execute(&self, oracle: &StatePrepOracle, input: &StateVector) -> Result<DensityMatrix> {
        self.check_oracle(oracle.ancilla_dim(), oracle.system_dim())?;
        self.check_input(&input.layout().dims())?;
        let dims = self.layout.dims();
        let forward = oracle.matrix();
        let inverse = forward.adjoint();
        let mut state = input.clone().with_layout(self.layout.clone())?;
        let amps = state.amplitudes_mut().as_mut_slice();
        for step in &self.steps {
            match step {
                Step::Gate(g) => g.apply_to_slice(amps, &dims),
                Step::Oracle { direction, targets } => {
                    let u = if *direction == OracleDirection::Forward { forward } else { &inverse };
                    apply_local_slice(amps, &dims, targets, u, None);
                }
            }
        }
        state.reduced_density(&self.keep)
    }

    /// Runs the circuit on a density-matrix input, handing each oracle call
    /// to `oracle_call(call_index, step, ρ, dims)`, and returns the kept
    /// marginal.
    pub fn execute_mixed<F>(&self, input: &DensityMatrix, mut oracle_call: F) -> Result<DensityMatrix>
    where
        F: FnMut(usize, OracleDirection, &[usize], &ComplexMatrix, &[usize]) -> Result<ComplexMatrix>,
    {
        self.check_input(&input.layout().dims())?;
        let dims = self.layout.dims();
        let mut rho = input.matrix().clone();
        let mut calls = 0;
        for step in &self.steps {
            match step {
                Step::Gate(g) => rho = conjugate_by_gate(&rho, g, &dims),
                Step::Oracle { direction, targets } => {
                    rho = oracle_call(calls, *direction, targets, &rho, &dims)?;
                    calls += 1;
                }
            }
        }
        DensityMatrix::new(self.layout.clone(), rho)?.partial_trace(&self.keep)
    }
}

/// `GρG†` through two passes of column contraction.
pub fn conjugate_by_gate(rho: &ComplexMatrix, gate: &Gate, dims: &[usize]) -> ComplexMatrix {
    let mut left = rho.clone();
    for mut col in left.column_iter_mut() {
        gate.apply_to_slice(col.as_mut_slice(), dims);
    }
    let mut both = left.adjoint();
    for mut col in both.column_iter_mut() {
        gate.apply_to_slice(col.as_mut_slice(), dims);
    }
    both.adjoint()
}

/// `UρU†` with `U` on the listed subsystems.
pub fn conjugate_by_local(rho: &ComplexMatrix, u: &ComplexMatrix, dims: &[usize], targets: &[usize]) -> ComplexMatrix {
    let mut left = rho.clone();
    for mut col in left.column_iter_mut() {
        apply_local_slice(col.as_mut_slice(), dims, targets, u, None);
    }
    let mut both = left.adjoint();
    for mut col in both.column_iter_mut() {
        apply_local_slice(col.as_mut_slice(), dims, targets, u, None);
    }
    both.adjoint()
}

/// Layout `anc:dhat, sys:d` with FORWARD, H on the system, INVERSE, all
/// registers kept. The system must be a qubit.
pub fn probe_circuit(dhat: usize) -> Result<QueryCircuit> {
    let mut c = QueryCircuit::new(RegisterLayout::single("anc", dhat).with("sys", 2, 1));
    c.push_oracle(OracleDirection::Forward, vec![0, 1])?;
    c.push_gate(Gate::hadamard(1))?;
    c.push_oracle(OracleDirection::Inverse, vec![0, 1])?;
    Ok(c)
}
