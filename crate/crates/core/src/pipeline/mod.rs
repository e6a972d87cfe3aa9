//! Simulating circuits that query a state-preparation unitary of σ using
//! only copies of σ: random purification, conditional samples with a shared
//! phase, and approximate reflections in place of every oracle call.
//!
//! Conjugate and transpose oracles are not simulated; whether a consistent
//! pair can be produced from σ and its conjugate is left open.

pub mod format;
pub mod oracle;
pub mod query;
pub mod simulate;

pub use format::{parse_circuit, write_circuit};
pub use oracle::{
    conditional_sample_on_oracle_registers, reflection_as_state_prep, sample_reflection_oracle, tidy_gadget,
    ReflectionSample, StatePrepOracle,
};
pub use query::{probe_circuit, OracleDirection, QueryCircuit, Step};
pub use simulate::{paired_comparison, simulate_with_copies, PairedReport, SimulationConfig, SimulationRun};
