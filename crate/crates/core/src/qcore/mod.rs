//! Dense state-vector and density-matrix simulation primitives.

pub mod channel;
pub mod layout;
pub mod linalg;
pub mod metrics;
pub mod random;
pub mod state;

pub use channel::{channel_distance, Superoperator};
pub use layout::{Register, RegisterLayout};
pub use linalg::{c64, ComplexMatrix, ComplexVector};
pub use metrics::{fidelity_pure, pure_trace_distance, trace_distance, trace_distance_matrices};
pub use random::RandomSource;
pub use state::{check_capacity, dim_cap, DensityMatrix, StateVector};
