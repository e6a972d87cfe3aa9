//! Partitions, Young tableaux, Young's orthogonal form and a dense Schur
//! transform for small `n` and `d`.

pub mod cache;
pub mod partition;
pub mod tableau;
pub mod transform;
pub mod young;

pub use partition::{partitions, partitions_with_rows, Partition};
pub use tableau::{enumerate_ssyt, enumerate_syt, SSYTableau, SYTableau};
pub use transform::{tensor_power_matrix, verify, SchurBlock, SchurIndex, SchurReport, SchurTransform};
pub use young::{permutation_action, young_orthogonal, Permutation, YoungRep};
