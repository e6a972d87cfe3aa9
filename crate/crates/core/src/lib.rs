//! Desk-scale simulation of commit-and-reveal quantum query circuits:
//! the acorn gadget, approximate reflections, the Schur transform,
//! the purification channel and the experiments built on them.

pub mod acorn;
pub mod circuits;
pub mod commit;
pub mod error;
pub mod pipeline;
pub mod purify;
pub mod qcore;
pub mod realitytest;
pub mod reflect;
pub mod schurweyl;
pub mod stats;

pub use error::{Error, Result};
