//! LOCAL-model simulation and node-averaged solvers for locally checkable
//! labeling problems on bounded-degree trees.

pub mod tree;
pub mod engine;
pub mod lcl;
pub mod decomp;
pub mod solvers;
pub mod bench;

/// Input or output label of an LCL.
pub type Label = u32;
