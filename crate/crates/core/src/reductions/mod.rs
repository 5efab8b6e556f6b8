//! Reductions from multiclass, regression and robust learning to binary
//! compression.

pub mod multiclass;
pub mod packing;
pub mod regression;
pub mod robust;
