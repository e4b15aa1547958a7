//! Computational core for local equivariant index densities: exterior and
//! Clifford algebra, characteristic forms, Volterra symbol calculus, Mehler
//! kernels and fixed-point formulas for the index and the CM/JLO cocycles.
#![no_std]

extern crate alloc;

pub mod char_forms;
pub mod equivariant_index;
pub mod error;
pub mod graded_algebra;
pub mod mehler;
pub mod scalar;
pub mod volterra;

pub use char_forms::{NormalAction, TwistData};
pub use error::{Error, Result};
pub use graded_algebra::{Ext, FormMatrix};
pub use scalar::{Coeff, PiScaled, QC};
