#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod calculus;
pub mod cayley;
pub mod colligation;
pub mod error;
pub mod function;
pub mod geometry;
pub mod hunt;
pub mod io;
pub mod kernel;
pub mod matrix;
pub mod netlist;
pub mod pencil;
pub mod real;
pub mod sampling;
pub mod verify;

pub use error::{Error, Result};
pub use function::MatrixFunction;
pub use matrix::{CMatrix, Hermitian, Tolerances};
pub use pencil::{Pencil, PsdPencil, RealizedFunction};
pub use num_complex::Complex64;
