//! Numerical tools for the first positive eigenvalue of the Kohn-Laplacian on
//! level sets of strictly plurisubharmonic functions in `C^{n+1}`.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod error;
pub mod kahler;
pub mod kohn;
pub mod linalg;
pub mod sampler;
pub mod wirtinger;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
