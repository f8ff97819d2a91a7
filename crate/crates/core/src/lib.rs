//! Operator-order constants for Hermitian matrices.
//!
//! The crate computes the additive gap constants that make `f(B) <= f(A) + c*I`
//! (and its Jensen-type relatives over unital families of positive maps) hold
//! for scalar convex `f`, together with the classical multiplicative and
//! chord-based constants, and turns each statement into an eigenvalue-slack
//! certificate.
//!
//! Modules, bottom up:
//! - [`scalarfn`]: closed-form convex functions with exact derivatives.
//! - [`matrix`] / [`hermitian`]: dense complex matrices, the Jacobi eigensolver,
//!   functional calculus and Loewner-order tests.
//! - [`maps`]: positive linear maps and unital families.
//! - [`constants`]: chord coefficients, `beta` and the generalized Kantorovich constant.
//! - [`gaps`]: the bilinear sphere objective and its two solvers.
//! - [`certify`]: certificates for every statement.
//! - [`io`], [`json`], [`suites`]: file formats, report serialization, property suites.

pub mod certify;
pub mod constants;
pub mod error;
pub mod gaps;
pub mod hermitian;
pub mod io;
pub mod json;
pub mod maps;
pub mod matrix;
pub mod sampling;
pub mod scalarfn;
pub mod suites;

pub use error::{Error, Result};
pub use hermitian::{HermitianMatrix, SpectralDecomposition};
pub use matrix::CMatrix;
pub use num_complex::Complex64;
pub use scalarfn::{Family, Interval, Monotonicity, ScalarFunction};
