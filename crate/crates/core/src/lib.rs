//! Fredholm determinants of semi-separable integral operators.
//!
//! A kernel `K(x, x') = f1(x) g1(x')` for `x' < x` and `f2(x) g2(x')` for
//! `x < x'` turns `det(I - alpha K)` into the endpoint value of a Volterra
//! fundamental solution. The Schrodinger, Floquet and Wiener-Hopf modules build
//! such kernels for concrete problems.

pub mod determinants;
pub mod error;
pub mod floquet;
pub mod grid;
pub mod kernel;
pub mod matrix;
pub mod nystrom;
pub mod ode;
pub mod schrodinger;
pub mod volterra;
pub mod wienerhopf;

pub use num_complex::Complex64;

pub use determinants::{
    fredholm_det, fredholm_det2, fredholm_det2_with, fredholm_det_with, resolvent_kernel, trace_k, DeterminantReport,
    Quantity, Tolerances,
};
pub use error::{Error, Result};
pub use grid::{Grid, Interval, QuadratureRule};
pub use kernel::{KernelSamples, SemiSeparableKernel};
pub use matrix::ComplexMatrix;
pub use nystrom::{discretize, discretize_with, oracle_det, oracle_det2, DenseDiscretization, DiagonalRule};
pub use volterra::{fundamental_solution, solve_fhat1, solve_fhat2, Direction, FundamentalSolution, VolterraSolution};
