//! Sparse matrices and the direct, Krylov and eigen solvers built on them.

mod eigen;
mod factor;
mod gmres;
mod sparse;

pub use eigen::{smallest_eigenpairs, EigenOptions, EigenPairs};
pub use factor::SpdFactor;
pub use gmres::{gmres, GmresOptions};
pub use sparse::{axpy, dot, norm2, norm_inf, CsrMatrix};
