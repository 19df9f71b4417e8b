//! P1 finite elements for the mixed Dirichlet/Neumann/Robin Laplacian.

mod solve;
mod system;

pub use solve::{
    embedding_ratios, embedding_ratios_for, l2_error_nodal, l2_norm, l6_norm_nodal, laplacian_l2, norms, poincare_constant,
    solve_eigen, solve_eigen_with, solve_poisson, solve_poisson_load, v_norm, EmbeddingRatios, Norms,
    SpectralBasis, POISSON_RESIDUAL_TOL,
};
pub use system::{assemble, assemble_shared, edge_mass, element_mass, element_stiffness, FemSystem};
