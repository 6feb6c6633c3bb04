//! P1 finite elements: sparse matrices, assembly, linear and eigen solvers.

mod assemble;
mod cg;
mod eigen;
mod sparse;

pub use assemble::{
    assemble_boundary_mass, assemble_boundary_mass_weighted, assemble_mass, assemble_stiffness,
    assemble_stiffness_weighted, lumped_weights, P1System,
};
pub use cg::{cg_solve, cg_solve_projected, CgStats};
pub use eigen::{smallest_eigenpairs, EigenPair, EigenSolveOutcome};
pub use sparse::{axpy, dot, norm2, SparseMatrix};
