//! Numerical verification of torsion-function and spectral-bound inequalities.
//!
//! The crate solves the torsion problem `-Δ_p u = 1` with Dirichlet or Robin
//! boundary conditions on planar polygonal domains (P1 finite elements) and on
//! m-dimensional balls (radial shooting), computes the bottom of the Robin
//! spectrum, and evaluates the explicit constants and bounds that relate
//! `‖u‖_∞`, the torsional rigidity `∫u` and the spectral bottom `λ(Ω,b)`.
//! A walk-on-spheres Monte Carlo estimator provides an independent check of
//! the Dirichlet solver.
//!
//! Modules map onto the pipeline:
//!
//! * [`geometry`] — polygonal/radial domains, triangulation, refinement
//! * [`fem`] — CSR matrices, P1 assembly, CG solver, generalized eigensolver
//! * [`field`] — nodal fields, quadrature, exact piecewise-linear level sets
//! * [`torsion`] — linear (`p = 2`) torsion, Robin spectra, sampled inequalities
//! * [`ptorsion`] — p-Laplacian torsion, p-eigenvalues, level-set bound checks
//! * [`wos`] — walk-on-spheres exit-time oracle
//! * [`bounds`] — closed-form constants and `BoundVerdict` records

pub mod bounds;
pub mod error;
pub mod fem;
pub mod field;
pub mod geometry;
pub mod ptorsion;
pub mod special;
pub mod torsion;
pub mod wos;

pub use bounds::{BoundVerdict, PaperConstants};
pub use error::{Error, Result};
pub use fem::{CgStats, EigenPair, SparseMatrix};
pub use field::DiscreteField;
pub use geometry::{CanonicalKind, PolygonalDomain, RadialDomain, TriangleMesh};
pub use ptorsion::{LevelSetProfile, PConstants, PTorsionSolution};
pub use torsion::{BoundaryCondition, SpectralSet, TorsionSolution};
pub use wos::WosEstimate;
