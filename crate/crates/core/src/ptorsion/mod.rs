//! p-Laplacian torsion and eigenvalues: regularized Picard iteration in 2-D,
//! a radial shooting solver in dimension m, level-set profiles and the
//! level-set integral bound, Caccioppoli cutoff checks.

mod caccioppoli;
mod levelset;
mod radial;
mod solve;

pub use caccioppoli::{caccioppoli_check, dirichlet_p_ratio, random_lipschitz_cutoffs};
pub use levelset::{levelset_profile, theorem3_check, LevelSetProfile};
pub use radial::radial_p_eigenvalue;
pub use solve::{
    dirichlet_p_eigenvalue_2d, p_eigenvalue_2d, p_eigenvalue_2d_with, solve_p_torsion,
    solve_p_torsion_with, PTorsionSolution,
};

use crate::error::{Error, Result};

/// The exponents entering the level-set integral bound:
/// `c1 = m/(m(p−1)+1)`, `c2 = p^{m/(m(p−1)+1)}·(m(p−1)+1)`,
/// `c3 = 1/((p−1)(m(p−1)+1))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl PConstants {
    pub fn new(m: u32, p: f64) -> Result<Self> {
        if m < 2 || p <= 1.0 {
            return Err(Error::invalid("constants need m ≥ 2 and p > 1"));
        }
        let mf = m as f64;
        let d = mf * (p - 1.0) + 1.0;
        Ok(PConstants {
            c1: mf / d,
            c2: p.powf(mf / d) * d,
            c3: 1.0 / ((p - 1.0) * d),
        })
    }
}
