//! Super-level-set profiles of torsion fields and the level-set integral
//! bound relating the sup norm to the spectral bottom.

use rayon::prelude::*;
use std::collections::BTreeMap;

use crate::bounds::{make_verdict, BoundVerdict};
use crate::error::{Error, Result};
use crate::field::{self, DiscreteField};
use crate::ptorsion::radial::radial_p_eigenvalue;
use crate::ptorsion::{PConstants, PTorsionSolution};
use crate::special;
use crate::torsion::BoundaryCondition;

/// Exact piecewise-linear level-set data of a nonnegative field:
/// `level_measure[i] = |{u > t_i}|`, `f_values[i] = ∫ (u − t_i)⁺`,
/// `h_values[i] = (|Ω| / |U_{t_i}|)^{1/m}` with m = 2.
#[derive(Debug, Clone)]
pub struct LevelSetProfile {
    pub t_grid: Vec<f64>,
    pub level_measure: Vec<f64>,
    pub f_values: Vec<f64>,
    pub h_values: Vec<f64>,
    pub domain_area: f64,
    pub sup_norm: f64,
    /// Source field, retained so checks can resample the t-grid.
    field: DiscreteField,
}

impl LevelSetProfile {
    pub fn field(&self) -> &DiscreteField {
        &self.field
    }

    /// Recompute the profile on a grid with `n_levels` points.
    pub fn resampled(&self, n_levels: usize) -> Result<LevelSetProfile> {
        profile_of_field(&self.field, n_levels)
    }
}

pub fn levelset_profile(sol: &PTorsionSolution, n_levels: usize) -> Result<LevelSetProfile> {
    if sol.field.min_value() < -1e-10 {
        return Err(Error::invalid(
            "level-set profile needs a nonnegative field",
        ));
    }
    profile_of_field(&sol.field, n_levels)
}

fn profile_of_field(f: &DiscreteField, n_levels: usize) -> Result<LevelSetProfile> {
    if n_levels < 16 {
        return Err(Error::invalid("level-set profile needs n_levels ≥ 16"));
    }
    let mesh = f.mesh();
    let values = f.values();
    let (area, _) = mesh.measures();
    let sup = f.max_value().max(0.0);

    let t_grid: Vec<f64> = (0..n_levels)
        .map(|i| sup * i as f64 / (n_levels - 1) as f64)
        .collect();
    let level_measure: Vec<f64> = t_grid
        .iter()
        .map(|&t| field::area_above(mesh, values, t))
        .collect();
    let f_values: Vec<f64> = t_grid
        .iter()
        .map(|&t| field::integral_excess(mesh, values, t))
        .collect();
    let h_values: Vec<f64> = level_measure
        .iter()
        .map(|&m| if m > 0.0 { (area / m).sqrt() } else { f64::INFINITY })
        .collect();

    // Monotonicity is exact for the piecewise-linear geometry; allow only
    // round-off slack.
    let slack = 1e-12 * area.max(1.0);
    debug_assert!(level_measure.windows(2).all(|w| w[1] <= w[0] + slack));
    debug_assert!(f_values.windows(2).all(|w| w[1] <= w[0] + slack));
    debug_assert!(h_values.windows(2).all(|w| w[1] >= w[0] - slack));

    Ok(LevelSetProfile {
        t_grid,
        level_measure,
        f_values,
        h_values,
        domain_area: area,
        sup_norm: sup,
        field: f.clone(),
    })
}

/// Level-set integral bound: with `Ω*` the ball of the same measure as the
/// mesh and `h(t)` the measure rescale factor,
/// `∫₀^{‖u‖∞} (h(t)^{p−1} λ(Ω*, b/h(t)^{p−1}))^{c1} dt ≤ c2 / λ(Ω,b)^{c3}`.
///
/// The left side integrates by trapezoid rule on the profile's t-grid and a
/// doubled grid; the verdict is only issued when doubling changes the value
/// by less than 0.5%.
pub fn theorem3_check(
    profile: &LevelSetProfile,
    p: f64,
    b: f64,
    m: u32,
    lambda_robin: f64,
    tolerance: f64,
) -> Result<BoundVerdict> {
    if b <= 0.0 || lambda_robin <= 0.0 {
        return Err(Error::invalid("level-set bound needs b > 0 and λ(Ω,b) > 0"));
    }
    let consts = PConstants::new(m, p)?;
    let mf = m as f64;
    let r_star = (profile.domain_area / special::unit_ball_volume(m)).powf(1.0 / mf);

    let lhs_coarse = levelset_lhs(profile, p, b, m, r_star, consts.c1)?;
    let n = profile.t_grid.len();
    let fine = profile.resampled(2 * (n - 1) + 1)?;
    let lhs_fine = levelset_lhs(&fine, p, b, m, r_star, consts.c1)?;

    let denom = lhs_fine.abs().max(1e-300);
    if (lhs_fine - lhs_coarse).abs() / denom >= 0.005 {
        return Err(Error::NoConvergence {
            context: format!(
                "level-set integral not t-grid independent: {lhs_coarse} vs {lhs_fine}"
            ),
            iterations: n,
            residual: (lhs_fine - lhs_coarse).abs() / denom,
        });
    }

    let rhs = consts.c2 / lambda_robin.powf(consts.c3);
    let mut inputs = BTreeMap::new();
    inputs.insert("p".into(), p);
    inputs.insert("b".into(), b);
    inputs.insert("m".into(), mf);
    inputs.insert("lambda_robin".into(), lambda_robin);
    inputs.insert("sup_norm".into(), profile.sup_norm);
    inputs.insert("area".into(), profile.domain_area);
    inputs.insert("ball_radius".into(), r_star);
    inputs.insert("c1".into(), consts.c1);
    inputs.insert("c2".into(), consts.c2);
    inputs.insert("c3".into(), consts.c3);
    inputs.insert("lhs_coarse_grid".into(), lhs_coarse);
    inputs.insert("n_levels".into(), n as f64);
    make_verdict("levelset_sup_bound", "e66", lhs_fine, rhs, tolerance, inputs)
}

fn levelset_lhs(
    profile: &LevelSetProfile,
    p: f64,
    b: f64,
    m: u32,
    r_star: f64,
    c1: f64,
) -> Result<f64> {
    let mf = m as f64;
    // As t → sup, h → ∞ and the rescaled Robin parameter β → 0, where
    // λ(B_R, β)/β → m/R; the integrand then approaches (b·m/R)^{c1}.
    let limit_inner = b * mf / r_star;
    let integrand: Vec<f64> = profile
        .h_values
        .par_iter()
        .map(|&h| -> Result<f64> {
            if !h.is_finite() {
                return Ok(limit_inner.powf(c1));
            }
            let hp = h.powf(p - 1.0);
            let beta = b / hp;
            if beta < 1e-9 * mf / r_star {
                return Ok(limit_inner.powf(c1));
            }
            let lam = radial_p_eigenvalue(m, p, r_star, BoundaryCondition::Robin { b: beta })?;
            Ok((hp * lam).powf(c1))
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut lhs = 0.0;
    for i in 1..profile.t_grid.len() {
        let dt = profile.t_grid[i] - profile.t_grid[i - 1];
        lhs += 0.5 * dt * (integrand[i] + integrand[i - 1]);
    }
    Ok(lhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::P1System;
    use crate::geometry::{make_canonical_domain, CanonicalKind};
    use crate::ptorsion::solve_p_torsion_with;
    use crate::torsion::BoundaryCondition;
    use std::sync::Arc;

    #[test]
    fn profile_of_linear_ramp() {
        let sq = make_canonical_domain(CanonicalKind::UnitSquare, &[]).unwrap();
        let mesh = Arc::new(sq.triangulate(0.25).unwrap());
        let values: Vec<f64> = mesh.nodes().iter().map(|n| n[0]).collect();
        let f = DiscreteField::new(Arc::clone(&mesh), values).unwrap();
        let profile = profile_of_field(&f, 17).unwrap();
        for (t, measure) in profile.t_grid.iter().zip(&profile.level_measure) {
            assert!((measure - (1.0 - t)).abs() < 1e-12);
        }
        assert!((profile.f_values[0] - 0.5).abs() < 1e-12);
        assert!((profile.h_values[0] - 1.0).abs() < 1e-12);
        assert!(profile.h_values.last().unwrap().is_infinite());
    }

    #[test]
    fn robin_torsion_profile_monotone() {
        let sq = make_canonical_domain(CanonicalKind::UnitSquare, &[]).unwrap();
        let mesh = Arc::new(sq.triangulate(0.25).unwrap());
        let sys = P1System::assemble(&mesh);
        let sol =
            solve_p_torsion_with(&mesh, &sys, 2.0, BoundaryCondition::Robin { b: 1.0 }, 1e-9)
                .unwrap();
        let profile = levelset_profile(&sol, 32).unwrap();
        // f(0) = ∫u = rigidity, exactly.
        assert!((profile.f_values[0] - sol.l1_norm).abs() < 1e-10 * sol.l1_norm);
        // Strictly positive Robin solution: |U_0| = |Ω| so h(0) = 1.
        assert!((profile.h_values[0] - 1.0).abs() < 1e-12);
        assert!(levelset_profile(&sol, 8).is_err());
    }

    #[test]
    fn degenerate_profile_gives_zero_lhs() {
        let sq = make_canonical_domain(CanonicalKind::UnitSquare, &[]).unwrap();
        let mesh = Arc::new(sq.triangulate(0.5).unwrap());
        let f = DiscreteField::constant(Arc::clone(&mesh), 0.0);
        let profile = profile_of_field(&f, 16).unwrap();
        assert_eq!(profile.sup_norm, 0.0);
        let v = theorem3_check(&profile, 2.0, 1.0, 2, 1.0, 0.0).unwrap();
        assert_eq!(v.lhs, 0.0);
        assert!(v.satisfied);
    }
}
