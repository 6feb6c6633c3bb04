//! Linear (p = 2) torsion: `-Δu = 1` with Dirichlet or Robin boundary
//! conditions, the bottom of the Robin spectrum, torsional rigidity, sampled
//! functional inequalities and heat-trace partial sums.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bounds;
use crate::error::{Error, Result};
use crate::fem::{cg_solve, dot, smallest_eigenpairs, P1System};
use crate::field::{self, DiscreteField};
use crate::geometry::TriangleMesh;

/// Default relative tolerance of the linear solver.
pub const CG_TOL: f64 = 1e-10;
/// Default eigensolver residual tolerance.
pub const EIGEN_TOL: f64 = 1e-8;

const CG_MAX_ITER: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition {
    Dirichlet,
    Robin { b: f64 },
}

impl BoundaryCondition {
    pub fn robin(b: f64) -> Result<Self> {
        if b <= 0.0 {
            return Err(Error::invalid("Robin parameter b must be strictly positive"));
        }
        Ok(BoundaryCondition::Robin { b })
    }

    pub fn b(&self) -> Option<f64> {
        match self {
            BoundaryCondition::Dirichlet => None,
            BoundaryCondition::Robin { b } => Some(*b),
        }
    }

    pub fn label(&self) -> String {
        match self {
            BoundaryCondition::Dirichlet => "dirichlet".into(),
            BoundaryCondition::Robin { b } => format!("robin_b{b}"),
        }
    }
}

/// Solved torsion problem with its spectral bottom.
#[derive(Debug, Clone)]
pub struct TorsionSolution {
    pub field: DiscreteField,
    pub sup_norm: f64,
    /// `1ᵀMu`, the torsional rigidity.
    pub l1_norm: f64,
    pub lambda1: f64,
    pub bc: BoundaryCondition,
}

/// One eigenpair with its eigenfunction as a nodal field (unit M-norm).
#[derive(Debug, Clone)]
pub struct SpectralPair {
    pub eigenvalue: f64,
    pub eigenfunction: DiscreteField,
    pub residual: f64,
}

/// Ordered eigenvalue/eigenfunction pairs of one boundary-value problem.
#[derive(Debug, Clone)]
pub struct SpectralSet {
    pub bc: BoundaryCondition,
    pub pairs: Vec<SpectralPair>,
    pub cluster_warnings: Vec<(usize, usize)>,
}

impl SpectralSet {
    pub fn count(&self) -> usize {
        self.pairs.len()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.eigenvalue).collect()
    }
}

pub fn solve_torsion(mesh: &Arc<TriangleMesh>, bc: BoundaryCondition) -> Result<TorsionSolution> {
    let sys = P1System::assemble(mesh);
    solve_torsion_with(mesh, &sys, bc)
}

/// Variant that reuses pre-assembled operators.
pub fn solve_torsion_with(
    mesh: &Arc<TriangleMesh>,
    sys: &P1System,
    bc: BoundaryCondition,
) -> Result<TorsionSolution> {
    let ones = vec![1.0; mesh.n_nodes()];
    let rhs = sys.mass.mul_vec(&ones);

    let (values, lambda1) = match bc {
        BoundaryCondition::Robin { b } => {
            if b <= 0.0 {
                return Err(Error::invalid("Robin parameter b must be strictly positive"));
            }
            let a = sys.robin_matrix(b);
            let (u, _) = cg_solve(&a, &rhs, CG_TOL, CG_MAX_ITER)?;
            let eig = smallest_eigenpairs(&a, &sys.mass, 1, EIGEN_TOL)?;
            (u, eig.pairs[0].eigenvalue)
        }
        BoundaryCondition::Dirichlet => {
            let k_ii = sys.stiffness.restrict(&sys.interior_nodes);
            let m_ii = sys.mass.restrict(&sys.interior_nodes);
            let rhs_i = sys.restrict_to_interior(&rhs);
            let (u_i, _) = cg_solve(&k_ii, &rhs_i, CG_TOL, CG_MAX_ITER)?;
            let eig = smallest_eigenpairs(&k_ii, &m_ii, 1, EIGEN_TOL)?;
            (
                sys.embed_interior(&u_i, mesh.n_nodes()),
                eig.pairs[0].eigenvalue,
            )
        }
    };

    let l1_norm = dot(&values, &rhs);
    let field = DiscreteField::new(Arc::clone(mesh), values)?;
    Ok(TorsionSolution {
        sup_norm: field.max_value(),
        l1_norm,
        lambda1,
        bc,
        field,
    })
}

/// Torsional rigidity `P(Ω) = ∫ u`, evaluated as `1ᵀMu`.
pub fn torsional_rigidity(sol: &TorsionSolution) -> f64 {
    sol.l1_norm
}

pub fn robin_spectrum(mesh: &Arc<TriangleMesh>, b: f64, k: usize) -> Result<SpectralSet> {
    let sys = P1System::assemble(mesh);
    robin_spectrum_with(mesh, &sys, b, k)
}

pub fn robin_spectrum_with(
    mesh: &Arc<TriangleMesh>,
    sys: &P1System,
    b: f64,
    k: usize,
) -> Result<SpectralSet> {
    if b <= 0.0 {
        return Err(Error::invalid("Robin parameter b must be strictly positive"));
    }
    let a = sys.robin_matrix(b);
    let out = smallest_eigenpairs(&a, &sys.mass, k, EIGEN_TOL)?;
    let pairs = out
        .pairs
        .into_iter()
        .map(|p| {
            Ok(SpectralPair {
                eigenvalue: p.eigenvalue,
                eigenfunction: DiscreteField::new(Arc::clone(mesh), p.vector)?,
                residual: p.residual,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralSet {
        bc: BoundaryCondition::Robin { b },
        pairs,
        cluster_warnings: out.cluster_warnings,
    })
}

pub fn dirichlet_spectrum(mesh: &Arc<TriangleMesh>, k: usize) -> Result<SpectralSet> {
    let sys = P1System::assemble(mesh);
    dirichlet_spectrum_with(mesh, &sys, k)
}

pub fn dirichlet_spectrum_with(
    mesh: &Arc<TriangleMesh>,
    sys: &P1System,
    k: usize,
) -> Result<SpectralSet> {
    let k_ii = sys.stiffness.restrict(&sys.interior_nodes);
    let m_ii = sys.mass.restrict(&sys.interior_nodes);
    let out = smallest_eigenpairs(&k_ii, &m_ii, k, EIGEN_TOL)?;
    let pairs = out
        .pairs
        .into_iter()
        .map(|p| {
            let full = sys.embed_interior(&p.vector, mesh.n_nodes());
            Ok(SpectralPair {
                eigenvalue: p.eigenvalue,
                eigenfunction: DiscreteField::new(Arc::clone(mesh), full)?,
                residual: p.residual,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralSet {
        bc: BoundaryCondition::Dirichlet,
        pairs,
        cluster_warnings: out.cluster_warnings,
    })
}

/// Sign convention for first eigenfunctions: flip so the nodal value of
/// largest magnitude is positive.
pub fn sign_normalize(values: &mut [f64]) {
    let mut extreme = 0.0f64;
    for &v in values.iter() {
        if v.abs() > extreme.abs() {
            extreme = v;
        }
    }
    if extreme < 0.0 {
        values.iter_mut().for_each(|v| *v = -*v);
    }
}

/// Minimum margin of one sampled inequality, with the worst sample's sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityMargin {
    pub min_margin: f64,
    pub worst_lhs: f64,
    pub worst_rhs: f64,
}

impl InequalityMargin {
    fn empty() -> Self {
        InequalityMargin {
            min_margin: f64::INFINITY,
            worst_lhs: f64::NAN,
            worst_rhs: f64::NAN,
        }
    }

    fn update(&mut self, lhs: f64, rhs: f64) {
        let margin = rhs - lhs;
        if margin < self.min_margin {
            *self = InequalityMargin {
                min_margin: margin,
                worst_lhs: lhs,
                worst_rhs: rhs,
            };
        }
    }
}

/// Minimum margins over the random-field sample set:
/// Nash `N_b·q_b(u)·‖u‖₁^{2/m} − ‖u‖₂^{2+2/m}`,
/// the trace embedding `C(m)(2∫|u||∇u| + ∫_∂u²) − ‖u‖²_{L^{2m/(m−1)}}`,
/// and its two q_b-based corollaries (the second only when `b ≥ √λ₁`).
#[derive(Debug, Clone, PartialEq)]
pub struct MarginReport {
    pub nash: InequalityMargin,
    pub lemma4: InequalityMargin,
    pub e26: InequalityMargin,
    pub e27: Option<InequalityMargin>,
    pub n_samples: usize,
    pub seed: u64,
}

/// Margins for one concrete field; exposed so single fields can be audited.
pub fn inequality_margins_for_field(
    mesh: &TriangleMesh,
    sys: &P1System,
    b: f64,
    lambda1: f64,
    values: &[f64],
) -> Result<(f64, f64, f64, Option<f64>)> {
    let m = 2u32;
    let mf = m as f64;
    let c_m = bounds::isoperimetric_constant(m)?;
    let (nb_general, nb_strong) = bounds::nash_constant(m, b, lambda1)?;
    let n_b = nb_strong.map_or(nb_general, |s| s.min(nb_general));

    let q_b = sys.q_b(b, values);
    let l1 = field::vertex_lp_power(&sys.lumped, values, 1.0);
    let l2 = sys.mass.quadratic_form(values).sqrt();
    // ‖u‖²_{L^{2m/(m−1)}} with m = 2 is ‖u‖²_{L⁴}, vertex quadrature.
    let l4_sq = field::vertex_lp_power(&sys.lumped, values, 4.0).sqrt();
    let grad_term = field::integral_abs_times_abs_grad(mesh, values);
    let boundary_sq = sys.boundary_mass.quadratic_form(values);

    let nash = n_b * q_b * l1.powf(2.0 / mf) - l2.powf(2.0 + 2.0 / mf);
    let lemma4 = c_m * (2.0 * grad_term + boundary_sq) - l4_sq;
    let e26 = c_m * (1.0 / b + b / lambda1) * q_b - l4_sq;
    let e27 = if b >= lambda1.sqrt() {
        Some(2.0 * c_m / lambda1.sqrt() * q_b - l4_sq)
    } else {
        None
    };
    Ok((nash, lemma4, e26, e27))
}

/// Evaluate the sampled functional inequalities over `n_samples` seeded
/// standard-normal nodal fields (zero fields are regenerated, never used).
pub fn functional_inequality_margins(
    mesh: &TriangleMesh,
    sys: &P1System,
    b: f64,
    lambda1: f64,
    n_samples: usize,
    seed: u64,
) -> Result<MarginReport> {
    if lambda1 <= 0.0 {
        return Err(Error::invalid("margins need λ₁ > 0"));
    }
    if n_samples == 0 {
        return Err(Error::invalid("margins need n_samples ≥ 1"));
    }
    let m = 2u32;
    let mf = m as f64;
    let c_m = bounds::isoperimetric_constant(m)?;
    let (nb_general, nb_strong) = bounds::nash_constant(m, b, lambda1)?;
    let n_b = nb_strong.map_or(nb_general, |s| s.min(nb_general));
    let strong_branch = b >= lambda1.sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = mesh.n_nodes();
    let mut nash = InequalityMargin::empty();
    let mut lemma4 = InequalityMargin::empty();
    let mut e26 = InequalityMargin::empty();
    let mut e27 = InequalityMargin::empty();

    for _ in 0..n_samples {
        let mut values: Vec<f64>;
        loop {
            values = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            if values.iter().any(|v| v.abs() > 1e-12) {
                break;
            }
        }

        let q_b = sys.q_b(b, &values);
        let l1 = field::vertex_lp_power(&sys.lumped, &values, 1.0);
        let l2 = sys.mass.quadratic_form(&values).sqrt();
        let l4_sq = field::vertex_lp_power(&sys.lumped, &values, 4.0).sqrt();
        let grad_term = field::integral_abs_times_abs_grad(mesh, &values);
        let boundary_sq = sys.boundary_mass.quadratic_form(&values);

        nash.update(l2.powf(2.0 + 2.0 / mf), n_b * q_b * l1.powf(2.0 / mf));
        lemma4.update(l4_sq, c_m * (2.0 * grad_term + boundary_sq));
        e26.update(l4_sq, c_m * (1.0 / b + b / lambda1) * q_b);
        if strong_branch {
            e27.update(l4_sq, 2.0 * c_m / lambda1.sqrt() * q_b);
        }
    }

    Ok(MarginReport {
        nash,
        lemma4,
        e26,
        e27: strong_branch.then_some(e27),
        n_samples,
        seed,
    })
}

/// Partial heat-trace sums `Σ_{j≤k} exp(−t λ_j)` for each `t` in the grid.
/// Lower bounds of the full trace, so comparisons against trace upper bounds
/// remain valid one-sided checks.
pub fn heat_trace_partial_sum(spectrum: &SpectralSet, t_grid: &[f64]) -> Result<Vec<f64>> {
    if let Some(t) = t_grid.iter().find(|&&t| t <= 0.0) {
        return Err(Error::invalid(format!("heat trace needs t > 0, got {t}")));
    }
    Ok(t_grid
        .iter()
        .map(|&t| {
            spectrum
                .pairs
                .iter()
                .map(|p| (-t * p.eigenvalue).exp())
                .sum()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_canonical_domain, CanonicalKind};

    fn square_mesh(levels: usize) -> Arc<TriangleMesh> {
        let sq = make_canonical_domain(CanonicalKind::UnitSquare, &[]).unwrap();
        let mut mesh = sq.triangulate(0.25).unwrap();
        for _ in 0..levels {
            mesh = mesh.refine();
        }
        Arc::new(mesh)
    }

    #[test]
    fn dirichlet_square_close_to_separable_values() {
        let mesh = square_mesh(2);
        let sol = solve_torsion(&mesh, BoundaryCondition::Dirichlet).unwrap();
        // λ₁ = 2π² and ‖u‖∞ ≈ 0.07367 on the unit square.
        let lambda_exact = 2.0 * std::f64::consts::PI.powi(2);
        assert!((sol.lambda1 - lambda_exact).abs() < 0.02 * lambda_exact, "λ₁ = {}", sol.lambda1);
        assert!((sol.sup_norm - 0.0736713).abs() < 0.02 * 0.0736713, "sup = {}", sol.sup_norm);
        // Discrete positivity up to solver tolerance.
        assert!(sol.field.min_value() >= -1e-10);
        assert!(sol.l1_norm > 0.0);
    }

    #[test]
    fn robin_large_b_approaches_dirichlet() {
        let mesh = square_mesh(1);
        let dirichlet = solve_torsion(&mesh, BoundaryCondition::Dirichlet).unwrap();
        let robin = solve_torsion(&mesh, BoundaryCondition::robin(1e6).unwrap()).unwrap();
        let rel = (robin.sup_norm - dirichlet.sup_norm).abs() / dirichlet.sup_norm;
        assert!(rel < 1e-3, "relative sup-norm gap {rel}");
    }

    #[test]
    fn rigidity_is_linear_in_the_field() {
        let mesh = square_mesh(1);
        let sys = P1System::assemble(&mesh);
        let sol = solve_torsion_with(&mesh, &sys, BoundaryCondition::robin(1.0).unwrap()).unwrap();
        let ones = vec![1.0; mesh.n_nodes()];
        let rhs = sys.mass.mul_vec(&ones);
        let doubled: Vec<f64> = sol.field.values().iter().map(|v| 2.0 * v).collect();
        let doubled_rigidity = dot(&doubled, &rhs);
        assert!((doubled_rigidity - 2.0 * torsional_rigidity(&sol)).abs() < 1e-12);
    }

    #[test]
    fn robin_lambda_monotone_in_b() {
        let mesh = square_mesh(1);
        let sys = P1System::assemble(&mesh);
        let mut prev = 0.0;
        for b in [0.1, 1.0, 10.0] {
            let s = robin_spectrum_with(&mesh, &sys, b, 1).unwrap();
            let l = s.pairs[0].eigenvalue;
            assert!(l > prev, "λ₁({b}) = {l} not increasing");
            prev = l;
        }
    }

    #[test]
    fn small_b_limit_matches_perimeter_over_area() {
        let mesh = square_mesh(1);
        let b = 1e-3;
        let s = robin_spectrum(&mesh, b, 1).unwrap();
        let ratio = s.pairs[0].eigenvalue / b;
        assert!((ratio - 4.0).abs() < 0.02 * 4.0, "λ/b = {ratio}");
    }

    #[test]
    fn heat_trace_single_eigenvalue() {
        let mesh = square_mesh(0);
        let mut s = robin_spectrum(&mesh, 1.0, 1).unwrap();
        s.pairs[0].eigenvalue = 1.0;
        let sums = heat_trace_partial_sum(&s, &[1.0, 2.0, 50.0]).unwrap();
        assert!((sums[0] - (-1.0f64).exp()).abs() < 1e-14);
        assert!(sums[1] < sums[0]);
        assert!(sums[2] < 1e-20);
        assert!(heat_trace_partial_sum(&s, &[0.0]).is_err());
    }

    #[test]
    fn constant_field_lemma4_margin() {
        let mesh = square_mesh(0);
        let sys = P1System::assemble(&mesh);
        let ones = vec![1.0; mesh.n_nodes()];
        let (_, lemma4, _, _) =
            inequality_margins_for_field(&mesh, &sys, 1.0, 1.0, &ones).unwrap();
        // LHS = ‖1‖²_{L⁴} = 1; RHS = C(2)·perimeter = 4/(2√π).
        let expect = 4.0 / (2.0 * std::f64::consts::PI.sqrt()) - 1.0;
        assert!((lemma4 - expect).abs() < 1e-12, "margin {lemma4}");
    }

    #[test]
    fn sampled_margins_nonnegative_on_square() {
        let mesh = square_mesh(1);
        let sys = P1System::assemble(&mesh);
        let s = robin_spectrum_with(&mesh, &sys, 1.0, 1).unwrap();
        let lambda1 = s.pairs[0].eigenvalue;
        let report =
            functional_inequality_margins(&mesh, &sys, 1.0, lambda1, 50, 42).unwrap();
        assert!(report.nash.min_margin >= 0.0);
        assert!(report.lemma4.min_margin >= 0.0);
        assert!(report.e26.min_margin >= 0.0);
        assert_eq!(report.n_samples, 50);
        // b = 1 < √λ₁ on the square, so the strong branch is inactive.
        assert!(report.e27.is_none() == (1.0 < lambda1.sqrt()));
    }

    #[test]
    fn determinism_of_margin_sampling() {
        let mesh = square_mesh(0);
        let sys = P1System::assemble(&mesh);
        let a = functional_inequality_margins(&mesh, &sys, 1.0, 1.0, 10, 7).unwrap();
        let b = functional_inequality_margins(&mesh, &sys, 1.0, 1.0, 10, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sign_normalization() {
        let mut v = vec![0.5, -2.0, 1.0];
        sign_normalize(&mut v);
        assert_eq!(v, vec![-0.5, 2.0, -1.0]);
        sign_normalize(&mut v);
        assert_eq!(v, vec![-0.5, 2.0, -1.0]);
    }
}
