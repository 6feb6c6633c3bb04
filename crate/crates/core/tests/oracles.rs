//! Closed-form and series oracles against the solvers.
//!
//! Expected values are frozen from the oracles in `common`: the oracle
//! self-checks pin the digits, the solver tests then compare against those
//! frozen constants.

mod common;

use common::*;
use std::sync::Arc;

use torsionlab::bounds;
use torsionlab::fem::P1System;
use torsionlab::field::DiscreteField;
use torsionlab::geometry::CanonicalKind;
use torsionlab::ptorsion::{
    self, dirichlet_p_eigenvalue_2d, p_eigenvalue_2d, radial_p_eigenvalue, solve_p_torsion,
};
use torsionlab::torsion::{self, BoundaryCondition};
use torsionlab::wos;

/// j_{0,1} and the resulting disk eigenvalue, frozen from the series oracle.
const J01: f64 = 2.404825557695773;
const DISK_DIRICHLET_LAMBDA: f64 = 5.783185962946785;
/// Root of J₀(k) = k·J₁(k) and λ = k² for the unit disk with b = 1.
const DISK_ROBIN_ROOT: f64 = 1.2557837117945935;
const DISK_ROBIN_LAMBDA: f64 = 1.5769927308086067;
/// Center value of the square torsion function from the cosh series.
const SQUARE_CENTER_U: f64 = 0.07367135227369116;

#[test]
fn oracle_self_checks() {
    assert!((j01() - J01).abs() < 1e-12);
    assert!((j01().powi(2) - DISK_DIRICHLET_LAMBDA).abs() < 1e-11);
    let k = robin_disk_root(1.0);
    assert!((k - DISK_ROBIN_ROOT).abs() < 1e-12);
    assert!((k * k - DISK_ROBIN_LAMBDA).abs() < 1e-11);
    assert!((square_center_torsion() - SQUARE_CENTER_U).abs() < 1e-14);
}

#[test]
fn disk_dirichlet_closed_forms() {
    let (_, mesh) = mesh_canonical(CanonicalKind::DiskPolygon, &[1.0, 256.0], 2);
    let sol = torsion::solve_torsion(&mesh, BoundaryCondition::Dirichlet).unwrap();
    // λ₁ → j_{0,1}², ‖u‖∞ → (R² − 0)/(2m) = 1/4, P → π/8.
    assert!(
        rel_err(sol.lambda1, DISK_DIRICHLET_LAMBDA) < 0.01,
        "λ₁ = {}",
        sol.lambda1
    );
    assert!(rel_err(sol.sup_norm, 0.25) < 0.01, "sup = {}", sol.sup_norm);
    let rigidity = torsion::torsional_rigidity(&sol);
    let exact = std::f64::consts::PI / 8.0;
    assert!(rel_err(rigidity, exact) < 0.01, "P = {rigidity}");
    // Field is nonnegative up to solver tolerance.
    assert!(sol.field.min_value() >= -1e-10);
}

#[test]
fn disk_robin_closed_forms() {
    let (_, mesh) = mesh_canonical(CanonicalKind::DiskPolygon, &[1.0, 256.0], 2);
    let sol = torsion::solve_torsion(&mesh, BoundaryCondition::robin(1.0).unwrap()).unwrap();
    // u_b = (R² − r²)/(2m) + R/(mb): sup = 3/4 and P = π/8 + π/2.
    assert!(
        rel_err(sol.lambda1, DISK_ROBIN_LAMBDA) < 0.01,
        "λ₁ = {}",
        sol.lambda1
    );
    assert!(rel_err(sol.sup_norm, 0.75) < 0.01, "sup = {}", sol.sup_norm);
    let exact = std::f64::consts::PI / 8.0 + std::f64::consts::PI / 2.0;
    assert!(
        rel_err(sol.l1_norm, exact) < 0.01,
        "P = {} vs {exact}",
        sol.l1_norm
    );
    // Theorem bounds around the computed quantities.
    let (lower, upper) = bounds::robin_sup_bound(2, 1.0, sol.lambda1).unwrap();
    assert!(lower <= sol.sup_norm * 1.02);
    assert!(sol.sup_norm <= upper);
}

#[test]
fn square_dirichlet_closed_forms() {
    let (_, mesh) = mesh_canonical(CanonicalKind::UnitSquare, &[], 3);
    let sol = torsion::solve_torsion(&mesh, BoundaryCondition::Dirichlet).unwrap();
    let lambda_exact = 2.0 * std::f64::consts::PI.powi(2);
    assert!(
        rel_err(sol.lambda1, lambda_exact) < 0.01,
        "λ₁ = {}",
        sol.lambda1
    );
    assert!(
        rel_err(sol.sup_norm, SQUARE_CENTER_U) < 0.01,
        "sup = {}",
        sol.sup_norm
    );
}

#[test]
fn galerkin_monotone_lambda_under_refinement() {
    let (_, coarse) = mesh_canonical(CanonicalKind::DiskPolygon, &[1.0, 64.0], 0);
    let mut lambdas = Vec::new();
    let mut mesh = (*coarse).clone();
    for _ in 0..3 {
        let sol = torsion::solve_torsion(&Arc::new(mesh.clone()), BoundaryCondition::Dirichlet)
            .unwrap();
        lambdas.push(sol.lambda1);
        mesh = mesh.refine();
    }
    for w in lambdas.windows(2) {
        assert!(
            w[1] <= w[0] + 10.0 * torsion::EIGEN_TOL,
            "λ increased under refinement: {lambdas:?}"
        );
    }
}

#[test]
fn rayleigh_consistency_and_m_orthogonality() {
    let (_, mesh) = mesh_canonical(CanonicalKind::UnitSquare, &[], 1);
    let sys = P1System::assemble(&mesh);
    let set = torsion::robin_spectrum_with(&mesh, &sys, 1.0, 5).unwrap();
    let a = sys.robin_matrix(1.0);
    for pair in &set.pairs {
        let v = pair.eigenfunction.values();
        let rayleigh = a.quadratic_form(v);
        assert!((rayleigh - pair.eigenvalue).abs() <= 10.0 * torsion::EIGEN_TOL);
        assert!(pair.residual <= torsion::EIGEN_TOL);
    }
    for i in 0..set.pairs.len() {
        for j in (i + 1)..set.pairs.len() {
            let vi = set.pairs[i].eigenfunction.values();
            let vj = set.pairs[j].eigenfunction.values();
            let mvj = sys.mass.mul_vec(vj);
            let cross: f64 = vi.iter().zip(&mvj).map(|(a, b)| a * b).sum();
            assert!(cross.abs() < 1e-8, "pairs {i},{j} not M-orthogonal: {cross}");
        }
    }
}

#[test]
fn disk_p3_torsion_closed_form() {
    // Dirichlet p-torsion sup norm on the ball:
    // (p−1)/p · m^{−1/(p−1)} · R^{p/(p−1)}.
    let (_, mesh) = mesh_canonical(CanonicalKind::DiskPolygon, &[1.0, 256.0], 2);
    let sol = solve_p_torsion(&mesh, 3.0, BoundaryCondition::Dirichlet, 1e-9).unwrap();
    let exact = (2.0 / 3.0) * 2f64.powf(-0.5);
    assert!(sol.converged);
    assert!(
        rel_err(sol.sup_norm, exact) < 0.02,
        "sup = {} vs {exact}",
        sol.sup_norm
    );
}

#[test]
fn disk_p15_torsion_closed_form() {
    let (_, mesh) = mesh_canonical(CanonicalKind::DiskPolygon, &[1.0, 256.0], 2);
    let sol = solve_p_torsion(&mesh, 1.5, BoundaryCondition::Dirichlet, 1e-9).unwrap();
    let exact = 1.0 / 12.0;
    assert!(sol.converged);
    assert!(
        rel_err(sol.sup_norm, exact) < 0.02,
        "sup = {} vs {exact}",
        sol.sup_norm
    );
}

#[test]
fn radial_solver_matches_2d_linear_disk() {
    let lambda = radial_p_eigenvalue(2, 2.0, 1.0, BoundaryCondition::robin(1.0).unwrap()).unwrap();
    assert!(
        rel_err(lambda, DISK_ROBIN_LAMBDA) < 0.01,
        "radial λ = {lambda}"
    );
}

#[test]
fn p3_eigenvalue_2d_matches_radial_oracle() {
    let (_, mesh) = mesh_canonical(CanonicalKind::DiskPolygon, &[1.0, 128.0], 2);
    let (lambda_2d, field) = p_eigenvalue_2d(&mesh, 3.0, 1.0, 1e-7).unwrap();
    let lambda_radial =
        radial_p_eigenvalue(2, 3.0, 1.0, BoundaryCondition::robin(1.0).unwrap()).unwrap();
    assert!(
        rel_err(lambda_2d, lambda_radial) < 0.02,
        "2d {lambda_2d} vs radial {lambda_radial}"
    );
    assert!(field.values().iter().all(|v| v.is_finite()));
}

#[test]
fn dirichlet_p_ratio_disk_p2() {
    let (_, mesh) = mesh_canonical(CanonicalKind::DiskPolygon, &[1.0, 256.0], 2);
    let sys = P1System::assemble(&mesh);
    let sol = ptorsion::solve_p_torsion_with(&mesh, &sys, 2.0, BoundaryCondition::Dirichlet, 1e-9)
        .unwrap();
    let (lambda, _) = dirichlet_p_eigenvalue_2d(&mesh, &sys, 2.0, 1e-8).unwrap();
    let ratio = ptorsion::dirichlet_p_ratio(&sol, lambda);
    // 0.25 · j_{0,1}² ≈ 1.4458, inside [1 − 2%, 4 + 6 ln 2].
    assert!(rel_err(ratio, 0.25 * DISK_DIRICHLET_LAMBDA) < 0.02, "ratio {ratio}");
    assert!(ratio >= 0.98);
    assert!(ratio <= bounds::dirichlet_upper_constant(2));
}

#[test]
fn rigidity_sandwich_disk_robin() {
    let (domain, mesh) = mesh_canonical(CanonicalKind::DiskPolygon, &[1.0, 256.0], 2);
    let sol = torsion::solve_torsion(&mesh, BoundaryCondition::robin(1.0).unwrap()).unwrap();
    let (area, perimeter) = domain.measures();
    let (lower, upper) =
        bounds::rigidity_bounds(2, 2.0, 1.0, area, perimeter, sol.lambda1).unwrap();
    // π/2 ≤ P ≤ |Ω|/λ₁ with 2% discretization slack.
    assert!(lower <= sol.l1_norm * 1.02, "lower {lower} vs P {}", sol.l1_norm);
    assert!(sol.l1_norm <= upper * 1.02, "P {} vs upper {upper}", sol.l1_norm);
    assert!((lower - std::f64::consts::PI / 2.0).abs() < 1e-3);
}

#[test]
fn wos_disk_center() {
    let (domain, _) = mesh_canonical(CanonicalKind::DiskPolygon, &[1.0, 256.0], 0);
    let est = wos::wos_exit_time(&domain, [0.0, 0.0], 100_000, 2e-4, 7171).unwrap();
    assert!(
        (est.mean - 0.25).abs() < (0.02 * 0.25f64).max(3.0 * est.standard_error),
        "mean {} (se {})",
        est.mean,
        est.standard_error
    );
    assert_eq!(est.capped_walks, 0);
}

#[test]
fn wos_square_center() {
    let (domain, _) = mesh_canonical(CanonicalKind::UnitSquare, &[], 0);
    let est = wos::wos_exit_time(&domain, [0.5, 0.5], 100_000, 1e-4, 8181).unwrap();
    assert!(
        (est.mean - SQUARE_CENTER_U).abs()
            < (0.02 * SQUARE_CENTER_U).max(3.0 * est.standard_error),
        "mean {} (se {})",
        est.mean,
        est.standard_error
    );
}

#[test]
fn wos_bias_under_shell_halving() {
    let (domain, _) = mesh_canonical(CanonicalKind::UnitSquare, &[], 0);
    let coarse = wos::wos_exit_time(&domain, [0.5, 0.5], 100_000, 2e-4, 11).unwrap();
    let fine = wos::wos_exit_time(&domain, [0.5, 0.5], 100_000, 1e-4, 11).unwrap();
    assert!(
        (coarse.mean - fine.mean).abs() <= coarse.standard_error.max(fine.standard_error),
        "shell bias {} vs se {}",
        (coarse.mean - fine.mean).abs(),
        coarse.standard_error
    );
}

#[test]
fn fem_wos_agreement_on_square() {
    let (domain, mesh) = mesh_canonical(CanonicalKind::UnitSquare, &[], 2);
    let sol = torsion::solve_torsion(&mesh, BoundaryCondition::Dirichlet).unwrap();
    let probes = wos::probe_points(&domain, &mesh, 5);
    assert_eq!(probes.len(), 5);
    for p in probes {
        let fem = sol.field.eval_at(p).unwrap();
        let est = wos::wos_exit_time(&domain, p, 30_000, 1e-4, 4242).unwrap();
        let tol = (0.02 * fem.abs()).max(3.0 * est.standard_error);
        assert!(
            (fem - est.mean).abs() <= tol,
            "probe {p:?}: fem {fem} vs wos {} (se {})",
            est.mean,
            est.standard_error
        );
    }
}

#[test]
fn levelset_bound_disk_p2() {
    let (_, mesh) = mesh_canonical(CanonicalKind::DiskPolygon, &[1.0, 128.0], 1);
    let sol = solve_p_torsion(&mesh, 2.0, BoundaryCondition::robin(1.0).unwrap(), 1e-9).unwrap();
    let profile = ptorsion::levelset_profile(&sol, 128).unwrap();
    let verdict =
        ptorsion::theorem3_check(&profile, 2.0, 1.0, 2, DISK_ROBIN_LAMBDA, 0.0).unwrap();
    assert!(
        verdict.satisfied,
        "lhs {} vs rhs {}",
        verdict.lhs, verdict.rhs
    );
    // The constants of the verdict are the p = 2, m = 2 values.
    assert!((verdict.inputs["c1"] - 2.0 / 3.0).abs() < 1e-12);
    assert!((verdict.inputs["c2"] - 4.7622).abs() < 1e-4);
    assert!((verdict.inputs["c3"] - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn heat_trace_bounded_on_disk() {
    let (domain, mesh) = mesh_canonical(CanonicalKind::DiskPolygon, &[1.0, 128.0], 1);
    let sys = P1System::assemble(&mesh);
    let set = torsion::robin_spectrum_with(&mesh, &sys, 1.0, 10).unwrap();
    let lambda1 = set.pairs[0].eigenvalue;
    let constants = bounds::PaperConstants::new(2, 1.0, lambda1).unwrap();
    let (area, _) = domain.measures();
    let t_grid = [0.1, 0.5, 1.0, 2.0];
    let sums = torsion::heat_trace_partial_sum(&set, &t_grid).unwrap();
    for (&t, &partial) in t_grid.iter().zip(&sums) {
        let eb = bounds::eigen_bounds(&constants, area, &set.eigenvalues(), t).unwrap();
        assert!(
            partial <= eb.trace_rhs,
            "t = {t}: partial {partial} vs bound {}",
            eb.trace_rhs
        );
    }
}

#[test]
fn eigenfunction_sup_bound_and_comparison() {
    let (domain, mesh) = mesh_canonical(CanonicalKind::UnitSquare, &[], 1);
    let sys = P1System::assemble(&mesh);
    let set = torsion::robin_spectrum_with(&mesh, &sys, 1.0, 10).unwrap();
    let lambda1 = set.pairs[0].eigenvalue;
    let constants = bounds::PaperConstants::new(2, 1.0, lambda1).unwrap();
    let (area, _) = domain.measures();
    let eb = bounds::eigen_bounds(&constants, area, &set.eigenvalues(), 1.0).unwrap();
    for (pair, &rhs) in set.pairs.iter().zip(&eb.eigfun_rhs) {
        let sup = pair
            .eigenfunction
            .values()
            .iter()
            .fold(0.0f64, |a, &v| a.max(v.abs()));
        assert!(sup <= rhs, "‖φ‖∞ = {sup} vs bound {rhs}");
    }
    // Nodal comparison u_b ≥ scale·φ₁ − 1e-8 with φ₁ sign-normalized.
    let torsion_sol =
        torsion::solve_torsion_with(&mesh, &sys, BoundaryCondition::robin(1.0).unwrap()).unwrap();
    let mut phi1 = set.pairs[0].eigenfunction.values().to_vec();
    torsion::sign_normalize(&mut phi1);
    let phi1 = DiscreteField::new(Arc::clone(&mesh), phi1).unwrap();
    for (u, phi) in torsion_sol.field.values().iter().zip(phi1.values()) {
        assert!(u - eb.comparison_scale * phi >= -1e-8);
    }
}
