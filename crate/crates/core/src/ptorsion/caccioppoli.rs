//! Caccioppoli cutoff inequality for Dirichlet p-torsion functions and the
//! sup-norm–eigenvalue ratio of the Dirichlet problem.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bounds::{make_verdict, BoundVerdict};
use crate::error::{Error, Result};
use crate::field::{self, DiscreteField};
use crate::geometry::TriangleMesh;
use crate::ptorsion::PTorsionSolution;

/// Check `∫|∇(wθ)|^p ≤ c1 ∫ w|θ|^p + c2 ∫ |∇θ|^p w^p` for a Dirichlet
/// p-torsion function `w` (zero on the boundary) and a Lipschitz cutoff `θ`,
/// with `c2 = 2^{p−1} + c1·((p−1)c1/(c1−2^{p−1}))^{p−1}`.
///
/// Products are formed nodally, gradients element-wise; the volume terms use
/// vertex quadrature.
pub fn caccioppoli_check(
    mesh: &TriangleMesh,
    w: &DiscreteField,
    theta: &DiscreteField,
    p: f64,
    c1: f64,
    tolerance: f64,
) -> Result<BoundVerdict> {
    if p <= 1.0 {
        return Err(Error::invalid("caccioppoli check needs p > 1"));
    }
    let two_pm1 = 2f64.powf(p - 1.0);
    if c1 <= two_pm1 {
        return Err(Error::invalid(format!(
            "caccioppoli constant needs c1 > 2^(p-1) = {two_pm1}, got {c1}"
        )));
    }
    let c2 = two_pm1 + c1 * ((p - 1.0) * c1 / (c1 - two_pm1)).powf(p - 1.0);

    let wv = w.values();
    let tv = theta.values();
    let product: Vec<f64> = wv.iter().zip(tv).map(|(&a, &b)| a * b).collect();

    let mut lhs = 0.0;
    let mut grad_theta_term = 0.0;
    for t in 0..mesh.n_triangles() {
        let area = mesh.tri_area(t);
        let g = field::gradient_on(mesh, &product, t);
        lhs += area * g[0].hypot(g[1]).powf(p);
        let gt = field::gradient_on(mesh, tv, t);
        let v = mesh.triangles()[t];
        let wp_avg = (wv[v[0]].abs().powf(p) + wv[v[1]].abs().powf(p) + wv[v[2]].abs().powf(p)) / 3.0;
        grad_theta_term += area * gt[0].hypot(gt[1]).powf(p) * wp_avg;
    }

    let lumped = crate::fem::lumped_weights(mesh);
    let w_theta_term: f64 = lumped
        .iter()
        .zip(wv)
        .zip(tv)
        .map(|((&wq, &wi), &ti)| wq * wi * ti.abs().powf(p))
        .sum();

    let rhs = c1 * w_theta_term + c2 * grad_theta_term;
    let mut inputs = BTreeMap::new();
    inputs.insert("p".into(), p);
    inputs.insert("c1".into(), c1);
    inputs.insert("c2".into(), c2);
    inputs.insert("cutoff_term".into(), w_theta_term);
    inputs.insert("gradient_term".into(), grad_theta_term);
    make_verdict("caccioppoli_cutoff", "bebu02", lhs, rhs, tolerance, inputs)
}

/// `‖w‖_∞ · λ_p^{1/(p−1)}` for a Dirichlet p-torsion solution and its
/// matching first Dirichlet p-eigenvalue. The bound constant is not explicit,
/// so callers assert boundedness and mesh-stability of this ratio rather than
/// a specific value.
pub fn dirichlet_p_ratio(sol: &PTorsionSolution, lambda_p: f64) -> f64 {
    sol.sup_norm * lambda_p.powf(1.0 / (sol.p - 1.0))
}

/// Deterministic family of Lipschitz cutoffs in [0, 1]: clamped random
/// low-frequency trigonometric fields sampled at the nodes.
pub fn random_lipschitz_cutoffs(
    mesh: &Arc<TriangleMesh>,
    count: usize,
    seed: u64,
) -> Vec<DiscreteField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let diam = {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for n in mesh.nodes() {
            lo[0] = lo[0].min(n[0]);
            lo[1] = lo[1].min(n[1]);
            hi[0] = hi[0].max(n[0]);
            hi[1] = hi[1].max(n[1]);
        }
        crate::geometry::dist(lo, hi)
    };
    (0..count)
        .map(|_| {
            let mut waves = Vec::with_capacity(3);
            for _ in 0..3 {
                let kx: f64 = (rng.random::<f64>() - 0.5) * 8.0 / diam;
                let ky: f64 = (rng.random::<f64>() - 0.5) * 8.0 / diam;
                let phase: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                let amp: f64 = rng.random::<f64>();
                waves.push((kx, ky, phase, amp));
            }
            let offset: f64 = rng.random::<f64>();
            let values: Vec<f64> = mesh
                .nodes()
                .iter()
                .map(|n| {
                    let raw: f64 = waves
                        .iter()
                        .map(|(kx, ky, phase, amp)| amp * (kx * n[0] + ky * n[1] + phase).sin())
                        .sum();
                    (offset + raw).clamp(0.0, 1.0)
                })
                .collect();
            DiscreteField::new(Arc::clone(mesh), values).expect("nodal cutoff values are finite")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::P1System;
    use crate::geometry::{make_canonical_domain, CanonicalKind};
    use crate::ptorsion::solve_p_torsion_with;
    use crate::torsion::BoundaryCondition;

    fn dirichlet_w(p: f64) -> (Arc<TriangleMesh>, PTorsionSolution) {
        let sq = make_canonical_domain(CanonicalKind::UnitSquare, &[]).unwrap();
        let mesh = Arc::new(sq.triangulate(0.25).unwrap().refine());
        let sys = P1System::assemble(&mesh);
        let sol = solve_p_torsion_with(&mesh, &sys, p, BoundaryCondition::Dirichlet, 1e-9).unwrap();
        (mesh, sol)
    }

    #[test]
    fn zero_cutoff_is_trivially_satisfied() {
        let (mesh, sol) = dirichlet_w(2.0);
        let theta = DiscreteField::constant(Arc::clone(&mesh), 0.0);
        let v = caccioppoli_check(&mesh, &sol.field, &theta, 2.0, 3.0, 0.0).unwrap();
        assert_eq!(v.lhs, 0.0);
        assert_eq!(v.rhs, 0.0);
        assert!(v.satisfied);
    }

    #[test]
    fn unit_cutoff_margin_is_twice_the_rigidity() {
        // θ ≡ 1, p = 2, c1 = 3: the check reduces to ∫|∇w|² ≤ 3∫w, and the
        // weak form gives ∫|∇w|² = ∫w, so the margin is about 2∫w.
        let (mesh, sol) = dirichlet_w(2.0);
        let theta = DiscreteField::constant(Arc::clone(&mesh), 1.0);
        let v = caccioppoli_check(&mesh, &sol.field, &theta, 2.0, 3.0, 0.0).unwrap();
        assert!(v.satisfied);
        let expect = 2.0 * sol.l1_norm;
        assert!(
            (v.margin - expect).abs() < 0.02 * expect,
            "margin {} vs {expect}",
            v.margin
        );
    }

    #[test]
    fn random_cutoffs_satisfied_across_p() {
        for p in [1.5, 2.0, 3.0] {
            let (mesh, sol) = dirichlet_w(p);
            let c1 = 2f64.powf(p - 1.0) + 1.0;
            for theta in random_lipschitz_cutoffs(&mesh, 10, 99) {
                let v = caccioppoli_check(&mesh, &sol.field, &theta, p, c1, 0.0).unwrap();
                assert!(
                    v.satisfied,
                    "violated at p={p}: lhs={}, rhs={}",
                    v.lhs, v.rhs
                );
            }
        }
    }

    #[test]
    fn rejects_c1_below_threshold() {
        let (mesh, sol) = dirichlet_w(2.0);
        let theta = DiscreteField::constant(Arc::clone(&mesh), 1.0);
        assert!(caccioppoli_check(&mesh, &sol.field, &theta, 2.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn ratio_formula() {
        let (_, sol) = dirichlet_w(2.0);
        let r = dirichlet_p_ratio(&sol, 4.0);
        assert!((r - sol.sup_norm * 4.0).abs() < 1e-14);
    }

    #[test]
    fn cutoffs_are_deterministic_and_lipschitz_bounded() {
        let sq = make_canonical_domain(CanonicalKind::UnitSquare, &[]).unwrap();
        let mesh = Arc::new(sq.triangulate(0.25).unwrap());
        let a = random_lipschitz_cutoffs(&mesh, 3, 5);
        let b = random_lipschitz_cutoffs(&mesh, 3, 5);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.values(), y.values());
            assert!(x.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }
}
