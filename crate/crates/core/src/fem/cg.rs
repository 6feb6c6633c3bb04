//! Jacobi-preconditioned conjugate gradients.

use crate::error::{Error, Result};
use crate::fem::sparse::{axpy, dot, norm2, SparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    pub final_residual: f64,
}

/// Solve `A x = rhs` for symmetric positive definite `A`.
///
/// Stops when `‖Ax − rhs‖ / ‖rhs‖ ≤ tol`. A zero right-hand side returns the
/// zero vector in zero iterations. Non-convergence within `max_iter` is an
/// error, never a silently truncated answer.
pub fn cg_solve(
    a: &SparseMatrix,
    rhs: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, CgStats)> {
    let diag = a.diagonal();
    cg_solve_projected(
        |x, y| a.mul_vec_into(x, y),
        &diag,
        rhs,
        tol,
        max_iter,
        None,
    )
}

/// CG on an operator, with an optional projection applied to the
/// preconditioned residual. The eigensolver passes the M-orthogonal deflation
/// projector here so every search direction stays inside the subspace where
/// the shifted operator is positive definite; the right-hand side and the
/// operator output must already be consistent with that subspace.
pub fn cg_solve_projected<F>(
    mut op: F,
    diag: &[f64],
    rhs: &[f64],
    tol: f64,
    max_iter: usize,
    project_search: Option<&dyn Fn(&mut [f64])>,
) -> Result<(Vec<f64>, CgStats)>
where
    F: FnMut(&[f64], &mut [f64]),
{
    if tol <= 0.0 {
        return Err(Error::invalid("cg tolerance must be positive"));
    }
    let n = rhs.len();
    let rhs_norm = norm2(rhs);
    if rhs_norm == 0.0 {
        return Ok((
            vec![0.0; n],
            CgStats {
                iterations: 0,
                final_residual: 0.0,
            },
        ));
    }

    let inv_diag: Vec<f64> = diag
        .iter()
        .map(|&d| if d.abs() > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let apply_precond = |r: &[f64], z: &mut [f64]| {
        for i in 0..r.len() {
            z[i] = inv_diag[i] * r[i];
        }
    };

    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let mut z = vec![0.0; n];
    apply_precond(&r, &mut z);
    if let Some(p) = project_search {
        p(&mut z);
    }
    let mut p_dir = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];

    for it in 0..max_iter {
        let res = norm2(&r) / rhs_norm;
        if res <= tol {
            return Ok((
                x,
                CgStats {
                    iterations: it,
                    final_residual: res,
                },
            ));
        }
        op(&p_dir, &mut ap);
        let pap = dot(&p_dir, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return Err(Error::NoConvergence {
                context: "cg (operator not positive definite on search space)".into(),
                iterations: it,
                residual: res,
            });
        }
        let alpha = rz / pap;
        axpy(alpha, &p_dir, &mut x);
        axpy(-alpha, &ap, &mut r);
        apply_precond(&r, &mut z);
        if let Some(p) = project_search {
            p(&mut z);
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p_dir[i] = z[i] + beta * p_dir[i];
        }
    }

    let res = norm2(&r) / rhs_norm;
    if res <= tol {
        Ok((
            x,
            CgStats {
                iterations: max_iter,
                final_residual: res,
            },
        ))
    } else {
        Err(Error::NoConvergence {
            context: "cg".into(),
            iterations: max_iter,
            residual: res,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_system() {
        let a = SparseMatrix::identity(3);
        let rhs = vec![1.0, 0.0, 0.0];
        let (x, stats) = cg_solve(&a, &rhs, 1e-12, 10).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!(x[1].abs() < 1e-12);
        assert!(stats.iterations <= 2);
    }

    #[test]
    fn two_by_two_hand_solved() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 2.0)])
            .unwrap();
        let (x, _) = cg_solve(&a, &[3.0, 3.0], 1e-12, 50).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-10);
        assert!((x[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_rhs_is_zero_in_zero_iterations() {
        let a = SparseMatrix::identity(4);
        let (x, stats) = cg_solve(&a, &[0.0; 4], 1e-10, 5).unwrap();
        assert_eq!(x, vec![0.0; 4]);
        assert_eq!(stats.iterations, 0);
    }

    #[test]
    fn reports_non_convergence() {
        // One iteration cannot solve this tridiagonal system.
        let n = 50;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = SparseMatrix::from_triplets(n, n, &t).unwrap();
        let rhs = vec![1.0; n];
        match cg_solve(&a, &rhs, 1e-14, 1) {
            Err(Error::NoConvergence { iterations, .. }) => assert_eq!(iterations, 1),
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }
}
