//! Independent oracles for the integration tests: power-series Bessel
//! functions with a bisection root finder, and the classical double-series
//! solution of the square torsion problem. None of this shares code with the
//! solvers it checks.

#![allow(dead_code)]

use std::sync::Arc;

use torsionlab::geometry::{make_canonical_domain, CanonicalKind, PolygonalDomain, TriangleMesh};

/// J₀ by its power series; accurate to ~1e-14 for |x| ≤ 12.
pub fn bessel_j0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        term *= -q / (k as f64 * k as f64);
        sum += term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    sum
}

/// J₁ by its power series.
pub fn bessel_j1(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = x / 2.0;
    let mut sum = term;
    for k in 1..60 {
        term *= -q / (k as f64 * (k as f64 + 1.0));
        sum += term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    sum
}

/// Bisection to ~1e-14 on a bracketing interval.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    assert!(
        flo * f(hi) < 0.0,
        "bisect: no sign change on [{lo}, {hi}]"
    );
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo < 1e-15 * hi.abs().max(1.0) {
            return mid;
        }
        if flo * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// First zero of J₀.
pub fn j01() -> f64 {
    bisect(bessel_j0, 2.0, 3.0)
}

/// Root k of b·J₀(k) = k·J₁(k): the Robin eigenvalue of the unit disk is k².
pub fn robin_disk_root(b: f64) -> f64 {
    let f = |k: f64| b * bessel_j0(k) - k * bessel_j1(k);
    bisect(f, 1e-6, j01())
}

/// Center value of the torsion function on the unit square, by the classical
/// single-series solution (cosh form), truncated far past f64 precision.
pub fn square_center_torsion() -> f64 {
    let pi = std::f64::consts::PI;
    let mut sum = 0.0;
    for m in (1..400).step_by(2) {
        let mf = m as f64;
        let sech = 1.0 / (mf * pi / 2.0).cosh();
        sum += 4.0 / (pi.powi(3) * mf.powi(3)) * (1.0 - sech) * (mf * pi / 2.0).sin();
    }
    sum
}

/// Canonical domain meshed at `h0 = diameter/8` and red-refined `levels` times.
pub fn mesh_canonical(
    kind: CanonicalKind,
    params: &[f64],
    levels: usize,
) -> (PolygonalDomain, Arc<TriangleMesh>) {
    let domain = make_canonical_domain(kind, params).unwrap();
    let mut mesh = domain.triangulate(domain.diameter() / 8.0).unwrap();
    for _ in 0..levels {
        mesh = mesh.refine();
    }
    (domain, Arc::new(mesh))
}

pub fn rel_err(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs()
}
