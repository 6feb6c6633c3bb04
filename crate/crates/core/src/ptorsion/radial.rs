//! First eigenvalue of the radial p-Laplacian on a ball by shooting.
//!
//! The radial eigenfunction solves `−(r^{m−1} φ_p(u′))′ = λ r^{m−1} φ_p(u)`
//! with `u(0) = 1, u′(0) = 0`, where `φ_p(s) = |s|^{p−2}s`. Integrating the
//! flux variable `v = r^{m−1} φ_p(u′)` avoids differentiating the degenerate
//! coefficient at the origin. A trial λ is classified as above or below the
//! first eigenvalue from the boundary data at r = R, and bisection brings
//! the bracket to 1e-9 relative width.

use crate::error::{Error, Result};
use crate::torsion::BoundaryCondition;

const STEPS: usize = 4000;
const MAX_DOUBLINGS: usize = 200;

fn phi_inv(w: f64, p: f64) -> f64 {
    w.signum() * w.abs().powf(1.0 / (p - 1.0))
}

fn phi(s: f64, p: f64) -> f64 {
    s.signum() * s.abs().powf(p - 1.0)
}

enum Shot {
    /// u stayed positive: boundary values (u(R), u'(R)).
    Reached { u: f64, du: f64 },
    /// u crossed zero before R: λ is above the first Dirichlet eigenvalue.
    Crossed,
}

fn shoot(m: u32, p: f64, radius: f64, lambda: f64) -> Shot {
    let mf = m as f64;
    let p_conj = p / (p - 1.0);
    let r0 = radius * 1e-6;
    // Series start: u ≈ 1 − (λ/m)^{1/(p−1)} r^{p'} / p',  v ≈ −λ r^m / m.
    let mut u = 1.0 - (lambda / mf).powf(1.0 / (p - 1.0)) * r0.powf(p_conj) / p_conj;
    let mut v = -lambda * r0.powf(mf) / mf;
    let h = (radius - r0) / STEPS as f64;

    let deriv = |r: f64, u: f64, v: f64| -> (f64, f64) {
        let w = v / r.powf(mf - 1.0);
        (phi_inv(w, p), -lambda * r.powf(mf - 1.0) * phi(u, p))
    };

    let mut r = r0;
    for _ in 0..STEPS {
        let (k1u, k1v) = deriv(r, u, v);
        let (k2u, k2v) = deriv(r + 0.5 * h, u + 0.5 * h * k1u, v + 0.5 * h * k1v);
        let (k3u, k3v) = deriv(r + 0.5 * h, u + 0.5 * h * k2u, v + 0.5 * h * k2v);
        let (k4u, k4v) = deriv(r + h, u + h * k3u, v + h * k3v);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        r += h;
        if !u.is_finite() || !v.is_finite() || u <= 0.0 {
            return Shot::Crossed;
        }
    }
    let du = phi_inv(v / radius.powf(mf - 1.0), p);
    Shot::Reached { u, du }
}

/// First eigenvalue of the radial p-Laplacian on the ball of the given
/// radius in dimension `m`, Dirichlet or Robin boundary condition.
pub fn radial_p_eigenvalue(m: u32, p: f64, radius: f64, bc: BoundaryCondition) -> Result<f64> {
    if m < 2 {
        return Err(Error::invalid("radial eigenvalue needs m ≥ 2"));
    }
    if p <= 1.0 {
        return Err(Error::invalid("radial eigenvalue needs p > 1"));
    }
    if radius <= 0.0 {
        return Err(Error::invalid("radial eigenvalue needs radius > 0"));
    }
    let b_scaled = match bc {
        BoundaryCondition::Dirichlet => None,
        BoundaryCondition::Robin { b } => {
            if b <= 0.0 {
                return Err(Error::invalid("Robin parameter b must be strictly positive"));
            }
            Some(b.powf(1.0 / (p - 1.0)))
        }
    };

    // `true` when λ lies at or above the first eigenvalue.
    let is_high = |lambda: f64| -> bool {
        match shoot(m, p, radius, lambda) {
            Shot::Crossed => true,
            Shot::Reached { u, du } => match b_scaled {
                // Dirichlet: first crossing happens exactly at R.
                None => u <= 0.0,
                // Robin: −u'(R) = b^{1/(p−1)} u(R) at the eigenvalue, with
                // −u'(R) growing and u(R) shrinking in λ.
                Some(bs) => -du - bs * u >= 0.0,
            },
        }
    };

    let mut lo = 1e-14 / radius.powf(p);
    if is_high(lo) {
        return Err(Error::BracketingFailure {
            context: "radial p-eigenvalue (lower bracket already high)".into(),
            lo,
            hi: lo,
        });
    }
    let mut hi = 1.0 / radius.powf(p);
    let mut doublings = 0;
    while !is_high(hi) {
        hi *= 2.0;
        doublings += 1;
        if doublings > MAX_DOUBLINGS {
            return Err(Error::BracketingFailure {
                context: "radial p-eigenvalue (no sign change found)".into(),
                lo,
                hi,
            });
        }
    }

    for _ in 0..200 {
        if hi - lo <= 1e-9 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if is_high(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
