//! Closed-form constants and bound formulas, plus the `BoundVerdict` record.
//!
//! Everything here is a pure function of its arguments: same inputs give
//! bit-identical outputs. Violated verdicts are data, not errors — the
//! harness decides severity, because coarse discretizations may transiently
//! violate bounds that hold in the continuum.
//!
//! Logarithms in the sup-norm bounds are natural logarithms; every verdict
//! built from them records that convention in its note.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::gamma;

/// Isoperimetric constant `C(m) = m⁻¹ π^{−1/2} Γ((2+m)/2)^{1/m}`.
pub fn isoperimetric_constant(m: u32) -> Result<f64> {
    if m < 2 {
        return Err(Error::invalid("isoperimetric constant needs m ≥ 2"));
    }
    let mf = m as f64;
    Ok(gamma((2.0 + mf) / 2.0).powf(1.0 / mf) / (mf * std::f64::consts::PI.sqrt()))
}

/// Nash-inequality constants: the general branch `C(m)(b⁻¹ + λ⁻¹ b)` for all
/// b > 0 and the strong branch `2C(m) λ^{−1/2}`, present when `b ≥ √λ`.
/// Downstream checks use the minimum of the applicable branches.
pub fn nash_constant(m: u32, b: f64, lambda1: f64) -> Result<(f64, Option<f64>)> {
    if b <= 0.0 || lambda1 <= 0.0 {
        return Err(Error::invalid("nash constant needs b > 0 and λ > 0"));
    }
    let c = isoperimetric_constant(m)?;
    let general = c * (1.0 / b + b / lambda1);
    let strong = if b >= lambda1.sqrt() {
        Some(2.0 * c / lambda1.sqrt())
    } else {
        None
    };
    Ok((general, strong))
}

/// Sup-norm bounds for the Robin torsion function:
/// `λ⁻¹ ≤ ‖u_b‖_∞ ≤ 6m λ⁻¹ ln(2¹¹·3·√3·m·(1 + b⁻¹√λ))`.
/// A nonpositive spectral bottom means the torsion function is unbounded.
pub fn robin_sup_bound(m: u32, b: f64, lambda1: f64) -> Result<(f64, f64)> {
    if b <= 0.0 {
        return Err(Error::invalid("robin bound needs b > 0"));
    }
    if lambda1 <= 0.0 {
        return Err(Error::invalid(
            "nonpositive spectral bottom: unbounded torsion regime",
        ));
    }
    let mf = m as f64;
    let lower = 1.0 / lambda1;
    let arg = 2f64.powi(11) * 3.0 * 3f64.sqrt() * mf * (1.0 + lambda1.sqrt() / b);
    let upper = 6.0 * mf / lambda1 * arg.ln();
    Ok((lower, upper))
}

/// Sup-norm bounds for the Dirichlet torsion function:
/// `λ⁻¹ ≤ ‖u‖_∞ ≤ (4 + 3m ln 2) λ⁻¹`.
pub fn dirichlet_sup_bound(m: u32, lambda1: f64) -> Result<(f64, f64)> {
    if lambda1 <= 0.0 {
        return Err(Error::invalid(
            "nonpositive spectral bottom: unbounded torsion regime",
        ));
    }
    Ok((1.0 / lambda1, dirichlet_upper_constant(m) / lambda1))
}

pub fn dirichlet_upper_constant(m: u32) -> f64 {
    4.0 + 3.0 * m as f64 * 2f64.ln()
}

/// Torsional-rigidity sandwich for the Robin p-Laplacian:
/// `b^{−1/(p−1)} |Ω|^{p/(p−1)} H^{−1/(p−1)} ≤ P(Ω,b) ≤ λ^{−1/(p−1)} |Ω|`.
pub fn rigidity_bounds(
    m: u32,
    p: f64,
    b: f64,
    area: f64,
    perimeter: f64,
    lambda1: f64,
) -> Result<(f64, f64)> {
    if m < 2 {
        return Err(Error::invalid("rigidity bounds need m ≥ 2"));
    }
    if p <= 1.0 || b <= 0.0 || area <= 0.0 || perimeter <= 0.0 || lambda1 <= 0.0 {
        return Err(Error::invalid("rigidity bounds need p > 1 and positive inputs"));
    }
    let e = 1.0 / (p - 1.0);
    let lower = b.powf(-e) * area.powf(p * e) * perimeter.powf(-e);
    let upper = lambda1.powf(-e) * area;
    Ok((lower, upper))
}

/// The explicit constants of the heat-kernel chain for one (m, b, λ₁).
#[derive(Debug, Clone, PartialEq)]
pub struct PaperConstants {
    pub m: u32,
    /// Isoperimetric constant C(m).
    pub c_m: f64,
    /// Heat-kernel constant C_{2m} = (192 m)^m.
    pub c_2m: f64,
    /// ω = 1 + √m + 4m.
    pub omega: f64,
    /// General Nash branch, valid for all b > 0.
    pub n_b_general: f64,
    /// Strong Nash branch, present when b ≥ √λ.
    pub n_b_strong: Option<f64>,
    /// Minimum applicable Nash constant (used downstream).
    pub n_b: f64,
    /// K = C_{2m} N_b^m.
    pub k_const: f64,
    /// 4 + 3m ln 2.
    pub dirichlet_upper: f64,
}

impl PaperConstants {
    pub fn new(m: u32, b: f64, lambda1: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::invalid("constants need m ≥ 2"));
        }
        let (general, strong) = nash_constant(m, b, lambda1)?;
        let n_b = strong.map_or(general, |s| s.min(general));
        let mf = m as f64;
        let c = PaperConstants {
            m,
            c_m: isoperimetric_constant(m)?,
            c_2m: (192.0 * mf).powi(m as i32),
            omega: 1.0 + mf.sqrt() + 4.0 * mf,
            n_b_general: general,
            n_b_strong: strong,
            n_b,
            k_const: (192.0 * mf).powi(m as i32) * n_b.powi(m as i32),
            dirichlet_upper: dirichlet_upper_constant(m),
        };
        debug_assert!(c.c_m > 0.0 && c.c_2m > 0.0 && c.omega > 0.0 && c.n_b > 0.0);
        // The Nash constant satisfies N_b²λ ≥ 4C(m)², with equality at b = √λ.
        debug_assert!(c.n_b * c.n_b * lambda1 >= 4.0 * c.c_m * c.c_m * (1.0 - 1e-12));
        Ok(c)
    }
}

/// Right-hand sides of the spectral bounds for a finite-measure domain:
/// trace bound `C_{2m} N_b^m |Ω| t^{−m}`, eigenfunction bound
/// `(C_{2m} N_b^m e^m m^{−m})^{1/2} λ_j^{m/2}`, and the torsion–eigenfunction
/// comparison scale `(C_{2m} N_b^m e^m m^{−m})^{−1/2} λ₁^{−1−m/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenBounds {
    pub trace_rhs: f64,
    pub eigfun_rhs: Vec<f64>,
    pub comparison_scale: f64,
}

pub fn eigen_bounds(
    constants: &PaperConstants,
    area: f64,
    lambdas: &[f64],
    t: f64,
) -> Result<EigenBounds> {
    if t <= 0.0 {
        return Err(Error::invalid("heat-trace bound needs t > 0"));
    }
    if area <= 0.0 {
        return Err(Error::invalid("heat-trace bound needs positive area"));
    }
    let mf = constants.m as f64;
    let k = constants.k_const;
    let trace_rhs = k * area * t.powf(-mf);
    let amp = (k * std::f64::consts::E.powf(mf) * mf.powf(-mf)).sqrt();
    let eigfun_rhs = lambdas.iter().map(|&l| amp * l.powf(mf / 2.0)).collect();
    let lambda1 = lambdas
        .first()
        .copied()
        .ok_or_else(|| Error::invalid("eigen bounds need at least one eigenvalue"))?;
    let comparison_scale = lambda1.powf(-1.0 - mf / 2.0) / amp;
    Ok(EigenBounds {
        trace_rhs,
        eigfun_rhs,
        comparison_scale,
    })
}

/// One checked inequality instance. `satisfied ⇔ lhs ≤ rhs·(1 + tolerance)`;
/// the inputs map holds every quantity needed to recompute both sides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundVerdict {
    pub name: String,
    pub anchor: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub satisfied: bool,
    pub tolerance: f64,
    pub inputs: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

pub fn make_verdict(
    name: impl Into<String>,
    anchor: impl Into<String>,
    lhs: f64,
    rhs: f64,
    tolerance: f64,
    inputs: BTreeMap<String, f64>,
) -> Result<BoundVerdict> {
    if !lhs.is_finite() || !rhs.is_finite() {
        return Err(Error::NonFinite(format!(
            "verdict sides must be finite, got lhs={lhs}, rhs={rhs}"
        )));
    }
    if !tolerance.is_finite() || tolerance < 0.0 {
        return Err(Error::invalid("verdict tolerance must be finite and ≥ 0"));
    }
    if inputs.values().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("verdict input".into()));
    }
    Ok(BoundVerdict {
        name: name.into(),
        anchor: anchor.into(),
        lhs,
        rhs,
        margin: rhs - lhs,
        satisfied: lhs <= rhs * (1.0 + tolerance) + f64::MIN_POSITIVE,
        tolerance,
        inputs,
        note: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn isoperimetric_constant_values() {
        // m = 2: Γ(2) = 1, so C(2) = 1/(2√π).
        let c2 = isoperimetric_constant(2).unwrap();
        assert!((c2 - 1.0 / (2.0 * PI.sqrt())).abs() < 1e-14);
        // m = 3: Γ(5/2) = 3√π/4.
        let c3 = isoperimetric_constant(3).unwrap();
        let expect = (3.0 * PI.sqrt() / 4.0).powf(1.0 / 3.0) / (3.0 * PI.sqrt());
        assert!((c3 - expect).abs() < 1e-13);
        assert!((c3 - 0.206782).abs() < 1e-5);
    }

    #[test]
    fn isoperimetric_constant_decreasing() {
        let mut prev = f64::INFINITY;
        for m in 2..=10 {
            let c = isoperimetric_constant(m).unwrap();
            assert!(c > 0.0 && c < prev, "C({m}) = {c}");
            prev = c;
        }
        assert!(isoperimetric_constant(1).is_err());
    }

    #[test]
    fn nash_branches() {
        let c2 = 1.0 / (2.0 * PI.sqrt());
        // Branch boundary b = √λ: both branches coincide.
        let (g, s) = nash_constant(2, 1.0, 1.0).unwrap();
        assert!((g - 2.0 * c2).abs() < 1e-14);
        assert!((s.unwrap() - g).abs() < 1e-14);
        assert!((g - 0.564190).abs() < 1e-6);
        // b = 2, λ = 1: strong branch is smaller.
        let (g, s) = nash_constant(2, 2.0, 1.0).unwrap();
        assert!((g - c2 * 2.5).abs() < 1e-14);
        assert!((g - 0.705237).abs() < 1e-6);
        assert!((s.unwrap() - 0.564190).abs() < 1e-6);
        // b < √λ: strong branch absent.
        let (_, s) = nash_constant(2, 0.5, 1.0).unwrap();
        assert!(s.is_none());
    }

    #[test]
    fn robin_sup_bound_values() {
        let (lower, upper) = robin_sup_bound(2, 1.0, 1.577).unwrap();
        assert!((lower - 1.0 / 1.577).abs() < 1e-12);
        // 12/1.577 · ln(2¹¹·3·√3·2·(1 + √1.577)) ≈ 82.02
        assert!((upper - 82.02).abs() < 0.05, "upper = {upper}");
        assert!(robin_sup_bound(2, 1.0, 0.0).is_err());
        assert!(robin_sup_bound(2, -1.0, 1.0).is_err());
    }

    #[test]
    fn robin_upper_shrinks_for_large_lambda() {
        let (_, u1) = robin_sup_bound(2, 1.0, 1e2).unwrap();
        let (_, u2) = robin_sup_bound(2, 1.0, 1e6).unwrap();
        assert!(u2 < u1);
        assert!(u2 < 1e-3);
    }

    #[test]
    fn robin_ratio_exceeds_constant_floor() {
        for b in [0.01, 0.1, 1.0, 10.0] {
            for lambda in [0.01, 1.0, 100.0] {
                let (lower, upper) = robin_sup_bound(2, b, lambda).unwrap();
                let floor = 12.0 * (2f64.powi(11) * 3.0 * 3f64.sqrt() * 2.0).ln();
                assert!(upper / lower >= floor - 1e-9);
            }
        }
    }

    #[test]
    fn dirichlet_sup_bound_values() {
        let (lower, upper) = dirichlet_sup_bound(2, 5.7832).unwrap();
        assert!((lower - 0.17291).abs() < 1e-5);
        assert!((upper - 1.41079).abs() < 1e-5);
        let (lower, upper) = dirichlet_sup_bound(2, 1.0).unwrap();
        assert!((lower - 1.0).abs() < 1e-14);
        assert!((upper - 8.15888).abs() < 1e-5);
        // Ratio is exactly the constant.
        assert!((upper / lower - dirichlet_upper_constant(2)).abs() < 1e-12);
        assert!(dirichlet_sup_bound(2, -1.0).is_err());
    }

    #[test]
    fn rigidity_bounds_disk_and_square() {
        // Unit-radius disk, p = 2, b = 1.
        let (lo, hi) = rigidity_bounds(2, 2.0, 1.0, PI, 2.0 * PI, 1.577).unwrap();
        assert!((lo - PI / 2.0).abs() < 1e-12);
        assert!((hi - PI / 1.577).abs() < 1e-12);
        // Unit square.
        let (lo, _) = rigidity_bounds(2, 2.0, 1.0, 1.0, 4.0, 1.0).unwrap();
        assert!((lo - 0.25).abs() < 1e-14);
        // p → ∞: both bounds approach the area.
        let (lo, hi) = rigidity_bounds(2, 1e8, 1.0, PI, 2.0 * PI, 1.577).unwrap();
        assert!((lo - PI).abs() < 1e-5);
        assert!((hi - PI).abs() < 1e-5);
    }

    #[test]
    fn eigen_bounds_chain() {
        // Constants with the Nash value pinned to 0.5642 to check the
        // arithmetic chain in isolation.
        let mut c = PaperConstants::new(2, 1.0, 1.0).unwrap();
        c.n_b = 0.5642;
        c.k_const = c.c_2m * c.n_b * c.n_b;
        assert!((c.c_2m - 147456.0).abs() < 1e-9);
        let eb = eigen_bounds(&c, PI, &[1.577], 1.0).unwrap();
        assert!((eb.trace_rhs - 1.4746e5).abs() < 1e2, "trace {}", eb.trace_rhs);
        assert!((eb.eigfun_rhs[0] - 464.3).abs() < 0.5, "eigfun {}", eb.eigfun_rhs[0]);
        // comparison_scale · eigfun_rhs[0] = 1/λ₁ exactly.
        let product = eb.comparison_scale * eb.eigfun_rhs[0];
        assert!((product - 1.0 / 1.577).abs() < 1e-12);
        assert!(eigen_bounds(&c, PI, &[1.0], 0.0).is_err());
    }

    #[test]
    fn verdict_logic() {
        let v = make_verdict("a", "x", 1.0, 2.0, 0.0, BTreeMap::new()).unwrap();
        assert!(v.satisfied);
        assert!((v.margin - 1.0).abs() < 1e-15);
        let v = make_verdict("b", "x", 2.0, 1.0, 0.0, BTreeMap::new()).unwrap();
        assert!(!v.satisfied);
        assert!((v.margin + 1.0).abs() < 1e-15);
        let v = make_verdict("c", "x", 1.0, 1.0, 0.02, BTreeMap::new()).unwrap();
        assert!(v.satisfied);
        assert!(make_verdict("d", "x", f64::NAN, 1.0, 0.0, BTreeMap::new()).is_err());
        assert!(make_verdict("e", "x", 1.0, f64::INFINITY, 0.0, BTreeMap::new()).is_err());
    }

    #[test]
    fn nash_floor_at_branch_boundary() {
        // N_b²λ has its minimum 4C(m)² exactly at b = √λ.
        for m in [2u32, 3, 5] {
            let c = isoperimetric_constant(m).unwrap();
            for lambda in [0.3f64, 1.0, 42.0] {
                let b = lambda.sqrt();
                let (g, s) = nash_constant(m, b, lambda).unwrap();
                let n = s.unwrap().min(g);
                assert!((n * n * lambda - 4.0 * c * c).abs() < 1e-12);
            }
        }
    }
}
