//! Nodal P1 fields and the exact piecewise-linear integrals used by norms,
//! functional inequalities and level-set profiles.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{Point, TriangleMesh};

/// Nodal coefficient vector over a shared mesh.
#[derive(Debug, Clone)]
pub struct DiscreteField {
    mesh: Arc<TriangleMesh>,
    values: Vec<f64>,
}

impl DiscreteField {
    pub fn new(mesh: Arc<TriangleMesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n_nodes() {
            return Err(Error::invalid(format!(
                "field has {} values for a mesh with {} nodes",
                values.len(),
                mesh.n_nodes()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("nodal field value".into()));
        }
        Ok(DiscreteField { mesh, values })
    }

    pub fn constant(mesh: Arc<TriangleMesh>, value: f64) -> Self {
        let n = mesh.n_nodes();
        DiscreteField {
            mesh,
            values: vec![value; n],
        }
    }

    pub fn mesh(&self) -> &Arc<TriangleMesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn scaled(&self, c: f64) -> DiscreteField {
        DiscreteField {
            mesh: Arc::clone(&self.mesh),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// Interpolated value at an arbitrary point, `None` outside the mesh.
    pub fn eval_at(&self, p: Point) -> Option<f64> {
        let (t, bary) = self.mesh.locate(p)?;
        let v = self.mesh.triangles()[t];
        Some(bary[0] * self.values[v[0]] + bary[1] * self.values[v[1]] + bary[2] * self.values[v[2]])
    }

    /// Constant gradient on triangle `t`.
    pub fn gradient_on(&self, t: usize) -> [f64; 2] {
        gradient_on(&self.mesh, &self.values, t)
    }
}

pub fn gradient_on(mesh: &TriangleMesh, values: &[f64], t: usize) -> [f64; 2] {
    let (grads, _) = mesh.tri_gradients(t);
    let v = mesh.triangles()[t];
    let mut g = [0.0, 0.0];
    for i in 0..3 {
        g[0] += values[v[i]] * grads[i][0];
        g[1] += values[v[i]] * grads[i][1];
    }
    g
}

/// ∫ v over the mesh; exact for P1 fields.
pub fn integral(mesh: &TriangleMesh, values: &[f64]) -> f64 {
    (0..mesh.n_triangles())
        .map(|t| {
            let v = mesh.triangles()[t];
            mesh.tri_area(t) * (values[v[0]] + values[v[1]] + values[v[2]]) / 3.0
        })
        .sum()
}

/// Exact ∫_T (g)⁺ for the linear function with vertex values `g` on a
/// triangle of the given area.
fn tri_excess(area: f64, g: [f64; 3]) -> f64 {
    let mut s = g;
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let [s0, s1, s2] = s;
    if s0 >= 0.0 {
        return area * (s0 + s1 + s2) / 3.0;
    }
    if s2 <= 0.0 {
        return 0.0;
    }
    if s1 <= 0.0 {
        // One positive corner: a sub-triangle with similar shape.
        area * s2 * s2 * s2 / (3.0 * (s2 - s0) * (s2 - s1))
    } else {
        // One negative corner: complement of the same construction.
        area * (s0 + s1 + s2) / 3.0 + area * (-s0) * (-s0) * (-s0) / (3.0 * (s1 - s0) * (s2 - s0))
    }
}

/// Exact area fraction of {g > 0} on a triangle with vertex values `g`.
fn tri_area_above(area: f64, g: [f64; 3]) -> f64 {
    let mut s = g;
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let [s0, s1, s2] = s;
    if s0 >= 0.0 {
        return area;
    }
    if s2 <= 0.0 {
        return 0.0;
    }
    if s1 <= 0.0 {
        area * s2 * s2 / ((s2 - s0) * (s2 - s1))
    } else {
        area * (1.0 - s0 * s0 / ((s1 - s0) * (s2 - s0)))
    }
}

fn tri_values(mesh: &TriangleMesh, values: &[f64], t: usize) -> [f64; 3] {
    let v = mesh.triangles()[t];
    [values[v[0]], values[v[1]], values[v[2]]]
}

/// Exact ∫ (v − level)⁺.
pub fn integral_excess(mesh: &TriangleMesh, values: &[f64], level: f64) -> f64 {
    (0..mesh.n_triangles())
        .map(|t| {
            let g = tri_values(mesh, values, t).map(|v| v - level);
            tri_excess(mesh.tri_area(t), g)
        })
        .sum()
}

/// Exact |{v > level}|.
pub fn area_above(mesh: &TriangleMesh, values: &[f64], level: f64) -> f64 {
    (0..mesh.n_triangles())
        .map(|t| {
            let g = tri_values(mesh, values, t).map(|v| v - level);
            tri_area_above(mesh.tri_area(t), g)
        })
        .sum()
}

/// Exact ∫ |v| (positive and negative parts handled per triangle).
pub fn integral_abs(mesh: &TriangleMesh, values: &[f64]) -> f64 {
    (0..mesh.n_triangles())
        .map(|t| {
            let g = tri_values(mesh, values, t);
            let area = mesh.tri_area(t);
            tri_excess(area, g) + tri_excess(area, g.map(|v| -v))
        })
        .sum()
}

/// Exact ∫ |v||∇v| (the gradient is constant per triangle).
pub fn integral_abs_times_abs_grad(mesh: &TriangleMesh, values: &[f64]) -> f64 {
    (0..mesh.n_triangles())
        .map(|t| {
            let g = gradient_on(mesh, values, t);
            let gnorm = g[0].hypot(g[1]);
            let vals = tri_values(mesh, values, t);
            let area = mesh.tri_area(t);
            gnorm * (tri_excess(area, vals) + tri_excess(area, vals.map(|v| -v)))
        })
        .sum()
}

/// Vertex-quadrature p-norm `(Σ w_i |v_i|^p)^{1/p}` with lumped-mass weights.
pub fn vertex_lp_norm(weights: &[f64], values: &[f64], p: f64) -> f64 {
    vertex_lp_power(weights, values, p).powf(1.0 / p)
}

/// `Σ w_i |v_i|^p`.
pub fn vertex_lp_power(weights: &[f64], values: &[f64], p: f64) -> f64 {
    weights
        .iter()
        .zip(values)
        .map(|(&w, &v)| w * v.abs().powf(p))
        .sum()
}

/// Exact ∫_edge |v|^p along a boundary edge where v is linear from `a` to `b`
/// over length `len`: closed-form antiderivative of |·|^p.
pub fn edge_abs_power_integral(a: f64, b: f64, len: f64, p: f64) -> f64 {
    let d = b - a;
    if d.abs() < 1e-300 {
        return len * a.abs().powf(p);
    }
    let prim = |x: f64| x.abs().powf(p) * x / (p + 1.0);
    len * (prim(b) - prim(a)) / d
}
