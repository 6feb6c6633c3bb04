//! P1 finite-element assembly on triangle meshes.

use crate::fem::sparse::SparseMatrix;
use crate::geometry::{dist, TriangleMesh};

/// Stiffness matrix: entry (i, j) = ∫ ∇φ_i · ∇φ_j over P1 hat functions.
/// Symmetric positive semidefinite with the constants in its kernel.
pub fn assemble_stiffness(mesh: &TriangleMesh) -> SparseMatrix {
    assemble_stiffness_weighted(mesh, &vec![1.0; mesh.n_triangles()])
}

/// Stiffness with a constant coefficient per triangle; used by the Picard
/// linearization of the p-Laplacian.
pub fn assemble_stiffness_weighted(mesh: &TriangleMesh, coeff: &[f64]) -> SparseMatrix {
    assert_eq!(coeff.len(), mesh.n_triangles());
    let mut triplets = Vec::with_capacity(9 * mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let (grads, area) = mesh.tri_gradients(t);
        let v = mesh.triangles()[t];
        let w = coeff[t] * area;
        for i in 0..3 {
            for j in 0..3 {
                let gij = grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1];
                triplets.push((v[i], v[j], w * gij));
            }
        }
    }
    SparseMatrix::from_triplets(mesh.n_nodes(), mesh.n_nodes(), &triplets)
        .expect("stiffness triplets are in range and finite")
}

/// Consistent mass matrix: element contribution (area/12)·[[2,1,1],[1,2,1],[1,1,2]].
pub fn assemble_mass(mesh: &TriangleMesh) -> SparseMatrix {
    let mut triplets = Vec::with_capacity(9 * mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let area = mesh.tri_area(t);
        let v = mesh.triangles()[t];
        for i in 0..3 {
            for j in 0..3 {
                let factor = if i == j { 2.0 } else { 1.0 };
                triplets.push((v[i], v[j], factor * area / 12.0));
            }
        }
    }
    SparseMatrix::from_triplets(mesh.n_nodes(), mesh.n_nodes(), &triplets)
        .expect("mass triplets are in range and finite")
}

/// Boundary mass matrix: per edge of length L the contribution (L/6)·[[2,1],[1,2]],
/// supported on boundary nodes. `1ᵀB1` equals the boundary length.
pub fn assemble_boundary_mass(mesh: &TriangleMesh) -> SparseMatrix {
    assemble_boundary_mass_weighted(mesh, &vec![1.0; mesh.boundary_edges().len()])
}

/// Boundary mass with a constant coefficient per boundary edge.
pub fn assemble_boundary_mass_weighted(mesh: &TriangleMesh, coeff: &[f64]) -> SparseMatrix {
    assert_eq!(coeff.len(), mesh.boundary_edges().len());
    let mut triplets = Vec::with_capacity(4 * mesh.boundary_edges().len());
    for (e, edge) in mesh.boundary_edges().iter().enumerate() {
        let len = dist(mesh.node(edge.a), mesh.node(edge.b));
        let w = coeff[e] * len / 6.0;
        triplets.push((edge.a, edge.a, 2.0 * w));
        triplets.push((edge.b, edge.b, 2.0 * w));
        triplets.push((edge.a, edge.b, w));
        triplets.push((edge.b, edge.a, w));
    }
    SparseMatrix::from_triplets(mesh.n_nodes(), mesh.n_nodes(), &triplets)
        .expect("boundary mass triplets are in range and finite")
}

/// Vertex-quadrature weights: row sums of the consistent mass matrix,
/// i.e. `w_i = ∫ φ_i`. `Σ w_i v_i` integrates P1 fields exactly.
pub fn lumped_weights(mesh: &TriangleMesh) -> Vec<f64> {
    let mut w = vec![0.0; mesh.n_nodes()];
    for t in 0..mesh.n_triangles() {
        let share = mesh.tri_area(t) / 3.0;
        for &v in &mesh.triangles()[t] {
            w[v] += share;
        }
    }
    w
}

/// Pre-assembled P1 operators for one mesh, shared by the solvers.
#[derive(Debug, Clone)]
pub struct P1System {
    pub stiffness: SparseMatrix,
    pub mass: SparseMatrix,
    pub boundary_mass: SparseMatrix,
    pub lumped: Vec<f64>,
    pub boundary_nodes: Vec<usize>,
    pub interior_nodes: Vec<usize>,
}

impl P1System {
    pub fn assemble(mesh: &TriangleMesh) -> Self {
        P1System {
            stiffness: assemble_stiffness(mesh),
            mass: assemble_mass(mesh),
            boundary_mass: assemble_boundary_mass(mesh),
            lumped: lumped_weights(mesh),
            boundary_nodes: mesh.boundary_nodes(),
            interior_nodes: mesh.interior_nodes(),
        }
    }

    /// Robin form matrix `K + bB`.
    pub fn robin_matrix(&self, b: f64) -> SparseMatrix {
        self.stiffness.add_scaled(&self.boundary_mass, b)
    }

    /// Quadratic form `q_b(v) = vᵀ(K + bB)v`.
    pub fn q_b(&self, b: f64, v: &[f64]) -> f64 {
        self.stiffness.quadratic_form(v) + b * self.boundary_mass.quadratic_form(v)
    }

    /// Embed an interior-node vector into a full nodal vector, zero on the boundary.
    pub fn embed_interior(&self, interior_values: &[f64], n_nodes: usize) -> Vec<f64> {
        let mut full = vec![0.0; n_nodes];
        for (k, &i) in self.interior_nodes.iter().enumerate() {
            full[i] = interior_values[k];
        }
        full
    }

    pub fn restrict_to_interior(&self, full: &[f64]) -> Vec<f64> {
        self.interior_nodes.iter().map(|&i| full[i]).collect()
    }
}
