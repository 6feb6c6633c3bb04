//! Conforming P1 triangle meshes.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::{dist, orient2d, Point};
use crate::error::{Error, Result};

/// Directed boundary edge; direction follows the orientation of the polygon
/// loop it discretizes (outer loop CCW, holes CW).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub loop_tag: usize,
}

/// Conforming triangulation with boundary markers.
///
/// Invariants (checked by [`TriangleMesh::validate`]):
/// * every triangle is counterclockwise with strictly positive area;
/// * every interior edge is shared by exactly two triangles, every boundary
///   edge by exactly one;
/// * the boundary edges tile the original polygon boundary loop by loop, so
///   their total length equals the polygon perimeter to 1e-12 relative;
/// * the minimum triangle angle is at least 20 degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    h_max: f64,
}

impl TriangleMesh {
    pub fn new(
        nodes: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
    ) -> Result<Self> {
        let h_max = triangles
            .iter()
            .flat_map(|t| {
                [
                    dist(nodes[t[0]], nodes[t[1]]),
                    dist(nodes[t[1]], nodes[t[2]]),
                    dist(nodes[t[2]], nodes[t[0]]),
                ]
            })
            .fold(0.0f64, f64::max);
        let mesh = TriangleMesh {
            nodes,
            triangles,
            boundary_edges,
            h_max,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> Point {
        self.nodes[i]
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    pub fn tri_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.tri_points(t);
        0.5 * orient2d(a, b, c)
    }

    pub fn tri_points(&self, t: usize) -> [Point; 3] {
        let v = self.triangles[t];
        [self.nodes[v[0]], self.nodes[v[1]], self.nodes[v[2]]]
    }

    /// Constant gradients of the three P1 hat functions on triangle `t`,
    /// together with its area.
    pub fn tri_gradients(&self, t: usize) -> ([[f64; 2]; 3], f64) {
        let [p0, p1, p2] = self.tri_points(t);
        let two_a = orient2d(p0, p1, p2);
        let area = 0.5 * two_a;
        let g0 = [(p1[1] - p2[1]) / two_a, (p2[0] - p1[0]) / two_a];
        let g1 = [(p2[1] - p0[1]) / two_a, (p0[0] - p2[0]) / two_a];
        let g2 = [(p0[1] - p1[1]) / two_a, (p1[0] - p0[0]) / two_a];
        ([g0, g1, g2], area)
    }

    /// (area, boundary length) of the discrete geometry.
    pub fn measures(&self) -> (f64, f64) {
        let area = (0..self.triangles.len()).map(|t| self.tri_area(t)).sum();
        let length = self
            .boundary_edges
            .iter()
            .map(|e| dist(self.nodes[e.a], self.nodes[e.b]))
            .sum();
        (area, length)
    }

    /// Sorted node indices lying on the boundary.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .boundary_edges
            .iter()
            .flat_map(|e| [e.a, e.b])
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Sorted node indices not on the boundary.
    pub fn interior_nodes(&self) -> Vec<usize> {
        let boundary = self.boundary_nodes();
        let mut mask = vec![false; self.nodes.len()];
        for b in boundary {
            mask[b] = true;
        }
        (0..self.nodes.len()).filter(|&i| !mask[i]).collect()
    }

    pub fn min_angle_degrees(&self) -> f64 {
        let mut worst = f64::INFINITY;
        for t in 0..self.triangles.len() {
            let [a, b, c] = self.tri_points(t);
            for (p, q, r) in [(a, b, c), (b, c, a), (c, a, b)] {
                let u = super::sub(q, p);
                let v = super::sub(r, p);
                let dot = u[0] * v[0] + u[1] * v[1];
                let cr = super::cross(u, v);
                worst = worst.min(cr.atan2(dot).abs());
            }
        }
        worst.to_degrees()
    }

    /// Uniform red refinement: each triangle splits into four congruent
    /// children similar to the parent, so angles are preserved exactly,
    /// `h_max` halves, and the node set is a superset of the input's.
    pub fn refine(&self) -> TriangleMesh {
        let mut nodes = self.nodes.clone();
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, nodes: &mut Vec<Point>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoint.entry(key).or_insert_with(|| {
                let pa = nodes[a];
                let pb = nodes[b];
                nodes.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
                nodes.len() - 1
            })
        };

        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for &[i, j, k] in &self.triangles {
            let ij = mid(i, j, &mut nodes);
            let jk = mid(j, k, &mut nodes);
            let ki = mid(k, i, &mut nodes);
            triangles.push([i, ij, ki]);
            triangles.push([ij, j, jk]);
            triangles.push([ki, jk, k]);
            triangles.push([ij, jk, ki]);
        }

        let mut boundary_edges = Vec::with_capacity(2 * self.boundary_edges.len());
        for e in &self.boundary_edges {
            let m = mid(e.a, e.b, &mut nodes);
            boundary_edges.push(BoundaryEdge {
                a: e.a,
                b: m,
                loop_tag: e.loop_tag,
            });
            boundary_edges.push(BoundaryEdge {
                a: m,
                b: e.b,
                loop_tag: e.loop_tag,
            });
        }

        TriangleMesh {
            nodes,
            triangles,
            boundary_edges,
            h_max: 0.5 * self.h_max,
        }
    }

    /// Structural validation; see the type-level invariants.
    pub fn validate(&self) -> Result<()> {
        if self.triangles.is_empty() {
            return Err(Error::MeshingFailure("mesh has no triangles".into()));
        }
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                if v >= self.nodes.len() {
                    return Err(Error::MeshingFailure(format!(
                        "triangle {t} references missing node {v}"
                    )));
                }
            }
            if self.tri_area(t) <= 0.0 {
                return Err(Error::MeshingFailure(format!(
                    "triangle {t} is degenerate or clockwise"
                )));
            }
        }

        // Edge incidence counts, with orientation bookkeeping: in a conforming
        // CCW mesh every shared edge appears once per direction.
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                *directed.entry((a, b)).or_insert(0) += 1;
                if directed[&(a, b)] > 1 {
                    return Err(Error::MeshingFailure(format!(
                        "directed edge ({a}, {b}) appears twice: non-conforming mesh"
                    )));
                }
            }
        }
        let mut boundary_set: HashMap<(usize, usize), usize> = HashMap::new();
        for (i, e) in self.boundary_edges.iter().enumerate() {
            if boundary_set.insert((e.a.min(e.b), e.a.max(e.b)), i).is_some() {
                return Err(Error::MeshingFailure("duplicate boundary edge".into()));
            }
        }
        for (&(a, b), _) in directed.iter() {
            let shared = directed.contains_key(&(b, a));
            let on_boundary = boundary_set.contains_key(&(a.min(b), a.max(b)));
            if shared == on_boundary {
                return Err(Error::MeshingFailure(format!(
                    "edge ({a}, {b}) boundary marking inconsistent with incidence"
                )));
            }
        }
        for e in &self.boundary_edges {
            // The interior of the domain must lie to the left of an outer-loop
            // edge, i.e. the directed boundary edge must belong to a triangle.
            if !directed.contains_key(&(e.a, e.b)) {
                return Err(Error::MeshingFailure(format!(
                    "boundary edge ({}, {}) is not a triangle edge in loop direction",
                    e.a, e.b
                )));
            }
        }

        // Boundary edges must chain into closed loops per tag.
        let mut tags: Vec<usize> = self.boundary_edges.iter().map(|e| e.loop_tag).collect();
        tags.sort_unstable();
        tags.dedup();
        for tag in tags {
            let mut next: HashMap<usize, usize> = HashMap::new();
            for e in self.boundary_edges.iter().filter(|e| e.loop_tag == tag) {
                if next.insert(e.a, e.b).is_some() {
                    return Err(Error::MeshingFailure(format!(
                        "boundary loop {tag} branches at node {}",
                        e.a
                    )));
                }
            }
            let start = *next.keys().min().unwrap();
            let mut cur = start;
            for _ in 0..next.len() {
                cur = *next.get(&cur).ok_or_else(|| {
                    Error::MeshingFailure(format!("boundary loop {tag} is not closed"))
                })?;
            }
            if cur != start {
                return Err(Error::MeshingFailure(format!(
                    "boundary loop {tag} does not close"
                )));
            }
        }
        Ok(())
    }

    /// Locate `p` and return (triangle, barycentric coordinates), scanning all
    /// triangles. Intended for probes and plotting, not inner loops.
    pub fn locate(&self, p: Point) -> Option<(usize, [f64; 3])> {
        for t in 0..self.triangles.len() {
            let [a, b, c] = self.tri_points(t);
            let two_a = orient2d(a, b, c);
            let l0 = orient2d(p, b, c) / two_a;
            let l1 = orient2d(a, p, c) / two_a;
            let l2 = orient2d(a, b, p) / two_a;
            let eps = -1e-12;
            if l0 >= eps && l1 >= eps && l2 >= eps {
                return Some((t, [l0, l1, l2]));
            }
        }
        None
    }

    /// Write the text format: header `nodes N triangles T boundary B`, then
    /// `x y` per node, `i j k` per triangle (0-based), `i j loop_tag` per
    /// boundary edge. Floats use shortest round-trip formatting.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "nodes {} triangles {} boundary {}",
            self.nodes.len(),
            self.triangles.len(),
            self.boundary_edges.len()
        )?;
        for n in &self.nodes {
            writeln!(w, "{} {}", n[0], n[1])?;
        }
        for t in &self.triangles {
            writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
        }
        for e in &self.boundary_edges {
            writeln!(w, "{} {} {}", e.a, e.b, e.loop_tag)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty mesh file".into()))??;
        let parts: Vec<&str> = header.split_whitespace().collect();
        let [n, t, b] = match parts.as_slice() {
            ["nodes", n, "triangles", t, "boundary", b] => [n, t, b].map(|s| {
                s.parse::<usize>()
                    .map_err(|e| Error::Parse(format!("bad mesh header count: {e}")))
            }),
            _ => {
                return Err(Error::Parse(format!(
                    "bad mesh header '{header}', expected 'nodes N triangles T boundary B'"
                )))
            }
        };
        let (n, t, b) = (n?, t?, b?);
        let mut next_line = || -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::Parse("mesh file truncated".into()))?
                .map_err(Error::from)
        };
        let mut nodes = Vec::with_capacity(n);
        for _ in 0..n {
            let line = next_line()?;
            let mut it = line.split_whitespace();
            let x: f64 = parse_field(it.next(), "node x")?;
            let y: f64 = parse_field(it.next(), "node y")?;
            nodes.push([x, y]);
        }
        let mut triangles = Vec::with_capacity(t);
        for _ in 0..t {
            let line = next_line()?;
            let mut it = line.split_whitespace();
            triangles.push([
                parse_field(it.next(), "triangle index")?,
                parse_field(it.next(), "triangle index")?,
                parse_field(it.next(), "triangle index")?,
            ]);
        }
        let mut boundary_edges = Vec::with_capacity(b);
        for _ in 0..b {
            let line = next_line()?;
            let mut it = line.split_whitespace();
            boundary_edges.push(BoundaryEdge {
                a: parse_field(it.next(), "boundary index")?,
                b: parse_field(it.next(), "boundary index")?,
                loop_tag: parse_field(it.next(), "loop tag")?,
            });
        }
        TriangleMesh::new(nodes, triangles, boundary_edges)
    }
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, what: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    field
        .ok_or_else(|| Error::Parse(format!("missing {what}")))?
        .parse::<T>()
        .map_err(|e| Error::Parse(format!("bad {what}: {e}")))
}
