//! Incremental Bowyer–Watson Delaunay triangulation.
//!
//! Plain f64 predicates with a cavity guard: after collecting the circumcircle
//! cavity of an insertion point, the cavity is grown until it is star-shaped
//! with respect to the point. Near-cocircular configurations (regular n-gon
//! boundaries, structured grids) then still produce a valid triangulation,
//! merely not a canonical Delaunay one, and the quality loop downstream works
//! from measured angles rather than assumed Delaunay properties.

use super::{orient2d, Point};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
struct Tri {
    v: [usize; 3],
    nbr: [Option<usize>; 3],
    alive: bool,
}

#[derive(Debug, Clone)]
pub struct Triangulation {
    pub points: Vec<Point>,
    tris: Vec<Tri>,
    hint: usize,
}

/// Strictly-inside-circumcircle test for CCW triangle (a, b, c).
fn in_circle(a: Point, b: Point, c: Point, p: Point) -> bool {
    let ax = a[0] - p[0];
    let ay = a[1] - p[1];
    let bx = b[0] - p[0];
    let by = b[1] - p[1];
    let cx = c[0] - p[0];
    let cy = c[1] - p[1];
    let a2 = ax * ax + ay * ay;
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let det = ax * (by * c2 - b2 * cy) - ay * (bx * c2 - b2 * cx) + a2 * (bx * cy - by * cx);
    det > 0.0
}

impl Triangulation {
    /// Start from a bounding square large enough that every real point is
    /// well inside and the outer hull always belongs to the scaffold corners.
    pub fn new(lo: Point, hi: Point) -> Self {
        let cx = 0.5 * (lo[0] + hi[0]);
        let cy = 0.5 * (lo[1] + hi[1]);
        let half = 0.5 * ((hi[0] - lo[0]).max(hi[1] - lo[1])).max(1e-30) * 16.0;
        let points = vec![
            [cx - half, cy - half],
            [cx + half, cy - half],
            [cx + half, cy + half],
            [cx - half, cy + half],
        ];
        let tris = vec![
            Tri {
                v: [0, 1, 2],
                nbr: [None, None, Some(1)],
                alive: true,
            },
            Tri {
                v: [0, 2, 3],
                nbr: [Some(0), None, None],
                alive: true,
            },
        ];
        Triangulation {
            points,
            tris,
            hint: 0,
        }
    }

    pub fn is_alive(&self, t: usize) -> bool {
        self.tris[t].alive
    }

    pub fn vertices(&self, t: usize) -> [usize; 3] {
        self.tris[t].v
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let v = self.tris[t].v;
        [self.points[v[0]], self.points[v[1]], self.points[v[2]]]
    }

    pub fn uses_scaffold(&self, t: usize) -> bool {
        self.tris[t].v.iter().any(|&v| v < 4)
    }

    pub fn alive_triangles(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.tris.len()).filter(|&t| self.tris[t].alive)
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.triangle_points(t);
        [
            (a[0] + b[0] + c[0]) / 3.0,
            (a[1] + b[1] + c[1]) / 3.0,
        ]
    }

    pub fn circumcenter(&self, t: usize) -> Point {
        let [a, b, c] = self.triangle_points(t);
        let d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]));
        let a2 = a[0] * a[0] + a[1] * a[1];
        let b2 = b[0] * b[0] + b[1] * b[1];
        let c2 = c[0] * c[0] + c[1] * c[1];
        let ux = (a2 * (b[1] - c[1]) + b2 * (c[1] - a[1]) + c2 * (a[1] - b[1])) / d;
        let uy = (a2 * (c[0] - b[0]) + b2 * (a[0] - c[0]) + c2 * (b[0] - a[0])) / d;
        [ux, uy]
    }

    /// Walk toward `p`; returns a triangle containing it (possibly on an edge).
    pub fn locate(&self, p: Point) -> Result<usize> {
        let mut t = if self.tris[self.hint].alive {
            self.hint
        } else {
            self.alive_triangles()
                .next()
                .ok_or_else(|| Error::MeshingFailure("triangulation is empty".into()))?
        };
        let cap = 4 * self.tris.len() + 64;
        for _ in 0..cap {
            let v = self.tris[t].v;
            let mut worst: Option<(usize, f64)> = None;
            for k in 0..3 {
                let a = self.points[v[k]];
                let b = self.points[v[(k + 1) % 3]];
                let o = orient2d(a, b, p);
                if o < 0.0 && worst.map_or(true, |(_, w)| o < w) {
                    worst = Some((k, o));
                }
            }
            match worst {
                None => return Ok(t),
                Some((k, _)) => match self.tris[t].nbr[k] {
                    Some(n) if self.tris[n].alive => t = n,
                    _ => {
                        return Err(Error::MeshingFailure(
                            "walk left the triangulation (point outside scaffold box)".into(),
                        ))
                    }
                },
            }
        }
        // Cycled on a degenerate configuration: fall back to a linear scan.
        for t in self.alive_triangles() {
            let [a, b, c] = self.triangle_points(t);
            if orient2d(a, b, p) >= 0.0 && orient2d(b, c, p) >= 0.0 && orient2d(c, a, p) >= 0.0 {
                return Ok(t);
            }
        }
        Err(Error::MeshingFailure("point location failed".into()))
    }

    /// Vertices of the located triangle and its immediate neighbors; used by
    /// callers to reject insertions that would duplicate an existing vertex.
    pub fn nearby_vertices(&self, t: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(12);
        out.extend_from_slice(&self.tris[t].v);
        for k in 0..3 {
            if let Some(n) = self.tris[t].nbr[k] {
                if self.tris[n].alive {
                    out.extend_from_slice(&self.tris[n].v);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    fn edge_slot(&self, t: usize, a: usize, b: usize) -> Option<usize> {
        let v = self.tris[t].v;
        (0..3).find(|&k| {
            (v[k] == a && v[(k + 1) % 3] == b) || (v[k] == b && v[(k + 1) % 3] == a)
        })
    }

    /// Insert `p`, returning the indices of the newly created triangles.
    pub fn insert(&mut self, p: Point) -> Result<Vec<usize>> {
        let start = self.locate(p)?;
        let pi = self.points.len();
        self.points.push(p);

        // Cavity: all alive triangles whose circumcircle strictly contains p,
        // grown from the containing triangle.
        let mut in_cavity = vec![false; self.tris.len()];
        let mut cavity = vec![start];
        in_cavity[start] = true;
        let mut stack = vec![start];
        while let Some(t) = stack.pop() {
            for k in 0..3 {
                if let Some(n) = self.tris[t].nbr[k] {
                    if !in_cavity[n] && self.tris[n].alive {
                        let [a, b, c] = self.triangle_points(n);
                        if in_circle(a, b, c, p) {
                            in_cavity[n] = true;
                            cavity.push(n);
                            stack.push(n);
                        }
                    }
                }
            }
        }

        // Grow until the cavity boundary is star-shaped around p. An edge that
        // fails the orientation test means p lies on or beyond it; absorbing
        // the triangle across keeps the retriangulation valid.
        let mut boundary: Vec<(usize, usize, Option<usize>)>;
        let mut guard = 0;
        loop {
            boundary = Vec::new();
            let mut expand: Option<usize> = None;
            'outer: for &t in &cavity {
                let v = self.tris[t].v;
                for k in 0..3 {
                    let n = self.tris[t].nbr[k];
                    let n_in = n.map_or(false, |n| in_cavity[n]);
                    if !n_in {
                        let a = v[k];
                        let b = v[(k + 1) % 3];
                        if orient2d(self.points[a], self.points[b], p) <= 0.0 {
                            match n {
                                Some(n) if self.tris[n].alive => {
                                    expand = Some(n);
                                    break 'outer;
                                }
                                _ => {
                                    return Err(Error::MeshingFailure(
                                        "insertion point on scaffold hull".into(),
                                    ))
                                }
                            }
                        }
                        boundary.push((a, b, n));
                    }
                }
            }
            match expand {
                None => break,
                Some(n) => {
                    in_cavity[n] = true;
                    cavity.push(n);
                    guard += 1;
                    if guard > self.tris.len() {
                        return Err(Error::MeshingFailure(
                            "cavity expansion did not terminate".into(),
                        ));
                    }
                }
            }
        }

        // Chain the boundary into a loop around p.
        let mut next_of: std::collections::HashMap<usize, (usize, Option<usize>)> =
            std::collections::HashMap::with_capacity(boundary.len());
        for &(a, b, n) in &boundary {
            if next_of.insert(a, (b, n)).is_some() {
                return Err(Error::MeshingFailure("cavity boundary is not a simple loop".into()));
            }
        }
        if next_of.len() != boundary.len() || boundary.is_empty() {
            return Err(Error::MeshingFailure("cavity boundary is not a simple loop".into()));
        }

        for &t in &cavity {
            self.tris[t].alive = false;
        }

        // Fan triangles (a, b, p) in loop order.
        let first = boundary[0].0;
        let mut order = Vec::with_capacity(boundary.len());
        let mut a = first;
        loop {
            let &(b, n) = next_of
                .get(&a)
                .ok_or_else(|| Error::MeshingFailure("cavity boundary loop broken".into()))?;
            order.push((a, b, n));
            a = b;
            if a == first {
                break;
            }
            if order.len() > boundary.len() {
                return Err(Error::MeshingFailure("cavity boundary loop broken".into()));
            }
        }
        if order.len() != boundary.len() {
            return Err(Error::MeshingFailure("cavity boundary has multiple loops".into()));
        }

        let base = self.tris.len();
        let count = order.len();
        let mut created = Vec::with_capacity(count);
        for (i, &(a, b, ext)) in order.iter().enumerate() {
            let t_new = base + i;
            let prev = base + (i + count - 1) % count;
            let next = base + (i + 1) % count;
            self.tris.push(Tri {
                v: [a, b, pi],
                nbr: [ext, Some(next), Some(prev)],
                alive: true,
            });
            if let Some(e) = ext {
                if let Some(k) = self.edge_slot(e, a, b) {
                    self.tris[e].nbr[k] = Some(t_new);
                }
            }
            created.push(t_new);
        }
        self.hint = base;
        Ok(created)
    }

    /// Undirected edge set over alive triangles with non-scaffold vertices.
    pub fn collect_edges(&self) -> std::collections::HashSet<(usize, usize)> {
        let mut edges = std::collections::HashSet::new();
        for t in self.alive_triangles() {
            let v = self.tris[t].v;
            for k in 0..3 {
                let a = v[k];
                let b = v[(k + 1) % 3];
                if a >= 4 && b >= 4 {
                    edges.insert((a.min(b), a.max(b)));
                }
            }
        }
        edges
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn total_real_area(dt: &Triangulation, keep: impl Fn(Point) -> bool) -> f64 {
        dt.alive_triangles()
            .filter(|&t| !dt.uses_scaffold(t))
            .filter(|&t| keep(dt.centroid(t)))
            .map(|t| {
                let [a, b, c] = dt.triangle_points(t);
                0.5 * orient2d(a, b, c)
            })
            .sum()
    }

    #[test]
    fn square_grid_insertion() {
        let mut dt = Triangulation::new([0.0, 0.0], [1.0, 1.0]);
        let n = 5;
        for i in 0..=n {
            for j in 0..=n {
                dt.insert([i as f64 / n as f64, j as f64 / n as f64]).unwrap();
            }
        }
        // All triangles among real points positively oriented.
        for t in dt.alive_triangles() {
            let [a, b, c] = dt.triangle_points(t);
            assert!(orient2d(a, b, c) > 0.0);
        }
        let area = total_real_area(&dt, |_| true);
        assert!((area - 1.0).abs() < 1e-12, "area {area}");
    }

    #[test]
    fn cocircular_ring_insertion() {
        // All points exactly on a circle: the degenerate case for incircle.
        let mut dt = Triangulation::new([-1.0, -1.0], [1.0, 1.0]);
        let n = 64;
        for i in 0..n {
            let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            dt.insert([th.cos(), th.sin()]).unwrap();
        }
        let area = total_real_area(&dt, |_| true);
        let exact = 0.5 * n as f64 * (2.0 * std::f64::consts::PI / n as f64).sin();
        assert!((area - exact).abs() < 1e-10, "area {area} vs {exact}");
    }

    #[test]
    fn point_on_existing_edge() {
        let mut dt = Triangulation::new([0.0, 0.0], [1.0, 1.0]);
        dt.insert([0.0, 0.0]).unwrap();
        dt.insert([1.0, 0.0]).unwrap();
        dt.insert([1.0, 1.0]).unwrap();
        dt.insert([0.0, 1.0]).unwrap();
        // Midpoint of the square edge (0,0)-(1,0).
        dt.insert([0.5, 0.0]).unwrap();
        let area = total_real_area(&dt, |_| true);
        assert!((area - 1.0).abs() < 1e-12);
    }
}
