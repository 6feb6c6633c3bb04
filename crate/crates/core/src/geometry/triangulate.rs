//! Quality triangulation of polygons with holes.
//!
//! Pipeline: discretize each boundary loop into sub-segments no longer than
//! the target size, build a Delaunay triangulation of the boundary points,
//! split segments until every sub-segment is present as a triangulation edge
//! and no vertex encroaches a sub-segment's diametral circle, then run
//! Ruppert-style refinement: insert circumcenters of triangles that are too
//! large (circumradius > h_target) or too thin (circumradius-to-shortest-edge
//! ratio > √2, i.e. minimum angle below ~20.7°), deferring to a segment split
//! whenever a circumcenter would encroach the boundary.

use super::delaunay::Triangulation;
use super::mesh::{BoundaryEdge, TriangleMesh};
use super::{dist, PolygonalDomain, Point};
use crate::error::{Error, Result};

/// Circumradius over shortest edge; √2 bounds the minimum angle by ~20.7°.
const RATIO_BOUND: f64 = std::f64::consts::SQRT_2;
const MAX_INSERTIONS: usize = 500_000;

#[derive(Debug, Clone, Copy)]
struct Seg {
    a: usize,
    b: usize,
    loop_tag: usize,
    edge_idx: usize,
    t0: f64,
    t1: f64,
}

struct Mesher<'a> {
    poly: &'a PolygonalDomain,
    dt: Triangulation,
    segments: Vec<Seg>,
    inside: Vec<Option<bool>>,
    insertions: usize,
    scale: f64,
}

impl<'a> Mesher<'a> {
    fn inside(&mut self, t: usize) -> bool {
        if t >= self.inside.len() {
            self.inside.resize(t + 1, None);
        }
        if let Some(flag) = self.inside[t] {
            return flag;
        }
        let flag = !self.dt.uses_scaffold(t) && self.poly.contains(self.dt.centroid(t));
        self.inside[t] = Some(flag);
        flag
    }

    fn insert_point(&mut self, p: Point) -> Result<Vec<usize>> {
        self.insertions += 1;
        if self.insertions > MAX_INSERTIONS {
            return Err(Error::MeshingFailure(format!(
                "refinement exceeded {MAX_INSERTIONS} insertions"
            )));
        }
        self.dt.insert(p)
    }

    fn encroaches(&self, p: Point, seg: &Seg) -> bool {
        let a = self.dt.points[seg.a];
        let b = self.dt.points[seg.b];
        let da = [p[0] - a[0], p[1] - a[1]];
        let db = [p[0] - b[0], p[1] - b[1]];
        let len2 = dist(a, b).powi(2);
        da[0] * db[0] + da[1] * db[1] < -1e-14 * len2
    }

    /// Split segment `si` at its midpoint; cascades into splits of any other
    /// segment the midpoint encroaches. Returns new triangle ids.
    fn split_segment(&mut self, si: usize) -> Result<Vec<usize>> {
        let seg = self.segments[si];
        let a = self.dt.points[seg.a];
        let b = self.dt.points[seg.b];
        let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
        let mut created = self.insert_point(mid)?;
        let m = self.dt.points.len() - 1;
        let tm = 0.5 * (seg.t0 + seg.t1);
        self.segments[si] = Seg {
            b: m,
            t1: tm,
            ..seg
        };
        self.segments.push(Seg {
            a: m,
            t0: tm,
            ..seg
        });
        // Midpoint may encroach other segments (never its own children, which
        // it touches on the diametral circle exactly).
        let mut cascade: Vec<usize> = Vec::new();
        for (j, s) in self.segments.iter().enumerate() {
            if s.a != m && s.b != m && self.encroaches(mid, s) {
                cascade.push(j);
            }
        }
        for j in cascade {
            if self.encroaches(mid, &self.segments[j].clone()) {
                created.extend(self.split_segment(j)?);
            }
        }
        Ok(created)
    }

    /// Ensure every sub-segment is an edge of the triangulation.
    fn recover_segments(&mut self) -> Result<()> {
        for _round in 0..48 {
            let edges = self.dt.collect_edges();
            let missing: Vec<usize> = (0..self.segments.len())
                .filter(|&i| {
                    let s = &self.segments[i];
                    !edges.contains(&(s.a.min(s.b), s.a.max(s.b)))
                })
                .collect();
            if missing.is_empty() {
                return Ok(());
            }
            for si in missing {
                self.split_segment(si)?;
            }
        }
        Err(Error::MeshingFailure(
            "boundary segments could not be recovered".into(),
        ))
    }

    /// Split every segment whose diametral circle strictly contains a vertex.
    fn clear_encroached(&mut self) -> Result<()> {
        let mut si = 0;
        while si < self.segments.len() {
            let seg = self.segments[si];
            let encroached = (4..self.dt.points.len())
                .filter(|&p| p != seg.a && p != seg.b)
                .any(|p| self.encroaches(self.dt.points[p], &seg));
            if encroached {
                self.split_segment(si)?;
                // Re-examine the shortened segment before moving on.
            } else {
                si += 1;
            }
        }
        Ok(())
    }

    fn quality_pass(&mut self, h_target: f64) -> Result<()> {
        let mut queue: Vec<usize> = self.dt.alive_triangles().collect();
        while let Some(t) = queue.pop() {
            if !self.dt.is_alive(t) || !self.inside(t) {
                continue;
            }
            let [a, b, c] = self.dt.triangle_points(t);
            let l_min = dist(a, b).min(dist(b, c)).min(dist(c, a));
            let cc = self.dt.circumcenter(t);
            let r = dist(cc, a);
            let bad = r / l_min > RATIO_BOUND || r > h_target;
            if !bad {
                continue;
            }

            let encroached: Vec<usize> = (0..self.segments.len())
                .filter(|&i| self.encroaches(cc, &self.segments[i]))
                .collect();
            let created = if !encroached.is_empty() {
                let mut created = Vec::new();
                for si in encroached {
                    if self.encroaches(cc, &self.segments[si].clone()) {
                        created.extend(self.split_segment(si)?);
                    }
                }
                queue.push(t);
                created
            } else if !self.poly.contains(cc) {
                // Circumcenter escaped the domain; refine the nearest piece of
                // boundary instead.
                let nearest = (0..self.segments.len())
                    .min_by(|&i, &j| {
                        let di = self.segment_distance(cc, i);
                        let dj = self.segment_distance(cc, j);
                        di.partial_cmp(&dj).unwrap()
                    })
                    .ok_or_else(|| Error::MeshingFailure("no boundary segments".into()))?;
                queue.push(t);
                self.split_segment(nearest)?
            } else {
                // Skip insertions that would (numerically) duplicate a vertex.
                let loc = self.dt.locate(cc)?;
                let too_close = self
                    .dt
                    .nearby_vertices(loc)
                    .iter()
                    .any(|&v| dist(self.dt.points[v], cc) < 1e-9 * self.scale);
                if too_close {
                    continue;
                }
                self.insert_point(cc)?
            };
            for nt in created {
                if self.dt.is_alive(nt) && self.inside(nt) {
                    queue.push(nt);
                }
            }
        }
        Ok(())
    }

    fn segment_distance(&self, p: Point, si: usize) -> f64 {
        let s = &self.segments[si];
        super::point_segment_distance(p, self.dt.points[s.a], self.dt.points[s.b])
    }
}

pub(super) fn triangulate(poly: &PolygonalDomain, h_target: f64) -> Result<TriangleMesh> {
    if !(h_target > 0.0) {
        return Err(Error::invalid("h_target must be positive"));
    }
    let (lo, hi) = poly.bounding_box();
    let mut mesher = Mesher {
        poly,
        dt: Triangulation::new(lo, hi),
        segments: Vec::new(),
        inside: Vec::new(),
        insertions: 0,
        scale: poly.diameter(),
    };

    // Boundary discretization: corners plus evenly spaced points per edge.
    let mut edge_idx = 0usize;
    for (tag, lp) in poly.loops().enumerate() {
        let n = lp.len();
        let mut loop_ids: Vec<usize> = Vec::with_capacity(n);
        for &corner in lp {
            mesher.dt.insert(corner)?;
            loop_ids.push(mesher.dt.points.len() - 1);
        }
        for e in 0..n {
            let pa = lp[e];
            let pb = lp[(e + 1) % n];
            let pieces = (dist(pa, pb) / h_target).ceil().max(1.0) as usize;
            let mut prev = loop_ids[e];
            let mut prev_t = 0.0;
            for k in 1..pieces {
                let t = k as f64 / pieces as f64;
                let p = [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])];
                mesher.dt.insert(p)?;
                let id = mesher.dt.points.len() - 1;
                mesher.segments.push(Seg {
                    a: prev,
                    b: id,
                    loop_tag: tag,
                    edge_idx,
                    t0: prev_t,
                    t1: t,
                });
                prev = id;
                prev_t = t;
            }
            mesher.segments.push(Seg {
                a: prev,
                b: loop_ids[(e + 1) % n],
                loop_tag: tag,
                edge_idx,
                t0: prev_t,
                t1: 1.0,
            });
            edge_idx += 1;
        }
    }

    mesher.recover_segments()?;
    mesher.clear_encroached()?;
    mesher.recover_segments()?;
    mesher.quality_pass(h_target)?;
    mesher.recover_segments()?;

    // Extract inside triangles and compact node ids.
    let inside_tris: Vec<usize> = mesher
        .dt
        .alive_triangles()
        .filter(|&t| !mesher.dt.uses_scaffold(t))
        .filter(|&t| mesher.poly.contains(mesher.dt.centroid(t)))
        .collect();
    let mut node_map = vec![usize::MAX; mesher.dt.points.len()];
    let mut nodes: Vec<Point> = Vec::new();
    let mut triangles = Vec::with_capacity(inside_tris.len());
    for &t in &inside_tris {
        let v = mesher.dt.vertices(t);
        let mut tri = [0usize; 3];
        for (slot, &p) in tri.iter_mut().zip(v.iter()) {
            if node_map[p] == usize::MAX {
                node_map[p] = nodes.len();
                nodes.push(mesher.dt.points[p]);
            }
            *slot = node_map[p];
        }
        triangles.push(tri);
    }

    let mut segs = mesher.segments.clone();
    segs.sort_by(|x, y| {
        (x.loop_tag, x.edge_idx)
            .cmp(&(y.loop_tag, y.edge_idx))
            .then(x.t0.partial_cmp(&y.t0).unwrap())
    });
    let mut boundary_edges = Vec::with_capacity(segs.len());
    for s in &segs {
        if node_map[s.a] == usize::MAX || node_map[s.b] == usize::MAX {
            return Err(Error::MeshingFailure(
                "boundary segment endpoint not used by any interior triangle".into(),
            ));
        }
        boundary_edges.push(BoundaryEdge {
            a: node_map[s.a],
            b: node_map[s.b],
            loop_tag: s.loop_tag,
        });
    }

    let mesh = TriangleMesh::new(nodes, triangles, boundary_edges)?;

    let (mesh_area, mesh_perim) = mesh.measures();
    let (area, perim) = poly.measures();
    if (mesh_area - area).abs() > 1e-12 * area {
        return Err(Error::MeshingFailure(format!(
            "triangle areas sum to {mesh_area}, polygon area is {area}"
        )));
    }
    if (mesh_perim - perim).abs() > 1e-12 * perim {
        return Err(Error::MeshingFailure(format!(
            "boundary length {mesh_perim} differs from polygon perimeter {perim}"
        )));
    }
    let min_angle = mesh.min_angle_degrees();
    if min_angle < 20.0 {
        return Err(Error::MeshingFailure(format!(
            "minimum angle {min_angle:.2}° below 20°"
        )));
    }
    if mesh.h_max() > 2.0 * h_target && mesh.h_max() > poly.diameter() {
        return Err(Error::MeshingFailure(format!(
            "h_max {} exceeds 2·h_target {}",
            mesh.h_max(),
            2.0 * h_target
        )));
    }
    Ok(mesh)
}
