//! Computational domains: polygons with holes and m-dimensional radial
//! domains, plus the canonical verification corpus.
//!
//! All measures reported here are exact measures of the *discrete* geometry
//! (shoelace areas, polygonal perimeters, closed-form ball volumes), so every
//! bound downstream is checked against the object actually meshed.

mod delaunay;
mod mesh;
mod triangulate;

pub use mesh::{BoundaryEdge, TriangleMesh};

use crate::error::{Error, Result};
use crate::special;

pub type Point = [f64; 2];

pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

pub(crate) fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    let d = sub(a, b);
    d[0].hypot(d[1])
}

/// Twice the signed area of triangle (a, b, c); positive when CCW.
pub(crate) fn orient2d(a: Point, b: Point, c: Point) -> f64 {
    cross(sub(b, a), sub(c, a))
}

/// Distance from `p` to the closed segment [a, b].
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = sub(b, a);
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = ((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2;
    let t = t.clamp(0.0, 1.0);
    dist(p, [a[0] + t * ab[0], a[1] + t * ab[1]])
}

fn signed_area(loop_pts: &[Point]) -> f64 {
    let n = loop_pts.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = loop_pts[i];
        let b = loop_pts[(i + 1) % n];
        acc += cross(a, b);
    }
    0.5 * acc
}

fn loop_length(loop_pts: &[Point]) -> f64 {
    let n = loop_pts.len();
    (0..n).map(|i| dist(loop_pts[i], loop_pts[(i + 1) % n])).sum()
}

/// Proper segment intersection test (shared endpoints do not count).
fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient2d(c, d, a);
    let d2 = orient2d(c, d, b);
    let d3 = orient2d(a, b, c);
    let d4 = orient2d(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    false
}

fn is_simple(loop_pts: &[Point]) -> bool {
    let n = loop_pts.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let a = loop_pts[i];
            let b = loop_pts[(i + 1) % n];
            let c = loop_pts[j];
            let d = loop_pts[(j + 1) % n];
            // Adjacent edges share an endpoint; skip them.
            if (i + 1) % n == j || (j + 1) % n == i || i == j {
                continue;
            }
            if segments_cross(a, b, c, d) {
                return false;
            }
        }
    }
    // Repeated vertices also break simplicity.
    for i in 0..n {
        for j in (i + 1)..n {
            if dist(loop_pts[i], loop_pts[j]) == 0.0 {
                return false;
            }
        }
    }
    true
}

fn point_in_loop(loop_pts: &[Point], p: Point) -> bool {
    // Crossing-number test; points on the boundary are classified arbitrarily.
    let n = loop_pts.len();
    let mut inside = false;
    for i in 0..n {
        let a = loop_pts[i];
        let b = loop_pts[(i + 1) % n];
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x_cross = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

/// A planar polygon with optional holes. The outer loop is counterclockwise,
/// holes are clockwise; all loops are simple and pairwise disjoint.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonalDomain {
    name: String,
    outer_loop: Vec<Point>,
    hole_loops: Vec<Vec<Point>>,
}

impl PolygonalDomain {
    pub fn new(
        name: impl Into<String>,
        outer_loop: Vec<Point>,
        hole_loops: Vec<Vec<Point>>,
    ) -> Result<Self> {
        let name = name.into();
        if !is_simple(&outer_loop) {
            return Err(Error::invalid(format!("{name}: outer loop is not a simple polygon")));
        }
        if signed_area(&outer_loop) <= 0.0 {
            return Err(Error::invalid(format!(
                "{name}: outer loop must be counterclockwise with positive area"
            )));
        }
        for (h, hole) in hole_loops.iter().enumerate() {
            if !is_simple(hole) {
                return Err(Error::invalid(format!("{name}: hole {h} is not simple")));
            }
            if signed_area(hole) >= 0.0 {
                return Err(Error::invalid(format!("{name}: hole {h} must be clockwise")));
            }
            for &p in hole {
                if !point_in_loop(&outer_loop, p) {
                    return Err(Error::invalid(format!("{name}: hole {h} is not inside the outer loop")));
                }
            }
            for (e, &p) in hole.iter().enumerate() {
                let q = hole[(e + 1) % hole.len()];
                for i in 0..outer_loop.len() {
                    let a = outer_loop[i];
                    let b = outer_loop[(i + 1) % outer_loop.len()];
                    if segments_cross(a, b, p, q) {
                        return Err(Error::invalid(format!("{name}: hole {h} crosses the outer loop")));
                    }
                }
            }
        }
        for i in 0..hole_loops.len() {
            for j in (i + 1)..hole_loops.len() {
                for &p in &hole_loops[i] {
                    if point_in_loop(&hole_loops[j], p) {
                        return Err(Error::invalid(format!("{name}: holes {i} and {j} overlap")));
                    }
                }
                for (e, &p) in hole_loops[i].iter().enumerate() {
                    let q = hole_loops[i][(e + 1) % hole_loops[i].len()];
                    for (f, &r) in hole_loops[j].iter().enumerate() {
                        let s = hole_loops[j][(f + 1) % hole_loops[j].len()];
                        if segments_cross(p, q, r, s) {
                            return Err(Error::invalid(format!("{name}: holes {i} and {j} cross")));
                        }
                    }
                }
            }
        }
        let domain = PolygonalDomain {
            name,
            outer_loop,
            hole_loops,
        };
        if domain.area() <= 0.0 {
            return Err(Error::invalid(format!("{}: nonpositive area", domain.name)));
        }
        Ok(domain)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn outer_loop(&self) -> &[Point] {
        &self.outer_loop
    }

    pub fn hole_loops(&self) -> &[Vec<Point>] {
        &self.hole_loops
    }

    /// All loops: outer first (tag 0), then holes (tags 1, 2, …).
    pub fn loops(&self) -> impl Iterator<Item = &[Point]> {
        std::iter::once(self.outer_loop.as_slice()).chain(self.hole_loops.iter().map(|h| h.as_slice()))
    }

    /// Exact shoelace area (outer minus holes).
    pub fn area(&self) -> f64 {
        signed_area(&self.outer_loop) + self.hole_loops.iter().map(|h| signed_area(h)).sum::<f64>()
    }

    /// Total polygonal boundary length over all loops.
    pub fn perimeter(&self) -> f64 {
        self.loops().map(loop_length).sum()
    }

    pub fn measures(&self) -> (f64, f64) {
        (self.area(), self.perimeter())
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in self.loops().flatten() {
            lo[0] = lo[0].min(p[0]);
            lo[1] = lo[1].min(p[1]);
            hi[0] = hi[0].max(p[0]);
            hi[1] = hi[1].max(p[1]);
        }
        (lo, hi)
    }

    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        dist(lo, hi)
    }

    /// Strict interior test (points on the boundary are unreliable here and
    /// should be treated as not interior by callers that care).
    pub fn contains(&self, p: Point) -> bool {
        if !point_in_loop(&self.outer_loop, p) {
            return false;
        }
        !self.hole_loops.iter().any(|h| point_in_loop(h, p))
    }

    /// Signed distance to the boundary: positive inside, negative outside,
    /// measured to the nearest segment of any loop.
    pub fn signed_boundary_distance(&self, p: Point) -> f64 {
        let mut d = f64::INFINITY;
        for lp in self.loops() {
            let n = lp.len();
            for i in 0..n {
                d = d.min(point_segment_distance(p, lp[i], lp[(i + 1) % n]));
            }
        }
        if self.contains(p) {
            d
        } else {
            -d
        }
    }

    /// Conforming quality triangulation with `h_max ≤ 2·h_target` and minimum
    /// angle ≥ 20°. See [`TriangleMesh`] for the invariants it guarantees.
    pub fn triangulate(&self, h_target: f64) -> Result<TriangleMesh> {
        triangulate::triangulate(self, h_target)
    }
}

/// Ball or spherical-shell domain in dimension `m ≥ 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialDomain {
    inner_radius: f64,
    outer_radius: f64,
    dimension: u32,
}

impl RadialDomain {
    pub fn ball(dimension: u32, radius: f64) -> Result<Self> {
        Self::new(dimension, 0.0, radius)
    }

    pub fn annulus(dimension: u32, inner_radius: f64, outer_radius: f64) -> Result<Self> {
        if inner_radius <= 0.0 {
            return Err(Error::invalid("annulus needs inner_radius > 0"));
        }
        Self::new(dimension, inner_radius, outer_radius)
    }

    fn new(dimension: u32, inner_radius: f64, outer_radius: f64) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::invalid("radial domains need dimension ≥ 2"));
        }
        if !(0.0..outer_radius).contains(&inner_radius) || outer_radius <= 0.0 {
            return Err(Error::invalid(format!(
                "radii must satisfy 0 ≤ inner ({inner_radius}) < outer ({outer_radius})"
            )));
        }
        Ok(RadialDomain {
            inner_radius,
            outer_radius,
            dimension,
        })
    }

    pub fn is_ball(&self) -> bool {
        self.inner_radius == 0.0
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner_radius
    }

    pub fn outer_radius(&self) -> f64 {
        self.outer_radius
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    /// Closed-form volume and surface measure: `ω_m R^m` and `m ω_m R^{m−1}`
    /// for balls, the respective differences/sums for shells.
    pub fn measures(&self) -> (f64, f64) {
        let m = self.dimension as f64;
        let omega = special::unit_ball_volume(self.dimension);
        let vol = omega * (self.outer_radius.powf(m) - self.inner_radius.powf(m));
        let mut surf = m * omega * self.outer_radius.powf(m - 1.0);
        if self.inner_radius > 0.0 {
            surf += m * omega * self.inner_radius.powf(m - 1.0);
        }
        (vol, surf)
    }
}

/// Canonical corpus domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CanonicalKind {
    UnitSquare,
    Rectangle,
    DiskPolygon,
    AnnulusPolygon,
    LShape,
}

impl CanonicalKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "unit_square" | "square" => Ok(CanonicalKind::UnitSquare),
            "rectangle" => Ok(CanonicalKind::Rectangle),
            "disk_polygon" | "disk" => Ok(CanonicalKind::DiskPolygon),
            "annulus_polygon" | "annulus" => Ok(CanonicalKind::AnnulusPolygon),
            "l_shape" => Ok(CanonicalKind::LShape),
            other => Err(Error::invalid(format!("unknown domain kind '{other}'"))),
        }
    }
}

fn regular_ngon(radius: f64, n: usize, clockwise: bool) -> Vec<Point> {
    let mut pts: Vec<Point> = (0..n)
        .map(|i| {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            [radius * theta.cos(), radius * theta.sin()]
        })
        .collect();
    if clockwise {
        pts.reverse();
    }
    pts
}

/// Build one of the canonical polygonal domains.
///
/// Parameter conventions: `rectangle` takes `[width, height]`; `disk_polygon`
/// takes `[radius, segments]`; `annulus_polygon` takes
/// `[inner_radius, outer_radius, segments]`; the others take no parameters.
/// Polygonal disks/annuli are regular n-gons inscribed in the given circles,
/// with `segments ≥ 16`.
pub fn make_canonical_domain(kind: CanonicalKind, params: &[f64]) -> Result<PolygonalDomain> {
    match kind {
        CanonicalKind::UnitSquare => {
            if !params.is_empty() {
                return Err(Error::invalid("unit_square takes no parameters"));
            }
            PolygonalDomain::new(
                "unit_square",
                vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
                vec![],
            )
        }
        CanonicalKind::Rectangle => {
            let [w, h] = match params {
                [w, h] => [*w, *h],
                _ => return Err(Error::invalid("rectangle needs params [width, height]")),
            };
            if w <= 0.0 || h <= 0.0 {
                return Err(Error::invalid("rectangle sides must be positive"));
            }
            PolygonalDomain::new(
                format!("rectangle_{w}x{h}"),
                vec![[0.0, 0.0], [w, 0.0], [w, h], [0.0, h]],
                vec![],
            )
        }
        CanonicalKind::DiskPolygon => {
            let (r, n) = match params {
                [r, n] => (*r, *n),
                _ => return Err(Error::invalid("disk_polygon needs params [radius, segments]")),
            };
            let n = check_segments(n)?;
            if r <= 0.0 {
                return Err(Error::invalid("disk_polygon radius must be positive"));
            }
            PolygonalDomain::new(format!("disk_polygon_r{r}_n{n}"), regular_ngon(r, n, false), vec![])
        }
        CanonicalKind::AnnulusPolygon => {
            let (ri, ro, n) = match params {
                [ri, ro, n] => (*ri, *ro, *n),
                _ => {
                    return Err(Error::invalid(
                        "annulus_polygon needs params [inner_radius, outer_radius, segments]",
                    ))
                }
            };
            let n = check_segments(n)?;
            if ri <= 0.0 || ri >= ro {
                return Err(Error::invalid("annulus_polygon needs 0 < inner < outer radius"));
            }
            PolygonalDomain::new(
                format!("annulus_polygon_r{ri}_{ro}_n{n}"),
                regular_ngon(ro, n, false),
                vec![regular_ngon(ri, n, true)],
            )
        }
        CanonicalKind::LShape => {
            if !params.is_empty() {
                return Err(Error::invalid("l_shape takes no parameters"));
            }
            // Unit square minus its upper-right quarter.
            PolygonalDomain::new(
                "l_shape",
                vec![
                    [0.0, 0.0],
                    [1.0, 0.0],
                    [1.0, 0.5],
                    [0.5, 0.5],
                    [0.5, 1.0],
                    [0.0, 1.0],
                ],
                vec![],
            )
        }
    }
}

fn check_segments(n: f64) -> Result<usize> {
    if n.fract() != 0.0 || n < 16.0 {
        return Err(Error::invalid(format!(
            "segment count must be an integer ≥ 16, got {n}"
        )));
    }
    Ok(n as usize)
}
