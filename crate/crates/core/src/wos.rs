//! Walk-on-spheres Monte Carlo estimator for the Dirichlet torsion function.
//!
//! Each walk jumps to a uniform point on the largest boundary-free circle
//! around the current position and accumulates `r²/(2m)` per jump — the mean
//! exit time of the driving diffusion from that ball — until it reaches an
//! `eps_shell` neighbourhood of the boundary. The estimator shares no
//! discretization machinery with the finite-element path, which is the point:
//! it cross-validates the solver through the probabilistic representation of
//! the torsion function as a mean exit time.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Point, PolygonalDomain, TriangleMesh};

/// Hard cap on jumps per walk; capped walks are excluded and counted.
pub const STEP_CAP: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WosEstimate {
    pub point: Point,
    pub mean: f64,
    pub standard_error: f64,
    /// Walks contributing to the estimate (requested minus capped).
    pub n_walks: usize,
    /// Walks that hit the step cap and were excluded.
    pub capped_walks: usize,
    pub eps_shell: f64,
}

/// Exact Euclidean distance from `x` to the nearest boundary segment.
/// Nonpositive values mean `x` is outside or on the boundary; a walk
/// receiving such a value terminates immediately.
pub fn distance_to_boundary(domain: &PolygonalDomain, x: Point) -> f64 {
    domain.signed_boundary_distance(x)
}

fn single_walk(domain: &PolygonalDomain, start: Point, eps: f64, rng: &mut ChaCha8Rng) -> Option<f64> {
    let m = 2.0; // planar domains
    let mut x = start;
    let mut acc = 0.0;
    for _ in 0..STEP_CAP {
        let r = distance_to_boundary(domain, x);
        if r <= eps {
            return Some(acc);
        }
        acc += r * r / (2.0 * m);
        let theta: f64 = rng.random::<f64>() * 2.0 * std::f64::consts::PI;
        x = [x[0] + r * theta.cos(), x[1] + r * theta.sin()];
    }
    None
}

/// Estimate the Dirichlet torsion function `u(x)` (mean exit time) at `x`.
///
/// Deterministic for a fixed seed: walk `i` draws from its own counter-mode
/// stream, so the merged estimate does not depend on scheduling.
pub fn wos_exit_time(
    domain: &PolygonalDomain,
    x: Point,
    n_walks: usize,
    eps_shell: f64,
    seed: u64,
) -> Result<WosEstimate> {
    if n_walks == 0 {
        return Err(Error::invalid("wos needs n_walks ≥ 1"));
    }
    if eps_shell <= 0.0 {
        return Err(Error::invalid("wos needs eps_shell > 0"));
    }
    if distance_to_boundary(domain, x) <= eps_shell {
        return Err(Error::invalid(format!(
            "start point ({}, {}) is not strictly interior",
            x[0], x[1]
        )));
    }

    let samples: Vec<Option<f64>> = (0..n_walks)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64 + 1);
            single_walk(domain, x, eps_shell, &mut rng)
        })
        .collect();

    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut used = 0usize;
    let mut capped = 0usize;
    for s in &samples {
        match s {
            Some(v) => {
                sum += v;
                sum_sq += v * v;
                used += 1;
            }
            None => capped += 1,
        }
    }
    if used == 0 {
        return Err(Error::NoConvergence {
            context: "wos (all walks hit the step cap)".into(),
            iterations: STEP_CAP,
            residual: f64::NAN,
        });
    }
    let mean = sum / used as f64;
    let variance = if used > 1 {
        (sum_sq - sum * sum / used as f64).max(0.0) / (used as f64 - 1.0)
    } else {
        0.0
    };
    Ok(WosEstimate {
        point: x,
        mean,
        standard_error: (variance / used as f64).sqrt(),
        n_walks: used,
        capped_walks: capped,
        eps_shell,
    })
}

/// Deterministic well-separated interior probe points for FEM–WoS
/// comparison: mesh nodes with good boundary clearance, chosen by greedy
/// farthest-point selection starting from the deepest node.
pub fn probe_points(domain: &PolygonalDomain, mesh: &TriangleMesh, count: usize) -> Vec<Point> {
    let diam = domain.diameter();
    let mut candidates: Vec<(Point, f64)> = mesh
        .nodes()
        .iter()
        .map(|&n| (n, distance_to_boundary(domain, n)))
        .filter(|&(_, d)| d >= 0.04 * diam)
        .collect();
    if candidates.is_empty() {
        return Vec::new();
    }
    candidates.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    let mut chosen: Vec<Point> = vec![candidates[0].0];
    while chosen.len() < count {
        let mut best: Option<(Point, f64)> = None;
        for &(c, _) in &candidates {
            let sep = chosen
                .iter()
                .map(|&p| crate::geometry::dist(p, c))
                .fold(f64::INFINITY, f64::min);
            if best.map_or(true, |(_, s)| sep > s) {
                best = Some((c, sep));
            }
        }
        match best {
            Some((c, sep)) if sep > 0.0 => chosen.push(c),
            _ => break,
        }
    }
    chosen
}
