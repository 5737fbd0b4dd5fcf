//! Single-level η-nets of Euclidean balls and their images under a pair of
//! generators.

use serde::{Deserialize, Serialize};

use super::FinitePointSet;
use crate::error::{DemixError, Result};
use crate::gennet::GeneratorNet;
use crate::linalg::{distance, norm};

pub const DEFAULT_NET_CAP: u64 = 1_000_000;

/// Number of times the candidate grid is halved before giving up on the
/// covering bound.
const MAX_REFINEMENTS: usize = 3;

/// Finite `η`-net of the closed ball `B^k(r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonNet {
    pub points: Vec<Vec<f64>>,
    pub dim: usize,
    pub radius: f64,
    pub resolution: f64,
    /// `k · log(1 + 2r/η)`
    pub cardinality_bound: f64,
}

impl EpsilonNet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn log_cardinality(&self) -> f64 {
        (self.points.len() as f64).ln()
    }

    /// Distance from `p` to the nearest net point.
    pub fn distance_to(&self, p: &[f64]) -> f64 {
        self.points
            .iter()
            .map(|q| distance(p, q))
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn covering_log_bound(k: usize, r: f64, eta: f64) -> f64 {
    k as f64 * (1.0 + 2.0 * r / eta).ln()
}

pub fn build_ball_net(k: usize, r: f64, eta: f64) -> Result<EpsilonNet> {
    build_ball_net_with_cap(k, r, eta, DEFAULT_NET_CAP)
}

/// Grid-based `η`-net of `B^k(r)`.
///
/// Cells of side `s = 2η/√k` have half-diagonal `η`. Every cell meeting the
/// ball contributes its center, radially projected onto `B^k(r)`; since the
/// projection is 1-Lipschitz and fixes ball points, each ball point stays
/// within `η` of its own cell's projected center. If the grid overshoots
/// `exp(k·log(1 + 2r/η))` points, a finer candidate grid is thinned
/// greedily instead.
pub fn build_ball_net_with_cap(k: usize, r: f64, eta: f64, cap: u64) -> Result<EpsilonNet> {
    if k == 0 {
        return Err(DemixError::InvalidArgument("net dimension k must be >= 1".into()));
    }
    if !(r > 0.0) || !(eta > 0.0) {
        return Err(DemixError::InvalidArgument(format!(
            "need r > 0 and eta > 0, got r={r}, eta={eta}"
        )));
    }
    let bound = covering_log_bound(k, r, eta);
    let make = |points: Vec<Vec<f64>>| EpsilonNet {
        points,
        dim: k,
        radius: r,
        resolution: eta,
        cardinality_bound: bound,
    };
    if eta >= r {
        return Ok(make(vec![vec![0.0; k]]));
    }

    let grid = projected_grid(k, r, 2.0 * eta / (k as f64).sqrt(), cap)?;
    if (grid.len() as f64).ln() <= bound {
        return Ok(make(grid));
    }

    let mut best = grid.len();
    let mut spacing = 2.0 * eta / (k as f64).sqrt();
    for _ in 0..MAX_REFINEMENTS {
        spacing /= 2.0;
        let cell_radius = spacing * (k as f64).sqrt() / 2.0;
        let candidates = match projected_grid(k, r, spacing, cap) {
            Ok(c) => c,
            Err(DemixError::NetTooLarge { .. }) => break,
            Err(e) => return Err(e),
        };
        let thinned = greedy_thin(&candidates, eta - cell_radius);
        if (thinned.len() as f64).ln() <= bound {
            return Ok(make(thinned));
        }
        best = best.min(thinned.len());
    }
    Err(DemixError::CardinalityBound {
        cardinality: best,
        bound,
    })
}

/// Projected centers of every grid cell of side `s` meeting `B^k(r)`.
fn projected_grid(k: usize, r: f64, s: f64, cap: u64) -> Result<Vec<Vec<f64>>> {
    let per_axis = ((2.0 * r / s).ceil() as usize).max(1);
    let offset = (per_axis as f64 - 1.0) / 2.0;
    let coords: Vec<f64> = (0..per_axis).map(|i| (i as f64 - offset) * s).collect();
    // Squared distance from the origin to the cell along one axis.
    let gaps: Vec<f64> = coords
        .iter()
        .map(|c| (c.abs() - s / 2.0).max(0.0).powi(2))
        .collect();

    let mut out = Vec::new();
    let mut idx = vec![0usize; k];
    let mut partial = vec![0.0f64; k + 1];
    let r2 = r * r;
    let mut depth = 0usize;
    // Iterative depth-first walk over index tuples, pruning on the
    // box-to-origin distance.
    loop {
        if depth == k {
            let mut c: Vec<f64> = idx.iter().map(|&i| coords[i]).collect();
            let n = norm(&c);
            if n > r {
                c.iter_mut().for_each(|v| *v *= r / n);
            }
            out.push(c);
            if out.len() as u64 > cap {
                return Err(DemixError::NetTooLarge {
                    required: estimate_grid_count(k, r, s).max(cap + 1),
                    cap,
                });
            }
            depth -= 1;
            idx[depth] += 1;
            continue;
        }
        if idx[depth] >= per_axis {
            if depth == 0 {
                break;
            }
            idx[depth] = 0;
            depth -= 1;
            idx[depth] += 1;
            continue;
        }
        let next = partial[depth] + gaps[idx[depth]];
        if next <= r2 {
            partial[depth + 1] = next;
            depth += 1;
            if depth < k {
                idx[depth] = 0;
            }
        } else {
            idx[depth] += 1;
        }
    }
    Ok(out)
}

/// Volume estimate of the number of cells meeting the ball.
fn estimate_grid_count(k: usize, r: f64, s: f64) -> u64 {
    let kf = k as f64;
    let reach = r + s * kf.sqrt() / 2.0;
    let log_ball = (kf / 2.0) * std::f64::consts::PI.ln() - ln_gamma(kf / 2.0 + 1.0) + kf * reach.ln();
    let est = (log_ball - kf * s.ln()).exp();
    if est.is_finite() && est < u64::MAX as f64 {
        est.ceil() as u64
    } else {
        u64::MAX
    }
}

/// `ln Γ(x)` for `x = j/2`, `j ≥ 2`, by the half-integer recurrence.
fn ln_gamma(x: f64) -> f64 {
    let mut acc = 0.0;
    let mut y = x;
    while y > 1.0 + 1e-9 {
        y -= 1.0;
        acc += y.ln();
    }
    // y is now 1 (Γ = 1) or 0.5 (Γ = √π)
    if (y - 0.5).abs() < 1e-9 {
        acc + 0.5 * std::f64::consts::PI.ln()
    } else {
        acc
    }
}

/// Keeps a candidate only if it is farther than `sep` from all kept ones.
fn greedy_thin(candidates: &[Vec<f64>], sep: f64) -> Vec<Vec<f64>> {
    let mut kept: Vec<Vec<f64>> = Vec::new();
    for c in candidates {
        if kept.iter().all(|q| distance(c, q) > sep) {
            kept.push(c.clone());
        }
    }
    kept
}

/// Image of a product net under `(G, H)`, with its covering radius.
#[derive(Debug, Clone)]
pub struct ImageNet {
    /// Points `(x_a, y_b)` in row-major order over `(a, b)`.
    pub set: FinitePointSet,
    /// Distinct `G(u)` images.
    pub xs: Vec<Vec<f64>>,
    /// Distinct `H(v)` images.
    pub ys: Vec<Vec<f64>>,
    /// `√((L_G η_G)² + (L_H η_H)²)`: every point of `G(B) × H(B′)` lies
    /// within this distance of the set.
    pub delta: f64,
}

fn distinct(points: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut seen = std::collections::HashSet::new();
    points
        .into_iter()
        .filter(|p| seen.insert(p.iter().map(|v| (v + 0.0).to_bits()).collect::<Vec<u64>>()))
        .collect()
}

/// `{(G(u), H(v)) : u ∈ net_u, v ∈ net_v}`. Coinciding images of either
/// factor are kept once, so the set is a product of its two factors.
pub fn image_net(
    net_u: &EpsilonNet,
    net_v: &EpsilonNet,
    g: &GeneratorNet,
    h: &GeneratorNet,
    cap: u64,
) -> Result<ImageNet> {
    let total = net_u.len() as u64 * net_v.len() as u64;
    if total > cap {
        return Err(DemixError::NetTooLarge { required: total, cap });
    }
    let xs = distinct(net_u.points.iter().map(|u| g.forward(u)).collect::<Result<_>>()?);
    let ys = distinct(net_v.points.iter().map(|v| h.forward(v)).collect::<Result<_>>()?);
    let mut points = Vec::with_capacity(xs.len() * ys.len());
    for x in &xs {
        for y in &ys {
            let mut z = x.clone();
            z.extend_from_slice(y);
            points.push(z);
        }
    }
    let dg = g.lipschitz_bound() * net_u.resolution;
    let dh = h.lipschitz_bound() * net_v.resolution;
    Ok(ImageNet {
        set: FinitePointSet::new(points)?,
        xs,
        ys,
        delta: (dg * dg + dh * dh).sqrt(),
    })
}
