use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::FinitePointSet;
use crate::ensemble::RngSeed;
use crate::error::{DemixError, Result};
use crate::linalg::{distance, dot, squared_distance};
use crate::mixing::MixingOperator;

pub const DEFAULT_PAIR_CAP: u64 = 10_000_000;

/// Outcome of checking `‖B(z₁−z₂)‖/√m ≥ γ‖z₁−z₂‖ − δ` over pairs of a set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrecReport {
    pub gamma: f64,
    pub delta: f64,
    /// `min [‖B(z₁−z₂)‖/√m − γ‖z₁−z₂‖ + δ]`; equals `delta` when no pair exists.
    pub min_margin: f64,
    pub argmin_pair: Option<(usize, usize)>,
    pub pair_count: u64,
    /// Seed of the pair sample, when pairs were subsampled.
    pub subsample_seed: Option<RngSeed>,
}

impl SrecReport {
    pub fn holds(&self) -> bool {
        self.min_margin >= 0.0
    }
}

fn validate(op: &MixingOperator, set: &FinitePointSet, gamma: f64, delta: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(DemixError::InvalidArgument(format!("gamma must lie in (0, 1], got {gamma}")));
    }
    if !(delta >= 0.0) {
        return Err(DemixError::InvalidArgument(format!("delta must be >= 0, got {delta}")));
    }
    if set.dim() != op.n() + op.m() {
        return Err(DemixError::Dimension(format!(
            "points have dimension {}, operator acts on {}",
            set.dim(),
            op.n() + op.m()
        )));
    }
    Ok(())
}

/// `B z / √m` for every point; B is linear so pair differences reuse these.
fn normalized_images(op: &MixingOperator, set: &FinitePointSet) -> Result<Vec<Vec<f64>>> {
    let inv = 1.0 / (op.m() as f64).sqrt();
    set.points()
        .par_iter()
        .map(|z| {
            let (x, y) = z.split_at(op.n());
            let mut bz = op.apply(x, y)?;
            bz.iter_mut().for_each(|v| *v *= inv);
            Ok(bz)
        })
        .collect()
}

#[inline]
fn margin(images: &[Vec<f64>], points: &[Vec<f64>], i: usize, j: usize, gamma: f64, delta: f64) -> f64 {
    distance(&images[i], &images[j]) - gamma * distance(&points[i], &points[j]) + delta
}

fn fold_min(a: (f64, Option<(usize, usize)>), b: (f64, Option<(usize, usize)>)) -> (f64, Option<(usize, usize)>) {
    // Lower margin wins; ties go to the lexicographically first pair.
    match (a.1, b.1) {
        (_, None) => a,
        (None, _) => b,
        (Some(pa), Some(pb)) => {
            if b.0 < a.0 || (b.0 == a.0 && pb < pa) {
                b
            } else {
                a
            }
        }
    }
}

pub fn srec_check(op: &MixingOperator, set: &FinitePointSet, gamma: f64, delta: f64) -> Result<SrecReport> {
    srec_check_with_cap(op, set, gamma, delta, DEFAULT_PAIR_CAP)
}

/// Exhaustive check over all `i < j` index pairs (duplicates included).
pub fn srec_check_with_cap(op: &MixingOperator, set: &FinitePointSet, gamma: f64, delta: f64, cap: u64) -> Result<SrecReport> {
    validate(op, set, gamma, delta)?;
    let n = set.len() as u64;
    let pairs = n * n.saturating_sub(1) / 2;
    if pairs > cap {
        return Err(DemixError::PairCapExceeded { pairs, cap });
    }
    let images = normalized_images(op, set)?;
    let points = set.points();
    let (min, arg) = (0..set.len())
        .into_par_iter()
        .map(|i| {
            let mut best = (f64::INFINITY, None);
            for j in i + 1..set.len() {
                let mg = margin(&images, points, i, j, gamma, delta);
                if mg < best.0 {
                    best = (mg, Some((i, j)));
                }
            }
            best
        })
        .reduce(|| (f64::INFINITY, None), fold_min);
    Ok(SrecReport {
        gamma,
        delta,
        min_margin: if arg.is_some() { min } else { delta },
        argmin_pair: arg,
        pair_count: pairs,
        subsample_seed: None,
    })
}

fn squared_distance_table(v: &[Vec<f64>]) -> Vec<f64> {
    let n = v.len();
    let mut t = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = squared_distance(&v[i], &v[j]);
            t[i * n + j] = d;
            t[j * n + i] = d;
        }
    }
    t
}

/// Exhaustive check over the product set `{(x_a, y_b)}`, indexed row-major
/// over `(a, b)` like the set built by `image_net`.
///
/// With `p_a = A x_a/√m` and `q_b = y_b` (both scaled as the operator does),
/// `‖B(z − z′)‖²/m = ‖p_a − p_a′‖² + ‖q_b − q_b′‖² + 2(C_ab − C_ab′ − C_a′b + C_a′b′)`
/// where `C_ab = ⟨p_a, q_b⟩`, so every pair costs O(1) after building
/// `|X|² + |Y|² + |X||Y|` table entries. No pair cap applies.
pub fn srec_check_product(
    op: &MixingOperator,
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
    gamma: f64,
    delta: f64,
) -> Result<SrecReport> {
    if xs.is_empty() || ys.is_empty() {
        return Err(DemixError::InvalidArgument("product factors must be non-empty".into()));
    }
    if let Some(x) = xs.iter().find(|x| x.len() != op.n()) {
        return Err(DemixError::Dimension(format!("x factor has dimension {}, expected {}", x.len(), op.n())));
    }
    if let Some(y) = ys.iter().find(|y| y.len() != op.m()) {
        return Err(DemixError::Dimension(format!("y factor has dimension {}, expected {}", y.len(), op.m())));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(DemixError::InvalidArgument(format!("gamma must lie in (0, 1], got {gamma}")));
    }
    if !(delta >= 0.0) {
        return Err(DemixError::InvalidArgument(format!("delta must be >= 0, got {delta}")));
    }
    let inv = 1.0 / (op.m() as f64).sqrt();
    let (sx, sy) = (op.x_scale(), op.scale());
    let p: Vec<Vec<f64>> = xs
        .par_iter()
        .map(|x| op.matrix().matvec_unchecked(x).into_iter().map(|v| v * sx * inv).collect())
        .collect();
    let q: Vec<Vec<f64>> = ys.iter().map(|y| y.iter().map(|v| v * sy * inv).collect()).collect();
    let (nx, ny) = (xs.len(), ys.len());
    let pd = squared_distance_table(&p);
    let qd = squared_distance_table(&q);
    let xd = squared_distance_table(xs);
    let yd = squared_distance_table(ys);
    let c: Vec<f64> = (0..nx * ny).map(|i| dot(&p[i / ny], &q[i % ny])).collect();

    let total = nx * ny;
    let (min, arg) = (0..total)
        .into_par_iter()
        .map(|i| {
            let (a, b) = (i / ny, i % ny);
            let mut best = (f64::INFINITY, None);
            for j in i + 1..total {
                let (a2, b2) = (j / ny, j % ny);
                let cross = c[a * ny + b] - c[a * ny + b2] - c[a2 * ny + b] + c[a2 * ny + b2];
                let image_sq = pd[a * nx + a2] + qd[b * ny + b2] + 2.0 * cross;
                let point_sq = xd[a * nx + a2] + yd[b * ny + b2];
                let mg = image_sq.max(0.0).sqrt() - gamma * point_sq.sqrt() + delta;
                if mg < best.0 {
                    best = (mg, Some((i, j)));
                }
            }
            best
        })
        .reduce(|| (f64::INFINITY, None), fold_min);
    let n = total as u64;
    Ok(SrecReport {
        gamma,
        delta,
        min_margin: if arg.is_some() { min } else { delta },
        argmin_pair: arg,
        pair_count: n * (n - 1) / 2,
        subsample_seed: None,
    })
}

/// Checks `pairs` uniformly sampled index pairs `i ≠ j`.
pub fn srec_check_subsampled(
    op: &MixingOperator,
    set: &FinitePointSet,
    gamma: f64,
    delta: f64,
    pairs: u64,
    seed: RngSeed,
) -> Result<SrecReport> {
    validate(op, set, gamma, delta)?;
    let images = normalized_images(op, set)?;
    let points = set.points();
    let len = set.len();
    if len < 2 || pairs == 0 {
        return Ok(SrecReport {
            gamma,
            delta,
            min_margin: delta,
            argmin_pair: None,
            pair_count: 0,
            subsample_seed: Some(seed),
        });
    }
    let mut rng = seed.rng();
    let mut best = (f64::INFINITY, None);
    for _ in 0..pairs {
        let i = rng.random_range(0..len);
        let mut j = rng.random_range(0..len - 1);
        if j >= i {
            j += 1;
        }
        let (a, b) = (i.min(j), i.max(j));
        best = fold_min(best, (margin(&images, points, a, b, gamma, delta), Some((a, b))));
    }
    Ok(SrecReport {
        gamma,
        delta,
        min_margin: best.0,
        argmin_pair: best.1,
        pair_count: pairs,
        subsample_seed: Some(seed),
    })
}
