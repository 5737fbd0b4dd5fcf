use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::FinitePointSet;
use crate::ensemble::{standard_normal_vec, RngSeed};
use crate::error::{DemixError, Result};
use crate::linalg::dot;

/// Monte-Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = if samples.len() > 1 {
            samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            stderr: (var / n).sqrt(),
        }
    }
}

const CHUNK: usize = 1024;

fn sup_samples(set: &FinitePointSet, samples: usize, seed: RngSeed, absolute: bool) -> Result<Vec<f64>> {
    if samples < 2 {
        return Err(DemixError::InvalidArgument(format!("need at least 2 samples, got {samples}")));
    }
    if set.is_empty() {
        return Err(DemixError::InvalidArgument("point set is empty".into()));
    }
    let dim = set.dim();
    // Fixed-size chunks, one stream each, so results do not depend on the
    // thread count.
    let chunks = samples.div_ceil(CHUNK);
    let out: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = seed.offset(c as u64).rng();
            let len = CHUNK.min(samples - c * CHUNK);
            (0..len)
                .map(|_| {
                    let g = standard_normal_vec(&mut rng, dim);
                    set.points()
                        .iter()
                        .map(|p| {
                            let s = dot(p, &g);
                            if absolute {
                                s.abs()
                            } else {
                                s
                            }
                        })
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .collect()
        })
        .collect();
    Ok(out.into_iter().flatten().collect())
}

/// `w(T) = E sup_{x∈T} <x, g>`
pub fn gaussian_width_mc(set: &FinitePointSet, samples: usize, seed: RngSeed) -> Result<Estimate> {
    Ok(Estimate::from_samples(&sup_samples(set, samples, seed, false)?))
}

/// `γ(T) = E sup_{x∈T} |<x, g>|`
pub fn gaussian_complexity_mc(set: &FinitePointSet, samples: usize, seed: RngSeed) -> Result<Estimate> {
    Ok(Estimate::from_samples(&sup_samples(set, samples, seed, true)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singleton_width_and_complexity() {
        let set = FinitePointSet::new(vec![vec![3.0, 4.0]]).unwrap();
        let w = gaussian_width_mc(&set, 50_000, RngSeed::new(1, 0)).unwrap();
        assert!(w.mean.abs() <= 3.0 * w.stderr + 1e-12, "{w:?}");
        let c = gaussian_complexity_mc(&set, 50_000, RngSeed::new(2, 0)).unwrap();
        let exact = 5.0 * (2.0 / std::f64::consts::PI).sqrt();
        assert!((c.mean - exact).abs() <= 3.0 * c.stderr, "{c:?} vs {exact}");
    }

    #[test]
    fn sample_count_checked() {
        let set = FinitePointSet::new(vec![vec![1.0]]).unwrap();
        assert!(gaussian_width_mc(&set, 1, RngSeed::new(1, 0)).is_err());
    }
}
