use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{gaussian_complexity_mc, gaussian_width_mc, Estimate, FinitePointSet};
use crate::ensemble::{sample_matrix, EnsembleSpec, RngSeed};
use crate::error::{DemixError, Result};
use crate::mixing::{deviation_stat, MixingOperator};

/// Monte-Carlo draws used for the width and complexity of the tested set.
pub const WIDTH_SAMPLES: usize = 4000;

/// Sup-deviation statistics of `X_z = ‖Bz‖ − √m‖z‖` over a fixed set,
/// across independent draws of `A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub ensemble: EnsembleSpec,
    pub m: usize,
    pub n: usize,
    pub t: f64,
    /// `sup_{z∈T} |X_z|`, one per matrix draw.
    pub sup_deviation_samples: Vec<f64>,
    pub gamma_estimate: Estimate,
    pub width_estimate: Estimate,
    pub rad: f64,
    pub k_tilde: f64,
    /// `K̃·(γ̂ + t·rad)`
    pub bound_value: f64,
    /// `1 − exp(−t²)`
    pub quantile_level: f64,
    pub deviation_quantile: f64,
    /// Quantile over `K̃·(γ̂ + t·rad)`: the constant the tail bound would need.
    pub empirical_constant: f64,
    /// Mean sup-deviation over `K̃·γ̂`: the constant of the expectation bound.
    pub expectation_constant: f64,
}

/// Empirical quantile with linear interpolation between order statistics.
pub fn quantile(samples: &[f64], level: f64) -> f64 {
    assert!(!samples.is_empty());
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let pos = level.clamp(0.0, 1.0) * (s.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    s[lo] + (pos - lo as f64) * (s[hi] - s[lo])
}

pub fn deviation_experiment(
    spec: &EnsembleSpec,
    set: &FinitePointSet,
    m: usize,
    n: usize,
    trials: usize,
    t: f64,
    seed: RngSeed,
) -> Result<DeviationReport> {
    if set.dim() != n + m {
        return Err(DemixError::Dimension(format!(
            "points have dimension {}, expected n + m = {}",
            set.dim(),
            n + m
        )));
    }
    if trials < 30 {
        return Err(DemixError::InvalidArgument(format!("need at least 30 trials, got {trials}")));
    }
    if !(t > 0.0) {
        return Err(DemixError::InvalidArgument(format!("t must be positive, got {t}")));
    }
    let matrix_seed = seed.derive(1);
    let sups: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| -> Result<f64> {
            let op = MixingOperator::new(sample_matrix(spec, m, n, matrix_seed.offset(trial))?);
            set.points().iter().try_fold(0.0f64, |acc, z| {
                let (x, y) = z.split_at(n);
                Ok(acc.max(deviation_stat(&op, x, y)?.abs()))
            })
        })
        .collect::<Result<_>>()?;

    let gamma = gaussian_complexity_mc(set, WIDTH_SAMPLES, seed.derive(2))?;
    let width = gaussian_width_mc(set, WIDTH_SAMPLES, seed.derive(3))?;
    let rad = set.rad();
    let k_tilde = spec.k_tilde();
    let level = 1.0 - (-t * t).exp();
    let q = quantile(&sups, level);
    let denom = gamma.mean + t * rad;
    let empirical_constant = if denom > 0.0 { q / denom / k_tilde } else { 0.0 };
    let mean_sup = sups.iter().sum::<f64>() / sups.len() as f64;
    let expectation_constant = if gamma.mean > 0.0 { mean_sup / gamma.mean / k_tilde } else { 0.0 };
    Ok(DeviationReport {
        ensemble: *spec,
        m,
        n,
        t,
        sup_deviation_samples: sups,
        gamma_estimate: gamma,
        width_estimate: width,
        rad,
        k_tilde,
        bound_value: k_tilde * denom,
        quantile_level: level,
        deviation_quantile: q,
        empirical_constant,
        expectation_constant,
    })
}
