//! Recovery error as a function of the number of measurements `m`.
//!
//! Every instance index fixes the generators, the planted latents and the
//! noise direction across all `m` (paired seeds), so neighbouring rows can
//! be compared instance by instance with a sign test.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{sample_matrix, standard_normal_vec, EnsembleKind, EnsembleSpec, RngSeed};
use crate::error::{DemixError, Result};
use crate::gennet::{Activation, GeneratorNet, Layer};
use crate::linalg::{norm, DenseMatrix};
use crate::mixing::{DemixProblem, MixingOperator};
use crate::solver::{solve, InitScheme, SolverConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhaseConfig {
    pub m_list: Vec<usize>,
    pub k: usize,
    pub k_prime: usize,
    pub n: usize,
    /// Width of the hidden relu layer of each generator.
    pub hidden: usize,
    pub ensemble: EnsembleKind,
    /// `‖η‖₂` values; each gets its own table.
    pub noise_levels: Vec<f64>,
    pub instances: usize,
    pub iterations: usize,
    pub learning_rate: f64,
    pub restarts: usize,
    /// An instance succeeds when `‖ẑ − z*‖/‖z*‖` is at most this.
    pub success_threshold: f64,
    pub seed: u64,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        Self {
            m_list: vec![8, 32, 128, 400],
            k: 8,
            k_prime: 8,
            n: 100,
            hidden: 32,
            ensemble: EnsembleKind::Gaussian,
            noise_levels: vec![0.0],
            instances: 20,
            iterations: 1000,
            learning_rate: 1e-2,
            restarts: 4,
            success_threshold: 0.05,
            seed: 0,
        }
    }
}

impl PhaseConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_list.is_empty() || self.m_list.contains(&0) {
            return Err(DemixError::InvalidArgument("m_list must be non-empty with every m >= 1".into()));
        }
        if self.k == 0 || self.k_prime == 0 || self.n == 0 || self.hidden == 0 || self.instances == 0 {
            return Err(DemixError::InvalidArgument("k, k_prime, n, hidden and instances must be positive".into()));
        }
        if self.noise_levels.is_empty() || self.noise_levels.iter().any(|l| !(*l >= 0.0)) {
            return Err(DemixError::InvalidArgument("noise_levels must be non-empty and >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub m: usize,
    pub noise_level: f64,
    pub median_relative_error: f64,
    pub median_absolute_error: f64,
    pub success_rate: f64,
    pub relative_errors: Vec<f64>,
    pub absolute_errors: Vec<f64>,
}

/// Sign tests across consecutive `m` at one noise level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityCheck {
    pub noise_level: f64,
    /// One-sided p-value for "error increases" between `m_j` and `m_{j+1}`.
    pub adjacent_increase_p: Vec<f64>,
    /// One-sided p-value for "error decreases" from the first to the last `m`.
    pub overall_decrease_p: f64,
    pub medians_non_increasing: bool,
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub config: PhaseConfig,
    pub rows: Vec<PhaseRow>,
    pub monotonicity: Vec<MonotonicityCheck>,
}

pub const SIGN_TEST_ALPHA: f64 = 0.05;

/// `P(X ≥ successes)` for `X ~ Bin(trials, 1/2)`.
pub fn sign_test_p_value(successes: usize, trials: usize) -> f64 {
    if trials == 0 {
        return 1.0;
    }
    let mut p = 0.0;
    let mut coeff = 1.0f64; // C(trials, i)
    let half_pow = 0.5f64.powi(trials as i32);
    for i in 0..=trials {
        if i >= successes {
            p += coeff * half_pow;
        }
        coeff = coeff * (trials - i) as f64 / (i + 1) as f64;
    }
    p.min(1.0)
}

/// Two-layer generator `R^k → R^hidden (relu) → R^out (identity)` with
/// `N(0, 1/fan_in)` weights and zero biases. Output rows are drawn in
/// order, so nets with different `out` share their leading rows.
pub fn random_relu_generator(k: usize, hidden: usize, out: usize, seed: RngSeed) -> Result<GeneratorNet> {
    let mut rng = seed.rng();
    let w1: Vec<f64> = standard_normal_vec(&mut rng, hidden * k)
        .into_iter()
        .map(|v| v / (k as f64).sqrt())
        .collect();
    let w2: Vec<f64> = standard_normal_vec(&mut rng, out * hidden)
        .into_iter()
        .map(|v| v / (hidden as f64).sqrt())
        .collect();
    GeneratorNet::new(vec![
        Layer::new(DenseMatrix::from_row_major(hidden, k, w1)?, vec![0.0; hidden], Activation::Relu)?,
        Layer::new(DenseMatrix::from_row_major(out, hidden, w2)?, vec![0.0; out], Activation::Identity)?,
    ])
}

struct Instance {
    rel: f64,
    abs: f64,
}

fn run_instance(cfg: &PhaseConfig, m: usize, noise_level: f64, i: usize) -> Result<Instance> {
    let base = RngSeed::new(cfg.seed, 0).derive(i as u64 + 1);
    let g = random_relu_generator(cfg.k, cfg.hidden, cfg.n, base.derive(10))?;
    let h = random_relu_generator(cfg.k_prime, cfg.hidden, m, base.derive(11))?;
    let mut rng = base.derive(12).rng();
    let u_star = standard_normal_vec(&mut rng, cfg.k);
    let v_star = standard_normal_vec(&mut rng, cfg.k_prime);
    let a = sample_matrix(&EnsembleSpec::new(cfg.ensemble), m, cfg.n, base.derive(13))?;
    let noise = if noise_level > 0.0 {
        let mut nrng = base.derive(14).rng();
        let xi = standard_normal_vec(&mut nrng, m);
        let s = noise_level / norm(&xi);
        Some(xi.into_iter().map(|v| v * s).collect())
    } else {
        None
    };
    let problem = DemixProblem::planted(MixingOperator::new(a), g, h, u_star, v_star, noise)?;
    let solver = SolverConfig {
        learning_rate: cfg.learning_rate,
        iterations: cfg.iterations,
        restarts: cfg.restarts,
        seed: base.derive(15),
        record_trace_every: cfg.iterations.max(1),
        ..Default::default()
    };
    let res = solve(&problem, &solver, &InitScheme::random_normal())?;
    Ok(Instance {
        rel: res.relative_error.expect("planted truth"),
        abs: res.absolute_error.expect("planted truth"),
    })
}

fn median(xs: &[f64]) -> f64 {
    super::quantile(xs, 0.5)
}

fn tie_tolerance(a: f64, b: f64) -> f64 {
    1e-9 * a.abs().max(b.abs()).max(1e-12)
}

fn monotonicity(rows: &[&PhaseRow], noise_level: f64) -> MonotonicityCheck {
    let count = |before: &PhaseRow, after: &PhaseRow| {
        let mut inc = 0;
        let mut dec = 0;
        for (a, b) in before.relative_errors.iter().zip(&after.relative_errors) {
            if (b - a).abs() <= tie_tolerance(*a, *b) {
                continue;
            }
            if b > a {
                inc += 1;
            } else {
                dec += 1;
            }
        }
        (inc, dec)
    };
    let adjacent_increase_p: Vec<f64> = rows
        .windows(2)
        .map(|w| {
            let (inc, dec) = count(w[0], w[1]);
            sign_test_p_value(inc, inc + dec)
        })
        .collect();
    let overall_decrease_p = if rows.len() >= 2 {
        let (inc, dec) = count(rows[0], rows[rows.len() - 1]);
        sign_test_p_value(dec, inc + dec)
    } else {
        1.0
    };
    let medians_non_increasing = rows
        .windows(2)
        .all(|w| w[1].median_relative_error <= w[0].median_relative_error + tie_tolerance(w[0].median_relative_error, 0.0));
    let passes = adjacent_increase_p.iter().all(|&p| p >= SIGN_TEST_ALPHA) && overall_decrease_p < SIGN_TEST_ALPHA;
    MonotonicityCheck {
        noise_level,
        adjacent_increase_p,
        overall_decrease_p,
        medians_non_increasing,
        passes,
    }
}

pub fn phase_experiment(cfg: &PhaseConfig) -> Result<PhaseReport> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &noise in &cfg.noise_levels {
        for &m in &cfg.m_list {
            let results: Vec<Instance> = (0..cfg.instances)
                .into_par_iter()
                .map(|i| run_instance(cfg, m, noise, i))
                .collect::<Result<_>>()?;
            let rel: Vec<f64> = results.iter().map(|r| r.rel).collect();
            let abs: Vec<f64> = results.iter().map(|r| r.abs).collect();
            let successes = rel.iter().filter(|&&e| e <= cfg.success_threshold).count();
            rows.push(PhaseRow {
                m,
                noise_level: noise,
                median_relative_error: median(&rel),
                median_absolute_error: median(&abs),
                success_rate: successes as f64 / cfg.instances as f64,
                relative_errors: rel,
                absolute_errors: abs,
            });
        }
    }
    let monotonicity = cfg
        .noise_levels
        .iter()
        .map(|&noise| {
            let mut level_rows: Vec<&PhaseRow> = rows.iter().filter(|r| r.noise_level == noise).collect();
            level_rows.sort_by_key(|r| r.m);
            monotonicity(&level_rows, noise)
        })
        .collect();
    Ok(PhaseReport {
        config: cfg.clone(),
        rows,
        monotonicity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_test_values() {
        assert_eq!(sign_test_p_value(0, 10), 1.0);
        assert!((sign_test_p_value(10, 10) - 1.0 / 1024.0).abs() < 1e-15);
        // P(X >= 15 | n = 20) = 21700 / 2^20
        assert!((sign_test_p_value(15, 20) - 21700.0 / 1_048_576.0).abs() < 1e-12);
        assert_eq!(sign_test_p_value(0, 0), 1.0);
    }

    #[test]
    fn generators_share_leading_rows() {
        let seed = RngSeed::new(3, 0);
        let a = random_relu_generator(4, 6, 5, seed).unwrap();
        let b = random_relu_generator(4, 6, 9, seed).unwrap();
        assert_eq!(a.layers()[0], b.layers()[0]);
        let wa = a.layers()[1].weights.data();
        let wb = b.layers()[1].weights.data();
        assert_eq!(wa, &wb[..wa.len()]);
    }

    #[test]
    fn config_checks() {
        assert!(PhaseConfig::default().validate().is_ok());
        let bad = PhaseConfig {
            m_list: vec![4, 0],
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
