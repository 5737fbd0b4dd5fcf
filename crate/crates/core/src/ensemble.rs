//! Seeded K-subgaussian matrix ensembles.
//!
//! Every random draw in the crate goes through [`RngSeed::rng`], which is a
//! ChaCha8 stream keyed by `seed` with stream id `stream`. ChaCha is
//! counter-based and defined on bytes, so the same `(seed, stream)` yields
//! the same sequence on every platform; entries are then produced in
//! row-major order.
//!
//! Subgaussian constants are tail constants: `k_analytic` is a `K` with
//! `P(|<A_i, d>| >= t) <= 2 exp(-t^2 / K^2)` for every unit `d`.
//!
//! * gaussian: `<A_i, d> ~ N(0,1)`. Since `P(|Z| >= t) <= 2 exp(-t^2/2)` and
//!   `3/8 < 1/2`, `K = sqrt(8/3)` works; it is also the exact `psi_2` norm
//!   of `N(0,1)` under the `E exp(X^2/K^2) <= 2` convention.
//! * rademacher: Hoeffding gives `2 exp(-t^2/2)` for any unit direction, so
//!   `K = sqrt(2)`.
//! * uniform on `[-sqrt 3, sqrt 3]`: Hoeffding for variables of range
//!   `2 sqrt 3` gives `2 exp(-t^2/6)`, so `K = sqrt(6)`.
//!
//! All three are at least `K0 = (log 2)^(-1/2)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{DemixError, Result};
use crate::linalg::{norm, DenseMatrix};

/// `(log 2)^(-1/2)`, the smallest possible subgaussian constant of a
/// unit-variance variable.
pub const K0: f64 = 1.201_122_408_786_449_8;

/// Seed plus sub-stream id. Parallel trials use distinct streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RngSeed {
    pub const fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// Same seed, stream shifted by `offset`.
    pub fn offset(&self, offset: u64) -> Self {
        Self {
            seed: self.seed,
            stream: self.stream.wrapping_add(offset),
        }
    }

    /// An independent seed family derived from this one, used when an
    /// experiment needs several unrelated streams (matrices vs. generators).
    pub fn derive(&self, tag: u64) -> Self {
        let mut rng = self.rng();
        let base: u64 = rng.random();
        Self {
            seed: base ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15),
            stream: self.stream,
        }
    }
}

pub fn standard_normal_vec<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

/// Uniformly distributed point in the closed ball `B^k(r)`.
pub fn uniform_ball_point<R: Rng + ?Sized>(rng: &mut R, k: usize, r: f64) -> Vec<f64> {
    let mut g = standard_normal_vec(rng, k);
    let n = norm(&g);
    let u: f64 = rng.random();
    let scale = if n > 0.0 { r * u.powf(1.0 / k as f64) / n } else { 0.0 };
    g.iter_mut().for_each(|x| *x *= scale);
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleKind {
    Gaussian,
    Rademacher,
    UniformScaled,
}

impl EnsembleKind {
    pub const ALL: [EnsembleKind; 3] = [
        EnsembleKind::Gaussian,
        EnsembleKind::Rademacher,
        EnsembleKind::UniformScaled,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            EnsembleKind::Gaussian => "gaussian",
            EnsembleKind::Rademacher => "rademacher",
            EnsembleKind::UniformScaled => "uniform-scaled",
        }
    }
}

impl std::str::FromStr for EnsembleKind {
    type Err = DemixError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(EnsembleKind::Gaussian),
            "rademacher" => Ok(EnsembleKind::Rademacher),
            "uniform-scaled" | "uniform" => Ok(EnsembleKind::UniformScaled),
            other => Err(DemixError::InvalidArgument(format!(
                "unknown ensemble `{other}` (expected gaussian, rademacher or uniform-scaled)"
            ))),
        }
    }
}

/// A row distribution with its certified subgaussian constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub k_analytic: f64,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind) -> Self {
        let k_analytic = match kind {
            EnsembleKind::Gaussian => (8.0f64 / 3.0).sqrt(),
            EnsembleKind::Rademacher => 2f64.sqrt(),
            EnsembleKind::UniformScaled => 6f64.sqrt(),
        };
        Self { kind, k_analytic }
    }

    pub fn gaussian() -> Self {
        Self::new(EnsembleKind::Gaussian)
    }

    pub fn rademacher() -> Self {
        Self::new(EnsembleKind::Rademacher)
    }

    pub fn uniform_scaled() -> Self {
        Self::new(EnsembleKind::UniformScaled)
    }

    /// `K · sqrt(log K)`.
    pub fn k_tilde(&self) -> f64 {
        k_tilde(self.k_analytic)
    }

    /// Right-hand side of the subgaussian tail bound, `2 exp(-t²/K²)`.
    pub fn tail_bound(&self, t: f64) -> f64 {
        2.0 * (-(t * t) / (self.k_analytic * self.k_analytic)).exp()
    }

    fn sampler(&self) -> EntrySampler {
        match self.kind {
            EnsembleKind::Gaussian => EntrySampler::Gaussian,
            EnsembleKind::Rademacher => EntrySampler::Rademacher,
            EnsembleKind::UniformScaled => {
                let s = 3f64.sqrt();
                EntrySampler::Uniform(Uniform::new_inclusive(-s, s).expect("valid range"))
            }
        }
    }
}

pub fn k_tilde(k: f64) -> f64 {
    k * k.ln().max(0.0).sqrt()
}

enum EntrySampler {
    Gaussian,
    Rademacher,
    Uniform(Uniform<f64>),
}

impl EntrySampler {
    #[inline]
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            EntrySampler::Gaussian => StandardNormal.sample(rng),
            EntrySampler::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            EntrySampler::Uniform(u) => u.sample(rng),
        }
    }
}

/// Row-major `m × n` draw; a pure function of its arguments.
pub fn sample_matrix(spec: &EnsembleSpec, m: usize, n: usize, seed: RngSeed) -> Result<DenseMatrix> {
    if m == 0 || n == 0 {
        return Err(DemixError::Dimension(format!(
            "sample_matrix needs m, n >= 1, got {m}x{n}"
        )));
    }
    let sampler = spec.sampler();
    let mut rng = seed.rng();
    let data = (0..m * n).map(|_| sampler.draw(&mut rng)).collect();
    DenseMatrix::from_row_major(m, n, data)
}

/// Average of `A_i A_iᵀ` over `trials` rows, i.e. `AᵀA / trials` for the
/// matrix `sample_matrix(spec, trials, n, seed)` (streamed row by row).
pub fn empirical_row_covariance(
    spec: &EnsembleSpec,
    n: usize,
    trials: usize,
    seed: RngSeed,
) -> Result<DenseMatrix> {
    if n == 0 || trials == 0 {
        return Err(DemixError::Dimension(format!(
            "empirical_row_covariance needs n, trials >= 1, got n={n}, trials={trials}"
        )));
    }
    let sampler = spec.sampler();
    let mut rng = seed.rng();
    let mut acc = vec![0.0; n * n];
    let mut row = vec![0.0; n];
    for _ in 0..trials {
        row.iter_mut().for_each(|x| *x = sampler.draw(&mut rng));
        for i in 0..n {
            let ri = row[i];
            for j in i..n {
                acc[i * n + j] += ri * row[j];
            }
        }
    }
    let inv = 1.0 / trials as f64;
    let cov = DenseMatrix::from_fn(n, n, |i, j| {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        acc[a * n + b] * inv
    });
    Ok(cov)
}

/// Empirical frequency of `|<A_i, direction>| >= t` over `trials` sampled rows.
pub fn tail_check(
    spec: &EnsembleSpec,
    n: usize,
    direction: &[f64],
    trials: usize,
    t: f64,
    seed: RngSeed,
) -> Result<f64> {
    if direction.len() != n {
        return Err(DemixError::Dimension(format!(
            "direction has length {}, expected {n}",
            direction.len()
        )));
    }
    if (norm(direction) - 1.0).abs() > 1e-12 {
        return Err(DemixError::InvalidArgument(format!(
            "direction must be a unit vector, has norm {}",
            norm(direction)
        )));
    }
    if !(t >= 0.0) {
        return Err(DemixError::InvalidArgument(format!("t must be >= 0, got {t}")));
    }
    if trials == 0 {
        return Err(DemixError::InvalidArgument("trials must be >= 1".into()));
    }
    let sampler = spec.sampler();
    let mut rng = seed.rng();
    let mut hits = 0usize;
    for _ in 0..trials {
        let proj: f64 = direction.iter().map(|d| d * sampler.draw(&mut rng)).sum();
        if proj.abs() >= t {
            hits += 1;
        }
    }
    Ok(hits as f64 / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k0_value() {
        assert!((K0 - 1.0 / 2f64.ln().sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sample_is_deterministic() {
        let spec = EnsembleSpec::gaussian();
        let a = sample_matrix(&spec, 2, 2, RngSeed::new(7, 0)).unwrap();
        let b = sample_matrix(&spec, 2, 2, RngSeed::new(7, 0)).unwrap();
        assert_eq!(a, b);
        let c = sample_matrix(&spec, 2, 2, RngSeed::new(7, 1)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_empty_shapes() {
        let spec = EnsembleSpec::gaussian();
        assert!(matches!(
            sample_matrix(&spec, 0, 3, RngSeed::new(1, 0)),
            Err(DemixError::Dimension(_))
        ));
        assert!(sample_matrix(&spec, 3, 0, RngSeed::new(1, 0)).is_err());
    }

    #[test]
    fn rademacher_support() {
        let a = sample_matrix(&EnsembleSpec::rademacher(), 3, 3, RngSeed::new(99, 4)).unwrap();
        assert!(a.data().iter().all(|&v| v == 1.0 || v == -1.0));
    }

    #[test]
    fn uniform_support() {
        let a = sample_matrix(&EnsembleSpec::uniform_scaled(), 20, 20, RngSeed::new(3, 0)).unwrap();
        let s = 3f64.sqrt();
        assert!(a.data().iter().all(|&v| (-s..=s).contains(&v)));
    }

    #[test]
    fn rademacher_scalar_covariance_is_exactly_one() {
        let c = empirical_row_covariance(&EnsembleSpec::rademacher(), 1, 10, RngSeed::new(5, 0)).unwrap();
        assert_eq!(c.data(), &[1.0]);
    }

    #[test]
    fn tail_check_edge_cases() {
        for spec in EnsembleKind::ALL.map(EnsembleSpec::new) {
            let f = tail_check(&spec, 2, &[1.0, 0.0], 100, 0.0, RngSeed::new(1, 0)).unwrap();
            assert_eq!(f, 1.0);
        }
        let f = tail_check(&EnsembleSpec::rademacher(), 1, &[1.0], 1000, 1.5, RngSeed::new(1, 0)).unwrap();
        assert_eq!(f, 0.0);
        assert!(matches!(
            tail_check(&EnsembleSpec::gaussian(), 2, &[1.0, 1.0], 10, 1.0, RngSeed::new(1, 0)),
            Err(DemixError::InvalidArgument(_))
        ));
    }

    #[test]
    fn gaussian_constant_dominates_true_tail() {
        // 2 exp(-3t²/8) >= 2 exp(-t²/2) >= P(|Z| >= t)
        let spec = EnsembleSpec::gaussian();
        for i in 0..100 {
            let t = i as f64 * 0.1;
            assert!(spec.tail_bound(t) >= 2.0 * (-t * t / 2.0).exp());
        }
    }

    #[test]
    fn stored_constants_ordering() {
        for spec in EnsembleKind::ALL.map(EnsembleSpec::new) {
            let k = spec.k_analytic;
            let kt = spec.k_tilde();
            assert!(k >= K0);
            assert!(kt <= k * k);
            // K <= K·sqrt(log K) only once log K >= 1.
            assert_eq!(k <= kt, k >= std::f64::consts::E);
        }
        assert!(k_tilde(3.0) >= 3.0 && k_tilde(3.0) <= 9.0);
    }

    #[test]
    fn ball_points_stay_inside() {
        let mut rng = RngSeed::new(11, 0).rng();
        for _ in 0..1000 {
            let p = uniform_ball_point(&mut rng, 3, 2.0);
            assert!(norm(&p) <= 2.0 + 1e-12);
        }
    }
}
