//! Empirical checks of the concentration machinery behind the recovery
//! guarantee: covering nets, Gaussian width, the deviation of `‖Bz‖` from
//! `√m‖z‖`, the set-restricted eigenvalue condition, and recovery phase
//! transitions in `m`.

mod deviation;
mod net;
mod phase;
mod srec;
mod width;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DemixError, Result};
use crate::linalg::{distance, norm};

pub use deviation::{deviation_experiment, quantile, DeviationReport};
pub use net::{build_ball_net, build_ball_net_with_cap, covering_log_bound, image_net, EpsilonNet, ImageNet, DEFAULT_NET_CAP};
pub use phase::{
    phase_experiment, random_relu_generator, sign_test_p_value, PhaseConfig, PhaseReport, PhaseRow,
};
pub use srec::{
    srec_check, srec_check_product, srec_check_subsampled, srec_check_with_cap, SrecReport, DEFAULT_PAIR_CAP,
};
pub use width::{gaussian_complexity_mc, gaussian_width_mc, Estimate};

/// A finite point set with its radius and diameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct FinitePointSet {
    points: Vec<Vec<f64>>,
    rad: f64,
}

impl TryFrom<Vec<Vec<f64>>> for FinitePointSet {
    type Error = DemixError;

    fn try_from(points: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(points)
    }
}

impl From<FinitePointSet> for Vec<Vec<f64>> {
    fn from(set: FinitePointSet) -> Self {
        set.points
    }
}

impl FinitePointSet {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| DemixError::InvalidArgument("point set is empty".into()))?;
        let dim = first.len();
        if let Some(i) = points.iter().position(|p| p.len() != dim) {
            return Err(DemixError::Dimension(format!(
                "point {i} has dimension {}, expected {dim}",
                points[i].len()
            )));
        }
        let rad = points.iter().map(|p| norm(p)).fold(0.0, f64::max);
        Ok(Self { points, rad })
    }

    /// Concatenates `(x_i, y_i)` pairs into points of dimension `n + m`.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Vec<f64>, Vec<f64>)>) -> Result<Self> {
        Self::new(
            pairs
                .into_iter()
                .map(|(mut x, y)| {
                    x.extend(y);
                    x
                })
                .collect(),
        )
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    /// `sup ‖x‖`
    pub fn rad(&self) -> f64 {
        self.rad
    }

    /// `sup ‖x − x′‖`, computed over all pairs on each call.
    pub fn diam(&self) -> f64 {
        let pts = &self.points;
        (0..pts.len())
            .into_par_iter()
            .map(|i| {
                pts[i + 1..]
                    .iter()
                    .map(|q| distance(&pts[i], q))
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// `inf ‖x‖`
    pub fn min_norm(&self) -> f64 {
        self.points.iter().map(|p| norm(p)).fold(f64::INFINITY, f64::min)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            points: self.points.iter().map(|p| p.iter().map(|v| v * c).collect()).collect(),
            rad: self.rad * c.abs(),
        }
    }
}
