//! The mixing operator `B = [A  √m·I]` and the demixing objective.

use serde::{Deserialize, Serialize};

use crate::error::{dim_check, DemixError, Result};
use crate::gennet::GeneratorNet;
use crate::linalg::{norm, DenseMatrix};

/// `(x, y) ↦ x_scale·A·x + y_scale·y`.
///
/// The standard operator has `x_scale = 1`, `y_scale = √m`. The normalized
/// variant, `(A/√m)·x + y`, is the same map divided by `√m`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingOperator {
    a: DenseMatrix,
    x_scale: f64,
    y_scale: f64,
}

impl MixingOperator {
    pub fn new(a: DenseMatrix) -> Self {
        let y_scale = (a.rows() as f64).sqrt();
        Self {
            a,
            x_scale: 1.0,
            y_scale,
        }
    }

    /// `Φ·x + y` with `Φ = A/√m`.
    pub fn normalized(a: DenseMatrix) -> Self {
        let x_scale = 1.0 / (a.rows() as f64).sqrt();
        Self {
            a,
            x_scale,
            y_scale: 1.0,
        }
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    pub fn x_scale(&self) -> f64 {
        self.x_scale
    }

    /// Coefficient on `y`; `√m` for the standard operator.
    pub fn scale(&self) -> f64 {
        self.y_scale
    }

    pub fn apply(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        dim_check("mix x", self.n(), x.len())?;
        dim_check("mix y", self.m(), y.len())?;
        let mut out = self.a.matvec_unchecked(x);
        for (o, yi) in out.iter_mut().zip(y) {
            *o = self.x_scale * *o + self.y_scale * yi;
        }
        Ok(out)
    }

    /// Adjoint: `r ↦ (x_scale·Aᵀr, y_scale·r)`.
    pub fn adjoint(&self, r: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        dim_check("adjoint input", self.m(), r.len())?;
        let mut gx = self.a.matvec_t_unchecked(r);
        gx.iter_mut().for_each(|v| *v *= self.x_scale);
        let gy = r.iter().map(|v| v * self.y_scale).collect();
        Ok((gx, gy))
    }
}

/// `A·x + √m·y`.
pub fn mix(op: &MixingOperator, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    op.apply(x, y)
}

/// `X_z = ‖Bz‖₂ − √m·‖z‖₂` for `z = (x, y)`.
///
/// With `x = 0` the statistic is exactly zero (`Bz = √m·y`); that case is
/// returned directly instead of as a difference of two rounded norms.
pub fn deviation_stat(op: &MixingOperator, x: &[f64], y: &[f64]) -> Result<f64> {
    let bz = op.apply(x, y)?;
    if x.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let zn = (norm(x).powi(2) + norm(y).powi(2)).sqrt();
    Ok(norm(&bz) - op.scale() * zn)
}

/// Planted signals and latents behind an observed mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl GroundTruth {
    pub fn from_latents(g: &GeneratorNet, h: &GeneratorNet, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let x = g.forward(&u)?;
        let y = h.forward(&v)?;
        Ok(Self { u, v, x, y })
    }

    pub fn z(&self) -> Vec<f64> {
        crate::linalg::concat(&self.x, &self.y)
    }
}

/// Observed mixture `b = A·G(u*) + √m·H(v*) + η` with its generators.
#[derive(Debug, Clone)]
pub struct DemixProblem {
    b: Vec<f64>,
    op: MixingOperator,
    g: GeneratorNet,
    h: GeneratorNet,
    noise: Option<Vec<f64>>,
    truth: Option<GroundTruth>,
    clip: Option<(f64, f64)>,
}

impl DemixProblem {
    pub fn new(b: Vec<f64>, op: MixingOperator, g: GeneratorNet, h: GeneratorNet) -> Result<Self> {
        dim_check("mixture b", op.m(), b.len())?;
        if g.output_dim() != op.n() {
            return Err(DemixError::Dimension(format!(
                "G outputs {} values but A has {} columns",
                g.output_dim(),
                op.n()
            )));
        }
        if h.output_dim() != op.m() {
            return Err(DemixError::Dimension(format!(
                "H outputs {} values but A has {} rows",
                h.output_dim(),
                op.m()
            )));
        }
        Ok(Self {
            b,
            op,
            g,
            h,
            noise: None,
            truth: None,
            clip: None,
        })
    }

    /// Builds `b` from planted latents and optional additive noise.
    pub fn planted(
        op: MixingOperator,
        g: GeneratorNet,
        h: GeneratorNet,
        u: Vec<f64>,
        v: Vec<f64>,
        noise: Option<Vec<f64>>,
    ) -> Result<Self> {
        let truth = GroundTruth::from_latents(&g, &h, u, v)?;
        let mut b = op.apply(&truth.x, &truth.y)?;
        if let Some(eta) = &noise {
            dim_check("noise", op.m(), eta.len())?;
            b.iter_mut().zip(eta).for_each(|(bi, e)| *bi += e);
        }
        let mut p = Self::new(b, op, g, h)?;
        p.noise = noise;
        p.truth = Some(truth);
        Ok(p)
    }

    /// Attaches ground truth, checking `b = B·(x*, y*) + η` to 1e-10 relative.
    pub fn with_truth(mut self, truth: GroundTruth, noise: Option<Vec<f64>>) -> Result<Self> {
        let mut expected = self.op.apply(&truth.x, &truth.y)?;
        if let Some(eta) = &noise {
            dim_check("noise", self.op.m(), eta.len())?;
            expected.iter_mut().zip(eta).for_each(|(e, n)| *e += n);
        }
        let scale = norm(&self.b).max(norm(&expected)).max(1.0);
        let gap = crate::linalg::distance(&self.b, &expected);
        if noise.is_some() && gap > 1e-10 * scale {
            return Err(DemixError::InvalidArgument(format!(
                "mixture disagrees with truth plus noise by {gap:e}"
            )));
        }
        self.truth = Some(truth);
        self.noise = noise;
        Ok(self)
    }

    /// Clamp the observed and every predicted mixture to `[lo, hi]`.
    /// The gradient passes straight through the clamp.
    pub fn with_clip(mut self, lo: f64, hi: f64) -> Self {
        self.b.iter_mut().for_each(|v| *v = v.clamp(lo, hi));
        self.clip = Some((lo, hi));
        self
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn op(&self) -> &MixingOperator {
        &self.op
    }

    pub fn g(&self) -> &GeneratorNet {
        &self.g
    }

    pub fn h(&self) -> &GeneratorNet {
        &self.h
    }

    pub fn noise(&self) -> Option<&[f64]> {
        self.noise.as_deref()
    }

    pub fn truth(&self) -> Option<&GroundTruth> {
        self.truth.as_ref()
    }

    pub fn clip(&self) -> Option<(f64, f64)> {
        self.clip
    }

    pub fn m(&self) -> usize {
        self.op.m()
    }

    /// Predicted mixture for the given latents (clipped if configured).
    pub fn predict(&self, u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        let x = self.g.forward(u)?;
        let y = self.h.forward(v)?;
        let mut p = self.op.apply(&x, &y)?;
        self.clamp(&mut p);
        Ok(p)
    }

    fn clamp(&self, p: &mut [f64]) {
        if let Some((lo, hi)) = self.clip {
            p.iter_mut().for_each(|v| *v = v.clamp(lo, hi));
        }
    }

    /// `(1/m)·‖b − B(G(u), H(v))‖²`
    pub fn loss(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        let p = self.predict(u, v)?;
        Ok(sq_residual(&p, &self.b) / self.m() as f64)
    }

    /// Loss and its gradient in `(u, v)`.
    pub fn loss_and_gradient(&self, u: &[f64], v: &[f64]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
        let tg = self.g.trace(u)?;
        let th = self.h.trace(v)?;
        let mut p = self.op.apply(tg.output(), th.output())?;
        self.clamp(&mut p);
        let m = self.m() as f64;
        let rho: Vec<f64> = p.iter().zip(&self.b).map(|(pi, bi)| pi - bi).collect();
        let loss = rho.iter().map(|r| r * r).sum::<f64>() / m;
        let (cx, cy) = self.op.adjoint(&rho)?;
        let mut gu = self.g.backward(&tg, &cx)?;
        let mut gv = self.h.backward(&th, &cy)?;
        let c = 2.0 / m;
        gu.iter_mut().for_each(|x| *x *= c);
        gv.iter_mut().for_each(|x| *x *= c);
        Ok((loss, gu, gv))
    }

    pub fn loss_gradient(&self, u: &[f64], v: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let (_, gu, gv) = self.loss_and_gradient(u, v)?;
        Ok((gu, gv))
    }
}

fn sq_residual(p: &[f64], b: &[f64]) -> f64 {
    p.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mix_identity_example() {
        let op = MixingOperator::new(DenseMatrix::identity(2));
        let out = mix(&op, &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(out, vec![1.0, 2f64.sqrt()]);
    }

    #[test]
    fn mix_scales_y_by_root_m() {
        let op = MixingOperator::new(DenseMatrix::from_fn(4, 3, |i, j| (i + j) as f64));
        let out = mix(&op, &[0.0; 3], &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(out, vec![2.0, 0.0, 0.0, 0.0]);
        assert_eq!(op.scale() * op.scale(), 4.0);
        assert!(mix(&op, &[0.0; 2], &[0.0; 4]).is_err());
    }

    #[test]
    fn deviation_vanishes_without_x() {
        let op = MixingOperator::new(DenseMatrix::from_fn(5, 3, |i, j| (i as f64 - j as f64).sin()));
        assert_eq!(deviation_stat(&op, &[0.0; 3], &[0.3, -1.0, 2.0, 0.0, 5.5]).unwrap(), 0.0);
        assert_eq!(deviation_stat(&op, &[0.0; 3], &[0.0; 5]).unwrap(), 0.0);
    }

    #[test]
    fn zero_problem_has_zero_loss() {
        let op = MixingOperator::new(DenseMatrix::identity(3));
        let p = DemixProblem::new(vec![0.0; 3], op, GeneratorNet::zero(2, 3), GeneratorNet::zero(1, 3)).unwrap();
        assert_eq!(p.loss(&[1.0, 2.0], &[3.0]).unwrap(), 0.0);
    }

    #[test]
    fn construction_checks_dims() {
        let op = MixingOperator::new(DenseMatrix::identity(3));
        assert!(DemixProblem::new(vec![0.0; 3], op.clone(), GeneratorNet::zero(2, 4), GeneratorNet::zero(1, 3)).is_err());
        assert!(DemixProblem::new(vec![0.0; 3], op.clone(), GeneratorNet::zero(2, 3), GeneratorNet::zero(1, 2)).is_err());
        assert!(DemixProblem::new(vec![0.0; 2], op, GeneratorNet::zero(2, 3), GeneratorNet::zero(1, 3)).is_err());
    }

    #[test]
    fn truth_consistency_is_checked() {
        let op = MixingOperator::new(DenseMatrix::identity(2));
        let g = GeneratorNet::linear(DenseMatrix::identity(2));
        let truth = GroundTruth::from_latents(&g, &g, vec![1.0, 0.0], vec![0.0, 1.0]).unwrap();
        let b = op.apply(&truth.x, &truth.y).unwrap();
        let p = DemixProblem::new(b.clone(), op.clone(), g.clone(), g.clone()).unwrap();
        assert!(p.clone().with_truth(truth.clone(), Some(vec![0.0, 0.0])).is_ok());
        assert!(p.with_truth(truth, Some(vec![0.1, 0.0])).is_err());
    }
}
