//! Latent-space recovery by Adam on the demixing objective.
//!
//! The same driver serves three objectives: the standard mixture
//! `A·G(u) + √m·H(v)`, the one-matrix variant `Φ·(G(u) + H(v))` and the
//! two-matrix variant `Φ₁·G(u) + Φ₂·H(v)`. Each is an [`Objective`].

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{standard_normal_vec, RngSeed};
use crate::error::{dim_check, DemixError, Result};
use crate::gennet::{GeneratorNet, LatentPoint, MergeMode};
use crate::linalg::{concat, distance, mse, norm, DenseMatrix};
use crate::mixing::{DemixProblem, GroundTruth};

/// Anything the latent-space solver can minimize.
pub trait Objective: Sync {
    fn latent_dims(&self) -> (usize, usize);

    /// Observed mixture.
    fn mixture(&self) -> &[f64];

    /// Predicted mixture for `(u, v)`.
    fn predict(&self, u: &[f64], v: &[f64]) -> Result<Vec<f64>>;

    fn loss(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        let p = self.predict(u, v)?;
        Ok(mse(&p, self.mixture()))
    }

    fn loss_and_gradient(&self, u: &[f64], v: &[f64]) -> Result<(f64, Vec<f64>, Vec<f64>)>;

    /// Recovered component signals `(G(u), H(v))`.
    fn signals(&self, u: &[f64], v: &[f64]) -> Result<(Vec<f64>, Vec<f64>)>;

    fn truth(&self) -> Option<&GroundTruth>;

    /// True when `predict` is affine in `(u, v)`, so its minimum is a
    /// least-squares problem.
    fn is_affine(&self) -> bool;

    /// Input fed to encoder-based initialization.
    fn encoder_input(&self) -> &[f64] {
        self.mixture()
    }
}

impl Objective for DemixProblem {
    fn latent_dims(&self) -> (usize, usize) {
        (self.g().latent_dim(), self.h().latent_dim())
    }

    fn mixture(&self) -> &[f64] {
        self.b()
    }

    fn predict(&self, u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        DemixProblem::predict(self, u, v)
    }

    fn loss(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        DemixProblem::loss(self, u, v)
    }

    fn loss_and_gradient(&self, u: &[f64], v: &[f64]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
        DemixProblem::loss_and_gradient(self, u, v)
    }

    fn signals(&self, u: &[f64], v: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        Ok((self.g().forward(u)?, self.h().forward(v)?))
    }

    fn truth(&self) -> Option<&GroundTruth> {
        DemixProblem::truth(self)
    }

    fn is_affine(&self) -> bool {
        self.clip().is_none() && self.g().is_affine() && self.h().is_affine()
    }
}

/// `b₁ = Φ·(G(u*) + H(v*)) + η`, solved through the merged generator
/// `F(u, v) = G(u) + H(v)`. Only the sum `F(ŵ)` is identifiable in
/// general; the components may trade mass or swap.
#[derive(Debug, Clone)]
pub struct OneMatrixProblem {
    b: Vec<f64>,
    phi: DenseMatrix,
    g: GeneratorNet,
    h: GeneratorNet,
    merged: GeneratorNet,
    truth: Option<GroundTruth>,
}

impl OneMatrixProblem {
    pub fn new(b: Vec<f64>, phi: DenseMatrix, g: GeneratorNet, h: GeneratorNet) -> Result<Self> {
        dim_check("mixture b1", phi.rows(), b.len())?;
        dim_check("G output vs Φ columns", phi.cols(), g.output_dim())?;
        dim_check("H output vs Φ columns", phi.cols(), h.output_dim())?;
        let merged = GeneratorNet::merge_block_diag(&g, &h, MergeMode::Sum)?;
        Ok(Self {
            b,
            phi,
            g,
            h,
            merged,
            truth: None,
        })
    }

    pub fn planted(phi: DenseMatrix, g: GeneratorNet, h: GeneratorNet, u: Vec<f64>, v: Vec<f64>, noise: Option<&[f64]>) -> Result<Self> {
        let truth = GroundTruth::from_latents(&g, &h, u, v)?;
        let sum: Vec<f64> = truth.x.iter().zip(&truth.y).map(|(a, b)| a + b).collect();
        let mut b = phi.matvec(&sum)?;
        if let Some(eta) = noise {
            dim_check("noise", b.len(), eta.len())?;
            b.iter_mut().zip(eta).for_each(|(bi, e)| *bi += e);
        }
        let mut p = Self::new(b, phi, g, h)?;
        p.truth = Some(truth);
        Ok(p)
    }

    pub fn merged(&self) -> &GeneratorNet {
        &self.merged
    }

    /// `F(u, v) = G(u) + H(v)`.
    pub fn sum_signal(&self, u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        self.merged.forward(&concat(u, v))
    }
}

impl Objective for OneMatrixProblem {
    fn latent_dims(&self) -> (usize, usize) {
        (self.g.latent_dim(), self.h.latent_dim())
    }

    fn mixture(&self) -> &[f64] {
        &self.b
    }

    fn predict(&self, u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        dim_check("u", self.g.latent_dim(), u.len())?;
        dim_check("v", self.h.latent_dim(), v.len())?;
        self.phi.matvec(&self.sum_signal(u, v)?)
    }

    fn loss_and_gradient(&self, u: &[f64], v: &[f64]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
        dim_check("u", self.g.latent_dim(), u.len())?;
        dim_check("v", self.h.latent_dim(), v.len())?;
        let trace = self.merged.trace(&concat(u, v))?;
        let p = self.phi.matvec(trace.output())?;
        let m = self.b.len() as f64;
        let rho: Vec<f64> = p.iter().zip(&self.b).map(|(a, b)| a - b).collect();
        let loss = rho.iter().map(|r| r * r).sum::<f64>() / m;
        let cot = self.phi.matvec_t(&rho)?;
        let mut gw = self.merged.backward(&trace, &cot)?;
        gw.iter_mut().for_each(|x| *x *= 2.0 / m);
        let gv = gw.split_off(u.len());
        Ok((loss, gw, gv))
    }

    fn signals(&self, u: &[f64], v: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        Ok((self.g.forward(u)?, self.h.forward(v)?))
    }

    fn truth(&self) -> Option<&GroundTruth> {
        self.truth.as_ref()
    }

    fn is_affine(&self) -> bool {
        self.merged.is_affine()
    }
}

/// `b₂ = Φ₁·G(u*) + Φ₂·H(v*) + η`, i.e. `[Φ₁ Φ₂]` acting on the stacked
/// outputs `(G(u), H(v))`.
#[derive(Debug, Clone)]
pub struct TwoMatrixProblem {
    b: Vec<f64>,
    phi_bar: DenseMatrix,
    g: GeneratorNet,
    h: GeneratorNet,
    truth: Option<GroundTruth>,
}

impl TwoMatrixProblem {
    pub fn new(b: Vec<f64>, phi1: &DenseMatrix, phi2: &DenseMatrix, g: GeneratorNet, h: GeneratorNet) -> Result<Self> {
        dim_check("Φ₂ rows vs Φ₁ rows", phi1.rows(), phi2.rows())?;
        dim_check("mixture b2", phi1.rows(), b.len())?;
        dim_check("G output vs Φ₁ columns", phi1.cols(), g.output_dim())?;
        dim_check("H output vs Φ₂ columns", phi2.cols(), h.output_dim())?;
        Ok(Self {
            b,
            phi_bar: phi1.hcat(phi2)?,
            g,
            h,
            truth: None,
        })
    }

    pub fn planted(
        phi1: &DenseMatrix,
        phi2: &DenseMatrix,
        g: GeneratorNet,
        h: GeneratorNet,
        u: Vec<f64>,
        v: Vec<f64>,
        noise: Option<&[f64]>,
    ) -> Result<Self> {
        let truth = GroundTruth::from_latents(&g, &h, u, v)?;
        let mut b = phi1.hcat(phi2)?.matvec(&truth.z())?;
        if let Some(eta) = noise {
            dim_check("noise", b.len(), eta.len())?;
            b.iter_mut().zip(eta).for_each(|(bi, e)| *bi += e);
        }
        let mut p = Self::new(b, phi1, phi2, g, h)?;
        p.truth = Some(truth);
        Ok(p)
    }

    pub fn stacked_matrix(&self) -> &DenseMatrix {
        &self.phi_bar
    }
}

impl Objective for TwoMatrixProblem {
    fn latent_dims(&self) -> (usize, usize) {
        (self.g.latent_dim(), self.h.latent_dim())
    }

    fn mixture(&self) -> &[f64] {
        &self.b
    }

    fn predict(&self, u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        let (x, y) = self.signals(u, v)?;
        self.phi_bar.matvec(&concat(&x, &y))
    }

    fn loss_and_gradient(&self, u: &[f64], v: &[f64]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
        let tg = self.g.trace(u)?;
        let th = self.h.trace(v)?;
        let p = self.phi_bar.matvec(&concat(tg.output(), th.output()))?;
        let m = self.b.len() as f64;
        let rho: Vec<f64> = p.iter().zip(&self.b).map(|(a, b)| a - b).collect();
        let loss = rho.iter().map(|r| r * r).sum::<f64>() / m;
        let mut cot = self.phi_bar.matvec_t(&rho)?;
        let cot_y = cot.split_off(self.g.output_dim());
        let mut gu = self.g.backward(&tg, &cot)?;
        let mut gv = self.h.backward(&th, &cot_y)?;
        gu.iter_mut().chain(gv.iter_mut()).for_each(|x| *x *= 2.0 / m);
        Ok((loss, gu, gv))
    }

    fn signals(&self, u: &[f64], v: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        Ok((self.g.forward(u)?, self.h.forward(v)?))
    }

    fn truth(&self) -> Option<&GroundTruth> {
        self.truth.as_ref()
    }

    fn is_affine(&self) -> bool {
        self.g.is_affine() && self.h.is_affine()
    }
}

// ---------------------------------------------------------------------------
// Configuration

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub learning_rate: f64,
    pub iterations: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon_hat: f64,
    pub restarts: usize,
    /// Ball radii `(r, r′)` for `u` and `v`; `None` disables projection.
    pub project_radii: Option<(f64, f64)>,
    pub seed: RngSeed,
    pub record_trace_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-2,
            iterations: 1000,
            beta1: 0.9,
            beta2: 0.999,
            epsilon_hat: 1e-8,
            restarts: 0,
            project_radii: None,
            seed: RngSeed::new(0, 0),
            record_trace_every: 1,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(DemixError::InvalidArgument(msg));
        if !(self.learning_rate > 0.0) {
            return bad(format!("learning_rate must be > 0, got {}", self.learning_rate));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad(format!("betas must lie in [0, 1), got {} and {}", self.beta1, self.beta2));
        }
        if !(self.epsilon_hat > 0.0) {
            return bad(format!("epsilon_hat must be > 0, got {}", self.epsilon_hat));
        }
        if self.iterations == 0 {
            return bad("iterations must be positive".into());
        }
        if self.record_trace_every == 0 {
            return bad("record_trace_every must be positive".into());
        }
        if let Some((r, rp)) = self.project_radii {
            if !(r > 0.0 && rp > 0.0) {
                return bad(format!("projection radii must be positive, got ({r}, {rp})"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    RandomNormal,
    EncoderPerturbed,
    Provided,
}

#[derive(Debug, Clone)]
pub struct InitScheme {
    pub kind: InitKind,
    pub noise_scale: f64,
    /// Mean-head encoders `(E_G, E_H)` mapping the mixture to each latent.
    pub encoders: Option<(GeneratorNet, GeneratorNet)>,
    pub provided_latents: Option<(Vec<f64>, Vec<f64>)>,
}

impl InitScheme {
    pub fn random_normal() -> Self {
        Self {
            kind: InitKind::RandomNormal,
            noise_scale: 0.1,
            encoders: None,
            provided_latents: None,
        }
    }

    pub fn encoder_perturbed(eg: GeneratorNet, eh: GeneratorNet, noise_scale: f64) -> Self {
        Self {
            kind: InitKind::EncoderPerturbed,
            noise_scale,
            encoders: Some((eg, eh)),
            provided_latents: None,
        }
    }

    pub fn provided(u0: Vec<f64>, v0: Vec<f64>) -> Self {
        Self {
            kind: InitKind::Provided,
            noise_scale: 0.1,
            encoders: None,
            provided_latents: Some((u0, v0)),
        }
    }
}

/// Starting latents for one restart. Deterministic in `seed`.
pub fn initialize<O: Objective + ?Sized>(scheme: &InitScheme, problem: &O, seed: RngSeed) -> Result<(Vec<f64>, Vec<f64>)> {
    let (k, kp) = problem.latent_dims();
    let mut rng = seed.rng();
    let (u, v) = match scheme.kind {
        InitKind::RandomNormal => {
            let u = standard_normal_vec(&mut rng, k);
            let v = standard_normal_vec(&mut rng, kp);
            (u, v)
        }
        InitKind::EncoderPerturbed => {
            let (eg, eh) = scheme
                .encoders
                .as_ref()
                .ok_or(DemixError::MissingInit("encoder-perturbed init needs encoders"))?;
            let b = problem.encoder_input();
            let mut u = eg.forward(b)?;
            let mut v = eh.forward(b)?;
            let eu = standard_normal_vec(&mut rng, u.len());
            let ev = standard_normal_vec(&mut rng, v.len());
            if scheme.noise_scale != 0.0 {
                u.iter_mut().zip(&eu).for_each(|(x, e)| *x += scheme.noise_scale * e);
                v.iter_mut().zip(&ev).for_each(|(x, e)| *x += scheme.noise_scale * e);
            }
            (u, v)
        }
        InitKind::Provided => scheme
            .provided_latents
            .clone()
            .ok_or(DemixError::MissingInit("provided init needs latents"))?,
    };
    dim_check("initial u", k, u.len())?;
    dim_check("initial v", kp, v.len())?;
    Ok((u, v))
}

// ---------------------------------------------------------------------------
// Results

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub loss: f64,
    pub u_norm: f64,
    pub v_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub u_hat: LatentPoint,
    pub v_hat: LatentPoint,
    pub x_hat: Vec<f64>,
    pub y_hat: Vec<f64>,
    /// `G(û) + H(v̂)`, reported by the one-matrix variant.
    pub sum_hat: Option<Vec<f64>>,
    pub final_loss: f64,
    pub initial_loss: f64,
    /// `‖B ẑ − b‖₂ = √(m · final_loss)`.
    pub residual_norm: f64,
    pub loss_trace: Vec<TracePoint>,
    pub mse_x: Option<f64>,
    pub mse_y: Option<f64>,
    pub mse_mixture: f64,
    /// `‖ẑ − z*‖ / ‖z*‖` on the stacked signal.
    pub relative_error: Option<f64>,
    /// `‖ẑ − z*‖`.
    pub absolute_error: Option<f64>,
    /// `final_loss − min loss`, only when the minimum is computable.
    pub achieved_suboptimality: Option<f64>,
    /// Stream id of the restart that was returned.
    pub stream: u64,
    pub diverged_streams: Vec<u64>,
    pub config: SolverConfig,
}

struct RunOutcome {
    u: Vec<f64>,
    v: Vec<f64>,
    final_loss: f64,
    initial_loss: f64,
    trace: Vec<TracePoint>,
    stream: u64,
}

fn project(x: &mut [f64], radius: f64) {
    let n = norm(x);
    if n > radius {
        let s = radius / n;
        x.iter_mut().for_each(|v| *v *= s);
    }
}

struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(cfg: &SolverConfig, dim: usize) -> Self {
        Self {
            lr: cfg.learning_rate,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            eps: cfg.epsilon_hat,
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t);
        let bc2 = 1.0 - self.beta2.powi(self.t);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// One Adam run from `(u0, v0)`. Returns `None` on a non-finite loss.
fn run_single<O: Objective + ?Sized>(
    problem: &O,
    config: &SolverConfig,
    u0: Vec<f64>,
    v0: Vec<f64>,
    stream: u64,
) -> Result<Option<RunOutcome>> {
    let k = u0.len();
    let mut w = concat(&u0, &v0);
    if let Some((r, rp)) = config.project_radii {
        project(&mut w[..k], r);
        project(&mut w[k..], rp);
    }
    let mut adam = Adam::new(config, w.len());
    let mut trace = Vec::new();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut initial_loss = f64::NAN;
    let mut grad = vec![0.0; w.len()];

    for it in 0..=config.iterations {
        let (u, v) = w.split_at(k);
        let (loss, gu, gv) = problem.loss_and_gradient(u, v)?;
        if !loss.is_finite() {
            log::warn!("restart on stream {stream} diverged at iteration {it}");
            return Ok(None);
        }
        if it == 0 {
            initial_loss = loss;
        }
        if it % config.record_trace_every == 0 || it == config.iterations {
            trace.push(TracePoint {
                iteration: it,
                loss,
                u_norm: norm(u),
                v_norm: norm(v),
            });
        }
        if best.as_ref().is_none_or(|(b, _)| loss < *b) {
            best = Some((loss, w.clone()));
        }
        if it == config.iterations {
            break;
        }
        grad[..k].copy_from_slice(&gu);
        grad[k..].copy_from_slice(&gv);
        adam.step(&mut w, &grad);
        if let Some((r, rp)) = config.project_radii {
            project(&mut w[..k], r);
            project(&mut w[k..], rp);
        }
    }
    let (final_loss, best_w) = best.expect("at least one iterate");
    let (u, v) = best_w.split_at(k);
    Ok(Some(RunOutcome {
        u: u.to_vec(),
        v: v.to_vec(),
        final_loss,
        initial_loss,
        trace,
        stream,
    }))
}

/// Minimum of an affine objective by least squares on `(u, v)`.
pub fn affine_minimum<O: Objective + ?Sized>(problem: &O) -> Result<Option<f64>> {
    if !problem.is_affine() {
        return Ok(None);
    }
    let (k, kp) = problem.latent_dims();
    let zu = vec![0.0; k];
    let zv = vec![0.0; kp];
    let c0 = problem.predict(&zu, &zv)?;
    let m = c0.len();
    let mut cols = Vec::with_capacity(k + kp);
    for j in 0..k + kp {
        let mut u = zu.clone();
        let mut v = zv.clone();
        if j < k {
            u[j] = 1.0;
        } else {
            v[j - k] = 1.0;
        }
        let p = problem.predict(&u, &v)?;
        cols.push(p.iter().zip(&c0).map(|(a, b)| a - b).collect::<Vec<_>>());
    }
    let design = DMatrix::from_fn(m, k + kp, |i, j| cols[j][i]);
    let rhs = DVector::from_iterator(m, problem.mixture().iter().zip(&c0).map(|(b, c)| b - c));
    let svd = design.clone().svd(true, true);
    let sol = svd
        .solve(&rhs, 1e-12)
        .map_err(|e| DemixError::InvalidArgument(format!("least squares failed: {e}")))?;
    let resid = design * sol - rhs;
    Ok(Some(resid.norm_squared() / m as f64))
}

/// Runs Adam from `1 + restarts` initializations (streams `seed.stream + j`)
/// and returns the lowest-loss candidate, ties going to the lower stream.
/// Each run returns its best iterate, so `final_loss` never exceeds the loss
/// at its initialization.
pub fn solve<O: Objective + ?Sized>(problem: &O, config: &SolverConfig, init: &InitScheme) -> Result<RecoveryResult> {
    config.validate()?;
    let runs: Vec<(u64, Result<Option<RunOutcome>>)> = (0..=config.restarts as u64)
        .into_par_iter()
        .map(|j| {
            let seed = config.seed.offset(j);
            let out = initialize(init, problem, seed).and_then(|(u0, v0)| run_single(problem, config, u0, v0, seed.stream));
            (seed.stream, out)
        })
        .collect();

    let mut best: Option<RunOutcome> = None;
    let mut diverged = Vec::new();
    for (stream, out) in runs {
        match out? {
            None => diverged.push(stream),
            Some(run) => {
                if best.as_ref().is_none_or(|b| run.final_loss < b.final_loss) {
                    best = Some(run);
                }
            }
        }
    }
    let best = best.ok_or(DemixError::Diverged {
        restarts: config.restarts + 1,
    })?;
    finish(problem, config, best, diverged)
}

fn finish<O: Objective + ?Sized>(problem: &O, config: &SolverConfig, run: RunOutcome, diverged: Vec<u64>) -> Result<RecoveryResult> {
    let (x_hat, y_hat) = problem.signals(&run.u, &run.v)?;
    let predicted = problem.predict(&run.u, &run.v)?;
    let m = predicted.len() as f64;
    let (mse_x, mse_y, relative_error, absolute_error) = match problem.truth() {
        Some(t) => {
            let z_hat = concat(&x_hat, &y_hat);
            let z_star = t.z();
            let abs = distance(&z_hat, &z_star);
            let zn = norm(&z_star);
            let rel = if zn > 0.0 { abs / zn } else { abs };
            (Some(mse(&x_hat, &t.x)), Some(mse(&y_hat, &t.y)), Some(rel), Some(abs))
        }
        None => (None, None, None, None),
    };
    let achieved_suboptimality = if config.project_radii.is_none() {
        affine_minimum(problem)?.map(|min| (run.final_loss - min).max(0.0))
    } else {
        None
    };
    let wrap = |coords: Vec<f64>, r: Option<f64>| match r {
        Some(r) => LatentPoint::in_ball(coords.clone(), r).unwrap_or_else(|_| LatentPoint::new(coords)),
        None => LatentPoint::new(coords),
    };
    let (r, rp) = config.project_radii.map_or((None, None), |(a, b)| (Some(a), Some(b)));
    Ok(RecoveryResult {
        u_hat: wrap(run.u, r),
        v_hat: wrap(run.v, rp),
        x_hat,
        y_hat,
        sum_hat: None,
        final_loss: run.final_loss,
        initial_loss: run.initial_loss,
        residual_norm: (run.final_loss * m).sqrt(),
        loss_trace: run.trace,
        mse_x,
        mse_y,
        mse_mixture: run.final_loss,
        relative_error,
        absolute_error,
        achieved_suboptimality,
        stream: run.stream,
        diverged_streams: diverged,
        config: config.clone(),
    })
}

/// Recovers `G(u*) + H(v*)` from `b₁ = Φ·(G(u*) + H(v*)) + η`.
///
/// Only the sum is guaranteed; `x_hat`/`y_hat` are whatever split the
/// optimizer lands on, and `sum_hat` carries `F(ŵ)`.
pub fn solve_one_matrix_variant(problem: &OneMatrixProblem, config: &SolverConfig, init: &InitScheme) -> Result<RecoveryResult> {
    let mut res = solve(problem, config, init)?;
    res.sum_hat = Some(problem.sum_signal(res.u_hat.coords(), res.v_hat.coords())?);
    Ok(res)
}

/// Recovers `(G(u*), H(v*))` from `b₂ = Φ₁·G(u*) + Φ₂·H(v*) + η`.
pub fn solve_two_matrix_variant(problem: &TwoMatrixProblem, config: &SolverConfig, init: &InitScheme) -> Result<RecoveryResult> {
    solve(problem, config, init)
}
