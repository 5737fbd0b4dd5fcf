//! Feedforward Lipschitz generators.
//!
//! A [`GeneratorNet`] is a chain of dense affine layers, each followed by a
//! pointwise activation. It supplies the three things the demixing code
//! needs from a generator: evaluation, vector–Jacobian products with respect
//! to the latent input, and an upper bound on its Lipschitz constant.

use serde::{Deserialize, Serialize};

use crate::error::{dim_check, DemixError, Result};
use crate::linalg::{norm, DenseMatrix};

/// Relative tolerance and iteration cap for the spectral norms in
/// [`GeneratorNet::lipschitz_bound`].
pub const SPECTRAL_TOL: f64 = 1e-8;
pub const SPECTRAL_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Sigmoid,
    Tanh,
    Identity,
}

impl Activation {
    /// Supremum of the derivative.
    pub fn lipschitz(&self) -> f64 {
        match self {
            Activation::Sigmoid => 0.25,
            _ => 1.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
            Activation::Identity => "identity",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "relu" => Some(Activation::Relu),
            "sigmoid" => Some(Activation::Sigmoid),
            "tanh" => Some(Activation::Tanh),
            "identity" => Some(Activation::Identity),
            _ => None,
        }
    }

    #[inline]
    pub fn apply(&self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Sigmoid => sigmoid(z),
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the pre-activation `z` and the output
    /// `a = apply(z)`. ReLU takes subgradient 0 at the kink.
    #[inline]
    fn derivative(&self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => a * (1.0 - a),
            Activation::Tanh => 1.0 - a * a,
            Activation::Identity => 1.0,
        }
    }
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: DenseMatrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn new(weights: DenseMatrix, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        dim_check("layer bias", weights.rows(), bias.len())?;
        if bias.iter().any(|b| !b.is_finite()) {
            return Err(DemixError::InvalidArgument("layer bias is not finite".into()));
        }
        Ok(Self {
            weights,
            bias,
            activation,
        })
    }

    /// `W = I`, zero bias, identity activation on `R^d`.
    pub fn identity(d: usize) -> Self {
        Self {
            weights: DenseMatrix::identity(d),
            bias: vec![0.0; d],
            activation: Activation::Identity,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.rows()
    }
}

/// Point in latent space, optionally tied to the ball it must stay in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentPoint {
    coords: Vec<f64>,
    radius_bound: Option<f64>,
}

impl LatentPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        Self {
            coords,
            radius_bound: None,
        }
    }

    pub fn in_ball(coords: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(DemixError::InvalidArgument(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        let n = norm(&coords);
        if n > radius * (1.0 + 1e-12) {
            return Err(DemixError::InvalidArgument(format!(
                "latent norm {n} exceeds radius {radius}"
            )));
        }
        Ok(Self {
            coords,
            radius_bound: Some(radius),
        })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn radius_bound(&self) -> Option<f64> {
        self.radius_bound
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

impl AsRef<[f64]> for LatentPoint {
    fn as_ref(&self) -> &[f64] {
        &self.coords
    }
}

/// Intermediate values of one forward pass, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pre: Vec<Vec<f64>>,
    post: Vec<Vec<f64>>,
}

impl ForwardTrace {
    pub fn output(&self) -> &[f64] {
        self.post.last().expect("net has at least one layer")
    }

    pub fn into_output(mut self) -> Vec<f64> {
        self.post.pop().expect("net has at least one layer")
    }

    /// Pre-activations of every layer, used to detect ReLU kinks.
    pub fn pre_activations(&self) -> &[Vec<f64>] {
        &self.pre
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MergeMode {
    /// `w = (u, v) ↦ g(u) + h(v)`
    Sum,
    /// `w = (u, v) ↦ (g(u), h(v))`
    Stack,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorNet {
    layers: Vec<Layer>,
}

impl GeneratorNet {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(DemixError::Structure {
                layer: 0,
                reason: "a generator needs at least one layer".into(),
            });
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[1].input_dim() != pair[0].output_dim() {
                return Err(DemixError::Structure {
                    layer: i + 1,
                    reason: format!(
                        "takes {} inputs but layer {i} produces {}",
                        pair[1].input_dim(),
                        pair[0].output_dim()
                    ),
                });
            }
        }
        Ok(Self { layers })
    }

    /// Single affine layer `u ↦ σ(W u + b)`.
    pub fn single(weights: DenseMatrix, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        Self::new(vec![Layer::new(weights, bias, activation)?])
    }

    /// Linear map `u ↦ W u` (no bias, identity activation).
    pub fn linear(weights: DenseMatrix) -> Self {
        let rows = weights.rows();
        Self {
            layers: vec![Layer {
                weights,
                bias: vec![0.0; rows],
                activation: Activation::Identity,
            }],
        }
    }

    /// The constant map `u ↦ 0` from `R^k` to `R^n`.
    pub fn zero(k: usize, n: usize) -> Self {
        Self::linear(DenseMatrix::zeros(n, k))
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn latent_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("non-empty").output_dim()
    }

    /// True when every activation is the identity, i.e. the net is affine.
    pub fn is_affine(&self) -> bool {
        self.layers.iter().all(|l| l.activation == Activation::Identity)
    }

    pub fn forward(&self, u: &[f64]) -> Result<Vec<f64>> {
        dim_check("generator latent", self.latent_dim(), u.len())?;
        let mut a = u.to_vec();
        for layer in &self.layers {
            let mut z = layer.weights.matvec_unchecked(&a);
            for (zi, bi) in z.iter_mut().zip(&layer.bias) {
                *zi = layer.activation.apply(*zi + bi);
            }
            a = z;
        }
        Ok(a)
    }

    pub fn trace(&self, u: &[f64]) -> Result<ForwardTrace> {
        dim_check("generator latent", self.latent_dim(), u.len())?;
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len() + 1);
        post.push(u.to_vec());
        for layer in &self.layers {
            let mut z = layer.weights.matvec_unchecked(post.last().unwrap());
            for (zi, bi) in z.iter_mut().zip(&layer.bias) {
                *zi += bi;
            }
            let a = z.iter().map(|&zi| layer.activation.apply(zi)).collect();
            pre.push(z);
            post.push(a);
        }
        Ok(ForwardTrace { pre, post })
    }

    /// Vector–Jacobian product `Jᵀ·cotangent` at the traced point.
    pub fn backward(&self, trace: &ForwardTrace, cotangent: &[f64]) -> Result<Vec<f64>> {
        dim_check("cotangent", self.output_dim(), cotangent.len())?;
        let mut delta = cotangent.to_vec();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let z = &trace.pre[i];
            let a = &trace.post[i + 1];
            for ((d, &zi), &ai) in delta.iter_mut().zip(z).zip(a) {
                *d *= layer.activation.derivative(zi, ai);
            }
            delta = layer.weights.matvec_t_unchecked(&delta);
        }
        Ok(delta)
    }

    /// `Jᵀ·cotangent` where `J` is the Jacobian of [`forward`](Self::forward) at `u`.
    pub fn latent_gradient(&self, u: &[f64], cotangent: &[f64]) -> Result<Vec<f64>> {
        dim_check("cotangent", self.output_dim(), cotangent.len())?;
        let trace = self.trace(u)?;
        self.backward(&trace, cotangent)
    }

    /// `∏ σmax(W_i) · Lip(σ_i)`, an upper bound on the Lipschitz constant.
    pub fn lipschitz_bound(&self) -> f64 {
        self.layers
            .iter()
            .map(|l| l.weights.spectral_norm(SPECTRAL_TOL, SPECTRAL_MAX_ITER) * l.activation.lipschitz())
            .product()
    }

    /// Appends identity layers until the net has `depth` layers.
    pub fn padded_to(&self, depth: usize) -> GeneratorNet {
        let mut layers = self.layers.clone();
        while layers.len() < depth {
            layers.push(Layer::identity(self.output_dim()));
        }
        GeneratorNet { layers }
    }

    /// Block-diagonal merge of two generators onto the joint latent `(u, v)`.
    ///
    /// The shallower net is first padded with identity layers. After padding
    /// both nets must use the same activation at every depth.
    pub fn merge_block_diag(g: &GeneratorNet, h: &GeneratorNet, mode: MergeMode) -> Result<GeneratorNet> {
        let depth = g.depth().max(h.depth());
        let g = g.padded_to(depth);
        let h = h.padded_to(depth);
        if mode == MergeMode::Sum && g.output_dim() != h.output_dim() {
            return Err(DemixError::Structure {
                layer: depth,
                reason: format!(
                    "sum merge needs equal output dims, got {} and {}",
                    g.output_dim(),
                    h.output_dim()
                ),
            });
        }
        let mut layers = Vec::with_capacity(depth + 1);
        for (i, (lg, lh)) in g.layers.iter().zip(&h.layers).enumerate() {
            if lg.activation != lh.activation {
                return Err(DemixError::Structure {
                    layer: i,
                    reason: format!(
                        "activation mismatch: {} vs {}",
                        lg.activation.name(),
                        lh.activation.name()
                    ),
                });
            }
            let mut bias = lg.bias.clone();
            bias.extend_from_slice(&lh.bias);
            layers.push(Layer {
                weights: lg.weights.block_diag(&lh.weights),
                bias,
                activation: lg.activation,
            });
        }
        if mode == MergeMode::Sum {
            let n = g.output_dim();
            let eye = DenseMatrix::identity(n);
            layers.push(Layer {
                weights: eye.hcat(&eye)?,
                bias: vec![0.0; n],
                activation: Activation::Identity,
            });
        }
        GeneratorNet::new(layers)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{standard_normal_vec, RngSeed};

    fn random_layer(rows: usize, cols: usize, act: Activation, seed: u64) -> Layer {
        let mut rng = RngSeed::new(seed, 0).rng();
        let w = DenseMatrix::from_row_major(rows, cols, standard_normal_vec(&mut rng, rows * cols)).unwrap();
        Layer::new(w, standard_normal_vec(&mut rng, rows), act).unwrap()
    }

    #[test]
    fn identity_and_relu_single_layers() {
        let id = GeneratorNet::single(DenseMatrix::identity(2), vec![0.0; 2], Activation::Identity).unwrap();
        assert_eq!(id.forward(&[-1.0, 2.0]).unwrap(), vec![-1.0, 2.0]);
        let relu = GeneratorNet::single(DenseMatrix::identity(2), vec![0.0; 2], Activation::Relu).unwrap();
        assert_eq!(relu.forward(&[-1.0, 2.0]).unwrap(), vec![0.0, 2.0]);
        assert!(relu.forward(&[1.0]).is_err());
    }

    #[test]
    fn rejects_broken_chain() {
        let err = GeneratorNet::new(vec![
            random_layer(4, 3, Activation::Tanh, 1),
            random_layer(2, 5, Activation::Tanh, 2),
        ])
        .unwrap_err();
        assert!(matches!(err, DemixError::Structure { layer: 1, .. }));
    }

    #[test]
    fn linear_gradient_is_transpose() {
        let w = DenseMatrix::from_row_major(2, 3, vec![1.0, 2.0, 3.0, -1.0, 0.5, 4.0]).unwrap();
        let net = GeneratorNet::linear(w.clone());
        let c = [0.7, -1.3];
        let g = net.latent_gradient(&[9.0, -2.0, 0.1], &c).unwrap();
        assert_eq!(g, w.matvec_t(&c).unwrap());
        let z = net.latent_gradient(&[1.0, 1.0, 1.0], &[0.0, 0.0]).unwrap();
        assert!(z.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn relu_kink_subgradient_is_zero() {
        let net = GeneratorNet::single(DenseMatrix::identity(1), vec![0.0], Activation::Relu).unwrap();
        assert_eq!(net.latent_gradient(&[0.0], &[1.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn lipschitz_of_scaled_identity() {
        let w = DenseMatrix::scaled_identity(3, 2.0);
        let id = GeneratorNet::single(w.clone(), vec![0.0; 3], Activation::Identity).unwrap();
        assert!((id.lipschitz_bound() - 2.0).abs() < 1e-12);
        let sg = GeneratorNet::single(w, vec![0.0; 3], Activation::Sigmoid).unwrap();
        assert!((sg.lipschitz_bound() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sum_merge_of_identities_adds() {
        let g = GeneratorNet::linear(DenseMatrix::identity(2));
        let f = GeneratorNet::merge_block_diag(&g, &g, MergeMode::Sum).unwrap();
        assert_eq!(f.latent_dim(), 4);
        assert_eq!(f.forward(&[1.0, 2.0, 10.0, 20.0]).unwrap(), vec![11.0, 22.0]);
    }

    #[test]
    fn merge_pads_and_reports_mismatch() {
        let g = GeneratorNet::new(vec![random_layer(4, 2, Activation::Identity, 3), random_layer(3, 4, Activation::Identity, 4)]).unwrap();
        let h = GeneratorNet::new(vec![random_layer(3, 5, Activation::Identity, 5)]).unwrap();
        let f = GeneratorNet::merge_block_diag(&g, &h, MergeMode::Stack).unwrap();
        assert_eq!(f.depth(), 2);
        let u = [0.3, -0.2];
        let v = [1.0, 0.0, -1.0, 0.5, 0.2];
        let mut w = u.to_vec();
        w.extend_from_slice(&v);
        let mut expected = g.forward(&u).unwrap();
        expected.extend(h.forward(&v).unwrap());
        let got = f.forward(&w).unwrap();
        for (a, b) in got.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }

        let relu_h = GeneratorNet::new(vec![random_layer(3, 5, Activation::Relu, 6)]).unwrap();
        let err = GeneratorNet::merge_block_diag(&g, &relu_h, MergeMode::Stack).unwrap_err();
        assert!(matches!(err, DemixError::Structure { layer: 0, .. }));
    }

    #[test]
    fn sum_merge_requires_equal_outputs() {
        let g = GeneratorNet::linear(DenseMatrix::identity(2));
        let h = GeneratorNet::linear(DenseMatrix::identity(3));
        assert!(GeneratorNet::merge_block_diag(&g, &h, MergeMode::Sum).is_err());
    }

    #[test]
    fn latent_ball_constraint() {
        assert!(LatentPoint::in_ball(vec![3.0, 4.0], 5.0).is_ok());
        assert!(LatentPoint::in_ball(vec![3.0, 4.1], 5.0).is_err());
    }
}
