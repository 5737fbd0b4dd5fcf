//! Reference implementations the library is checked against. Each one is
//! written independently of the code under test: plain loops, no shared
//! kernels.

#![allow(dead_code, clippy::needless_range_loop)]

use std::path::PathBuf;

use demix_core::ensemble::standard_normal_vec;
use demix_core::{Activation, DenseMatrix, GeneratorNet, Layer, RngSeed};
use nalgebra::{DMatrix, DVector};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// A layer as plain data.
pub struct RawLayer {
    pub rows: usize,
    pub cols: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub act: &'static str,
}

pub fn raw_layers(net: &GeneratorNet) -> Vec<RawLayer> {
    net.layers()
        .iter()
        .map(|l| RawLayer {
            rows: l.weights.rows(),
            cols: l.weights.cols(),
            w: l.weights.data().to_vec(),
            b: l.bias.clone(),
            act: l.activation.name(),
        })
        .collect()
}

fn act(name: &str, z: f64) -> f64 {
    match name {
        "relu" => {
            if z > 0.0 {
                z
            } else {
                0.0
            }
        }
        "sigmoid" => 1.0 / (1.0 + (-z).exp()),
        "tanh" => z.tanh(),
        "identity" => z,
        other => panic!("unknown activation {other}"),
    }
}

/// Straight-line forward pass.
pub fn naive_forward(layers: &[RawLayer], u: &[f64]) -> Vec<f64> {
    let mut a = u.to_vec();
    for l in layers {
        let mut next = vec![0.0; l.rows];
        for i in 0..l.rows {
            let mut s = l.b[i];
            for j in 0..l.cols {
                s += l.w[i * l.cols + j] * a[j];
            }
            next[i] = act(l.act, s);
        }
        a = next;
    }
    a
}

/// `x_scale·A·x + y_scale·y` by explicit loops.
pub fn naive_mix(a: &DenseMatrix, x: &[f64], y: &[f64], x_scale: f64, y_scale: f64) -> Vec<f64> {
    let (m, n) = (a.rows(), a.cols());
    let data = a.data();
    let mut out = vec![0.0; m];
    for i in 0..m {
        let mut s = 0.0;
        for j in 0..n {
            s += data[i * n + j] * x[j];
        }
        out[i] = x_scale * s + y_scale * y[i];
    }
    out
}

/// Central differences of a scalar function.
pub fn central_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut p = x.to_vec();
            let mut q = x.to_vec();
            p[i] += h;
            q[i] -= h;
            (f(&p) - f(&q)) / (2.0 * h)
        })
        .collect()
}

pub fn to_nalgebra(a: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.rows(), a.cols(), a.data())
}

/// Minimizer of `‖M w − b‖²` by SVD.
pub fn least_squares(m: &DMatrix<f64>, b: &[f64]) -> DVector<f64> {
    m.clone()
        .svd(true, true)
        .solve(&DVector::from_column_slice(b), 1e-12)
        .expect("svd solve")
}

/// Largest singular value from nalgebra's SVD.
pub fn sigma_max(a: &DenseMatrix) -> f64 {
    to_nalgebra(a).singular_values().max()
}

pub fn random_matrix(rows: usize, cols: usize, scale: f64, seed: RngSeed) -> DenseMatrix {
    let mut rng = seed.rng();
    let data = standard_normal_vec(&mut rng, rows * cols).into_iter().map(|v| v * scale).collect();
    DenseMatrix::from_row_major(rows, cols, data).unwrap()
}

/// Dense net with the given widths and activations, `N(0, 1/fan_in)` weights
/// and `N(0, 0.01)` biases.
pub fn random_net(dims: &[usize], acts: &[Activation], seed: RngSeed) -> GeneratorNet {
    assert_eq!(dims.len(), acts.len() + 1);
    let layers = dims
        .windows(2)
        .zip(acts)
        .enumerate()
        .map(|(i, (w, &a))| {
            let s = seed.derive(i as u64);
            let weights = random_matrix(w[1], w[0], 1.0 / (w[0] as f64).sqrt(), s);
            let mut rng = s.derive(99).rng();
            let bias = standard_normal_vec(&mut rng, w[1]).into_iter().map(|v| 0.1 * v).collect();
            Layer::new(weights, bias, a).unwrap()
        })
        .collect();
    GeneratorNet::new(layers).unwrap()
}

pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(1e-300)
}
