#![allow(clippy::needless_range_loop)]

mod common;

use std::path::Path;

use common::*;
use demix_core::io::save_weights;
use demix_core::{sample_matrix, Activation, DenseMatrix, EnsembleSpec, GeneratorNet, RngSeed};
use image::{GrayImage, Luma, RgbImage};

const SIDE: u32 = 28;
const PIXELS: usize = 784;

fn save_gray(path: &Path, levels: &[u8]) {
    GrayImage::from_fn(SIDE, SIDE, |c, r| Luma([levels[(r * SIDE + c) as usize]])).save(path).unwrap();
}

fn constant_decoder(c: f64) -> GeneratorNet {
    GeneratorNet::single(DenseMatrix::zeros(PIXELS, 2), vec![c; PIXELS], Activation::Identity).unwrap()
}

struct Files {
    args: Vec<String>,
    out: std::path::PathBuf,
}

fn setup(dir: &Path, d1: &GeneratorNet, d8: &GeneratorNet, img1: &[u8], img8: &[u8]) -> Files {
    let p = |n: &str| dir.join(n);
    save_weights(d1, &p("d1.json")).unwrap();
    save_weights(d8, &p("d8.json")).unwrap();
    save_gray(&p("one.png"), img1);
    save_gray(&p("eight.png"), img8);
    let out = p("out");
    let args = [
        "mnist-demo",
        "--decoder1",
        &s(&p("d1.json")),
        "--decoder8",
        &s(&p("d8.json")),
        "--image1",
        &s(&p("one.png")),
        "--image8",
        &s(&p("eight.png")),
        "--seed",
        "5",
        "--out-dir",
        &s(&out),
    ]
    .map(String::from)
    .to_vec();
    Files { args, out }
}

fn pattern(a: usize, b: usize) -> Vec<u8> {
    (0..PIXELS).map(|i| ((i * a + b) % 256) as u8).collect()
}

#[test]
fn constant_decoders_leave_the_constant_fit_residual() {
    // Both decoders ignore their latent, so every prediction is the same
    // clipped mixture of constant images.
    let c = 0.3;
    let (img1, img8) = (pattern(7, 3), pattern(13, 100));
    let dir = tempfile::tempdir().unwrap();
    let mut f = setup(dir.path(), &constant_decoder(c), &constant_decoder(c), &img1, &img8);
    f.args.extend(["--iters", "30"].map(String::from));
    let out = demix(&f.args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let a = sample_matrix(&EnsembleSpec::gaussian(), PIXELS, PIXELS, RngSeed::new(5, 0)).unwrap();
    let x1: Vec<f64> = img1.iter().map(|&q| q as f64 / 255.0).collect();
    let x8: Vec<f64> = img8.iter().map(|&q| q as f64 / 255.0).collect();
    let scale = 1.0 / (PIXELS as f64).sqrt();
    let mut resid = 0.0;
    for i in 0..PIXELS {
        let (mut b, mut b_hat) = (x1[i], c);
        for j in 0..PIXELS {
            b += scale * a.get(i, j) * x8[j];
            b_hat += scale * a.get(i, j) * c;
        }
        resid += (b.clamp(0.0, 1.0) - b_hat.clamp(0.0, 1.0)).powi(2);
    }
    let want = resid / PIXELS as f64;
    let image_mse = |x: &[f64]| x.iter().map(|v| (v - c).powi(2)).sum::<f64>() / PIXELS as f64;

    let metrics = read_json(&f.out.join("metrics.json"));
    let got = metrics["mse_mixture"].as_f64().unwrap();
    assert!((got - want).abs() <= 1e-12 * want.max(1.0), "{got} vs {want}");
    assert!((metrics["mse_x1"].as_f64().unwrap() - image_mse(&x1)).abs() <= 1e-12);
    assert!((metrics["mse_x8"].as_f64().unwrap() - image_mse(&x8)).abs() <= 1e-12);
    for name in ["x1_hat.png", "x8_hat.png", "b.png", "b_hat.png", "loss.png", "manifest.json"] {
        assert!(f.out.join(name).exists(), "{name}");
    }
}

/// Linear decoder whose output at `u*` lands exactly on the 8-bit grid.
fn grid_decoder(w: impl Fn(usize, usize) -> u8, bias: impl Fn(usize) -> u8, u_star: [f64; 2]) -> (GeneratorNet, Vec<u8>) {
    let net = GeneratorNet::single(
        DenseMatrix::from_fn(PIXELS, 2, |i, j| w(i, j) as f64 / 255.0),
        (0..PIXELS).map(|i| bias(i) as f64 / 255.0).collect(),
        Activation::Identity,
    )
    .unwrap();
    let img = (0..PIXELS)
        .map(|i| (w(i, 0) as f64 * u_star[0] + w(i, 1) as f64 * u_star[1] + bias(i) as f64) as u8)
        .collect();
    (net, img)
}

#[test]
fn encoder_init_at_truth_fits_the_mixture() {
    let (u1, u8_) = ([1.0, 2.0], [2.0, 1.0]);
    let (d1, img1) = grid_decoder(|i, j| ((i * 5 + j * 3) % 40) as u8, |i| (i % 60) as u8, u1);
    let (d8, img8) = grid_decoder(|i, j| ((i * 11 + j) % 30) as u8, |i| (i % 90) as u8, u8_);
    let dir = tempfile::tempdir().unwrap();
    let mut f = setup(dir.path(), &d1, &d8, &img1, &img8);
    let encoder = |u: [f64; 2]| GeneratorNet::single(DenseMatrix::zeros(2, PIXELS), u.to_vec(), Activation::Identity).unwrap();
    save_weights(&encoder(u1), &dir.path().join("e1.json")).unwrap();
    save_weights(&encoder(u8_), &dir.path().join("e8.json")).unwrap();
    f.args.extend(
        ["--encoder1", &s(&dir.path().join("e1.json")), "--encoder8", &s(&dir.path().join("e8.json")), "--noise-scale", "0", "--iters", "20"]
            .map(String::from),
    );
    let out = demix(&f.args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let metrics = read_json(&f.out.join("metrics.json"));
    for key in ["mse_mixture", "mse_x1", "mse_x8"] {
        assert!(metrics[key].as_f64().unwrap() <= 1e-6, "{key}: {}", metrics[key]);
    }
}

#[test]
fn wrong_size_or_colour_images_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let f = setup(dir.path(), &constant_decoder(0.5), &constant_decoder(0.5), &pattern(1, 0), &pattern(3, 0));
    let one = dir.path().join("one.png");

    GrayImage::new(27, 28).save(&one).unwrap();
    let out = demix(&f.args);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("28×28"), "{}", stderr(&out));

    RgbImage::new(28, 28).save(&one).unwrap();
    let out = demix(&f.args);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("grayscale"), "{}", stderr(&out));
}

#[test]
fn decoder_output_size_is_checked() {
    let dir = tempfile::tempdir().unwrap();
    let small = GeneratorNet::single(DenseMatrix::zeros(10, 2), vec![0.0; 10], Activation::Identity).unwrap();
    let f = setup(dir.path(), &small, &constant_decoder(0.5), &pattern(1, 0), &pattern(3, 0));
    let out = demix(&f.args);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--decoder1"), "{}", stderr(&out));
}
