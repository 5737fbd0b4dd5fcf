use std::path::PathBuf;

use demix_core::io::{load_weights, write_json};
use demix_core::linalg::mse;
use demix_core::{sample_matrix, solve, DemixProblem, EnsembleSpec, InitScheme, MixingOperator, RngSeed, SolverConfig};
use serde::Serialize;

use crate::demix::write_loss_plot;
use crate::manifest::{RunManifest, MANIFEST_NAME};
use crate::output::{clip_unit, load_gray_png, save_gray_png, MNIST_SIDE};
use crate::{input_error, Outcome};

const PIXELS: usize = (MNIST_SIDE * MNIST_SIDE) as usize;

/// `b = Φ·x₈ + x₁` with `Φ = A/√784`, clipped to `[0, 1]`, where `x₈` comes
/// from the digit-8 decoder and `x₁` from the digit-1 decoder.
#[derive(clap::Args, Debug, Serialize)]
pub struct Args {
    #[arg(long)]
    pub decoder1: PathBuf,
    #[arg(long)]
    pub decoder8: PathBuf,
    /// 28×28 8-bit grayscale PNG.
    #[arg(long)]
    pub image1: PathBuf,
    #[arg(long)]
    pub image8: PathBuf,
    /// Encoder mean heads; together they switch on encoder-perturbed init.
    #[arg(long, requires = "encoder8")]
    pub encoder1: Option<PathBuf>,
    #[arg(long, requires = "encoder1")]
    pub encoder8: Option<PathBuf>,
    /// Matrix seed on stream 0, solver seed on stream 1.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.1)]
    pub noise_scale: f64,
    #[arg(long, default_value_t = 1000)]
    pub iters: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 0)]
    pub restarts: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Pixel-mean squared errors on images clipped to `[0, 1]`.
#[derive(Debug, Serialize)]
pub struct Metrics {
    pub mse_x1: f64,
    pub mse_x8: f64,
    pub mse_mixture: f64,
    pub final_loss: f64,
    pub initial_loss: f64,
    pub iterations: usize,
}

pub fn run(args: Args, argv: Vec<String>) -> anyhow::Result<Outcome> {
    let d1 = load_weights(&args.decoder1)?;
    let d8 = load_weights(&args.decoder8)?;
    for (flag, net) in [("--decoder1", &d1), ("--decoder8", &d8)] {
        if net.output_dim() != PIXELS {
            return Err(input_error(format!("{flag} outputs {} values, expected {PIXELS}", net.output_dim())));
        }
    }
    let x1 = load_gray_png(&args.image1, MNIST_SIDE)?;
    let x8 = load_gray_png(&args.image8, MNIST_SIDE)?;

    let matrix_seed = RngSeed::new(args.seed, 0);
    let solver_seed = RngSeed::new(args.seed, 1);
    let a = sample_matrix(&EnsembleSpec::gaussian(), PIXELS, PIXELS, matrix_seed)?;
    let op = MixingOperator::normalized(a);
    let b = op.apply(&x8, &x1)?;
    let problem = DemixProblem::new(b, op, d8, d1)?.with_clip(0.0, 1.0);

    let init = match (&args.encoder1, &args.encoder8) {
        (Some(e1), Some(e8)) => InitScheme::encoder_perturbed(load_weights(e8)?, load_weights(e1)?, args.noise_scale),
        _ => InitScheme::random_normal(),
    };
    let config = SolverConfig {
        learning_rate: args.lr,
        iterations: args.iters,
        restarts: args.restarts,
        seed: solver_seed,
        ..Default::default()
    };
    let res = solve(&problem, &config, &init)?;
    let x8_hat = clip_unit(&res.x_hat);
    let x1_hat = clip_unit(&res.y_hat);
    let b_hat = problem.predict(res.u_hat.coords(), res.v_hat.coords())?;
    let metrics = Metrics {
        mse_x1: mse(&x1_hat, &x1),
        mse_x8: mse(&x8_hat, &x8),
        mse_mixture: mse(&b_hat, problem.b()),
        final_loss: res.final_loss,
        initial_loss: res.initial_loss,
        iterations: args.iters,
    };
    log::info!("mse x1 {:e}, x8 {:e}, mixture {:e}", metrics.mse_x1, metrics.mse_x8, metrics.mse_mixture);

    let dir = &args.out_dir;
    let mut manifest = RunManifest::new("mnist-demo", argv, &args)?;
    manifest.seed("matrix", matrix_seed).seed("solver", solver_seed);
    for (name, img) in [("x1_hat.png", &x1_hat), ("x8_hat.png", &x8_hat), ("b.png", &problem.b().to_vec()), ("b_hat.png", &b_hat)] {
        let path = dir.join(name);
        save_gray_png(&path, img, MNIST_SIDE)?;
        manifest.artifact(&path);
    }
    let metrics_path = dir.join("metrics.json");
    write_json(&metrics_path, &metrics)?;
    let result_path = dir.join("result.json");
    write_json(&result_path, &res)?;
    let trace_path = dir.join("loss.png");
    write_loss_plot(&trace_path, &res)?;
    for p in [&metrics_path, &result_path, &trace_path] {
        manifest.artifact(p);
    }
    manifest.write(&dir.join(MANIFEST_NAME))?;
    Ok(Outcome::Passed)
}
