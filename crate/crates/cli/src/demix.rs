use std::path::{Path, PathBuf};

use clap::ValueEnum;
use demix_core::io::{load_vector, load_weights, write_json};
use demix_core::{
    sample_matrix, solve, DemixProblem, EnsembleKind, EnsembleSpec, GroundTruth, InitScheme, MixingOperator, RngSeed,
    SolverConfig,
};
use serde::Serialize;

use crate::manifest::{beside, RunManifest};
use crate::output::write_png;
use crate::plot::{self, Plot};
use crate::{input_error, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    /// Standard normal latents.
    Random,
    /// Encoder means of the mixture plus `--noise-scale` Gaussian noise.
    Encoder,
    /// Latents read from `--init-u` and `--init-v`.
    File,
}

#[derive(clap::Args, Debug, Serialize)]
pub struct Args {
    /// Observed mixture, a `{"len", "data"}` vector.
    #[arg(long)]
    pub mixture: PathBuf,
    /// Weights of the generator behind `A·x`.
    #[arg(long)]
    pub gen_g: PathBuf,
    /// Weights of the generator behind `√m·y`.
    #[arg(long)]
    pub gen_h: PathBuf,
    #[arg(long)]
    pub matrix_seed: u64,
    #[arg(long, default_value_t = 0)]
    pub matrix_stream: u64,
    #[arg(long, default_value = "gaussian")]
    pub ensemble: EnsembleKind,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub iters: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, value_enum, default_value_t = Init::Random)]
    pub init: Init,
    #[arg(long)]
    pub init_u: Option<PathBuf>,
    #[arg(long)]
    pub init_v: Option<PathBuf>,
    #[arg(long)]
    pub encoder_g: Option<PathBuf>,
    #[arg(long)]
    pub encoder_h: Option<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    pub noise_scale: f64,
    #[arg(long, default_value_t = 0)]
    pub restarts: usize,
    /// Solver seed; restart `j` uses stream `j`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Record the loss every this many iterations.
    #[arg(long, default_value_t = 1)]
    pub trace_every: usize,
    /// Planted latents, for error metrics in the result.
    #[arg(long, requires = "truth_v")]
    pub truth_u: Option<PathBuf>,
    #[arg(long, requires = "truth_u")]
    pub truth_v: Option<PathBuf>,
    /// Loss-trace plot.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

fn pair(a: &Option<PathBuf>, b: &Option<PathBuf>, what: &str) -> anyhow::Result<(PathBuf, PathBuf)> {
    match (a, b) {
        (Some(a), Some(b)) => Ok((a.clone(), b.clone())),
        _ => Err(input_error(what.to_string())),
    }
}

pub fn init_scheme(init: Init, noise_scale: f64, files: [&Option<PathBuf>; 4]) -> anyhow::Result<InitScheme> {
    let [init_u, init_v, enc_g, enc_h] = files;
    Ok(match init {
        Init::Random => InitScheme::random_normal(),
        Init::Encoder => {
            let (eg, eh) = pair(enc_g, enc_h, "--init encoder needs --encoder-g and --encoder-h")?;
            InitScheme::encoder_perturbed(load_weights(&eg)?, load_weights(&eh)?, noise_scale)
        }
        Init::File => {
            let (u, v) = pair(init_u, init_v, "--init file needs --init-u and --init-v")?;
            InitScheme::provided(load_vector(&u)?, load_vector(&v)?)
        }
    })
}

pub fn loss_plot(result: &demix_core::RecoveryResult) -> Plot {
    Plot {
        series: vec![result.loss_trace.iter().map(|p| (p.iteration as f64, p.loss)).collect()],
        log_y: true,
        ..Default::default()
    }
}

pub fn write_loss_plot(path: &Path, result: &demix_core::RecoveryResult) -> anyhow::Result<()> {
    write_png(path, plot::render(&loss_plot(result)).into())
}

pub fn run(args: Args, argv: Vec<String>) -> anyhow::Result<Outcome> {
    let b = load_vector(&args.mixture)?;
    let g = load_weights(&args.gen_g)?;
    let h = load_weights(&args.gen_h)?;
    if b.len() != args.m {
        return Err(input_error(format!("--m is {} but the mixture has {} entries", args.m, b.len())));
    }
    let matrix_seed = RngSeed::new(args.matrix_seed, args.matrix_stream);
    let a = sample_matrix(&EnsembleSpec::new(args.ensemble), args.m, args.n, matrix_seed)?;
    let mut problem = DemixProblem::new(b, MixingOperator::new(a), g, h)?;
    if let (Some(tu), Some(tv)) = (&args.truth_u, &args.truth_v) {
        let truth = GroundTruth::from_latents(problem.g(), problem.h(), load_vector(tu)?, load_vector(tv)?)?;
        problem = problem.with_truth(truth, None)?;
    }
    let init = init_scheme(args.init, args.noise_scale, [&args.init_u, &args.init_v, &args.encoder_g, &args.encoder_h])?;
    let solver_seed = RngSeed::new(args.seed, 0);
    let config = SolverConfig {
        learning_rate: args.lr,
        iterations: args.iters,
        restarts: args.restarts,
        seed: solver_seed,
        record_trace_every: args.trace_every,
        ..Default::default()
    };
    let result = solve(&problem, &config, &init)?;
    log::info!("final loss {:e} after {} iterations", result.final_loss, args.iters);

    let mut manifest = RunManifest::new("demix", argv, &args)?;
    manifest.seed("matrix", matrix_seed).seed("solver", solver_seed);
    write_json(&args.out, &result)?;
    manifest.artifact(&args.out);
    if let Some(path) = &args.plot {
        write_loss_plot(path, &result)?;
        manifest.artifact(path);
    }
    manifest.write(&beside(&args.out))?;
    Ok(Outcome::Passed)
}
