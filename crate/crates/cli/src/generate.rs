use std::path::PathBuf;

use demix_core::conclab::random_relu_generator;
use demix_core::ensemble::standard_normal_vec;
use demix_core::io::{save_vector, save_weights};
use demix_core::linalg::norm;
use demix_core::{sample_matrix, EnsembleKind, EnsembleSpec, MixingOperator, RngSeed};
use serde::Serialize;

use crate::manifest::{RunManifest, MANIFEST_NAME};
use crate::{input_error, Outcome};

/// Planted instance `b = A·G(u*) + √m·H(v*) + η` with random two-layer
/// relu generators. Latents are drawn `u*` first, then `v*`, from one stream.
#[derive(clap::Args, Debug, Serialize)]
pub struct Args {
    #[arg(long, default_value_t = 8)]
    pub k: usize,
    #[arg(long, default_value_t = 8)]
    pub k_prime: usize,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub m: usize,
    /// Hidden width of both generators.
    #[arg(long, default_value_t = 32)]
    pub hidden: usize,
    #[arg(long, default_value = "gaussian")]
    pub ensemble: EnsembleKind,
    #[arg(long, default_value_t = 1)]
    pub g_seed: u64,
    #[arg(long, default_value_t = 2)]
    pub h_seed: u64,
    #[arg(long, default_value_t = 3)]
    pub matrix_seed: u64,
    #[arg(long, default_value_t = 4)]
    pub latent_seed: u64,
    /// `‖η‖₂`; the direction is uniform.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 5)]
    pub noise_seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn run(args: Args, argv: Vec<String>) -> anyhow::Result<Outcome> {
    if args.k == 0 || args.k_prime == 0 || args.n == 0 || args.m == 0 || args.hidden == 0 {
        return Err(input_error("--k, --k-prime, --n, --m and --hidden must be positive"));
    }
    if !(args.noise >= 0.0) {
        return Err(input_error(format!("--noise must be >= 0, got {}", args.noise)));
    }
    let g_seed = RngSeed::new(args.g_seed, 0);
    let h_seed = RngSeed::new(args.h_seed, 0);
    let matrix_seed = RngSeed::new(args.matrix_seed, 0);
    let latent_seed = RngSeed::new(args.latent_seed, 0);
    let noise_seed = RngSeed::new(args.noise_seed, 0);

    let g = random_relu_generator(args.k, args.hidden, args.n, g_seed)?;
    let h = random_relu_generator(args.k_prime, args.hidden, args.m, h_seed)?;
    let mut rng = latent_seed.rng();
    let u = standard_normal_vec(&mut rng, args.k);
    let v = standard_normal_vec(&mut rng, args.k_prime);
    let x = g.forward(&u)?;
    let y = h.forward(&v)?;
    let a = sample_matrix(&EnsembleSpec::new(args.ensemble), args.m, args.n, matrix_seed)?;
    let mut b = MixingOperator::new(a).apply(&x, &y)?;
    let noise = if args.noise > 0.0 {
        let xi = standard_normal_vec(&mut noise_seed.rng(), args.m);
        let s = args.noise / norm(&xi);
        let eta: Vec<f64> = xi.into_iter().map(|e| e * s).collect();
        b.iter_mut().zip(&eta).for_each(|(bi, e)| *bi += e);
        Some(eta)
    } else {
        None
    };

    let dir = &args.out_dir;
    let mut manifest = RunManifest::new("generate", argv, &args)?;
    manifest
        .seed("g", g_seed)
        .seed("h", h_seed)
        .seed("matrix", matrix_seed)
        .seed("latent", latent_seed);
    for (name, net) in [("g.json", &g), ("h.json", &h)] {
        let path = dir.join(name);
        save_weights(net, &path)?;
        manifest.artifact(&path);
    }
    let mut vectors = vec![
        ("mixture.json", b),
        ("u_star.json", u),
        ("v_star.json", v),
        ("x_star.json", x),
        ("y_star.json", y),
    ];
    if let Some(eta) = noise {
        manifest.seed("noise", noise_seed);
        vectors.push(("noise.json", eta));
    }
    for (name, data) in &vectors {
        let path = dir.join(name);
        save_vector(data, &path)?;
        manifest.artifact(&path);
    }
    manifest.write(&dir.join(MANIFEST_NAME))?;
    Ok(Outcome::Passed)
}
