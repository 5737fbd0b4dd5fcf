use std::path::{Path, PathBuf};

use clap::ValueEnum;
use demix_core::conclab::{
    build_ball_net, deviation_experiment, gaussian_complexity_mc, gaussian_width_mc, image_net, random_relu_generator,
    srec_check_product, DeviationReport, Estimate, FinitePointSet, DEFAULT_NET_CAP,
};
use demix_core::ensemble::standard_normal_vec;
use demix_core::io::{read_json_value, write_json};
use demix_core::{sample_matrix, EnsembleKind, EnsembleSpec, MixingOperator, RngSeed};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::manifest::{RunManifest, MANIFEST_NAME};
use crate::output::{all_passed, num, write_csv, write_png, Assertion};
use crate::plot::{self, Plot};
use crate::{input_error, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Deviation,
    Srec,
    Width,
}

#[derive(clap::Args, Debug, Serialize)]
pub struct Args {
    #[arg(value_enum)]
    pub check: Check,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn read_config<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let doc = read_json_value(path)?;
    serde_json::from_value(doc).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn one() -> f64 {
    1.0
}

fn three() -> f64 {
    3.0
}

fn default_trials() -> usize {
    100
}

fn default_draws() -> u64 {
    20
}

fn default_hidden() -> usize {
    32
}

fn gaussian() -> EnsembleKind {
    EnsembleKind::Gaussian
}

// ---------------------------------------------------------------------------
// Point sets

/// Points of a deviation set, each `(x, y) ∈ R^n × R^m`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DeviationPoints {
    /// Rows of length `n + m`.
    Explicit { points: Vec<Vec<f64>> },
    /// `x ~ N(0, I/n)`, `y ~ N(0, I/m)`.
    Random { count: usize, seed: u64 },
    /// `x = 0`, `y ~ N(0, I/m)`.
    PureY { count: usize, seed: u64 },
}

fn scaled_normal(seed: RngSeed, len: usize) -> Vec<f64> {
    let s = 1.0 / (len as f64).sqrt();
    standard_normal_vec(&mut seed.rng(), len).into_iter().map(|v| v * s).collect()
}

impl DeviationPoints {
    fn build(&self, n: usize, m: usize) -> anyhow::Result<FinitePointSet> {
        let rows: Vec<Vec<f64>> = match self {
            Self::Explicit { points } => points.clone(),
            Self::Random { count, seed } => (0..*count as u64)
                .map(|i| {
                    let mut z = scaled_normal(RngSeed::new(*seed, 2 * i), n);
                    z.extend(scaled_normal(RngSeed::new(*seed, 2 * i + 1), m));
                    z
                })
                .collect(),
            Self::PureY { count, seed } => (0..*count as u64)
                .map(|i| {
                    let mut z = vec![0.0; n];
                    z.extend(scaled_normal(RngSeed::new(*seed, i), m));
                    z
                })
                .collect(),
        };
        if rows.iter().any(|r| r.len() != n + m) {
            return Err(input_error(format!("every point needs n + m = {} coordinates", n + m)));
        }
        Ok(FinitePointSet::new(rows)?)
    }
}

/// Points of a width set.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WidthPoints {
    Explicit { points: Vec<Vec<f64>> },
    /// Standard normal points in `R^dim`.
    Random { count: usize, dim: usize, seed: u64 },
}

impl WidthPoints {
    fn build(&self) -> anyhow::Result<FinitePointSet> {
        let rows = match self {
            Self::Explicit { points } => points.clone(),
            Self::Random { count, dim, seed } => {
                let mut rng = RngSeed::new(*seed, 0).rng();
                (0..*count).map(|_| standard_normal_vec(&mut rng, *dim)).collect()
            }
        };
        Ok(FinitePointSet::new(rows)?)
    }
}

// ---------------------------------------------------------------------------
// Deviation

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviationConfig {
    #[serde(default = "gaussian")]
    pub ensemble: EnsembleKind,
    pub m: usize,
    pub n: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "one")]
    pub t: f64,
    pub seed: u64,
    pub points: DeviationPoints,
    /// Fails the run when the empirical constant exceeds this.
    #[serde(default)]
    pub max_empirical_constant: Option<f64>,
}

#[derive(Debug, Serialize)]
struct DeviationOutput<'a> {
    config: &'a DeviationConfig,
    report: &'a DeviationReport,
    assertions: &'a [Assertion],
    passed: bool,
}

fn deviation(cfg: &DeviationConfig, dir: &Path, manifest: &mut RunManifest) -> anyhow::Result<bool> {
    let set = cfg.points.build(cfg.n, cfg.m)?;
    let seed = RngSeed::new(cfg.seed, 0);
    manifest.seed("deviation", seed);
    let rep = deviation_experiment(&EnsembleSpec::new(cfg.ensemble), &set, cfg.m, cfg.n, cfg.trials, cfg.t, seed)?;

    let has_x = set.points().iter().any(|z| z[..cfg.n].iter().any(|&v| v != 0.0));
    let c = rep.empirical_constant;
    let mut assertions = vec![Assertion::new("empirical constant finite", c.is_finite(), num(c))];
    if has_x {
        assertions.push(Assertion::new("empirical constant positive", c > 0.0, num(c)));
    } else {
        let zero = rep.sup_deviation_samples.iter().all(|&s| s == 0.0);
        let worst = rep.sup_deviation_samples.iter().cloned().fold(0.0, f64::max);
        assertions.push(Assertion::new("pure-y deviation is zero", zero, format!("max {}", num(worst))));
    }
    if let Some(max) = cfg.max_empirical_constant {
        assertions.push(Assertion::new("empirical constant within limit", c <= max, format!("{} <= {}", num(c), num(max))));
    }
    let passed = all_passed(&assertions);

    let json = dir.join("deviation.json");
    write_json(&json, &DeviationOutput { config: cfg, report: &rep, assertions: &assertions, passed })?;
    let rows: Vec<Vec<String>> = rep
        .sup_deviation_samples
        .iter()
        .enumerate()
        .map(|(i, s)| vec![i.to_string(), num(*s)])
        .collect();
    let csv = dir.join("deviation.csv");
    write_csv(&csv, &["trial", "sup_deviation"], &rows)?;

    // Empirical quantile curve of the sup-deviation against the bound scale.
    let mut sorted = rep.sup_deviation_samples.clone();
    sorted.sort_by(f64::total_cmp);
    let denom = (sorted.len().max(2) - 1) as f64;
    let png = dir.join("deviation.png");
    let plot = Plot {
        series: vec![sorted.iter().enumerate().map(|(i, s)| (i as f64 / denom, *s)).collect()],
        reference_y: vec![rep.deviation_quantile],
        ..Default::default()
    };
    write_png(&png, plot::render(&plot).into())?;
    for p in [&json, &csv, &png] {
        manifest.artifact(p);
    }
    Ok(passed)
}

// ---------------------------------------------------------------------------
// S-REC

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SrecConfig {
    pub k: usize,
    pub k_prime: usize,
    /// Latent ball radius.
    #[serde(default = "one")]
    pub radius: f64,
    /// Net resolution in each latent ball.
    pub eta: f64,
    pub n: usize,
    pub m: usize,
    #[serde(default = "default_hidden")]
    pub hidden: usize,
    /// `G` uses stream 0 and `H` stream 1.
    pub generator_seed: u64,
    #[serde(default = "gaussian")]
    pub ensemble: EnsembleKind,
    pub gamma: f64,
    pub delta: f64,
    #[serde(default = "default_draws")]
    pub draws: u64,
    /// Draw `d` uses stream `d`.
    pub matrix_seed: u64,
    /// Fraction of draws in which the condition must hold.
    #[serde(default = "one")]
    pub min_hold_fraction: f64,
}

#[derive(Debug, Serialize)]
struct SrecDraw {
    draw: u64,
    min_margin: f64,
    argmin_pair: Option<(usize, usize)>,
    holds: bool,
}

#[derive(Debug, Serialize)]
struct SrecOutput<'a> {
    config: &'a SrecConfig,
    net_u_points: usize,
    net_v_points: usize,
    image_points: usize,
    image_delta: f64,
    pair_count: u64,
    draws: &'a [SrecDraw],
    hold_fraction: f64,
    min_margin: f64,
    assertions: &'a [Assertion],
    passed: bool,
}

fn srec(cfg: &SrecConfig, dir: &Path, manifest: &mut RunManifest) -> anyhow::Result<bool> {
    if cfg.draws == 0 {
        return Err(input_error("draws must be positive"));
    }
    if !(0.0..=1.0).contains(&cfg.min_hold_fraction) {
        return Err(input_error("min_hold_fraction must lie in [0, 1]"));
    }
    let g_seed = RngSeed::new(cfg.generator_seed, 0);
    let h_seed = RngSeed::new(cfg.generator_seed, 1);
    manifest.seed("g", g_seed).seed("h", h_seed).seed("matrix", RngSeed::new(cfg.matrix_seed, 0));
    let g = random_relu_generator(cfg.k, cfg.hidden, cfg.n, g_seed)?;
    let h = random_relu_generator(cfg.k_prime, cfg.hidden, cfg.m, h_seed)?;
    let nu = build_ball_net(cfg.k, cfg.radius, cfg.eta)?;
    let nv = build_ball_net(cfg.k_prime, cfg.radius, cfg.eta)?;
    let img = image_net(&nu, &nv, &g, &h, DEFAULT_NET_CAP)?;
    let spec = EnsembleSpec::new(cfg.ensemble);

    let mut draws = Vec::new();
    let mut pair_count = 0;
    for d in 0..cfg.draws {
        let a = sample_matrix(&spec, cfg.m, cfg.n, RngSeed::new(cfg.matrix_seed, d))?;
        let rep = srec_check_product(&MixingOperator::new(a), &img.xs, &img.ys, cfg.gamma, cfg.delta)?;
        pair_count = rep.pair_count;
        draws.push(SrecDraw {
            draw: d,
            min_margin: rep.min_margin,
            argmin_pair: rep.argmin_pair,
            holds: rep.holds(),
        });
    }
    let holds = draws.iter().filter(|d| d.holds).count();
    let hold_fraction = holds as f64 / cfg.draws as f64;
    let min_margin = draws.iter().map(|d| d.min_margin).fold(f64::INFINITY, f64::min);
    let assertions = vec![Assertion::new(
        "condition holds often enough",
        hold_fraction >= cfg.min_hold_fraction,
        format!("{holds}/{} draws, need fraction {}", cfg.draws, num(cfg.min_hold_fraction)),
    )];
    let passed = all_passed(&assertions);

    let json = dir.join("srec.json");
    write_json(
        &json,
        &SrecOutput {
            config: cfg,
            net_u_points: nu.len(),
            net_v_points: nv.len(),
            image_points: img.set.len(),
            image_delta: img.delta,
            pair_count,
            draws: &draws,
            hold_fraction,
            min_margin,
            assertions: &assertions,
            passed,
        },
    )?;
    let rows: Vec<Vec<String>> = draws
        .iter()
        .map(|d| vec![d.draw.to_string(), num(d.min_margin), d.holds.to_string()])
        .collect();
    let csv = dir.join("srec.csv");
    write_csv(&csv, &["draw", "min_margin", "holds"], &rows)?;
    let png = dir.join("srec.png");
    let plot = Plot {
        series: vec![draws.iter().map(|d| (d.draw as f64, d.min_margin)).collect()],
        reference_y: vec![0.0],
        ..Default::default()
    };
    write_png(&png, plot::render(&plot).into())?;
    for p in [&json, &csv, &png] {
        manifest.artifact(p);
    }
    Ok(passed)
}

// ---------------------------------------------------------------------------
// Width

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WidthConfig {
    pub points: WidthPoints,
    pub samples: usize,
    pub seed: u64,
    /// Known width, checked to `stderrs` standard errors.
    #[serde(default)]
    pub expected_width: Option<f64>,
    #[serde(default)]
    pub expected_complexity: Option<f64>,
    #[serde(default = "three")]
    pub stderrs: f64,
}

#[derive(Debug, Serialize)]
struct WidthOutput<'a> {
    config: &'a WidthConfig,
    points: usize,
    rad: f64,
    min_norm: f64,
    width: Estimate,
    complexity: Estimate,
    /// `(ŵ + rad)/3`
    complexity_lower: f64,
    /// `2(ŵ + min-norm)`
    complexity_upper: f64,
    assertions: &'a [Assertion],
    passed: bool,
}

fn width(cfg: &WidthConfig, dir: &Path, manifest: &mut RunManifest) -> anyhow::Result<bool> {
    let set = cfg.points.build()?;
    let w_seed = RngSeed::new(cfg.seed, 0);
    let g_seed = RngSeed::new(cfg.seed, 1);
    manifest.seed("width", w_seed).seed("complexity", g_seed);
    let w = gaussian_width_mc(&set, cfg.samples, w_seed)?;
    let g = gaussian_complexity_mc(&set, cfg.samples, g_seed)?;
    let lower = (w.mean + set.rad()) / 3.0;
    let upper = 2.0 * (w.mean + set.min_norm());
    let slack = cfg.stderrs * (w.stderr + g.stderr);
    let mut assertions = vec![Assertion::new(
        "complexity sandwich",
        lower <= g.mean + slack && g.mean <= upper + slack,
        format!("{} <= {} <= {} (slack {})", num(lower), num(g.mean), num(upper), num(slack)),
    )];
    for (name, est, want) in [("width", &w, cfg.expected_width), ("complexity", &g, cfg.expected_complexity)] {
        if let Some(want) = want {
            let gap = (est.mean - want).abs();
            assertions.push(Assertion::new(
                &format!("{name} matches expected"),
                gap <= cfg.stderrs * est.stderr,
                format!("|{} - {}| = {} vs {} stderr {}", num(est.mean), num(want), num(gap), num(cfg.stderrs), num(est.stderr)),
            ));
        }
    }
    let passed = all_passed(&assertions);

    let json = dir.join("width.json");
    write_json(
        &json,
        &WidthOutput {
            config: cfg,
            points: set.len(),
            rad: set.rad(),
            min_norm: set.min_norm(),
            width: w,
            complexity: g,
            complexity_lower: lower,
            complexity_upper: upper,
            assertions: &assertions,
            passed,
        },
    )?;
    let rows = vec![
        vec!["width".into(), num(w.mean), num(w.stderr)],
        vec!["complexity".into(), num(g.mean), num(g.stderr)],
        vec!["complexity_lower".into(), num(lower), "0.0".into()],
        vec!["complexity_upper".into(), num(upper), "0.0".into()],
    ];
    let csv = dir.join("width.csv");
    write_csv(&csv, &["quantity", "mean", "stderr"], &rows)?;
    // Lower bound, estimate, upper bound, left to right.
    let png = dir.join("width.png");
    let plot = Plot {
        series: vec![vec![(0.0, lower), (1.0, g.mean), (2.0, upper)], vec![(1.0, w.mean)]],
        ..Default::default()
    };
    write_png(&png, plot::render(&plot).into())?;
    for p in [&json, &csv, &png] {
        manifest.artifact(p);
    }
    Ok(passed)
}

pub fn run(args: Args, argv: Vec<String>) -> anyhow::Result<Outcome> {
    let dir = &args.out_dir;
    let mut manifest = RunManifest::new("verify", argv, &args)?;
    let passed = match args.check {
        Check::Deviation => {
            let cfg: DeviationConfig = read_config(&args.config)?;
            manifest.config = serde_json::json!({ "args": manifest.config, "config": cfg });
            deviation(&cfg, dir, &mut manifest)?
        }
        Check::Srec => {
            let cfg: SrecConfig = read_config(&args.config)?;
            manifest.config = serde_json::json!({ "args": manifest.config, "config": cfg });
            srec(&cfg, dir, &mut manifest)?
        }
        Check::Width => {
            let cfg: WidthConfig = read_config(&args.config)?;
            manifest.config = serde_json::json!({ "args": manifest.config, "config": cfg });
            width(&cfg, dir, &mut manifest)?
        }
    };
    manifest.write(&dir.join(MANIFEST_NAME))?;
    Ok(if passed { Outcome::Passed } else { Outcome::AssertionsFailed })
}
