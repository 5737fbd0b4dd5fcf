use std::path::{Path, PathBuf};

use demix_core::conclab::{phase_experiment, PhaseConfig, PhaseReport};
use demix_core::io::write_json;
use demix_core::RngSeed;
use serde::{Deserialize, Serialize};

use crate::manifest::{RunManifest, MANIFEST_NAME};
use crate::output::{all_passed, num, write_csv, write_png, Assertion};
use crate::plot::{self, Plot};
use crate::verify::read_config;
use crate::Outcome;

#[derive(clap::Args, Debug, Serialize)]
pub struct Args {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn yes() -> bool {
    true
}

/// Experiment parameters plus the assertions to check on the result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseFile {
    #[serde(flatten)]
    pub experiment: PhaseConfig,
    /// Sign tests: no significant increase between neighbours, a
    /// significant decrease from the first to the last `m`.
    #[serde(default = "yes")]
    pub require_monotone: bool,
    #[serde(default)]
    pub max_median_at_largest_m: Option<f64>,
    #[serde(default)]
    pub max_success_at_smallest_m: Option<f64>,
}

#[derive(Debug, Serialize)]
struct PhaseOutput<'a> {
    #[serde(flatten)]
    report: &'a PhaseReport,
    assertions: &'a [Assertion],
    passed: bool,
}

fn assertions(file: &PhaseFile, rep: &PhaseReport) -> Vec<Assertion> {
    let mut out = Vec::new();
    if file.require_monotone {
        for mono in &rep.monotonicity {
            out.push(Assertion::new(
                &format!("error non-increasing in m at noise {}", num(mono.noise_level)),
                mono.passes,
                format!(
                    "adjacent increase p {:?}; overall decrease p {}",
                    mono.adjacent_increase_p.iter().map(|p| num(*p)).collect::<Vec<_>>(),
                    num(mono.overall_decrease_p)
                ),
            ));
        }
    }
    let largest = rep.config.m_list.iter().max().copied();
    let smallest = rep.config.m_list.iter().min().copied();
    for row in &rep.rows {
        if let (Some(max), true) = (file.max_median_at_largest_m, Some(row.m) == largest) {
            out.push(Assertion::new(
                &format!("median error at m={} noise {}", row.m, num(row.noise_level)),
                row.median_relative_error <= max,
                format!("{} <= {}", num(row.median_relative_error), num(max)),
            ));
        }
        if let (Some(max), true) = (file.max_success_at_smallest_m, Some(row.m) == smallest) {
            out.push(Assertion::new(
                &format!("success rate at m={} noise {}", row.m, num(row.noise_level)),
                row.success_rate <= max,
                format!("{} <= {}", num(row.success_rate), num(max)),
            ));
        }
    }
    out
}

/// Median relative error against `m`, one series per noise level.
pub fn phase_plot(rep: &PhaseReport) -> Plot {
    let series = rep
        .config
        .noise_levels
        .iter()
        .map(|&level| {
            let mut pts: Vec<(f64, f64)> = rep
                .rows
                .iter()
                .filter(|r| r.noise_level == level)
                .map(|r| (r.m as f64, r.median_relative_error))
                .collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            pts
        })
        .collect();
    Plot {
        series,
        log_x: true,
        log_y: true,
        ..Default::default()
    }
}

pub fn write_phase_outputs(dir: &Path, rep: &PhaseReport, checks: &[Assertion]) -> anyhow::Result<Vec<PathBuf>> {
    let passed = all_passed(checks);
    let json = dir.join("phase.json");
    write_json(&json, &PhaseOutput { report: rep, assertions: checks, passed })?;
    let rows: Vec<Vec<String>> = rep
        .rows
        .iter()
        .map(|r| {
            vec![
                r.m.to_string(),
                num(r.noise_level),
                num(r.median_relative_error),
                num(r.median_absolute_error),
                num(r.success_rate),
            ]
        })
        .collect();
    let csv = dir.join("phase.csv");
    write_csv(
        &csv,
        &["m", "noise_level", "median_relative_error", "median_absolute_error", "success_rate"],
        &rows,
    )?;
    let png = dir.join("phase.png");
    write_png(&png, plot::render(&phase_plot(rep)).into())?;
    Ok(vec![json, csv, png])
}

pub fn run(args: Args, argv: Vec<String>) -> anyhow::Result<Outcome> {
    let file: PhaseFile = read_config(&args.config)?;
    let rep = phase_experiment(&file.experiment)?;
    let checks = assertions(&file, &rep);
    let dir = &args.out_dir;
    let mut manifest = RunManifest::new("phase", argv, &args)?;
    manifest.config = serde_json::json!({ "args": manifest.config, "config": file });
    manifest.seed("phase", RngSeed::new(file.experiment.seed, 0));
    for p in write_phase_outputs(dir, &rep, &checks)? {
        manifest.artifact(&p);
    }
    manifest.write(&dir.join(MANIFEST_NAME))?;
    Ok(if all_passed(&checks) { Outcome::Passed } else { Outcome::AssertionsFailed })
}
