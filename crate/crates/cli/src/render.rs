use std::path::PathBuf;

use demix_core::conclab::PhaseReport;
use demix_core::io::read_json_value;
use demix_core::RecoveryResult;
use serde::Serialize;

use crate::demix::loss_plot;
use crate::manifest::{beside, RunManifest};
use crate::output::write_png;
use crate::phase::phase_plot;
use crate::{input_error, plot, Outcome};

#[derive(clap::Args, Debug, Serialize)]
pub struct Args {
    /// A demix result (loss trace) or a phase report (error against m).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: Args, argv: Vec<String>) -> anyhow::Result<Outcome> {
    let doc = read_json_value(&args.input)?;
    let chart = if doc.get("loss_trace").is_some() {
        let res: RecoveryResult = serde_json::from_value(doc)?;
        loss_plot(&res)
    } else if doc.get("rows").is_some() && doc.get("monotonicity").is_some() {
        let rep: PhaseReport = serde_json::from_value(doc)?;
        phase_plot(&rep)
    } else {
        return Err(input_error(format!(
            "{}: neither a demix result nor a phase report",
            args.input.display()
        )));
    };
    write_png(&args.out, plot::render(&chart).into())?;
    let mut manifest = RunManifest::new("render", argv, &args)?;
    manifest.artifact(&args.out);
    manifest.write(&beside(&args.out))?;
    Ok(Outcome::Passed)
}
