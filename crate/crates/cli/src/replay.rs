use std::path::PathBuf;

use crate::manifest::RunManifest;
use crate::{input_error, Outcome};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Manifest written by an earlier run. Relative paths in it resolve
    /// against the current directory, as they did originally.
    pub manifest: PathBuf,
}

pub fn run(args: Args) -> anyhow::Result<Outcome> {
    let manifest = RunManifest::load(&args.manifest)?;
    if manifest.argv.first().map(String::as_str) == Some("replay") {
        return Err(input_error("a manifest cannot replay another replay"));
    }
    if manifest.tool_version != env!("CARGO_PKG_VERSION") {
        log::warn!(
            "manifest written by version {}, replaying with {}",
            manifest.tool_version,
            env!("CARGO_PKG_VERSION")
        );
    }
    crate::run(manifest.argv)
}
