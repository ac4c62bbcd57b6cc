//! The stages behind the CLI subcommands.

use std::path::Path;

use crate::plots::write_plot_scripts;
use crate::report::{write_bases, write_fom, write_run, Manifest};
use crate::runner::{Experiment, Progress};
use crate::{ExperimentConfig, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// Full-order run and bases only.
    Fom,
    /// Full-order run, bases and every reduced run.
    Rom,
    /// `Rom` followed by `Compare`.
    All,
}

/// Runs `stage` for `config`, writing artifacts into `out`. Solver failures
/// inside reduced runs are recorded in the manifest, not returned.
pub fn execute(stage: Stage, config: &ExperimentConfig, out: &Path, progress: Progress<'_>) -> Result<Manifest> {
    std::fs::create_dir_all(out).map_err(|e| crate::BenchError::io(out, e))?;
    let exp = Experiment::prepare(config, progress)?;
    let mut manifest = Manifest::new(config);
    manifest.fom = Some(write_fom(out, &exp)?);
    manifest.bases = write_bases(out, &exp)?;
    if stage != Stage::Fom {
        for run in exp.run_all(progress)? {
            manifest.runs.push(write_run(out, config.dt, &run)?);
        }
    }
    manifest.write(out)?;
    if stage == Stage::All {
        write_plot_scripts(out)?;
    }
    Ok(manifest)
}
