//! Gnuplot scripts for the comparison figures. Scripts reference the CSVs by
//! paths relative to the artifact directory and are run from there.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::report::{Manifest, RunRecord};
use crate::{BenchError, Result};

/// Which per-run series a figure shows.
#[derive(Debug, Clone, Copy)]
struct Figure {
    name: &'static str,
    ylabel: &'static str,
    log: bool,
    with_fom: bool,
    file: fn(&RunRecord) -> &str,
}

const FIGURES: [Figure; 4] = [
    Figure { name: "state_error", ylabel: "relative state error", log: true, with_fom: false, file: |r| &r.files.state_error },
    Figure { name: "energy", ylabel: "energy", log: false, with_fom: true, file: |r| &r.files.energy },
    Figure { name: "drift", ylabel: "|E(t) - E(0)|", log: true, with_fom: true, file: |r| &r.files.drift },
    Figure { name: "gap", ylabel: "|E_rom(t) - E_fom(t)|", log: true, with_fom: false, file: |r| &r.files.gap },
];

fn script(fig: &Figure, manifest: &Manifest) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set terminal pngcairo size 900,600");
    let _ = writeln!(s, "set output '{}.png'", fig.name);
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set xlabel 't'");
    let _ = writeln!(s, "set ylabel '{}'", fig.ylabel);
    let _ = writeln!(s, "set key outside right");
    if fig.log {
        let _ = writeln!(s, "set logscale y");
        let _ = writeln!(s, "set format y '10^{{%L}}'");
    }
    let mut curves = Vec::new();
    if fig.with_fom {
        if let Some(fom) = &manifest.fom {
            let file = if fig.name == "energy" { &fom.energy_csv } else { &fom.drift_csv };
            curves.push(format!("'{file}' skip 1 using 1:2 with lines lw 2 title 'FOM'"));
        }
    }
    for run in &manifest.runs {
        curves.push(format!(
            "'{}' skip 1 using 1:2 with lines title '{} r={}'",
            (fig.file)(run),
            run.method,
            run.rank
        ));
    }
    let _ = writeln!(s, "plot {}", curves.join(", \\\n     "));
    s
}

/// Every CSV a script would read.
fn referenced(manifest: &Manifest) -> Vec<&str> {
    let mut out: Vec<&str> = manifest
        .runs
        .iter()
        .flat_map(|r| [&r.files.energy, &r.files.drift, &r.files.gap, &r.files.state_error])
        .map(String::as_str)
        .collect();
    if let Some(fom) = &manifest.fom {
        out.extend([fom.energy_csv.as_str(), fom.drift_csv.as_str()]);
    }
    out
}

/// Writes `state_error.gp`, `energy.gp`, `drift.gp` and `gap.gp` into `dir`.
/// Fails if the manifest lists no reduced runs or a referenced CSV is
/// missing.
pub fn write_plot_scripts(dir: &Path) -> Result<Vec<PathBuf>> {
    let manifest = Manifest::read(dir)?;
    if manifest.runs.is_empty() {
        return Err(BenchError::MissingArtifact(format!("{}: no reduced runs to plot", dir.display())));
    }
    for file in referenced(&manifest) {
        if !dir.join(file).is_file() {
            return Err(BenchError::MissingArtifact(dir.join(file).display().to_string()));
        }
    }
    FIGURES
        .iter()
        .map(|fig| {
            let path = dir.join(format!("{}.gp", fig.name));
            fs::write(&path, script(fig, &manifest)).map_err(|e| BenchError::io(&path, e))?;
            Ok(path)
        })
        .collect()
}
