//! CSV series, raw basis files and the JSON run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ligep::ReducedBasis;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::runner::{Experiment, RunOutcome};
use crate::{BenchError, Result};

pub const MANIFEST: &str = "manifest.json";

/// `{:.16e}` keeps 17 significant digits, enough to round-trip an `f64`.
fn fmt_value(x: f64) -> String {
    format!("{x:.16e}")
}

/// Two-column CSV with the index column scaled by `dt` (or left as an
/// integer when `dt` is `None`).
pub fn series_csv(header: &str, values: &[f64], dt: Option<f64>) -> String {
    let mut s = String::with_capacity(32 * (values.len() + 1));
    s.push_str(header);
    s.push('\n');
    for (n, &v) in values.iter().enumerate() {
        match dt {
            Some(dt) => writeln!(s, "{},{}", fmt_value(n as f64 * dt), fmt_value(v)),
            None => writeln!(s, "{},{}", n + 1, fmt_value(v)),
        }
        .expect("writing to a String cannot fail");
    }
    s
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| BenchError::io(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| BenchError::io(path, e))
}

/// Writes `bytes` to a sibling temporary file and renames it into place, so
/// readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    write_file(&tmp, bytes)?;
    fs::rename(&tmp, path).map_err(|e| BenchError::io(path, e))
}

/// Column-major little-endian `f64` bytes of a basis matrix.
pub fn basis_bytes(basis: &ReducedBasis) -> Vec<u8> {
    let v = &basis.v;
    let mut out = Vec::with_capacity(8 * v.nrows() * v.ncols());
    for j in 0..v.ncols() {
        for &x in v.col_as_slice(j) {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FomRecord {
    pub nodes: usize,
    pub steps: usize,
    pub energy_csv: String,
    pub drift_csv: String,
    pub energy0: f64,
    pub max_drift: f64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisRecord {
    pub method: String,
    pub file: String,
    pub sha256: String,
    pub rows: usize,
    pub cols: usize,
    pub spectrum_csv: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFiles {
    pub energy: String,
    pub drift: String,
    pub gap: String,
    pub state_error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: String,
    pub rank: usize,
    pub files: RunFiles,
    pub steps_completed: usize,
    pub truncated: bool,
    pub truncated_at: Option<usize>,
    pub failure: Option<String>,
    pub max_drift: Option<f64>,
    pub max_state_error: Option<f64>,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: serde_json::Value,
    pub fom: Option<FomRecord>,
    pub bases: Vec<BasisRecord>,
    pub runs: Vec<RunRecord>,
}

impl Manifest {
    pub fn new(config: &ExperimentConfig) -> Self {
        let config = serde_json::to_value(config).expect("configuration is plain data");
        Self { config, fom: None, bases: Vec::new(), runs: Vec::new() }
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path).map_err(|e| BenchError::io(&path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| BenchError::Manifest { path: path.display().to_string(), reason: e.to_string() })
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest is plain data");
        text.push('\n');
        write_atomic(&dir.join(MANIFEST), text.as_bytes())
    }

    pub fn failed_runs(&self) -> impl Iterator<Item = &RunRecord> {
        self.runs.iter().filter(|r| r.failure.is_some())
    }
}

fn rel(parts: &[&str]) -> String {
    parts.join("/")
}

/// Writes the full-order energy and drift series.
pub fn write_fom(dir: &Path, exp: &Experiment) -> Result<FomRecord> {
    create_dir(&dir.join("fom"))?;
    let dt = exp.config.dt;
    let e = &exp.fom.energy;
    let drift: Vec<f64> = e.iter().map(|x| (x - e[0]).abs()).collect();
    let energy_csv = rel(&["fom", "energy.csv"]);
    let drift_csv = rel(&["fom", "drift.csv"]);
    write_file(&dir.join(&energy_csv), series_csv("t,energy", e, Some(dt)).as_bytes())?;
    write_file(&dir.join(&drift_csv), series_csv("t,abs_drift", &drift, Some(dt)).as_bytes())?;
    Ok(FomRecord {
        nodes: exp.grid.len(),
        steps: exp.fom.u.len() - 1,
        energy_csv,
        drift_csv,
        energy0: e[0],
        max_drift: drift.iter().copied().fold(0.0, f64::max),
        wall_seconds: exp.fom.wall_seconds,
    })
}

fn write_one_basis(dir: &Path, method: &str, spectrum_name: &str, basis: &ReducedBasis) -> Result<BasisRecord> {
    let bytes = basis_bytes(basis);
    let file = rel(&["basis", &format!("{method}.bin")]);
    let spectrum_csv = rel(&["basis", spectrum_name]);
    write_file(&dir.join(&file), &bytes)?;
    write_file(&dir.join(&spectrum_csv), series_csv("k,sigma", &basis.singular_values, None).as_bytes())?;
    Ok(BasisRecord {
        method: method.to_string(),
        file,
        sha256: sha256_hex(&bytes),
        rows: basis.v.nrows(),
        cols: basis.v.ncols(),
        spectrum_csv,
    })
}

/// Writes each basis as raw bytes next to its singular value spectrum.
pub fn write_bases(dir: &Path, exp: &Experiment) -> Result<Vec<BasisRecord>> {
    create_dir(&dir.join("basis"))?;
    let mut out = vec![write_one_basis(dir, "ligep-rom", "spectrum.csv", &exp.ligep_basis)?];
    let galerkin = exp.galerkin_basis.as_ref().or(exp.wave_galerkin.as_ref().map(|w| &w.basis));
    if let Some(b) = galerkin {
        out.push(write_one_basis(dir, "pod-galerkin", "galerkin_spectrum.csv", b)?);
    }
    Ok(out)
}

/// Writes the four series of one reduced run.
pub fn write_run(dir: &Path, dt: f64, run: &RunOutcome) -> Result<RunRecord> {
    let name = format!("{}-r{}", run.method, run.rank);
    create_dir(&dir.join(&name))?;
    let files = RunFiles {
        energy: rel(&[&name, "energy.csv"]),
        drift: rel(&[&name, "drift.csv"]),
        gap: rel(&[&name, "gap.csv"]),
        state_error: rel(&[&name, "state_error.csv"]),
    };
    for (file, header, values) in [
        (&files.energy, "t,energy", &run.energy),
        (&files.drift, "t,abs_drift", &run.drift),
        (&files.gap, "t,abs_gap", &run.gap),
        (&files.state_error, "t,rel_err", &run.state_error),
    ] {
        write_file(&dir.join(file), series_csv(header, values, Some(dt)).as_bytes())?;
    }
    let max = |v: &[f64]| (!v.is_empty()).then(|| v.iter().copied().fold(0.0, f64::max));
    Ok(RunRecord {
        method: run.method.to_string(),
        rank: run.rank,
        files,
        steps_completed: run.states.saturating_sub(1),
        truncated: run.truncated_at.is_some(),
        truncated_at: run.truncated_at,
        failure: run.failure.clone(),
        max_drift: max(&run.drift),
        max_state_error: max(&run.state_error),
        wall_seconds: run.wall_seconds,
    })
}
