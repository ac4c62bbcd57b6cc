//! One experiment: the full-order run, bases from the training window and
//! every requested reduced run.

use std::time::Instant;

use faer::Mat;
use ligep::diagnostics::{drift_series, energy_series, gap_series, relative_state_error, EnergyLevel};
use ligep::grid::{OperatorKind, Stencil};
use ligep::kahan::{kahan_step, LinearKahan};
use ligep::linalg::{identity, matvec, matvec_t, LuFactor};
use ligep::msfom::{reconstruct_aux, simulate};
use ligep::msrom::galerkin::{wave_galerkin, wave_galerkin_initial, GalerkinModel};
use ligep::msrom::{integrate, ImplicitRom, ReducedOperators, RomRun, WaveRom};
use ligep::pod::{assemble_snapshots, compute_basis};
use ligep::{Grid1D, Model, ModelKind, ReducedBasis, SnapshotLayout, SnapshotSet};

use crate::config::{ExperimentConfig, Method};

/// Full-order trajectory and its polarized energy.
#[derive(Debug, Clone)]
pub struct FomData {
    pub u: Vec<Vec<f64>>,
    pub energy: Vec<f64>,
    pub wall_seconds: f64,
}

/// Kahan solution of the unreduced semidiscrete wave system, the reference
/// for the wave POD-Galerkin baseline.
#[derive(Debug, Clone)]
pub struct WaveGalerkinFom {
    pub y0: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub basis: ReducedBasis,
}

/// Everything the reduced runs need, computed once per configuration.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub model: Model,
    pub grid: Grid1D,
    pub fom: FomData,
    /// Global-snapshot basis of rank `max(ranks)` with its full spectrum.
    pub ligep_basis: ReducedBasis,
    /// Basis of the `u` snapshots (KdV, Camassa-Holm).
    pub galerkin_basis: Option<ReducedBasis>,
    pub wave_galerkin: Option<WaveGalerkinFom>,
}

/// Result of one `(method, r)` reduced run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub method: Method,
    pub rank: usize,
    /// Number of states produced, including the initial ones.
    pub states: usize,
    pub energy: Vec<f64>,
    pub drift: Vec<f64>,
    pub gap: Vec<f64>,
    pub state_error: Vec<f64>,
    pub truncated_at: Option<usize>,
    pub failure: Option<String>,
    pub wall_seconds: f64,
}

impl RunOutcome {
    pub fn max_drift(&self) -> f64 {
        self.drift.iter().copied().fold(0.0, f64::max)
    }

    /// Largest drift over states after `from`.
    pub fn max_drift_after(&self, from: usize) -> f64 {
        self.drift.iter().skip(from).copied().fold(0.0, f64::max)
    }

    pub fn completed(&self) -> bool {
        self.truncated_at.is_none() && self.failure.is_none()
    }
}

/// Progress sink; the CLI prints to stderr unless `--quiet`.
pub type Progress<'a> = &'a dyn Fn(&str);

fn snapshot_times(count: usize, dt: f64) -> Vec<f64> {
    (0..count).map(|n| n as f64 * dt).collect()
}

/// POD basis of the global snapshot matrix of `u_train` and its
/// reconstructed auxiliary variables.
pub fn ligep_basis(model: &Model, grid: &Grid1D, dt: f64, u_train: &[Vec<f64>], r: usize) -> ligep::Result<ReducedBasis> {
    let snaps = reconstruct_aux(model, u_train, grid, dt)?;
    let times = snapshot_times(snaps.snapshot_count(), dt);
    let set = assemble_snapshots(model.kind(), &snaps, &times, SnapshotLayout::Global)?;
    compute_basis(&set, r)
}

/// POD basis of the `u` snapshots alone.
pub fn u_basis(u_train: &[Vec<f64>], dt: f64, r: usize) -> ligep::Result<ReducedBasis> {
    let times = snapshot_times(u_train.len(), dt);
    let set = SnapshotSet::from_components(&["u"], &[u_train.to_vec()], &times, SnapshotLayout::Global)?;
    compute_basis(&set, r)
}

/// Implicit midpoint (Kahan) steps of `u_t = v`, `v_t = D_xx u` with the
/// velocity eliminated:
/// `(I - dt²/4 D_xx) u' = (I + dt²/4 D_xx) u + dt v`, `v' = v + dt/2 D_xx (u + u')`.
pub fn wave_semidiscrete(grid: &Grid1D, dt: f64, y0: &[f64], steps: usize) -> ligep::Result<Vec<Vec<f64>>> {
    let n = grid.len();
    let dxx = Stencil::for_kind(OperatorKind::SecondDiff, grid.dx());
    let mut a = identity(n);
    dxx.add_to(&mut a, -0.25 * dt * dt);
    let lu = LuFactor::new(&a)?;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(y0.to_vec());
    for step in 0..steps {
        let (u, v) = out[step].split_at(n);
        let du = dxx.apply(u);
        let rhs: Vec<f64> = (0..n).map(|j| u[j] + 0.25 * dt * dt * du[j] + dt * v[j]).collect();
        let u1 = lu.solve(&rhs).map_err(|e| e.at_step(step))?;
        let s: Vec<f64> = u.iter().zip(&u1).map(|(a, b)| a + b).collect();
        let ds = dxx.apply(&s);
        let v1: Vec<f64> = (0..n).map(|j| v[j] + 0.5 * dt * ds[j]).collect();
        out.push([u1, v1].concat());
    }
    Ok(out)
}

fn elapsed(start: Instant) -> f64 {
    start.elapsed().as_secs_f64()
}

impl Experiment {
    /// Runs the full-order model over `[0, t_final]` and builds the bases
    /// from the snapshots in `[0, t_train]`.
    pub fn prepare(config: &ExperimentConfig, progress: Progress<'_>) -> ligep::Result<Self> {
        config.validate().map_err(|e| ligep::Error::InvalidArgument(e.to_string()))?;
        let model = config.model();
        let n = config.nodes().map_err(|e| ligep::Error::InvalidArgument(e.to_string()))?;
        let grid = Grid1D::new(config.domain.0, config.domain.1, n)?;
        let (dt, n_train, n_final) = (config.dt, config.train_steps(), config.final_steps());
        let r_max = config.max_rank();

        progress(&format!("{}: full-order model, N = {n}, {n_final} steps", model.kind()));
        let start = Instant::now();
        let traj = simulate(&model, &grid, dt, n_final)?;
        let energy = energy_series(&model, EnergyLevel::Fom, &traj.u, &grid, dt)?;
        let fom = FomData { u: traj.u, energy, wall_seconds: elapsed(start) };

        progress(&format!("{}: bases from {} training steps", model.kind(), n_train));
        let u_train = &fom.u[..=n_train];
        let ligep_basis = ligep_basis(&model, &grid, dt, u_train, r_max)?;

        let wants_galerkin = config.methods.contains(&Method::PodGalerkin);
        let (galerkin_basis, wave_galerkin) = match (wants_galerkin, model.kind()) {
            (false, _) => (None, None),
            (true, ModelKind::Wave) => {
                let y0 = wave_galerkin_initial(&fom.u[0]);
                let y = wave_semidiscrete(&grid, dt, &y0, n_final)?;
                let times = snapshot_times(n_train + 1, dt);
                let set = SnapshotSet::from_components(&["y"], &[y[..=n_train].to_vec()], &times, SnapshotLayout::Global)?;
                let basis = compute_basis(&set, r_max)?;
                let u = y.iter().map(|s| s[..n].to_vec()).collect();
                (None, Some(WaveGalerkinFom { y0, u, basis }))
            }
            (true, _) => (Some(u_basis(u_train, dt, r_max)?), None),
        };
        Ok(Self { config: config.clone(), model, grid, fom, ligep_basis, galerkin_basis, wave_galerkin })
    }

    pub fn run(&self, method: Method, rank: usize) -> ligep::Result<RunOutcome> {
        let start = Instant::now();
        let (grid, dt, steps) = (&self.grid, self.config.dt, self.config.final_steps());
        let fom_u = &self.fom.u;
        let (run, lifted, energy, reference): (RomRun, Vec<Vec<f64>>, Vec<f64>, &[Vec<f64>]) = match method {
            Method::LigepRom => {
                let basis = self.ligep_basis.truncated(rank)?;
                let ops = ReducedOperators::new(&basis.v, grid)?;
                let run = match self.model {
                    Model::Wave => {
                        let rom = WaveRom::new(&ops, dt)?;
                        let init = vec![ops.project(&fom_u[0]), ops.project(&fom_u[1])];
                        integrate(init, steps, |s| rom.step(&s[s.len() - 2], &s[s.len() - 1]))
                    }
                    _ => {
                        let rom = ImplicitRom::lifted(&ops, &self.model, dt)?;
                        integrate(vec![ops.project(&fom_u[0])], steps, |s| rom.step(&s[s.len() - 1]))
                    }
                };
                let energy = reduced_energy(&self.model, EnergyLevel::Rom(&ops), &run.states, grid, dt)?;
                let lifted = run.states.iter().map(|s| ops.lift(s)).collect();
                (run, lifted, energy, fom_u.as_slice())
            }
            Method::PodGalerkin => match self.model {
                Model::Wave => {
                    let wg = self.wave_galerkin.as_ref().ok_or_else(|| missing_basis(method))?;
                    let w = wg.basis.truncated(rank)?.v;
                    let stepper = LinearKahan::new(&wave_galerkin(&w, grid)?, dt)?;
                    let run = integrate(vec![matvec_t(&w, &wg.y0)], steps, |s| stepper.step(&s[s.len() - 1]));
                    let wu: Mat<f64> = w.subrows(0, grid.len()).to_owned();
                    let lifted: Vec<Vec<f64>> = run.states.iter().map(|s| matvec(&wu, s)).collect();
                    let energy = reduced_energy(&self.model, EnergyLevel::Fom, &lifted, grid, dt)?;
                    (run, lifted, energy, wg.u.as_slice())
                }
                _ => {
                    let basis = self.galerkin_basis.as_ref().ok_or_else(|| missing_basis(method))?;
                    let w = basis.truncated(rank)?.v;
                    let GalerkinModel::Quadratic(sys) = GalerkinModel::new(&self.model, &w, grid)? else {
                        unreachable!("KdV and Camassa-Holm Galerkin models are quadratic")
                    };
                    let run = integrate(vec![matvec_t(&w, &fom_u[0])], steps, |s| kahan_step(&sys, &s[s.len() - 1], dt));
                    let lifted: Vec<Vec<f64>> = run.states.iter().map(|s| matvec(&w, s)).collect();
                    let energy = reduced_energy(&self.model, EnergyLevel::Fom, &lifted, grid, dt)?;
                    (run, lifted, energy, fom_u.as_slice())
                }
            },
        };
        let state_error = lifted
            .iter()
            .zip(reference)
            .map(|(u, r)| relative_state_error(r, u))
            .collect::<ligep::Result<Vec<_>>>()?;
        let drift = if energy.is_empty() { Vec::new() } else { drift_series(&energy)? };
        let len = energy.len().min(self.fom.energy.len());
        let gap = gap_series(&self.fom.energy[..len], &energy[..len])?;
        Ok(RunOutcome {
            method,
            rank,
            states: run.states.len(),
            energy,
            drift,
            gap,
            state_error,
            truncated_at: run.truncated_at,
            failure: run.failure.map(|e| e.to_string()),
            wall_seconds: elapsed(start),
        })
    }

    /// Every configured `(method, r)` pair, in configuration order.
    pub fn run_all(&self, progress: Progress<'_>) -> ligep::Result<Vec<RunOutcome>> {
        let mut out = Vec::new();
        for &method in &self.config.methods {
            for &rank in &self.config.ranks {
                progress(&format!("{}: {method} r = {rank}", self.model.kind()));
                let outcome = self.run(method, rank)?;
                if let Some(t) = outcome.truncated_at {
                    progress(&format!("  diverged at step {t}"));
                }
                if let Some(f) = &outcome.failure {
                    progress(&format!("  failed: {f}"));
                }
                out.push(outcome);
            }
        }
        Ok(out)
    }
}

fn missing_basis(method: Method) -> ligep::Error {
    ligep::Error::InvalidArgument(format!("{method} was not part of the prepared experiment"))
}

/// Energy series of a possibly truncated run; too-short runs have none.
fn reduced_energy(
    model: &Model,
    level: EnergyLevel<'_>,
    states: &[Vec<f64>],
    grid: &Grid1D,
    dt: f64,
) -> ligep::Result<Vec<f64>> {
    let min = if model.kind() == ModelKind::Wave { 3 } else { 2 };
    if states.len() < min {
        return Ok(Vec::new());
    }
    energy_series(model, level, states, grid, dt)
}
