//! Error metrics and polarized discrete energies.
//!
//! Every energy is `(Δx/6) Σ_j Ē_j` over two consecutive time levels; the
//! wave energy additionally reconstructs the velocity
//! `vⁿ = δt uⁿ - (dt/2) μt D² uⁿ`, so a wave series over `M` states has
//! `M - 2` entries and a KdV/Camassa-Holm series has `M - 1`.

use crate::error::{Error, Result};
use crate::grid::{Grid1D, Stencil};
use crate::linalg::{matvec, norm2};
use crate::msfom::{central, wave_velocity, Model, ModelKind};
use crate::msrom::ReducedOperators;

/// `‖u - û‖₂ / ‖u‖₂`.
pub fn relative_state_error(u_fom: &[f64], u_rom: &[f64]) -> Result<f64> {
    if u_fom.len() != u_rom.len() {
        return Err(Error::DimensionMismatch { expected: u_fom.len(), found: u_rom.len() });
    }
    let denom = norm2(u_fom);
    if denom == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let diff: Vec<f64> = u_fom.iter().zip(u_rom).map(|(a, b)| a - b).collect();
    Ok(norm2(&diff) / denom)
}

/// Which discrete energy a state sequence is measured with.
#[derive(Debug, Clone, Copy)]
pub enum EnergyLevel<'a> {
    /// Full-grid states with `D = δx½`.
    Fom,
    /// Reduced states lifted with `V` and differentiated with `V D̃`.
    Rom(&'a ReducedOperators),
}

/// Per-level quantities entering the energy density.
struct Level {
    u: Vec<f64>,
    du: Vec<f64>,
}

/// KdV density `-γ²(Duⁿ)² - 2γ²(Duⁿ)(Duⁿ⁺¹) + η(uⁿ)²uⁿ⁺¹`.
fn kdv_density(eta: f64, gamma: f64, a: &Level, b: &Level) -> f64 {
    let g2 = gamma * gamma;
    (0..a.u.len())
        .map(|j| -g2 * a.du[j] * a.du[j] - 2.0 * g2 * a.du[j] * b.du[j] + eta * a.u[j] * a.u[j] * b.u[j])
        .sum()
}

/// Camassa-Holm density `-3(uⁿ)²uⁿ⁺¹ - (Duⁿ)²uⁿ⁺¹ - 2(Duⁿ)(Duⁿ⁺¹)uⁿ`.
fn ch_density(a: &Level, b: &Level) -> f64 {
    (0..a.u.len())
        .map(|j| -3.0 * a.u[j] * a.u[j] * b.u[j] - a.du[j] * a.du[j] * b.u[j] - 2.0 * a.du[j] * b.du[j] * a.u[j])
        .sum()
}

/// Wave density `2(Duⁿ)(Duⁿ⁺¹) + (Duⁿ)² + 2vⁿvⁿ⁺¹ + (vⁿ)²`.
fn wave_density(du0: &[f64], du1: &[f64], v0: &[f64], v1: &[f64]) -> f64 {
    (0..du0.len())
        .map(|j| 2.0 * du0[j] * du1[j] + du0[j] * du0[j] + 2.0 * v0[j] * v1[j] + v0[j] * v0[j])
        .sum()
}

fn levels(level: EnergyLevel<'_>, states: &[Vec<f64>], d: &Stencil) -> Vec<Level> {
    states
        .iter()
        .map(|s| match level {
            EnergyLevel::Fom => Level { u: s.clone(), du: d.apply(s) },
            EnergyLevel::Rom(ops) => Level { u: ops.lift(s), du: ops.lift_derivative(s) },
        })
        .collect()
}

fn check_states(level: EnergyLevel<'_>, states: &[Vec<f64>], grid: &Grid1D) -> Result<()> {
    let expected = match level {
        EnergyLevel::Fom => grid.len(),
        EnergyLevel::Rom(ops) => {
            if ops.v.nrows() != grid.len() {
                return Err(Error::DimensionMismatch { expected: grid.len(), found: ops.v.nrows() });
            }
            ops.rank()
        }
    };
    match states.iter().find(|s| s.len() != expected) {
        Some(bad) => Err(Error::DimensionMismatch { expected, found: bad.len() }),
        None => Ok(()),
    }
}

/// Polarized energy series `Ē⁰, Ē¹, ...` of a trajectory.
pub fn energy_series(
    model: &Model,
    level: EnergyLevel<'_>,
    states: &[Vec<f64>],
    grid: &Grid1D,
    dt: f64,
) -> Result<Vec<f64>> {
    check_states(level, states, grid)?;
    let min = if model.kind() == ModelKind::Wave { 3 } else { 2 };
    if states.len() < min {
        return Err(Error::TrajectoryTooShort { len: states.len(), min });
    }
    let d = central(grid);
    let scale = grid.dx() / 6.0;
    let series = match *model {
        Model::Wave => {
            let du: Vec<Vec<f64>> = levels(level, states, &d).into_iter().map(|l| l.du).collect();
            let v: Vec<Vec<f64>> = match level {
                EnergyLevel::Fom => {
                    let d2 = d.pow(2);
                    states.windows(2).map(|p| wave_velocity(&p[0], &p[1], &d2, dt)).collect()
                }
                EnergyLevel::Rom(ops) => states
                    .windows(2)
                    .map(|p| {
                        let s: Vec<f64> = p[0].iter().zip(&p[1]).map(|(a, b)| a + b).collect();
                        let d2s = matvec(&ops.d2, &s);
                        let vr: Vec<f64> =
                            (0..s.len()).map(|i| (p[1][i] - p[0][i]) / dt - 0.25 * dt * d2s[i]).collect();
                        ops.lift(&vr)
                    })
                    .collect(),
            };
            (0..v.len() - 1).map(|n| scale * wave_density(&du[n], &du[n + 1], &v[n], &v[n + 1])).collect()
        }
        Model::Kdv { eta, gamma } => {
            let l = levels(level, states, &d);
            l.windows(2).map(|p| scale * kdv_density(eta, gamma, &p[0], &p[1])).collect()
        }
        Model::Ch { .. } => {
            let l = levels(level, states, &d);
            l.windows(2).map(|p| scale * ch_density(&p[0], &p[1])).collect()
        }
    };
    Ok(series)
}

/// Polarized energy at the first time level of `states` (three levels for
/// the wave model, two otherwise).
pub fn polarized_energy(
    model: &Model,
    level: EnergyLevel<'_>,
    states: &[Vec<f64>],
    grid: &Grid1D,
    dt: f64,
) -> Result<f64> {
    let need = if model.kind() == ModelKind::Wave { 3 } else { 2 };
    if states.len() != need {
        return Err(Error::InvalidArgument(format!(
            "{} energy needs {need} consecutive levels, got {}",
            model.kind(),
            states.len()
        )));
    }
    Ok(energy_series(model, level, states, grid, dt)?[0])
}

/// `|Ē(t_n) - Ē(t₀)|`.
pub fn drift_series(energy: &[f64]) -> Result<Vec<f64>> {
    let e0 = *energy.first().ok_or(Error::TrajectoryTooShort { len: 0, min: 1 })?;
    Ok(energy.iter().map(|e| (e - e0).abs()).collect())
}

/// `|Ē(t_n) - Ē_r(t_n)|`.
pub fn gap_series(fom: &[f64], rom: &[f64]) -> Result<Vec<f64>> {
    if fom.len() != rom.len() {
        return Err(Error::DimensionMismatch { expected: fom.len(), found: rom.len() });
    }
    Ok(fom.iter().zip(rom).map(|(a, b)| (a - b).abs()).collect())
}

/// Largest one-step change `|Ē^{n+1} - Ēⁿ|`.
pub fn max_step_change(energy: &[f64]) -> f64 {
    energy.windows(2).map(|p| (p[1] - p[0]).abs()).fold(0.0, f64::max)
}

/// Energy, drift and optional gap series of one run.
#[derive(Debug, Clone)]
pub struct EnergyReport {
    pub model: ModelKind,
    pub method: String,
    pub rank: Option<usize>,
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub drift: Vec<f64>,
    pub gap: Option<Vec<f64>>,
}

impl EnergyReport {
    pub fn new(
        model: ModelKind,
        method: impl Into<String>,
        rank: Option<usize>,
        dt: f64,
        energy: Vec<f64>,
        reference: Option<&[f64]>,
    ) -> Result<Self> {
        let drift = drift_series(&energy)?;
        let gap = match reference {
            Some(r) => Some(gap_series(&r[..energy.len().min(r.len())], &energy[..energy.len().min(r.len())])?),
            None => None,
        };
        let times = (0..energy.len()).map(|n| n as f64 * dt).collect();
        Ok(Self { model, method: method.into(), rank, times, energy, drift, gap })
    }

    pub fn max_drift(&self) -> f64 {
        self.drift.iter().cloned().fold(0.0, f64::max)
    }

    /// Tolerance scale `max(1, |Ē(t₀)|)`.
    pub fn scale(&self) -> f64 {
        self.energy.first().map_or(1.0, |e| e.abs().max(1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_error_basics() {
        let u = vec![1.0, -2.0, 2.0];
        assert_eq!(relative_state_error(&u, &u).unwrap(), 0.0);
        let twice: Vec<f64> = u.iter().map(|x| 2.0 * x).collect();
        assert_eq!(relative_state_error(&u, &twice).unwrap(), 1.0);
        assert_eq!(relative_state_error(&[0.0; 3], &u).unwrap_err(), Error::ZeroNorm);
    }

    #[test]
    fn drift_and_gap() {
        assert_eq!(drift_series(&[2.0; 4]).unwrap(), vec![0.0; 4]);
        let d = drift_series(&[1.0, 1.0 + 1e-12]).unwrap();
        assert_eq!(d[0], 0.0);
        assert!((d[1] - 1e-12).abs() < 1e-15);
        assert!(drift_series(&[]).is_err());
        assert_eq!(gap_series(&[1.0, 2.0], &[1.5, 2.5]).unwrap(), vec![0.5, 0.5]);
        assert!(gap_series(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn zero_state_has_zero_energy() {
        let g = Grid1D::new(0.0, 1.0, 8).unwrap();
        let z = vec![vec![0.0; 8]; 3];
        for m in [Model::Wave, Model::Kdv { eta: 1.0, gamma: 0.1 }, Model::Ch { c: 1.0, a: 1.0, x0: 0.0 }] {
            let s = energy_series(&m, EnergyLevel::Fom, &z, &g, 0.1).unwrap();
            assert!(s.iter().all(|&e| e == 0.0));
        }
    }

    #[test]
    fn kdv_energy_of_constant_state() {
        let g = Grid1D::new(0.0, 2.0, 10).unwrap();
        let c = 1.5;
        let e = polarized_energy(
            &Model::Kdv { eta: 2.0, gamma: 0.3 },
            EnergyLevel::Fom,
            &[vec![c; 10], vec![c; 10]],
            &g,
            0.1,
        )
        .unwrap();
        let expect = g.dx() / 6.0 * 10.0 * 2.0 * c * c * c;
        assert!((e - expect).abs() < 1e-14);
    }

    #[test]
    fn wave_energy_needs_three_levels() {
        let g = Grid1D::new(0.0, 2.0, 10).unwrap();
        assert!(polarized_energy(&Model::Wave, EnergyLevel::Fom, &vec![vec![0.0; 10]; 2], &g, 0.1).is_err());
    }
}
