//! Energy-preserving reduced-order models and POD-Galerkin baselines.
//!
//! A LIGEP reduced model replaces `D` by the congruence `D̃ = VᵀDV` and
//! lifts products through `û = Vũ`, so the reduced schemes have the same
//! shape as the full-order ones and conserve a reduced polarized energy.

pub mod galerkin;
pub mod tensor;

use faer::Mat;

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::kahan::{Bilinear, TensorBilinear};
use crate::linalg::{identity, matvec, matvec_t, norm2, LuFactor};
use crate::msfom::{central, Model, ModelKind};

/// States whose Euclidean norm exceeds this are treated as diverged.
pub const DIVERGENCE_NORM: f64 = 1e8;

/// Reduced derivative operators for a spatial basis `V` (`N x r`).
#[derive(Debug, Clone)]
pub struct ReducedOperators {
    pub v: Mat<f64>,
    /// `D̃ = VᵀDV`, skew-symmetric.
    pub d: Mat<f64>,
    pub d2: Mat<f64>,
    pub d3: Mat<f64>,
    /// `V D̃`.
    pub vd: Mat<f64>,
}

impl ReducedOperators {
    pub fn new(v: &Mat<f64>, grid: &Grid1D) -> Result<Self> {
        if v.nrows() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), found: v.nrows() });
        }
        let stencil = central(grid);
        let r = v.ncols();
        let mut dv = Mat::zeros(v.nrows(), r);
        for j in 0..r {
            dv.col_as_slice_mut(j).copy_from_slice(&stencil.apply(v.col_as_slice(j)));
        }
        let raw = v.transpose() * &dv;
        // Congruence preserves skewness; remove the round-off part.
        let d = Mat::from_fn(r, r, |i, j| 0.5 * (raw[(i, j)] - raw[(j, i)]));
        let d2 = &d * &d;
        let d3 = &d2 * &d;
        let vd = v * &d;
        Ok(Self { v: v.clone(), d, d2, d3, vd })
    }

    pub fn rank(&self) -> usize {
        self.v.ncols()
    }

    pub fn lift(&self, u: &[f64]) -> Vec<f64> {
        matvec(&self.v, u)
    }

    /// `V D̃ ũ`, the lifted reduced derivative.
    pub fn lift_derivative(&self, u: &[f64]) -> Vec<f64> {
        matvec(&self.vd, u)
    }

    pub fn project(&self, u: &[f64]) -> Vec<f64> {
        matvec_t(&self.v, u)
    }
}

/// `Aᵀ diag(s) B` for tall `A`, `B`.
pub(crate) fn weighted_gram(a: &Mat<f64>, s: &[f64], b: &Mat<f64>) -> Mat<f64> {
    let scaled = Mat::from_fn(b.nrows(), b.ncols(), |i, j| s[i] * b[(i, j)]);
    a.transpose() * scaled
}

/// The quadratic term of the KdV or Camassa-Holm LIGEP reduced model,
/// evaluated by lifting to the full grid.
#[derive(Debug, Clone)]
pub struct LiftedQuadratic {
    ops: ReducedOperators,
    model: Model,
}

impl LiftedQuadratic {
    pub fn new(ops: ReducedOperators, model: Model) -> Result<Self> {
        if model.kind() == ModelKind::Wave {
            return Err(Error::InvalidArgument("the wave model has no quadratic term".into()));
        }
        Ok(Self { ops, model })
    }
}

impl Bilinear for LiftedQuadratic {
    fn dim(&self) -> usize {
        self.ops.rank()
    }

    fn apply(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let ops = &self.ops;
        let (ha, hb) = (ops.lift(a), ops.lift(b));
        match self.model {
            Model::Kdv { eta, .. } => {
                let p: Vec<f64> = ha.iter().zip(&hb).map(|(x, y)| x * y).collect();
                matvec(&ops.d, &ops.project(&p)).into_iter().map(|x| 0.5 * eta * x).collect()
            }
            Model::Ch { .. } => {
                let (da, db) = (ops.lift_derivative(a), ops.lift_derivative(b));
                let n = ha.len();
                let e1: Vec<f64> = (0..n).map(|m| -0.5 * (da[m] * hb[m] + ha[m] * db[m])).collect();
                let e2: Vec<f64> = (0..n).map(|m| 1.5 * ha[m] * hb[m] + 0.5 * da[m] * db[m]).collect();
                let t1 = matvec(&ops.d2, &ops.project(&e1));
                let t2 = matvec(&ops.d, &ops.project(&e2));
                t1.iter().zip(&t2).map(|(x, y)| x + y).collect()
            }
            Model::Wave => unreachable!("rejected in constructor"),
        }
    }

    fn partial(&self, a: &[f64]) -> Mat<f64> {
        let ops = &self.ops;
        let ha = ops.lift(a);
        match self.model {
            Model::Kdv { eta, .. } => &ops.d * weighted_gram(&ops.v, &ha, &ops.v) * faer::Scale(0.5 * eta),
            Model::Ch { .. } => {
                let da = ops.lift_derivative(a);
                let p_di = weighted_gram(&ops.v, &da, &ops.v);
                let p_id = weighted_gram(&ops.v, &ha, &ops.vd);
                let p_ii = weighted_gram(&ops.v, &ha, &ops.v);
                let p_dd = weighted_gram(&ops.v, &da, &ops.vd);
                &ops.d2 * (p_di + p_id) * faer::Scale(-0.5)
                    + &ops.d * (p_ii * faer::Scale(1.5) + p_dd * faer::Scale(0.5))
            }
            Model::Wave => unreachable!("rejected in constructor"),
        }
    }
}

/// How the reduced quadratic term is evaluated online.
#[derive(Debug, Clone)]
pub enum QuadraticPath {
    /// Explicit products with `V` on the full grid.
    Lifted(LiftedQuadratic),
    /// Precomputed `r x r x r` contraction array.
    Tensor(TensorBilinear),
}

impl QuadraticPath {
    fn partial(&self, a: &[f64]) -> Mat<f64> {
        match self {
            QuadraticPath::Lifted(q) => q.partial(a),
            QuadraticPath::Tensor(t) => t.partial(a),
        }
    }

    pub fn apply(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        match self {
            QuadraticPath::Lifted(q) => q.apply(a, b),
            QuadraticPath::Tensor(t) => t.apply(a, b),
        }
    }
}

/// Reduced three-level wave scheme `δt²ũ = μt²D̃²ũ`.
pub struct WaveRom {
    lu: LuFactor,
    r1: Mat<f64>,
    r2: Mat<f64>,
}

impl WaveRom {
    pub fn new(ops: &ReducedOperators, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
        }
        let id = identity(ops.rank());
        let idt2 = 1.0 / (dt * dt);
        let a = &id * faer::Scale(idt2) - &ops.d2 * faer::Scale(0.25);
        let r1 = &id * faer::Scale(2.0 * idt2) + &ops.d2 * faer::Scale(0.5);
        Ok(Self { lu: LuFactor::new(&a)?, r1, r2: a })
    }

    pub fn step(&self, u_prev: &[f64], u_curr: &[f64]) -> Result<Vec<f64>> {
        let (a, b) = (matvec(&self.r1, u_curr), matvec(&self.r2, u_prev));
        let rhs: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        self.lu.solve(&rhs)
    }
}

pub fn wave_rom_step(u_prev: &[f64], u_curr: &[f64], ops: &ReducedOperators, dt: f64) -> Result<Vec<f64>> {
    WaveRom::new(ops, dt)?.step(u_prev, u_curr)
}

/// One-step reduced scheme `(A₀ + T(ũⁿ, ·)) ũⁿ⁺¹ = R ũⁿ` (KdV and
/// Camassa-Holm).
pub struct ImplicitRom {
    base: Mat<f64>,
    rhs: Mat<f64>,
    quad: QuadraticPath,
}

impl ImplicitRom {
    /// `base = I/dt + γ²/2 D̃³`, `rhs = I/dt - γ²/2 D̃³` for KdV;
    /// `base = rhs = (I - D̃²)/dt` for Camassa-Holm.
    pub fn new(ops: &ReducedOperators, model: &Model, dt: f64, quad: QuadraticPath) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
        }
        let id = identity(ops.rank()) * faer::Scale(1.0 / dt);
        let (base, rhs) = match *model {
            Model::Kdv { gamma, .. } => {
                let g = &ops.d3 * faer::Scale(0.5 * gamma * gamma);
                (&id + &g, &id - &g)
            }
            Model::Ch { .. } => {
                let m = &id - &ops.d2 * faer::Scale(1.0 / dt);
                (m.clone(), m)
            }
            Model::Wave => return Err(Error::InvalidArgument("use WaveRom for the wave model".into())),
        };
        Ok(Self { base, rhs, quad })
    }

    pub fn lifted(ops: &ReducedOperators, model: &Model, dt: f64) -> Result<Self> {
        let quad = QuadraticPath::Lifted(LiftedQuadratic::new(ops.clone(), *model)?);
        Self::new(ops, model, dt, quad)
    }

    pub fn tensor(ops: &ReducedOperators, model: &Model, dt: f64) -> Result<Self> {
        let quad = QuadraticPath::Tensor(tensor::build_reduced_cubic_tensor(ops, model)?);
        Self::new(ops, model, dt, quad)
    }

    pub fn quadratic(&self) -> &QuadraticPath {
        &self.quad
    }

    pub fn step_matrix(&self, u: &[f64]) -> Mat<f64> {
        &self.base + self.quad.partial(u)
    }

    pub fn step(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.base.nrows() {
            return Err(Error::DimensionMismatch { expected: self.base.nrows(), found: u.len() });
        }
        LuFactor::new(&self.step_matrix(u))?.solve(&matvec(&self.rhs, u))
    }
}

pub fn kdv_rom_step(u: &[f64], ops: &ReducedOperators, dt: f64, eta: f64, gamma: f64) -> Result<Vec<f64>> {
    ImplicitRom::lifted(ops, &Model::Kdv { eta, gamma }, dt)?.step(u)
}

pub fn ch_rom_step(u: &[f64], ops: &ReducedOperators, dt: f64) -> Result<Vec<f64>> {
    ImplicitRom::lifted(ops, &Model::Ch { c: 1.0, a: 1.0, x0: 0.0 }, dt)?.step(u)
}

/// A reduced trajectory, possibly cut short.
#[derive(Debug, Clone)]
pub struct RomRun {
    pub states: Vec<Vec<f64>>,
    /// Step index at which the state left the finite/bounded regime.
    pub truncated_at: Option<usize>,
    /// Solver failure that stopped the run.
    pub failure: Option<Error>,
}

impl RomRun {
    pub fn completed(&self) -> bool {
        self.truncated_at.is_none() && self.failure.is_none()
    }
}

/// Advances a multi-level recurrence. `step` sees all states so far and
/// returns the next one. Runs stop at the first non-finite state, at a
/// state with norm above [`DIVERGENCE_NORM`], or at a solver error.
pub fn integrate(
    initial: Vec<Vec<f64>>,
    steps: usize,
    mut step: impl FnMut(&[Vec<f64>]) -> Result<Vec<f64>>,
) -> RomRun {
    let levels = initial.len();
    let mut states = initial;
    states.reserve(steps + 1);
    let mut truncated_at = None;
    let mut failure = None;
    while states.len() <= steps {
        let index = states.len();
        match step(&states) {
            Ok(next) => {
                let norm = norm2(&next);
                if !norm.is_finite() || norm > DIVERGENCE_NORM {
                    truncated_at = Some(index);
                    break;
                }
                states.push(next);
            }
            Err(Error::NonFinite) => {
                truncated_at = Some(index);
                break;
            }
            Err(e) => {
                failure = Some(e.at_step(index - 1));
                break;
            }
        }
    }
    debug_assert!(states.len() >= levels.min(steps + 1));
    states.truncate(steps + 1);
    RomRun { states, truncated_at, failure }
}
