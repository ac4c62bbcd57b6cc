//! Linearly implicit energy-preserving full-order models for the linear
//! wave, KdV and Camassa-Holm equations.
//!
//! Production stepping uses the schemes with auxiliary variables
//! eliminated, so the state is the single field `u`. The coupled
//! multi-symplectic form is available through [`ligep_compact_step`] for
//! cross-checking on small grids.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use faer::Mat;

use crate::error::{Error, Result};
use crate::grid::{Grid1D, OperatorKind, Stencil};
use crate::kahan::CubicHamiltonian;
use crate::linalg::{identity, kron, min_norm_solve, LuFactor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Wave,
    Kdv,
    Ch,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Wave => "wave",
            ModelKind::Kdv => "kdv",
            ModelKind::Ch => "ch",
        }
    }

    /// Number of components of the multi-symplectic state.
    pub fn components(self) -> usize {
        match self {
            ModelKind::Wave => 3,
            ModelKind::Kdv => 4,
            ModelKind::Ch => 5,
        }
    }

    /// Component names in the order of the multi-symplectic state `z`.
    pub fn state_labels(self) -> &'static [&'static str] {
        match self {
            ModelKind::Wave => &["u", "v", "w"],
            ModelKind::Kdv => &["phi", "u", "v", "w"],
            ModelKind::Ch => &["u", "phi", "w", "v", "nu"],
        }
    }

    /// Component names in the order used for the global snapshot matrix.
    pub fn snapshot_labels(self) -> &'static [&'static str] {
        match self {
            ModelKind::Wave => &["u", "v", "w"],
            ModelKind::Kdv => &["phi", "u", "v", "w"],
            ModelKind::Ch => &["u", "phi", "v", "w", "nu"],
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "wave" => Ok(ModelKind::Wave),
            "kdv" => Ok(ModelKind::Kdv),
            "ch" | "camassa-holm" => Ok(ModelKind::Ch),
            other => Err(Error::UnknownModel(other.to_string())),
        }
    }
}

/// A model together with its physical parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    /// `u_tt = u_xx`
    Wave,
    /// `u_t + η u u_x + γ² u_xxx = 0`
    Kdv { eta: f64, gamma: f64 },
    /// Camassa-Holm with a periodic peakon initial condition of height `c`,
    /// period `a`, centred at `x0`.
    Ch { c: f64, a: f64, x0: f64 },
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Wave => ModelKind::Wave,
            Model::Kdv { .. } => ModelKind::Kdv,
            Model::Ch { .. } => ModelKind::Ch,
        }
    }

    /// Initial levels required by the scheme: two for the three-level wave
    /// scheme, one otherwise.
    pub fn initial_levels(&self, grid: &Grid1D, dt: f64) -> Vec<Vec<f64>> {
        match *self {
            Model::Wave => {
                let (u0, u1) = wave_initialize(grid, dt);
                vec![u0, u1]
            }
            Model::Kdv { .. } => vec![kdv_initialize(grid)],
            Model::Ch { c, a, x0 } => vec![ch_initialize(grid, c, a, x0)],
        }
    }
}

/// Central difference `δx½` as a stencil on `grid`.
pub fn central(grid: &Grid1D) -> Stencil {
    Stencil::for_kind(OperatorKind::CentralDiff, grid.dx())
}

fn check_len(grid: &Grid1D, v: &[f64]) -> Result<()> {
    if v.len() != grid.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), found: v.len() });
    }
    Ok(())
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    Ok(())
}

fn finite(v: Vec<f64>) -> Result<Vec<f64>> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err(Error::NonFinite)
    }
}

/// `u⁰ = sech(x)`, `u¹ = u⁰ + (dt²/2) D²u⁰` (zero initial velocity).
pub fn wave_initialize(grid: &Grid1D, dt: f64) -> (Vec<f64>, Vec<f64>) {
    let u0 = grid.sample(|x| 1.0 / x.cosh());
    let d2u = central(grid).pow(2).apply(&u0);
    let u1 = u0.iter().zip(&d2u).map(|(u, d)| u + 0.5 * dt * dt * d).collect();
    (u0, u1)
}

/// `u⁰ = cos(2π(x - a)/P)` with `P` the grid period.
pub fn kdv_initialize(grid: &Grid1D) -> Vec<f64> {
    let (a, p) = (grid.a(), grid.period());
    grid.sample(|x| (2.0 * PI * (x - a) / p).cos())
}

/// Periodic peakon of height `c` and period `a` centred at `x0`.
pub fn ch_initialize(grid: &Grid1D, c: f64, a: f64, x0: f64) -> Vec<f64> {
    let scale = c / (a / 2.0).cosh();
    grid.sample(|x| {
        let s = x - x0;
        if s.abs() <= a / 2.0 {
            scale * s.cosh()
        } else {
            scale * (a - s).cosh()
        }
    })
}

/// Three-level wave scheme `δt²u = μt²D²u`. The step matrix
/// `I/dt² - D²/4` is factorized once.
pub struct WaveFom {
    d2: Stencil,
    dt: f64,
    lu: LuFactor,
}

impl WaveFom {
    pub fn new(grid: &Grid1D, dt: f64) -> Result<Self> {
        check_dt(dt)?;
        let d2 = central(grid).pow(2);
        let n = grid.len();
        let mut a = identity(n) * faer::Scale(1.0 / (dt * dt));
        d2.add_to(&mut a, -0.25);
        Ok(Self { lu: LuFactor::new(&a)?, d2, dt })
    }

    pub fn step(&self, u_prev: &[f64], u_curr: &[f64]) -> Result<Vec<f64>> {
        let n = self.lu.dim();
        for v in [u_prev, u_curr] {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: v.len() });
            }
        }
        let idt2 = 1.0 / (self.dt * self.dt);
        let (dc, dp) = (self.d2.apply(u_curr), self.d2.apply(u_prev));
        let rhs: Vec<f64> = (0..n)
            .map(|j| (2.0 * idt2 * u_curr[j] + 0.5 * dc[j]) - (idt2 * u_prev[j] - 0.25 * dp[j]))
            .collect();
        finite(self.lu.solve(&rhs)?)
    }
}

pub fn wave_fom_step(u_prev: &[f64], u_curr: &[f64], grid: &Grid1D, dt: f64) -> Result<Vec<f64>> {
    WaveFom::new(grid, dt)?.step(u_prev, u_curr)
}

/// KdV scheme `δt u + (η/2) D(uⁿ u^{n+1}) + γ² μt D³ u = 0`.
pub struct KdvFom {
    d: Stencil,
    d3: Stencil,
    base: Mat<f64>,
    dt: f64,
    eta: f64,
    gamma: f64,
}

impl KdvFom {
    pub fn new(grid: &Grid1D, dt: f64, eta: f64, gamma: f64) -> Result<Self> {
        check_dt(dt)?;
        let d = central(grid);
        let d3 = d.pow(3);
        let mut base = identity(grid.len()) * faer::Scale(1.0 / dt);
        d3.add_to(&mut base, 0.5 * gamma * gamma);
        Ok(Self { d, d3, base, dt, eta, gamma })
    }

    pub fn step_matrix(&self, u: &[f64]) -> Mat<f64> {
        let mut a = self.base.clone();
        self.d.add_product_to(&mut a, 0.5 * self.eta, u, &Stencil::identity());
        a
    }

    pub fn step(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.base.nrows() {
            return Err(Error::DimensionMismatch { expected: self.base.nrows(), found: u.len() });
        }
        let d3u = self.d3.apply(u);
        let g2 = 0.5 * self.gamma * self.gamma;
        let rhs: Vec<f64> = u.iter().zip(&d3u).map(|(u, d)| u / self.dt - g2 * d).collect();
        finite(LuFactor::new(&self.step_matrix(u))?.solve(&rhs)?)
    }
}

pub fn kdv_fom_step(u: &[f64], grid: &Grid1D, dt: f64, eta: f64, gamma: f64) -> Result<Vec<f64>> {
    check_len(grid, u)?;
    KdvFom::new(grid, dt, eta, gamma)?.step(u)
}

/// Camassa-Holm scheme; every product of an `n` and an `n+1` factor is
/// linear in `u^{n+1}`.
pub struct ChFom {
    d: Stencil,
    d2: Stencil,
    base: Mat<f64>,
    dt: f64,
}

impl ChFom {
    pub fn new(grid: &Grid1D, dt: f64) -> Result<Self> {
        check_dt(dt)?;
        let d = central(grid);
        let d2 = d.pow(2);
        let mut base = identity(grid.len()) * faer::Scale(1.0 / dt);
        d2.add_to(&mut base, -1.0 / dt);
        Ok(Self { d, d2, base, dt })
    }

    pub fn step_matrix(&self, u: &[f64]) -> Mat<f64> {
        let du = self.d.apply(u);
        let id = Stencil::identity();
        let mut a = self.base.clone();
        self.d2.add_product_to(&mut a, -0.5, &du, &id);
        self.d2.add_product_to(&mut a, -0.5, u, &self.d);
        self.d.add_product_to(&mut a, 1.5, u, &id);
        self.d.add_product_to(&mut a, 0.5, &du, &self.d);
        a
    }

    pub fn step(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.base.nrows() {
            return Err(Error::DimensionMismatch { expected: self.base.nrows(), found: u.len() });
        }
        let d2u = self.d2.apply(u);
        let rhs: Vec<f64> = u.iter().zip(&d2u).map(|(u, d)| (u - d) / self.dt).collect();
        finite(LuFactor::new(&self.step_matrix(u))?.solve(&rhs)?)
    }
}

pub fn ch_fom_step(u: &[f64], grid: &Grid1D, dt: f64) -> Result<Vec<f64>> {
    check_len(grid, u)?;
    ChFom::new(grid, dt)?.step(u)
}

/// A full-order trajectory `u⁰..u^{Nt}`.
#[derive(Debug, Clone)]
pub struct FomTrajectory {
    pub model: Model,
    pub grid: Grid1D,
    pub dt: f64,
    pub u: Vec<Vec<f64>>,
}

impl FomTrajectory {
    pub fn new(model: Model, grid: Grid1D, dt: f64, u: Vec<Vec<f64>>) -> Result<Self> {
        if u.len() < 2 {
            return Err(Error::TrajectoryTooShort { len: u.len(), min: 2 });
        }
        for v in &u {
            check_len(&grid, v)?;
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        Ok(Self { model, grid, dt, u })
    }

    /// Number of time steps `Nt`.
    pub fn steps(&self) -> usize {
        self.u.len() - 1
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.u.len()).map(|n| n as f64 * self.dt).collect()
    }

    /// Leading part `u⁰..u^{steps}`.
    pub fn truncated(&self, steps: usize) -> Self {
        Self { u: self.u[..=steps.min(self.steps())].to_vec(), ..self.clone() }
    }
}

/// Runs the full-order model for `steps` steps from explicit initial levels
/// (two for the wave scheme, one otherwise).
pub fn simulate_from(
    model: &Model,
    grid: &Grid1D,
    dt: f64,
    initial: Vec<Vec<f64>>,
    steps: usize,
) -> Result<FomTrajectory> {
    let need = if model.kind() == ModelKind::Wave { 2 } else { 1 };
    if initial.len() != need {
        return Err(Error::InvalidArgument(format!(
            "{} needs {need} initial levels, got {}",
            model.kind(),
            initial.len()
        )));
    }
    for v in &initial {
        check_len(grid, v)?;
    }
    let mut u = initial;
    match *model {
        Model::Wave => {
            let fom = WaveFom::new(grid, dt)?;
            while u.len() <= steps {
                let n = u.len();
                let next = fom.step(&u[n - 2], &u[n - 1]).map_err(|e| e.at_step(n - 1))?;
                u.push(next);
            }
            u.truncate(steps + 1);
        }
        Model::Kdv { eta, gamma } => {
            let fom = KdvFom::new(grid, dt, eta, gamma)?;
            for n in 0..steps {
                let next = fom.step(&u[n]).map_err(|e| e.at_step(n))?;
                u.push(next);
            }
        }
        Model::Ch { .. } => {
            let fom = ChFom::new(grid, dt)?;
            for n in 0..steps {
                let next = fom.step(&u[n]).map_err(|e| e.at_step(n))?;
                u.push(next);
            }
        }
    }
    FomTrajectory::new(*model, *grid, dt, u)
}

/// Runs the full-order model from its standard initial condition.
pub fn simulate(model: &Model, grid: &Grid1D, dt: f64, steps: usize) -> Result<FomTrajectory> {
    simulate_from(model, grid, dt, model.initial_levels(grid, dt), steps)
}

/// `φ₀ = 0`, `φ_{j+1} = φ_j + (dx/2)(f_j + f_{j+1})`.
pub fn trapezoid_antiderivative(f: &[f64], grid: &Grid1D) -> Vec<f64> {
    let h = 0.5 * grid.dx();
    let mut phi = Vec::with_capacity(f.len());
    let mut acc = 0.0;
    for (j, &fj) in f.iter().enumerate() {
        if j > 0 {
            acc += h * (f[j - 1] + fj);
        }
        phi.push(acc);
    }
    phi
}

/// `u_t` at every snapshot: central differences inside, second-order
/// one-sided differences at both ends.
pub fn time_derivative(u: &[Vec<f64>], dt: f64) -> Result<Vec<Vec<f64>>> {
    let m = u.len();
    if m < 3 {
        return Err(Error::TrajectoryTooShort { len: m, min: 3 });
    }
    let combine = |terms: &[(usize, f64)]| -> Vec<f64> {
        (0..u[0].len())
            .map(|j| terms.iter().map(|&(n, c)| c * u[n][j]).sum::<f64>() / (2.0 * dt))
            .collect()
    };
    let mut out = Vec::with_capacity(m);
    out.push(combine(&[(0, -3.0), (1, 4.0), (2, -1.0)]));
    for n in 1..m - 1 {
        out.push(combine(&[(n - 1, -1.0), (n + 1, 1.0)]));
    }
    out.push(combine(&[(m - 1, 3.0), (m - 2, -4.0), (m - 3, 1.0)]));
    Ok(out)
}

/// Snapshot sequences of every state component, in snapshot order.
#[derive(Debug, Clone)]
pub struct ComponentSnapshots {
    pub labels: Vec<&'static str>,
    /// `components[c][n]` is component `c` at snapshot `n`.
    pub components: Vec<Vec<Vec<f64>>>,
}

impl ComponentSnapshots {
    pub fn get(&self, label: &str) -> Option<&[Vec<f64>]> {
        self.labels.iter().position(|&l| l == label).map(|i| self.components[i].as_slice())
    }

    pub fn snapshot_count(&self) -> usize {
        self.components.first().map_or(0, Vec::len)
    }
}

/// Reconstructs the auxiliary variables from a `u` trajectory.
///
/// The wave velocity `vⁿ` needs `uⁿ⁺¹`, so wave snapshots stop one level
/// before the end of the trajectory.
pub fn reconstruct_aux(model: &Model, u: &[Vec<f64>], grid: &Grid1D, dt: f64) -> Result<ComponentSnapshots> {
    if u.len() < 3 {
        return Err(Error::TrajectoryTooShort { len: u.len(), min: 3 });
    }
    for v in u {
        check_len(grid, v)?;
    }
    let d = central(grid);
    let labels = model.kind().snapshot_labels().to_vec();
    let components = match *model {
        Model::Wave => {
            let d2 = d.pow(2);
            let m = u.len() - 1;
            let v: Vec<Vec<f64>> = (0..m).map(|n| wave_velocity(&u[n], &u[n + 1], &d2, dt)).collect();
            let w = u[..m].iter().map(|un| d.apply(un)).collect();
            vec![u[..m].to_vec(), v, w]
        }
        Model::Kdv { eta, gamma } => {
            let phi = u.iter().map(|un| trapezoid_antiderivative(un, grid)).collect();
            let v: Vec<Vec<f64>> =
                u.iter().map(|un| d.apply(un).into_iter().map(|x| gamma * x).collect()).collect();
            let w = u
                .iter()
                .zip(&v)
                .map(|(un, vn)| {
                    let dv = d.apply(vn);
                    un.iter().zip(&dv).map(|(u, dv)| 0.5 * gamma * dv + 0.25 * eta * u * u).collect()
                })
                .collect();
            vec![phi, u.to_vec(), v, w]
        }
        Model::Ch { .. } => {
            let ut = time_derivative(u, dt)?;
            let nu: Vec<Vec<f64>> = u.iter().map(|un| d.apply(un)).collect();
            let phi = u.iter().map(|un| trapezoid_antiderivative(un, grid)).collect();
            let half: Vec<Vec<f64>> = ut.iter().map(|t| t.iter().map(|x| 0.5 * x).collect()).collect();
            let w = half.iter().map(|h| trapezoid_antiderivative(h, grid)).collect();
            // v = uν + w_x with w_x = ½u_t
            let v = (0..u.len())
                .map(|n| (0..grid.len()).map(|j| u[n][j] * nu[n][j] + half[n][j]).collect())
                .collect();
            vec![u.to_vec(), phi, v, w, nu]
        }
    };
    Ok(ComponentSnapshots { labels, components })
}

/// `vⁿ = δt uⁿ - (dt/2) μt D² uⁿ`.
pub fn wave_velocity(u_curr: &[f64], u_next: &[f64], d2: &Stencil, dt: f64) -> Vec<f64> {
    let s: Vec<f64> = u_curr.iter().zip(u_next).map(|(a, b)| a + b).collect();
    let d2s = d2.apply(&s);
    (0..u_curr.len())
        .map(|j| (u_next[j] - u_curr[j]) / dt - 0.25 * dt * d2s[j])
        .collect()
}

/// `K z_t + L z_x = ∇S(z)` with skew `K`, `L` and a cubic Hamiltonian.
#[derive(Debug, Clone)]
pub struct MultiSymplecticSystem {
    pub kind: ModelKind,
    pub k: Mat<f64>,
    pub l: Mat<f64>,
    pub hamiltonian: CubicHamiltonian,
}

fn sparse(d: usize, entries: &[(usize, usize, f64)]) -> Mat<f64> {
    let mut m = Mat::zeros(d, d);
    for &(i, j, v) in entries {
        m[(i, j)] = v;
    }
    m
}

impl MultiSymplecticSystem {
    pub fn for_model(model: &Model) -> Self {
        let kind = model.kind();
        let d = kind.components();
        let zero = vec![0.0; d];
        let (k, l, h) = match *model {
            // z = (u, v, w), S = (v² - w²)/2
            Model::Wave => (
                sparse(d, &[(0, 1, -1.0), (1, 0, 1.0)]),
                sparse(d, &[(0, 2, 1.0), (2, 0, -1.0)]),
                CubicHamiltonian::new(d, |_, _, _| 0.0, sparse(d, &[(1, 1, 0.5), (2, 2, -0.5)]), zero, 0.0),
            ),
            // z = (φ, u, v, w), S = v²/2 - uw + ηu³/6
            Model::Kdv { eta, gamma } => (
                sparse(d, &[(0, 1, 0.5), (1, 0, -0.5)]),
                sparse(d, &[(0, 3, 1.0), (1, 2, -gamma), (2, 1, gamma), (3, 0, -1.0)]),
                CubicHamiltonian::new(
                    d,
                    |i, j, k| if (i, j, k) == (1, 1, 1) { eta / 6.0 } else { 0.0 },
                    sparse(d, &[(2, 2, 0.5), (1, 3, -0.5), (3, 1, -0.5)]),
                    zero,
                    0.0,
                ),
            ),
            // z = (u, φ, w, v, ν), S = -wu - u³/2 - uν²/2 + νv
            Model::Ch { .. } => (
                sparse(d, &[(0, 1, 0.5), (0, 4, -0.5), (1, 0, -0.5), (4, 0, 0.5)]),
                sparse(d, &[(0, 3, -1.0), (1, 2, 1.0), (2, 1, -1.0), (3, 0, 1.0)]),
                CubicHamiltonian::new(
                    d,
                    |i, j, k| match (i, j, k) {
                        (0, 0, 0) => -0.5,
                        (0, 4, 4) => -0.5,
                        _ => 0.0,
                    },
                    sparse(d, &[(0, 2, -0.5), (2, 0, -0.5), (3, 4, 0.5), (4, 3, 0.5)]),
                    zero,
                    0.0,
                ),
            ),
        };
        let hamiltonian = h.expect("model Hamiltonians are well-formed");
        Self { kind, k, l, hamiltonian }
    }

    pub fn components(&self) -> usize {
        self.k.nrows()
    }

    /// Index of `u` within the state vector.
    pub fn u_index(&self) -> usize {
        self.kind.state_labels().iter().position(|&l| l == "u").unwrap_or(0)
    }
}

/// Assembles the coupled linear system of one LIGEP step,
///
/// ```text
/// (K⊗I/dt + L⊗D/2 - 3Q(zⁿ) - B⊗I) z' = (K⊗I/dt - L⊗D/2 + B⊗I) zⁿ + c⊗1
/// ```
///
/// with component-major blocks `z = (z₁, ..., z_d)`.
pub fn compact_system(sys: &MultiSymplecticSystem, z: &[f64], grid: &Grid1D, dt: f64) -> Result<(Mat<f64>, Vec<f64>)> {
    check_dt(dt)?;
    let (d, n) = (sys.components(), grid.len());
    if z.len() != d * n {
        return Err(Error::DimensionMismatch { expected: d * n, found: z.len() });
    }
    let dmat = central(grid).to_dense(n);
    let id = identity(n);
    let h = &sys.hamiltonian;
    let kk = kron(&sys.k, &id) * faer::Scale(1.0 / dt);
    let ld = kron(&sys.l, &dmat) * faer::Scale(0.5);
    let bb = kron(h.quadratic(), &id);
    let mut a = &kk + &ld - &bb;
    // Pointwise Q(zⁿ): block (p, q) is diag_j Σ_i C_{ipq} z_i(j).
    for p in 0..d {
        for q in 0..d {
            for j in 0..n {
                let qv: f64 = (0..d).map(|i| h.cubic_coefficient(i, p, q) * z[i * n + j]).sum();
                a[(p * n + j, q * n + j)] -= 3.0 * qv;
            }
        }
    }
    let rhs_mat = &kk - &ld + &bb;
    let mut b = crate::linalg::matvec(&rhs_mat, z);
    for p in 0..d {
        for j in 0..n {
            b[p * n + j] += h.linear()[p];
        }
    }
    Ok((a, b))
}

/// One step of the coupled scheme via LU. Systems whose auxiliary
/// variables are only determined up to a gauge are reported as singular.
pub fn ligep_compact_step(sys: &MultiSymplecticSystem, z: &[f64], grid: &Grid1D, dt: f64) -> Result<Vec<f64>> {
    let (a, b) = compact_system(sys, z, grid, dt)?;
    finite(LuFactor::with_tolerance(&a, 1e-12)?.solve(&b)?)
}

/// One step of the coupled scheme using the minimum-norm solution, for
/// systems with a gauge freedom (e.g. the potential `φ`).
pub fn ligep_compact_step_min_norm(sys: &MultiSymplecticSystem, z: &[f64], grid: &Grid1D, dt: f64) -> Result<Vec<f64>> {
    let (a, b) = compact_system(sys, z, grid, dt)?;
    finite(min_norm_solve(&a, &b, 1e-12)?)
}

/// Initial multi-symplectic state consistent with `u⁰`: `w = Du`, `v = 0`
/// for the wave; `φ = D⁺u`, `v = γDu` and the reconstructed `w` for KdV;
/// `φ = D⁺u`, `ν = Du`, `v = w = 0` for Camassa-Holm.
pub fn compact_initial_state(model: &Model, grid: &Grid1D, u0: &[f64]) -> Result<Vec<f64>> {
    check_len(grid, u0)?;
    let n = grid.len();
    let d = central(grid);
    let du = d.apply(u0);
    let dense = d.to_dense(n);
    let potential = || min_norm_solve(&dense, u0, 1e-12);
    let zero = vec![0.0; n];
    let blocks: Vec<Vec<f64>> = match *model {
        Model::Wave => vec![u0.to_vec(), zero, du],
        Model::Kdv { eta, gamma } => {
            let v: Vec<f64> = du.iter().map(|x| gamma * x).collect();
            let dv = d.apply(&v);
            let w = (0..n).map(|j| 0.5 * gamma * dv[j] + 0.25 * eta * u0[j] * u0[j]).collect();
            vec![potential()?, u0.to_vec(), v, w]
        }
        Model::Ch { .. } => vec![u0.to_vec(), potential()?, zero.clone(), zero, du],
    };
    Ok(blocks.concat())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(a: f64, b: f64, n: usize) -> Grid1D {
        Grid1D::new(a, b, n).unwrap()
    }

    #[test]
    fn wave_initial_levels() {
        let g = grid(-10.0, 10.0, 40);
        let (u0, u1) = wave_initialize(&g, 0.1);
        assert_eq!(u0[20], 1.0);
        let d2u = central(&g).pow(2).apply(&u0);
        for j in 0..40 {
            assert!((u1[j] - u0[j] - 0.005 * d2u[j]).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_states_are_fixed_points() {
        let g = grid(0.0, 2.0, 32);
        let c = vec![0.7; 32];
        for (a, b) in wave_fom_step(&c, &c, &g, 0.01).unwrap().iter().zip(&c) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in kdv_fom_step(&c, &g, 0.01, 1.0, 0.1).unwrap().iter().zip(&c) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in ch_fom_step(&c, &g, 0.01).unwrap().iter().zip(&c) {
            assert!((a - b).abs() < 1e-12);
        }
        let z = vec![0.0; 32];
        assert_eq!(wave_fom_step(&z, &z, &g, 0.01).unwrap(), z);
        assert_eq!(ch_fom_step(&z, &g, 0.01).unwrap(), z);
    }

    #[test]
    fn ch_step_matrix_matches_dense_assembly() {
        let g = grid(0.0, 3.0, 12);
        let u: Vec<f64> = (0..12).map(|j| (j as f64 * 0.7).sin()).collect();
        let dt = 0.05;
        let fom = ChFom::new(&g, dt).unwrap();
        let dd = central(&g).to_dense(12);
        let du = crate::linalg::matvec(&dd, &u);
        let diag = |v: &[f64]| Mat::from_fn(12, 12, |i, j| if i == j { v[i] } else { 0.0 });
        let d2 = &dd * &dd;
        let expected = (identity(12) - &d2) * faer::Scale(1.0 / dt)
            - &d2 * diag(&du) * faer::Scale(0.5)
            - &d2 * diag(&u) * &dd * faer::Scale(0.5)
            + &dd * diag(&u) * faer::Scale(1.5)
            + &dd * diag(&du) * &dd * faer::Scale(0.5);
        let got = fom.step_matrix(&u);
        for i in 0..12 {
            for j in 0..12 {
                assert!((got[(i, j)] - expected[(i, j)]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn ch_peakon_profile() {
        let g = Grid1D::from_spacing(0.0, 30.0, 0.03).unwrap();
        let u = ch_initialize(&g, 1.0, 30.0, 0.0);
        assert!((u[0] - 1.0 / 15f64.cosh()).abs() < 1e-18);
        let peak = u.iter().cloned().fold(f64::MIN, f64::max);
        assert!((peak - 1.0).abs() < 1e-12);
        // The two branches agree at the seam x = a/2.
        let seam = 1.0 / 15f64.cosh() * 15f64.cosh();
        assert!((u[500] - seam).abs() < 1e-12);
    }

    #[test]
    fn trapezoid_of_simple_integrands() {
        let g = grid(0.0, 1.0, 10);
        let phi = trapezoid_antiderivative(&[1.0; 10], &g);
        for (j, p) in phi.iter().enumerate() {
            assert!((p - j as f64 * 0.1).abs() < 1e-15);
        }
        assert!(trapezoid_antiderivative(&[0.0; 10], &g).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn kdv_aux_on_constant_state() {
        let g = grid(0.0, 2.0, 8);
        let u = vec![vec![2.0; 8]; 3];
        let aux = reconstruct_aux(&Model::Kdv { eta: 1.5, gamma: 0.1 }, &u, &g, 0.1).unwrap();
        assert_eq!(aux.labels, vec!["phi", "u", "v", "w"]);
        for n in 0..3 {
            assert!(aux.get("v").unwrap()[n].iter().all(|&x| x == 0.0));
            assert!(aux.get("w").unwrap()[n].iter().all(|&x| (x - 1.5).abs() < 1e-15));
            for (j, p) in aux.get("phi").unwrap()[n].iter().enumerate() {
                assert!((p - 2.0 * j as f64 * 0.25).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn wave_aux_on_constant_state() {
        let g = grid(0.0, 2.0, 8);
        let u = vec![vec![1.0; 8]; 4];
        let aux = reconstruct_aux(&Model::Wave, &u, &g, 0.1).unwrap();
        assert_eq!(aux.snapshot_count(), 3);
        for c in &aux.components[1..] {
            assert!(c.iter().flatten().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn aux_needs_three_levels() {
        let g = grid(0.0, 2.0, 8);
        let u = vec![vec![1.0; 8]; 2];
        assert_eq!(
            reconstruct_aux(&Model::Wave, &u, &g, 0.1).unwrap_err(),
            Error::TrajectoryTooShort { len: 2, min: 3 }
        );
    }

    #[test]
    fn model_kind_parsing() {
        assert_eq!("KdV".parse::<ModelKind>().unwrap(), ModelKind::Kdv);
        assert_eq!("ch".parse::<ModelKind>().unwrap(), ModelKind::Ch);
        assert!(matches!("heat".parse::<ModelKind>(), Err(Error::UnknownModel(_))));
    }

    #[test]
    fn structure_matrices_are_skew() {
        for m in [Model::Wave, Model::Kdv { eta: 1.0, gamma: 0.3 }, Model::Ch { c: 1.0, a: 30.0, x0: 0.0 }] {
            let s = MultiSymplecticSystem::for_model(&m);
            let d = s.components();
            for i in 0..d {
                for j in 0..d {
                    assert_eq!(s.k[(i, j)], -s.k[(j, i)]);
                    assert_eq!(s.l[(i, j)], -s.l[(j, i)]);
                }
            }
        }
    }

    #[test]
    fn compact_step_keeps_zero_state() {
        let g = grid(0.0, 2.0, 8);
        for m in [Model::Wave, Model::Kdv { eta: 1.0, gamma: 0.3 }, Model::Ch { c: 1.0, a: 2.0, x0: 0.0 }] {
            let s = MultiSymplecticSystem::for_model(&m);
            let z = vec![0.0; s.components() * 8];
            let next = ligep_compact_step_min_norm(&s, &z, &g, 0.01).unwrap();
            assert!(next.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn simulate_rejects_wrong_initial_levels() {
        let g = grid(0.0, 2.0, 8);
        assert!(simulate_from(&Model::Wave, &g, 0.1, vec![vec![0.0; 8]], 3).is_err());
        let t = simulate_from(&Model::Wave, &g, 0.1, vec![vec![0.0; 8]; 2], 3).unwrap();
        assert_eq!(t.u.len(), 4);
    }
}
