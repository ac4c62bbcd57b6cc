//! POD-Galerkin baselines, integrated with Kahan's method.
//!
//! The semidiscrete models use the direct finite-difference derivatives
//! `D_x` (central), `D_xx` and `D_xxx`. Passing the identity as the basis
//! gives the unreduced semidiscrete system.

use faer::Mat;

use crate::error::{Error, Result};
use crate::grid::{Grid1D, OperatorKind, Stencil};
use crate::kahan::{Bilinear, QuadraticOde, ZeroBilinear};
use crate::linalg::{identity, matvec, matvec_t};
use crate::msfom::Model;

use super::weighted_gram;

fn apply_columns(s: &Stencil, w: &Mat<f64>) -> Mat<f64> {
    let mut out = Mat::zeros(w.nrows(), w.ncols());
    for j in 0..w.ncols() {
        out.col_as_slice_mut(j).copy_from_slice(&s.apply(w.col_as_slice(j)));
    }
    out
}

#[derive(Debug, Clone, Copy)]
enum Nonlinearity {
    /// `-η u ∘ D_x u`
    Kdv { eta: f64 },
    /// `-3u ∘ D_x u + 2 D_x u ∘ D_xx u + u ∘ D_xxx u`
    Ch,
}

/// Polarized quadratic term `Wᵀ F(Wa, Wb)` of a Galerkin model.
#[derive(Debug, Clone)]
pub struct GalerkinQuadratic {
    kind: Nonlinearity,
    w: Mat<f64>,
    dw: Mat<f64>,
    dxxw: Mat<f64>,
    dxxxw: Mat<f64>,
}

impl GalerkinQuadratic {
    fn new(kind: Nonlinearity, w: &Mat<f64>, grid: &Grid1D) -> Self {
        let h = grid.dx();
        Self {
            kind,
            w: w.clone(),
            dw: apply_columns(&Stencil::for_kind(OperatorKind::CentralDiff, h), w),
            dxxw: apply_columns(&Stencil::for_kind(OperatorKind::SecondDiff, h), w),
            dxxxw: apply_columns(&Stencil::for_kind(OperatorKind::ThirdDiff, h), w),
        }
    }

    /// Pointwise weights `(α, β, γ, δ)` such that the map `b ↦ T(a, b)` is
    /// `Wᵀ(diag(α)W + diag(β)D_xW + diag(γ)D_xxW + diag(δ)D_xxxW)`.
    fn weights(&self, a: &[f64]) -> [Option<Vec<f64>>; 4] {
        let ha = matvec(&self.w, a);
        let da = matvec(&self.dw, a);
        match self.kind {
            Nonlinearity::Kdv { eta } => [
                Some(da.iter().map(|x| -0.5 * eta * x).collect()),
                Some(ha.iter().map(|x| -0.5 * eta * x).collect()),
                None,
                None,
            ],
            Nonlinearity::Ch => {
                let dxxa = matvec(&self.dxxw, a);
                let dxxxa = matvec(&self.dxxxw, a);
                let n = ha.len();
                [
                    Some((0..n).map(|m| -1.5 * da[m] + 0.5 * dxxxa[m]).collect()),
                    Some((0..n).map(|m| -1.5 * ha[m] + dxxa[m]).collect()),
                    Some(da),
                    Some(ha.iter().map(|x| 0.5 * x).collect()),
                ]
            }
        }
    }

    fn factors(&self) -> [&Mat<f64>; 4] {
        [&self.w, &self.dw, &self.dxxw, &self.dxxxw]
    }
}

impl Bilinear for GalerkinQuadratic {
    fn dim(&self) -> usize {
        self.w.ncols()
    }

    fn apply(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.w.nrows()];
        for (weight, factor) in self.weights(a).iter().zip(self.factors()) {
            if let Some(weight) = weight {
                let fb = matvec(factor, b);
                for ((f, x), y) in full.iter_mut().zip(weight).zip(&fb) {
                    *f += x * y;
                }
            }
        }
        matvec_t(&self.w, &full)
    }

    fn partial(&self, a: &[f64]) -> Mat<f64> {
        let r = self.dim();
        let mut out = Mat::zeros(r, r);
        for (weight, factor) in self.weights(a).iter().zip(self.factors()) {
            if let Some(weight) = weight {
                out += weighted_gram(&self.w, weight, factor);
            }
        }
        out
    }
}

fn check_rows(w: &Mat<f64>, rows: usize) -> Result<()> {
    if w.nrows() != rows {
        return Err(Error::DimensionMismatch { expected: rows, found: w.nrows() });
    }
    Ok(())
}

/// `ũ' = Wᵀ(-η(Wũ)∘(D_xWũ) - γ²D_xxxWũ)`.
pub fn kdv_galerkin(w: &Mat<f64>, grid: &Grid1D, eta: f64, gamma: f64) -> Result<QuadraticOde<GalerkinQuadratic>> {
    check_rows(w, grid.len())?;
    let quad = GalerkinQuadratic::new(Nonlinearity::Kdv { eta }, w, grid);
    let linear = w.transpose() * &quad.dxxxw * faer::Scale(-gamma * gamma);
    QuadraticOde::new(quad, linear, vec![0.0; w.ncols()])
}

/// `(I - WᵀD_xxW) ũ' = Wᵀ(-3û∘D_xû + 2D_xû∘D_xxû + û∘D_xxxû)`.
pub fn ch_galerkin(w: &Mat<f64>, grid: &Grid1D) -> Result<QuadraticOde<GalerkinQuadratic>> {
    check_rows(w, grid.len())?;
    let quad = GalerkinQuadratic::new(Nonlinearity::Ch, w, grid);
    let r = w.ncols();
    let mass = identity(r) - w.transpose() * &quad.dxxw;
    QuadraticOde::new(quad, Mat::zeros(r, r), vec![0.0; r])?.with_mass(mass)
}

/// `ỹ' = J̃ỹ` with `J = [[0, I], [D_xx, 0]]` acting on `y = (u, v)` and
/// `W` of shape `2N x r`.
pub fn wave_galerkin(w: &Mat<f64>, grid: &Grid1D) -> Result<QuadraticOde<ZeroBilinear>> {
    let n = grid.len();
    check_rows(w, 2 * n)?;
    let wu = w.subrows(0, n).to_owned();
    let wv = w.subrows(n, n).to_owned();
    let dxx_wu = apply_columns(&Stencil::for_kind(OperatorKind::SecondDiff, grid.dx()), &wu);
    let jt = wu.transpose() * &wv + wv.transpose() * &dxx_wu;
    QuadraticOde::new(ZeroBilinear(w.ncols()), jt, vec![0.0; w.ncols()])
}

/// Galerkin model of `model` on basis `w`.
pub enum GalerkinModel {
    Linear(QuadraticOde<ZeroBilinear>),
    Quadratic(QuadraticOde<GalerkinQuadratic>),
}

impl GalerkinModel {
    pub fn new(model: &Model, w: &Mat<f64>, grid: &Grid1D) -> Result<Self> {
        Ok(match *model {
            Model::Wave => GalerkinModel::Linear(wave_galerkin(w, grid)?),
            Model::Kdv { eta, gamma } => GalerkinModel::Quadratic(kdv_galerkin(w, grid, eta, gamma)?),
            Model::Ch { .. } => GalerkinModel::Quadratic(ch_galerkin(w, grid)?),
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            GalerkinModel::Linear(s) => s.dim(),
            GalerkinModel::Quadratic(s) => s.dim(),
        }
    }
}

/// Lifted state `(u⁰, 0)` of the wave Galerkin model.
pub fn wave_galerkin_initial(u0: &[f64]) -> Vec<f64> {
    let mut y = u0.to_vec();
    y.extend(std::iter::repeat(0.0).take(u0.len()));
    y
}
