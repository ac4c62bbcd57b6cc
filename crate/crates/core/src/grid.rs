//! Periodic grids and the difference/averaging operator calculus.
//!
//! Every spatial operator is a circulant built from a [`Stencil`]: a list of
//! `(offset, coefficient)` taps applied with periodic index wrap. Operators
//! can be applied matrix-free or realized as dense `N x N` matrices; the
//! dense form is what the linearly implicit steppers factorize.

use std::collections::BTreeMap;

use faer::Mat;

use crate::error::{Error, Result};

/// Uniform periodic grid on `[a, b)` with `n` nodes `x_j = a + j * dx`.
///
/// Node `x_n` is identified with `x_0`, so all operators are square
/// circulants of size `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    a: f64,
    b: f64,
    n: usize,
    dx: f64,
}

impl Grid1D {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(Error::InvalidGrid(format!("need a < b, got [{a}, {b}]")));
        }
        if n < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3 nodes, got {n}")));
        }
        Ok(Self { a, b, n, dx: (b - a) / n as f64 })
    }

    /// Grid whose node count is `(b - a) / dx`, which must be (close to) an
    /// integer.
    pub fn from_spacing(a: f64, b: f64, dx: f64) -> Result<Self> {
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {dx}")));
        }
        let ratio = (b - a) / dx;
        let n = ratio.round();
        if (ratio - n).abs() > 1e-6 * ratio.max(1.0) {
            return Err(Error::InvalidGrid(format!(
                "spacing {dx} does not divide the domain length {}",
                b - a
            )));
        }
        Self::new(a, b, n as usize)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn period(&self) -> f64 {
        self.b - self.a
    }

    pub fn node(&self, j: usize) -> f64 {
        self.a + j as f64 * self.dx
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Evaluates `f` at every node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.n).map(|j| f(self.node(j))).collect()
    }
}

/// The spatial operators used by the schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    /// `(v_{j+1} - v_j) / h`
    ForwardDiff,
    /// `(v_{j+1} - v_{j-1}) / (2h)`
    CentralDiff,
    /// `(v_{j+1} + v_j) / 2`
    Average,
    /// Three-point second difference.
    SecondDiff,
    /// Five-point second-order third difference.
    ThirdDiff,
}

/// Periodic stencil: coefficient `c` at offset `o` contributes `c * v_{j+o}`
/// to row `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    taps: Vec<(isize, f64)>,
}

impl Stencil {
    pub fn new(taps: impl IntoIterator<Item = (isize, f64)>) -> Self {
        let mut merged: BTreeMap<isize, f64> = BTreeMap::new();
        for (o, c) in taps {
            *merged.entry(o).or_insert(0.0) += c;
        }
        Self { taps: merged.into_iter().filter(|&(_, c)| c != 0.0).collect() }
    }

    pub fn identity() -> Self {
        Self { taps: vec![(0, 1.0)] }
    }

    pub fn for_kind(kind: OperatorKind, h: f64) -> Self {
        match kind {
            OperatorKind::ForwardDiff => Self::new([(0, -1.0 / h), (1, 1.0 / h)]),
            OperatorKind::CentralDiff => {
                let c = 1.0 / (2.0 * h);
                Self::new([(-1, -c), (1, c)])
            }
            OperatorKind::Average => Self::new([(0, 0.5), (1, 0.5)]),
            OperatorKind::SecondDiff => {
                let h2 = h * h;
                Self::new([(-1, 1.0 / h2), (0, -2.0 / h2), (1, 1.0 / h2)])
            }
            OperatorKind::ThirdDiff => {
                let h3 = h * h * h;
                Self::new([
                    (-2, -0.5 / h3),
                    (-1, 1.0 / h3),
                    (1, -1.0 / h3),
                    (2, 0.5 / h3),
                ])
            }
        }
    }

    pub fn taps(&self) -> &[(isize, f64)] {
        &self.taps
    }

    /// Span of the stencil, `max offset - min offset + 1`.
    pub fn width(&self) -> usize {
        match (self.taps.first(), self.taps.last()) {
            (Some(&(lo, _)), Some(&(hi, _))) => (hi - lo) as usize + 1,
            _ => 0,
        }
    }

    /// Stencil of the operator product `self * other`.
    pub fn compose(&self, other: &Stencil) -> Stencil {
        Stencil::new(
            self.taps
                .iter()
                .flat_map(|&(o1, c1)| other.taps.iter().map(move |&(o2, c2)| (o1 + o2, c1 * c2))),
        )
    }

    pub fn pow(&self, k: u32) -> Stencil {
        (0..k).fold(Stencil::identity(), |acc, _| acc.compose(self))
    }

    pub fn scaled(&self, s: f64) -> Stencil {
        Stencil::new(self.taps.iter().map(|&(o, c)| (o, s * c)))
    }

    /// Matrix-free periodic application.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = v.len() as isize;
        (0..n)
            .map(|j| {
                self.taps
                    .iter()
                    .map(|&(o, c)| c * v[(j + o).rem_euclid(n) as usize])
                    .sum()
            })
            .collect()
    }

    /// Dense `n x n` circulant realization. Taps that wrap onto the same
    /// column are summed.
    pub fn to_dense(&self, n: usize) -> Mat<f64> {
        let mut m = Mat::zeros(n, n);
        self.add_to(&mut m, 1.0);
        m
    }

    /// `dst += scale * S`.
    pub fn add_to(&self, dst: &mut Mat<f64>, scale: f64) {
        let n = dst.nrows() as isize;
        for i in 0..n {
            for &(o, c) in &self.taps {
                dst[(i as usize, (i + o).rem_euclid(n) as usize)] += scale * c;
            }
        }
    }

    /// `dst += scale * self * diag(weights) * right`, assembled in
    /// `O(n * width^2)`.
    pub fn add_product_to(&self, dst: &mut Mat<f64>, scale: f64, weights: &[f64], right: &Stencil) {
        let n = dst.nrows() as isize;
        debug_assert_eq!(weights.len(), n as usize);
        for i in 0..n {
            for &(o1, c1) in &self.taps {
                let j = (i + o1).rem_euclid(n);
                let w = scale * c1 * weights[j as usize];
                for &(o2, c2) in &right.taps {
                    dst[(i as usize, (j + o2).rem_euclid(n) as usize)] += w * c2;
                }
            }
        }
    }
}

/// A stencil bound to a grid together with its dense circulant matrix.
#[derive(Debug, Clone)]
pub struct StencilOperator {
    kind: OperatorKind,
    grid: Grid1D,
    stencil: Stencil,
    matrix: Mat<f64>,
}

impl StencilOperator {
    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn stencil(&self) -> &Stencil {
        &self.stencil
    }

    pub fn matrix(&self) -> &Mat<f64> {
        &self.matrix
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.stencil.apply(v)
    }
}

pub fn build_operator(grid: &Grid1D, kind: OperatorKind) -> Result<StencilOperator> {
    let stencil = Stencil::for_kind(kind, grid.dx());
    if grid.len() < stencil.width() {
        return Err(Error::StencilTooWide { nodes: grid.len(), width: stencil.width() });
    }
    let matrix = stencil.to_dense(grid.len());
    Ok(StencilOperator { kind, grid: *grid, stencil, matrix })
}

/// Forward difference and average in time: `((next - prev) / dt, (next + prev) / 2)`.
pub fn apply_time_ops(u_prev: &[f64], u_next: &[f64], dt: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if u_prev.len() != u_next.len() {
        return Err(Error::DimensionMismatch { expected: u_prev.len(), found: u_next.len() });
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    let diff = u_prev.iter().zip(u_next).map(|(p, q)| (q - p) / dt).collect();
    let mean = u_prev.iter().zip(u_next).map(|(p, q)| (q + p) / 2.0).collect();
    Ok((diff, mean))
}
