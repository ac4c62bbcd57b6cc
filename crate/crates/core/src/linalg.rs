//! Dense linear algebra: LU solves, thin SVD, minimum-norm solves and the
//! block-diagonal basis lift `I_d ⊗ V`.
//!
//! Matrices are `faer::Mat<f64>` (column-major). Matrix-vector products are
//! written as explicit loops with a fixed summation order so results are
//! bitwise reproducible.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::Mat;

use crate::error::{Error, Result};

pub type DenseMatrix = Mat<f64>;

/// Pivots below this magnitude are treated as exact singularity.
pub const PIVOT_FLOOR: f64 = 1e-300;

pub fn identity(n: usize) -> Mat<f64> {
    Mat::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
}

pub fn all_finite(a: &Mat<f64>) -> bool {
    (0..a.ncols()).all(|j| a.col_as_slice(j).iter().all(|x| x.is_finite()))
}

/// `A x`.
pub fn matvec(a: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    assert_eq!(a.ncols(), x.len(), "matvec dimension mismatch");
    let mut y = vec![0.0; a.nrows()];
    for (j, &xj) in x.iter().enumerate() {
        if xj == 0.0 {
            continue;
        }
        for (yi, aij) in y.iter_mut().zip(a.col_as_slice(j)) {
            *yi += aij * xj;
        }
    }
    y
}

/// `Aᵀ x`.
pub fn matvec_t(a: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    assert_eq!(a.nrows(), x.len(), "matvec_t dimension mismatch");
    (0..a.ncols()).map(|j| dot(a.col_as_slice(j), x)).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &Mat<f64>, b: &Mat<f64>) -> Mat<f64> {
    let (p, q) = (b.nrows(), b.ncols());
    Mat::from_fn(a.nrows() * p, a.ncols() * q, |i, j| a[(i / p, j / q)] * b[(i % p, j % q)])
}

/// Partial-pivoting LU factorization with an explicit singularity check.
pub struct LuFactor {
    lu: PartialPivLu<f64>,
    n: usize,
}

impl LuFactor {
    /// Factorizes `a`, failing if any pivot is below [`PIVOT_FLOOR`].
    pub fn new(a: &Mat<f64>) -> Result<Self> {
        Self::with_tolerance(a, 0.0)
    }

    /// Like [`LuFactor::new`], but additionally rejects pivots smaller than
    /// `rel_tol` times the largest pivot.
    pub fn with_tolerance(a: &Mat<f64>, rel_tol: f64) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: a.ncols() });
        }
        if !all_finite(a) {
            return Err(Error::NonFinite);
        }
        let lu = a.partial_piv_lu();
        let u = lu.U();
        let mut smallest = f64::INFINITY;
        let mut largest: f64 = 0.0;
        for i in 0..n {
            let p = u[(i, i)].abs();
            smallest = smallest.min(p);
            largest = largest.max(p);
        }
        if n > 0 && (smallest < PIVOT_FLOOR || smallest < rel_tol * largest || !smallest.is_finite()) {
            return Err(Error::Singular { pivot: smallest });
        }
        Ok(Self { lu, n })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: b.len() });
        }
        let mut rhs = Mat::from_fn(self.n, 1, |i, _| b[i]);
        self.lu.solve_in_place(rhs.as_mut());
        let x = rhs.col_as_slice(0).to_vec();
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(x)
    }
}

pub fn lu_solve(a: &Mat<f64>, b: &[f64]) -> Result<Vec<f64>> {
    LuFactor::new(a)?.solve(b)
}

/// Thin SVD `Z = U diag(σ) Wt` with `k = min(m, n)` terms, σ descending.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub u: Mat<f64>,
    pub sigma: Vec<f64>,
    pub wt: Mat<f64>,
}

pub fn thin_svd(z: &Mat<f64>) -> Result<ThinSvd> {
    if !all_finite(z) {
        return Err(Error::NonFinite);
    }
    let k = z.nrows().min(z.ncols());
    if k == 0 {
        return Ok(ThinSvd {
            u: Mat::zeros(z.nrows(), 0),
            sigma: Vec::new(),
            wt: Mat::zeros(0, z.ncols()),
        });
    }
    let svd = z.thin_svd().map_err(|_| Error::SvdFailed)?;
    let s = svd.S().column_vector();
    let raw: Vec<f64> = (0..k).map(|i| s[i]).collect();
    // faer already sorts, but the contract is explicit about the order.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| raw[j].total_cmp(&raw[i]));
    let (u, v) = (svd.U(), svd.V());
    let u = Mat::from_fn(z.nrows(), k, |i, j| u[(i, order[j])]);
    let wt = Mat::from_fn(k, z.ncols(), |i, j| v[(j, order[i])]);
    let sigma = order.iter().map(|&i| raw[i].max(0.0)).collect();
    Ok(ThinSvd { u, sigma, wt })
}

/// Minimum-norm least-squares solution of `A x = b` via the SVD, discarding
/// singular values below `rcond * σ_max`.
pub fn min_norm_solve(a: &Mat<f64>, b: &[f64], rcond: f64) -> Result<Vec<f64>> {
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: b.len() });
    }
    let svd = thin_svd(a)?;
    let cutoff = rcond * svd.sigma.first().copied().unwrap_or(0.0);
    let mut coef = matvec_t(&svd.u, b);
    for (c, &s) in coef.iter_mut().zip(&svd.sigma) {
        *c = if s > cutoff && s > 0.0 { *c / s } else { 0.0 };
    }
    Ok(matvec_t(&svd.wt, &coef))
}

/// The lift `𝐕 = I_d ⊗ V` for `V` of shape `N x r`, applied blockwise.
#[derive(Debug, Clone)]
pub struct BlockDiagonalLift {
    v: Mat<f64>,
    d: usize,
}

impl BlockDiagonalLift {
    pub fn new(v: Mat<f64>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("block count must be positive".into()));
        }
        Ok(Self { v, d })
    }

    pub fn basis(&self) -> &Mat<f64> {
        &self.v
    }

    pub fn blocks(&self) -> usize {
        self.d
    }

    /// `𝐕 x` for `x` of length `d * r`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let r = self.v.ncols();
        if x.len() != self.d * r {
            return Err(Error::DimensionMismatch { expected: self.d * r, found: x.len() });
        }
        Ok(x.chunks(r).flat_map(|xi| matvec(&self.v, xi)).collect())
    }

    /// `𝐕ᵀ y` for `y` of length `d * N`.
    pub fn project(&self, y: &[f64]) -> Result<Vec<f64>> {
        let n = self.v.nrows();
        if y.len() != self.d * n {
            return Err(Error::DimensionMismatch { expected: self.d * n, found: y.len() });
        }
        Ok(y.chunks(n).flat_map(|yi| matvec_t(&self.v, yi)).collect())
    }

    /// Dense `(d N) x (d r)` matrix; intended for small verification sizes.
    pub fn materialize(&self) -> Mat<f64> {
        kron(&identity(self.d), &self.v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs_diff(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
        let mut m: f64 = 0.0;
        for j in 0..a.ncols() {
            for i in 0..a.nrows() {
                m = m.max((a[(i, j)] - b[(i, j)]).abs());
            }
        }
        m
    }

    #[test]
    fn lu_identity_and_diagonal() {
        let v = vec![1.0, -2.0, 3.0];
        assert_eq!(lu_solve(&identity(3), &v).unwrap(), v);
        let a = Mat::from_fn(2, 2, |i, j| if i == j { [2.0, 4.0][i] } else { 0.0 });
        assert_eq!(lu_solve(&a, &[2.0, 8.0]).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn lu_reports_singularity() {
        let a = Mat::<f64>::zeros(3, 3);
        assert!(matches!(lu_solve(&a, &[1.0, 1.0, 1.0]), Err(Error::Singular { .. })));
        let nearly = Mat::from_fn(2, 2, |i, j| if i != j { 0.0 } else if i == 0 { 1.0 } else { 1e-20 });
        assert!(LuFactor::new(&nearly).is_ok());
        assert!(LuFactor::with_tolerance(&nearly, 1e-12).is_err());
        assert_eq!(
            lu_solve(&identity(2), &[1.0]).unwrap_err(),
            Error::DimensionMismatch { expected: 2, found: 1 }
        );
    }

    #[test]
    fn svd_of_diagonal_and_rank_one() {
        let z = Mat::from_fn(2, 2, |i, j| if i == j { [1.0, 3.0][i] } else { 0.0 });
        let s = thin_svd(&z).unwrap();
        assert!((s.sigma[0] - 3.0).abs() < 1e-14 && (s.sigma[1] - 1.0).abs() < 1e-14);

        let z = Mat::from_fn(5, 4, |i, j| (i as f64 + 1.0) * (0.5 - j as f64));
        let s = thin_svd(&z).unwrap();
        assert!(s.sigma[1] / s.sigma[0] <= 1e-12);
    }

    #[test]
    fn svd_rejects_non_finite() {
        let mut z = identity(3);
        z[(1, 2)] = f64::NAN;
        assert_eq!(thin_svd(&z).unwrap_err(), Error::NonFinite);
    }

    #[test]
    fn min_norm_solution_of_rank_deficient_system() {
        // x + y = 2 has minimum-norm solution (1, 1).
        let a = Mat::from_fn(2, 2, |i, _| if i == 0 { 1.0 } else { 0.0 });
        let x = min_norm_solve(&a, &[2.0, 0.0], 1e-12).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn identity_lift_is_identity() {
        let lift = BlockDiagonalLift::new(identity(4), 3).unwrap();
        let x: Vec<f64> = (0..12).map(|i| i as f64 * 0.25 - 1.0).collect();
        assert_eq!(lift.apply(&x).unwrap(), x);
        assert_eq!(lift.project(&x).unwrap(), x);
        assert!(lift.apply(&x[..5]).is_err());
    }

    #[test]
    fn kron_matches_definition() {
        let a = Mat::from_fn(2, 2, |i, j| (i * 2 + j) as f64 + 1.0);
        let b = identity(3);
        let k = kron(&a, &b);
        assert_eq!(k.nrows(), 6);
        assert_eq!(k[(4, 1)], 3.0);
        assert_eq!(k[(4, 2)], 0.0);
        let l = BlockDiagonalLift::new(a.clone(), 3).unwrap();
        assert_eq!(max_abs_diff(&l.materialize(), &kron(&identity(3), &a)), 0.0);
    }
}
