//! Kahan's linearly implicit method for quadratic ODEs and polarization of
//! quadratic and cubic forms.
//!
//! For `M y' = Q(y) + B y + c` with `Q(y) = T(y, y)` and `T` symmetric
//! bilinear, one step solves
//!
//! ```text
//! (M/dt - T(yⁿ, ·) - B/2) yⁿ⁺¹ = (M/dt + B/2) yⁿ + c
//! ```
//!
//! which is a single linear solve per step.

use faer::Mat;

use crate::error::{Error, Result};
use crate::linalg::{identity, matvec, LuFactor};

/// A symmetric bilinear map `T: ℝⁿ x ℝⁿ → ℝⁿ`.
pub trait Bilinear {
    fn dim(&self) -> usize;

    /// `T(a, b)`.
    fn apply(&self, a: &[f64], b: &[f64]) -> Vec<f64>;

    /// Matrix of the linear map `b ↦ T(a, b)`.
    fn partial(&self, a: &[f64]) -> Mat<f64>;
}

/// The zero bilinear map, for purely linear systems.
#[derive(Debug, Clone, Copy)]
pub struct ZeroBilinear(pub usize);

impl Bilinear for ZeroBilinear {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, _a: &[f64], _b: &[f64]) -> Vec<f64> {
        vec![0.0; self.0]
    }

    fn partial(&self, _a: &[f64]) -> Mat<f64> {
        Mat::zeros(self.0, self.0)
    }
}

/// Bilinear map stored as a dense third-order array,
/// `T(a, b)_i = Σ_{j,k} t[i, j, k] a_j b_k`.
#[derive(Debug, Clone)]
pub struct TensorBilinear {
    n: usize,
    // Index (i, j, k) lives at i + n * (j + n * k).
    data: Vec<f64>,
}

impl TensorBilinear {
    pub fn from_fn(n: usize, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n * n];
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    data[i + n * (j + n * k)] = f(i, j, k);
                }
            }
        }
        Self { n, data }
    }

    /// Wraps raw storage with index `(i, j, k)` at `i + n * (j + n * k)`.
    pub fn from_data(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n * n, "tensor storage has the wrong length");
        Self { n, data }
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[i + self.n * (j + self.n * k)]
    }

    /// Averages each slice with its transpose so `t[i, j, k] = t[i, k, j]`.
    pub fn symmetrized(&self) -> Self {
        Self::from_fn(self.n, |i, j, k| 0.5 * (self.get(i, j, k) + self.get(i, k, j)))
    }
}

impl Bilinear for TensorBilinear {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        matvec(&self.partial(a), b)
    }

    fn partial(&self, a: &[f64]) -> Mat<f64> {
        let n = self.n;
        let mut m = Mat::zeros(n, n);
        for k in 0..n {
            let col = m.col_as_slice_mut(k);
            for (j, &aj) in a.iter().enumerate() {
                if aj == 0.0 {
                    continue;
                }
                let slice = &self.data[n * (j + n * k)..n * (j + n * k) + n];
                for (ci, ti) in col.iter_mut().zip(slice) {
                    *ci += ti * aj;
                }
            }
        }
        m
    }
}

/// `M y' = T(y, y) + B y + c`; `M` defaults to the identity.
#[derive(Debug, Clone)]
pub struct QuadraticOde<T> {
    quad: T,
    linear: Mat<f64>,
    constant: Vec<f64>,
    mass: Option<Mat<f64>>,
}

impl<T: Bilinear> QuadraticOde<T> {
    pub fn new(quad: T, linear: Mat<f64>, constant: Vec<f64>) -> Result<Self> {
        let n = quad.dim();
        if linear.nrows() != n || linear.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: linear.nrows() });
        }
        if constant.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: constant.len() });
        }
        Ok(Self { quad, linear, constant, mass: None })
    }

    pub fn with_mass(mut self, mass: Mat<f64>) -> Result<Self> {
        let n = self.dim();
        if mass.nrows() != n || mass.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: mass.nrows() });
        }
        self.mass = Some(mass);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.quad.dim()
    }

    pub fn quad(&self) -> &T {
        &self.quad
    }

    pub fn linear(&self) -> &Mat<f64> {
        &self.linear
    }

    pub fn constant(&self) -> &[f64] {
        &self.constant
    }

    pub fn mass(&self) -> Option<&Mat<f64>> {
        self.mass.as_ref()
    }

    fn check(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: v.len() });
        }
        Ok(())
    }

    /// `Q(y) + B y + c` (the right-hand side before the mass matrix).
    pub fn rhs(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check(y)?;
        let by = matvec(&self.linear, y);
        Ok(self
            .quad
            .apply(y, y)
            .iter()
            .zip(&by)
            .zip(&self.constant)
            .map(|((q, b), c)| q + b + c)
            .collect())
    }

    fn mass_or_identity(&self) -> Mat<f64> {
        self.mass.clone().unwrap_or_else(|| identity(self.dim()))
    }

    /// Left-hand matrix `M/dt - T(y, ·) - B/2`.
    pub fn step_matrix(&self, y: &[f64], dt: f64) -> Result<Mat<f64>> {
        self.check(y)?;
        Ok(self.mass_or_identity() * faer::Scale(1.0 / dt)
            - self.quad.partial(y)
            - &self.linear * faer::Scale(0.5))
    }

    /// Right-hand side `(M/dt + B/2) y + c`.
    pub fn step_rhs(&self, y: &[f64], dt: f64) -> Result<Vec<f64>> {
        self.check(y)?;
        let by = matvec(&self.linear, y);
        let my = match &self.mass {
            Some(m) => matvec(m, y),
            None => y.to_vec(),
        };
        Ok(my
            .iter()
            .zip(&by)
            .zip(&self.constant)
            .map(|((m, b), c)| m / dt + 0.5 * b + c)
            .collect())
    }
}

/// `½(Q(a + b) - Q(a) - Q(b))`.
pub fn polarize_quadratic<T: Bilinear>(sys: &QuadraticOde<T>, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    sys.check(a)?;
    sys.check(b)?;
    let s: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
    let q = &sys.quad;
    let (qs, qa, qb) = (q.apply(&s, &s), q.apply(a, a), q.apply(b, b));
    Ok(qs
        .iter()
        .zip(&qa)
        .zip(&qb)
        .map(|((s, a), b)| 0.5 * (s - a - b))
        .collect())
}

fn check_dt(dt: f64) -> Result<()> {
    if dt == 0.0 || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("time step must be finite and nonzero, got {dt}")));
    }
    Ok(())
}

/// One Kahan step. A negative `dt` integrates backwards.
pub fn kahan_step<T: Bilinear>(sys: &QuadraticOde<T>, y: &[f64], dt: f64) -> Result<Vec<f64>> {
    check_dt(dt)?;
    let a = sys.step_matrix(y, dt)?;
    let b = sys.step_rhs(y, dt)?;
    LuFactor::new(&a)?.solve(&b)
}

/// Integrates `steps` Kahan steps, returning `y⁰..y^steps`. Singular step
/// matrices are reported with the index of the failing step.
pub fn kahan_trajectory<T: Bilinear>(
    sys: &QuadraticOde<T>,
    y0: &[f64],
    dt: f64,
    steps: usize,
) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(y0.to_vec());
    for n in 0..steps {
        let next = kahan_step(sys, &out[n], dt).map_err(|e| e.at_step(n))?;
        out.push(next);
    }
    Ok(out)
}

/// Kahan stepper for systems without a quadratic term: the step matrix is
/// constant and factorized once (this is the implicit midpoint rule).
pub struct LinearKahan {
    lu: LuFactor,
    rhs: Mat<f64>,
    constant: Vec<f64>,
}

impl LinearKahan {
    pub fn new(sys: &QuadraticOde<ZeroBilinear>, dt: f64) -> Result<Self> {
        check_dt(dt)?;
        let n = sys.dim();
        let zero = vec![0.0; n];
        let lu = LuFactor::new(&sys.step_matrix(&zero, dt)?)?;
        let rhs = sys.mass_or_identity() * faer::Scale(1.0 / dt) + sys.linear() * faer::Scale(0.5);
        Ok(Self { lu, rhs, constant: sys.constant().to_vec() })
    }

    pub fn step(&self, y: &[f64]) -> Result<Vec<f64>> {
        let mut b = matvec(&self.rhs, y);
        for (bi, ci) in b.iter_mut().zip(&self.constant) {
            *bi += ci;
        }
        self.lu.solve(&b)
    }
}

/// Cubic Hamiltonian `S(z) = zᵀQ(z)z + zᵀBz + cᵀz + d` on ℝⁿ.
///
/// `Q(z)_{jk} = Σ_i C_{ijk} z_i` with `C` fully symmetric, so that
/// `S̄(x, y, z) = xᵀQ(y)z + ...` is symmetric in its three arguments.
#[derive(Debug, Clone)]
pub struct CubicHamiltonian {
    n: usize,
    cubic: Vec<f64>,
    b: Mat<f64>,
    c: Vec<f64>,
    d: f64,
}

impl CubicHamiltonian {
    /// Builds the Hamiltonian from an arbitrary cubic coefficient array,
    /// which is symmetrized over all index permutations; the cubic part of
    /// `S` is `Σ C_{ijk} z_i z_j z_k`.
    pub fn new(
        n: usize,
        cubic: impl Fn(usize, usize, usize) -> f64,
        b: Mat<f64>,
        c: Vec<f64>,
        d: f64,
    ) -> Result<Self> {
        if b.nrows() != n || b.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: b.nrows() });
        }
        if c.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: c.len() });
        }
        let mut sym = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let perms = [
                        cubic(i, j, k),
                        cubic(i, k, j),
                        cubic(j, i, k),
                        cubic(j, k, i),
                        cubic(k, i, j),
                        cubic(k, j, i),
                    ];
                    sym[i + n * (j + n * k)] = perms.iter().sum::<f64>() / 6.0;
                }
            }
        }
        Ok(Self { n, cubic: sym, b, c, d })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn quadratic(&self) -> &Mat<f64> {
        &self.b
    }

    pub fn linear(&self) -> &[f64] {
        &self.c
    }

    pub fn offset(&self) -> f64 {
        self.d
    }

    pub fn cubic_coefficient(&self, i: usize, j: usize, k: usize) -> f64 {
        self.cubic[i + self.n * (j + self.n * k)]
    }

    fn check(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: v.len() });
        }
        Ok(())
    }

    /// The symmetric matrix `Q(z)`.
    pub fn q_matrix(&self, z: &[f64]) -> Result<Mat<f64>> {
        self.check(z)?;
        let n = self.n;
        Ok(Mat::from_fn(n, n, |j, k| (0..n).map(|i| self.cubic_coefficient(i, j, k) * z[i]).sum()))
    }

    fn bilinear_b(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(matvec(&self.b, y)).map(|(a, b)| a * b).sum()
    }

    pub fn energy(&self, z: &[f64]) -> Result<f64> {
        self.polarized(z, z, z)
    }

    /// `S̄(x, y, z) = xᵀQ(y)z + (xᵀBy + yᵀBz + zᵀBx)/3 + cᵀ(x + y + z)/3 + d`.
    pub fn polarized(&self, x: &[f64], y: &[f64], z: &[f64]) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        self.check(z)?;
        let qz = matvec(&self.q_matrix(y)?, z);
        let cubic: f64 = x.iter().zip(&qz).map(|(a, b)| a * b).sum();
        let quad = (self.bilinear_b(x, y) + self.bilinear_b(y, z) + self.bilinear_b(z, x)) / 3.0;
        let lin: f64 = self.c.iter().zip(x.iter().zip(y).zip(z)).map(|(c, ((a, b), d))| c * (a + b + d)).sum();
        Ok(cubic + quad + lin / 3.0 + self.d)
    }

    /// `∂S̄/∂x = Q(y)z + B(y + z)/3 + c/3`.
    pub fn grad_polarized(&self, y: &[f64], z: &[f64]) -> Result<Vec<f64>> {
        self.check(y)?;
        self.check(z)?;
        let qz = matvec(&self.q_matrix(y)?, z);
        let s: Vec<f64> = y.iter().zip(z).map(|(a, b)| a + b).collect();
        let bs = matvec(&self.b, &s);
        Ok(qz
            .iter()
            .zip(&bs)
            .zip(&self.c)
            .map(|((q, b), c)| q + b / 3.0 + c / 3.0)
            .collect())
    }
}
