//! Offline contraction of the reduced quadratic term into an `r x r x r`
//! array, so online steps never touch full-grid vectors.
//!
//! With `G_AB[i, j, k] = Σ_m V_mi A_mj B_mk` for `A, B ∈ {V, VD̃}`, the KdV
//! term is `(η/2) D̃ G_VV` and the Camassa-Holm term is
//! `-½D̃²(G_DV + G_VD) + (3/2)D̃ G_VV + ½D̃ G_DD`.

use faer::Mat;

use crate::error::{Error, Result};
use crate::kahan::TensorBilinear;
use crate::msfom::Model;

use super::ReducedOperators;

/// Largest rank for which the dense array is built.
pub const MAX_TENSOR_RANK: usize = 512;

pub fn build_reduced_cubic_tensor(ops: &ReducedOperators, model: &Model) -> Result<TensorBilinear> {
    let r = ops.rank();
    if r > MAX_TENSOR_RANK {
        return Err(Error::TensorTooLarge { rank: r, limit: MAX_TENSOR_RANK });
    }
    let n = ops.v.nrows();
    let (v, vd) = (&ops.v, &ops.vd);
    let vt = v.transpose();
    // Each term is P Vᵀ (a_j ∘ b_k); group by the left factor P.
    let (p1, p2): (Mat<f64>, Option<Mat<f64>>) = match *model {
        Model::Kdv { eta, .. } => (&ops.d * vt * faer::Scale(0.5 * eta), None),
        Model::Ch { .. } => (&ops.d * vt, Some(&ops.d2 * vt)),
        Model::Wave => return Err(Error::InvalidArgument("the wave model has no quadratic term".into())),
    };
    let mut data = vec![0.0; r * r * r];
    for k in 0..r {
        let (vk, dk) = (v.col_as_slice(k), vd.col_as_slice(k));
        let (e1, e2) = match p2 {
            None => (Mat::from_fn(n, r, |m, j| v[(m, j)] * vk[m]), None),
            Some(_) => (
                Mat::from_fn(n, r, |m, j| 1.5 * v[(m, j)] * vk[m] + 0.5 * vd[(m, j)] * dk[m]),
                Some(Mat::from_fn(n, r, |m, j| -0.5 * (vd[(m, j)] * vk[m] + v[(m, j)] * dk[m]))),
            ),
        };
        let mut slab = &p1 * &e1;
        if let (Some(p2), Some(e2)) = (&p2, &e2) {
            slab += p2 * e2;
        }
        // Slab k holds entries (i, j) at i + r * j.
        let block = &mut data[r * r * k..r * r * (k + 1)];
        for j in 0..r {
            block[r * j..r * (j + 1)].copy_from_slice(slab.col_as_slice(j));
        }
    }
    Ok(TensorBilinear::from_data(r, data).symmetrized())
}
