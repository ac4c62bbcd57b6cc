//! Snapshot matrices and proper orthogonal decomposition bases.
//!
//! The global layout places the snapshots of every component side by side
//! in one `N x (d·Nt)` matrix, so a single spatial basis `V` serves all
//! components through the lift `I_d ⊗ V`. The stacked layout stacks the
//! components of one time instant in a single `(d·N)`-long column.

use faer::Mat;

use crate::error::{Error, Result};
use crate::linalg::{thin_svd, BlockDiagonalLift};
use crate::msfom::{ComponentSnapshots, ModelKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotLayout {
    /// `N x (d·Nt)`, component blocks side by side.
    Global,
    /// `(d·N) x Nt`, component blocks stacked per column.
    Stacked,
}

#[derive(Debug, Clone)]
pub struct SnapshotSet {
    pub layout: SnapshotLayout,
    pub data: Mat<f64>,
    pub labels: Vec<String>,
    pub times: Vec<f64>,
}

impl SnapshotSet {
    /// Builds a snapshot matrix from `components[c][n]` (component `c`,
    /// snapshot `n`).
    pub fn from_components(
        labels: &[&str],
        components: &[Vec<Vec<f64>>],
        times: &[f64],
        layout: SnapshotLayout,
    ) -> Result<Self> {
        if labels.len() != components.len() || components.is_empty() {
            return Err(Error::DimensionMismatch { expected: labels.len(), found: components.len() });
        }
        let nt = components[0].len();
        if nt == 0 {
            return Err(Error::TrajectoryTooShort { len: 0, min: 1 });
        }
        if times.len() != nt {
            return Err(Error::DimensionMismatch { expected: nt, found: times.len() });
        }
        let n = components[0][0].len();
        for comp in components {
            if comp.len() != nt {
                return Err(Error::DimensionMismatch { expected: nt, found: comp.len() });
            }
            if let Some(bad) = comp.iter().find(|s| s.len() != n) {
                return Err(Error::DimensionMismatch { expected: n, found: bad.len() });
            }
        }
        let d = components.len();
        let data = match layout {
            SnapshotLayout::Global => Mat::from_fn(n, d * nt, |i, j| components[j / nt][j % nt][i]),
            SnapshotLayout::Stacked => Mat::from_fn(d * n, nt, |i, j| components[i / n][j][i % n]),
        };
        Ok(Self {
            layout,
            data,
            labels: labels.iter().map(|s| s.to_string()).collect(),
            times: times.to_vec(),
        })
    }

    pub fn components(&self) -> usize {
        self.labels.len()
    }
}

/// Assembles the snapshot matrix of a model run. The component order must
/// be the model's snapshot order.
pub fn assemble_snapshots(
    kind: ModelKind,
    snapshots: &ComponentSnapshots,
    times: &[f64],
    layout: SnapshotLayout,
) -> Result<SnapshotSet> {
    let expected = kind.snapshot_labels();
    if snapshots.labels.as_slice() != expected {
        return Err(Error::InvalidArgument(format!(
            "{kind} snapshots must be ordered {expected:?}, got {:?}",
            snapshots.labels
        )));
    }
    SnapshotSet::from_components(&snapshots.labels, &snapshots.components, times, layout)
}

/// A POD basis: the leading `r` left singular vectors of a snapshot matrix.
#[derive(Debug, Clone)]
pub struct ReducedBasis {
    pub v: Mat<f64>,
    pub singular_values: Vec<f64>,
    pub r: usize,
    /// Number of blocks of the lift `I_d ⊗ V`.
    pub d: usize,
}

impl ReducedBasis {
    pub fn from_matrix(v: Mat<f64>, d: usize) -> Self {
        let r = v.ncols();
        Self { v, singular_values: Vec::new(), r, d }
    }

    pub fn lift(&self) -> BlockDiagonalLift {
        BlockDiagonalLift::new(self.v.clone(), self.d).expect("block count is positive")
    }

    pub fn rows(&self) -> usize {
        self.v.nrows()
    }

    /// Same spectrum, first `r` columns only.
    pub fn truncated(&self, r: usize) -> Result<Self> {
        if r == 0 || r > self.r {
            return Err(Error::RankOutOfRange { rank: r, max: self.r });
        }
        Ok(Self {
            v: self.v.subcols(0, r).to_owned(),
            singular_values: self.singular_values.clone(),
            r,
            d: self.d,
        })
    }
}

/// Thin SVD of the snapshot matrix truncated to rank `r`. No centering or
/// weighting is applied.
pub fn compute_basis(z: &SnapshotSet, r: usize) -> Result<ReducedBasis> {
    let max = z.data.nrows().min(z.data.ncols());
    if r == 0 || r > max {
        return Err(Error::RankOutOfRange { rank: r, max });
    }
    let svd = thin_svd(&z.data)?;
    let d = match z.layout {
        SnapshotLayout::Global => z.components(),
        SnapshotLayout::Stacked => 1,
    };
    Ok(ReducedBasis { v: svd.u.subcols(0, r).to_owned(), singular_values: svd.sigma, r, d })
}

/// Blockwise `Vᵀ z`.
pub fn project_state(basis: &ReducedBasis, z: &[f64]) -> Result<Vec<f64>> {
    basis.lift().project(z)
}

/// Blockwise `V z̃`.
pub fn lift_state(basis: &ReducedBasis, z: &[f64]) -> Result<Vec<f64>> {
    basis.lift().apply(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(n: usize, nt: usize, shift: f64) -> Vec<Vec<f64>> {
        (0..nt).map(|t| (0..n).map(|i| (i as f64 + shift) * (t as f64 + 1.0)).collect()).collect()
    }

    #[test]
    fn global_layout_shapes() {
        let comps = vec![ramp(8, 5, 0.0), ramp(8, 5, 1.0), ramp(8, 5, 2.0)];
        let s = SnapshotSet::from_components(&["u", "v", "w"], &comps, &[0.0; 5], SnapshotLayout::Global).unwrap();
        assert_eq!((s.data.nrows(), s.data.ncols()), (8, 15));
        assert_eq!(s.data[(3, 5)], comps[1][0][3]);
        let s = SnapshotSet::from_components(&["u", "v", "w"], &comps, &[0.0; 5], SnapshotLayout::Stacked).unwrap();
        assert_eq!((s.data.nrows(), s.data.ncols()), (24, 5));
        assert_eq!(s.data[(8 + 3, 2)], comps[1][2][3]);
    }

    #[test]
    fn kdv_block_order() {
        let comps: Vec<_> = (0..4).map(|c| ramp(4, 3, c as f64 * 10.0)).collect();
        let snaps = ComponentSnapshots { labels: vec!["phi", "u", "v", "w"], components: comps.clone() };
        let s = assemble_snapshots(ModelKind::Kdv, &snaps, &[0.0, 1.0, 2.0], SnapshotLayout::Global).unwrap();
        assert_eq!((s.data.nrows(), s.data.ncols()), (4, 12));
        for (block, comp) in comps.iter().enumerate() {
            assert_eq!(s.data[(2, block * 3 + 1)], comp[1][2]);
        }
        let wrong = ComponentSnapshots { labels: vec!["u", "phi", "v", "w"], components: comps };
        assert!(assemble_snapshots(ModelKind::Kdv, &wrong, &[0.0, 1.0, 2.0], SnapshotLayout::Global).is_err());
    }

    #[test]
    fn rank_out_of_range() {
        let s = SnapshotSet::from_components(&["u"], &[ramp(4, 3, 0.0)], &[0.0; 3], SnapshotLayout::Global).unwrap();
        assert_eq!(compute_basis(&s, 4).unwrap_err(), Error::RankOutOfRange { rank: 4, max: 3 });
        assert!(compute_basis(&s, 0).is_err());
    }

    #[test]
    fn project_zero_is_zero() {
        let s = SnapshotSet::from_components(&["u"], &[ramp(4, 3, 0.5)], &[0.0; 3], SnapshotLayout::Global).unwrap();
        let b = compute_basis(&s, 1).unwrap();
        assert_eq!(project_state(&b, &[0.0; 4]).unwrap(), vec![0.0]);
    }
}
