//! Structure-preserving model order reduction for multi-symplectic PDEs with
//! cubic Hamiltonians.
//!
//! The crate provides the linearly implicit global energy preserving (LIGEP)
//! full-order schemes for the linear wave, KdV and Camassa-Holm equations,
//! POD bases built from global snapshot matrices, the matching LIGEP
//! reduced-order models, classical POD-Galerkin baselines integrated with
//! Kahan's method, and the polarized discrete energies conserved by the
//! schemes.
//!
//! Module map:
//!
//! - [`grid`]: periodic grids and circulant difference/averaging operators.
//! - [`linalg`]: LU solves, thin SVD and the block-diagonal basis lift.
//! - [`kahan`]: Kahan's method for quadratic ODEs and polarized cubic forms.
//! - [`msfom`]: full-order LIGEP schemes, initial data and auxiliary fields.
//! - [`pod`]: snapshot assembly and POD bases.
//! - [`msrom`]: reduced-order LIGEP schemes and POD-Galerkin baselines.
//! - [`diagnostics`]: polarized energies and error metrics.

pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod kahan;
pub mod linalg;
pub mod msfom;
pub mod msrom;
pub mod pod;

pub use error::{Error, Result};
pub use grid::{Grid1D, OperatorKind, Stencil, StencilOperator};
pub use msfom::{FomTrajectory, Model, ModelKind};
pub use pod::{ReducedBasis, SnapshotLayout, SnapshotSet};
