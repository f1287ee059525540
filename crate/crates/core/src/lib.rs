//! Free fermions on an interval with arbitrary quantum boundary conditions, the
//! eigenvalue statistics of the classical compact groups, and the determinantal
//! point processes that connect them.
//!
//! The crate is organised by concern:
//! - [`boundary`]: U(2) boundary matrices and named presets.
//! - [`spectral`]: eigenvalues and eigenfunctions of the boundary-value problem.
//! - [`kernels`]: group, ground-state, finite-temperature and scaling-limit kernels.
//! - [`thermo`]: Fermi factors, chemical potential and the polylogarithm condition.
//! - [`sampling`]: exact DPP, grand-canonical and Haar eigenangle samplers.
//! - [`heatflow`]: theta function, heat kernels and non-intersecting loop densities.
//! - [`analysis`]: estimators, kernel distances and scaling studies.

pub mod analysis;
pub mod boundary;
pub mod error;
pub mod heatflow;
pub mod kernels;
pub mod quad;
pub mod sampling;
pub mod spectral;
pub mod thermo;

pub use boundary::{boundary_residual, make_preset, BoundaryData, BoundaryMatrix, Preset};
pub use error::{Error, Result};
pub use kernels::{Domain, GroupKind, Kernel, KernelSpec, LimitKernel};
pub use sampling::{PointConfig, RngSpec};
pub use spectral::{EigenMode, ModeKind, Spectrum, SpectrumTarget};
