//! Locally linear embedding with explicit regularization order, together with
//! the samplers, operators, eigensolvers and closed-form predictions needed to
//! study its spectral behavior on analytic manifolds.

pub mod barycentric;
pub mod baseline_dm;
pub mod error;
pub mod geometry;
pub mod kernel;
pub mod lle_matrix;
pub mod neighbors;
pub mod rng;
pub mod sparse;
pub mod spectral;
pub mod theory;

pub use error::{LleError, Result};
pub use geometry::PointCloud;
pub use lle_matrix::{LleConfig, LleMatrix};
pub use neighbors::{NeighborList, NeighborRule};
pub use sparse::SparseOperator;
pub use spectral::{SolverOptions, SpectrumResult};
