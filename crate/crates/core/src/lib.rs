//! Matrix-free multigrid for the Poisson equation on adaptively refined
//! quad/octree meshes.
//!
//! The crate builds three families of multigrid hierarchies on the same
//! infrastructure and lets them be compared side by side:
//!
//! * geometric local smoothing ([`Variant::LocalSmoothing`]), where level `l`
//!   consists of the cells on refinement level `l` only,
//! * geometric global coarsening ([`Variant::GlobalCoarsening`]), where every
//!   level covers the whole domain and may carry hanging nodes,
//! * polynomial global coarsening ([`Variant::PolynomialCoarsening`]), which
//!   halves the polynomial degree on the active mesh and hands the `p = 1`
//!   problem to one of the geometric variants.
//!
//! Besides the solvers, [`partition`] simulates multi-rank partitions of the
//! level hierarchies and computes workload and communication metrics.
//!
//! Module map:
//!
//! | module        | contents                                                     |
//! |---------------|--------------------------------------------------------------|
//! | [`mesh`]      | tree mesh, 2:1 balance, benchmark generators, level views    |
//! | [`fem`]       | Lagrange elements, quadrature, DoF maps, constraints         |
//! | [`mfop`]      | matrix-free Laplace operator, diagonal, assembly, edge terms |
//! | [`transfer`]  | two-level prolongation/restriction, level copy operations    |
//! | [`multigrid`] | hierarchies, V-cycle, Chebyshev smoothing, PCG               |
//! | [`partition`] | simulated partitions and performance metrics                 |

pub mod error;
pub mod fem;
pub mod mesh;
pub mod mfop;
pub mod multigrid;
pub mod partition;
pub mod scalar;
pub mod tensor;
pub mod transfer;

pub use error::{MgError, Result};
pub use fem::{ConstraintSet, DofMap, LagrangeElement, QuadratureRule};
pub use mesh::{CellId, LevelView, TreeMesh};
pub use mfop::LevelOperator;
pub use multigrid::{Hierarchy, MgConfig, Variant};
pub use partition::{MetricsReport, PartitionModel};
pub use scalar::Scalar;
