//! Continuous tensor-product Lagrange spaces on tree meshes.

mod constraints;
mod dofs;
mod element;
mod integrate;
mod quadrature;

pub use constraints::{
    build_dirichlet_constraints, build_hanging_node_constraints, level_constraints,
    ConstrainedGather, ConstraintKind, ConstraintLine, ConstraintSet,
};
pub use dofs::{DofKey, DofMap};
pub use element::LagrangeElement;
pub use integrate::{assemble_rhs, interpolate, l2_error};
pub use quadrature::{gauss_lobatto_points, QuadratureRule};

use crate::mesh::{LevelView, TreeMesh};

/// Enumerates the degree-`p` space on a view of the mesh.
pub fn distribute_dofs(mesh: &TreeMesh, view: LevelView, degree: usize) -> crate::Result<DofMap> {
    Ok(DofMap::new(mesh, view, LagrangeElement::new(degree)?))
}
