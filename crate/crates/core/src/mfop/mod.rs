//! Matrix-free Laplace operator on one multigrid level.
//!
//! The action is a loop over the cells of the level: gather with constraints
//! resolved, apply the reference kernel scaled by the cell size, scatter with
//! the transposed constraints. Constrained rows act as the identity.

mod kernel;

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{MgError, Result};
use crate::fem::{ConstrainedGather, ConstraintSet, DofMap};
use crate::mesh::{LevelView, TreeMesh};
use crate::scalar::Scalar;

pub use kernel::{KernelBuffers, LaplaceKernel};

/// Interior (`S`) / refinement-edge (`E`) split of a local-smoothing level.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeDofClassification {
    pub is_edge: Vec<bool>,
}

impl EdgeDofClassification {
    /// Marks every level DoF whose support point touches a coarser active
    /// cell. Boundary DoFs are never edge DoFs. Views other than
    /// [`LevelView::Local`] have no refinement edge.
    pub fn new(mesh: &TreeMesh, dofs: &DofMap) -> Self {
        let mut is_edge = vec![false; dofs.n_dofs()];
        if let LevelView::Local(l) = dofs.view() {
            for (i, e) in is_edge.iter_mut().enumerate() {
                if dofs.is_cell_interior(i) || dofs.is_boundary(i) {
                    continue;
                }
                *e = dofs
                    .find_cell_in_view(i, mesh, LevelView::Global(l), l)
                    .is_some();
            }
        }
        Self { is_edge }
    }

    pub fn n_edge(&self) -> usize {
        self.is_edge.iter().filter(|&&e| e).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.is_edge.contains(&true)
    }
}

/// Which off-diagonal block of a local-smoothing level to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeProduct {
    /// `-A_ES x_S`, written to the edge rows.
    ES,
    /// `A_SE x_E`, written to the interior rows.
    SE,
}

#[derive(Clone, Debug)]
struct EdgeCoupling {
    is_edge: Vec<bool>,
    /// Cells (slots) with at least one edge DoF.
    cells: Vec<usize>,
    /// Boundary-only gather, used for the couplings.
    gather: Arc<ConstrainedGather>,
}

#[derive(Clone, Debug)]
pub struct LevelOperator<T: Scalar> {
    dofs: Arc<DofMap>,
    constraints: Arc<ConstraintSet>,
    gather: Arc<ConstrainedGather>,
    kernel: LaplaceKernel<T>,
    scales: Vec<T>,
    reference: Arc<Vec<f64>>,
    edge: Option<Arc<EdgeCoupling>>,
}

impl<T: Scalar> LevelOperator<T> {
    /// Operator with the given (homogeneous) constraints.
    pub fn new(mesh: &TreeMesh, dofs: Arc<DofMap>, constraints: Arc<ConstraintSet>) -> Self {
        let gather = Arc::new(ConstrainedGather::new(&dofs, &constraints));
        Self::from_parts(mesh, dofs, constraints, gather, None)
    }

    /// Interior block `A_SS` of a local-smoothing level: the edge DoFs are
    /// treated as homogeneous Dirichlet nodes, and the full-operator
    /// couplings to them are kept for [`apply_edge_coupling`](Self::apply_edge_coupling).
    pub fn with_refinement_edge(
        mesh: &TreeMesh,
        dofs: Arc<DofMap>,
        boundary: Arc<ConstraintSet>,
        edge: &EdgeDofClassification,
    ) -> Self {
        let mut inner = (*boundary).clone();
        for (i, &e) in edge.is_edge.iter().enumerate() {
            if e {
                inner.add_dirichlet(i, 0.0);
            }
        }
        let inner = Arc::new(inner);
        let gather = Arc::new(ConstrainedGather::new(&dofs, &inner));
        let coupling = if edge.is_empty() {
            None
        } else {
            let cells = (0..dofs.n_cells())
                .filter(|&k| dofs.cell_dofs(k).iter().any(|&g| edge.is_edge[g as usize]))
                .collect();
            Some(Arc::new(EdgeCoupling {
                is_edge: edge.is_edge.clone(),
                cells,
                gather: Arc::new(ConstrainedGather::new(&dofs, &boundary)),
            }))
        };
        Self::from_parts(mesh, dofs, inner, gather, coupling)
    }

    fn from_parts(
        mesh: &TreeMesh,
        dofs: Arc<DofMap>,
        constraints: Arc<ConstraintSet>,
        gather: Arc<ConstrainedGather>,
        edge: Option<Arc<EdgeCoupling>>,
    ) -> Self {
        let dim = dofs.dim();
        let kernel = LaplaceKernel::new(dofs.element(), dim);
        let scales = dofs
            .cells()
            .iter()
            .map(|&c| T::from_f64(mesh.cell_size(c).powi(dim as i32 - 2)))
            .collect();
        let reference = Arc::new(LaplaceKernel::<f64>::new(dofs.element(), dim).reference_matrix());
        Self {
            dofs,
            constraints,
            gather,
            kernel,
            scales,
            reference,
            edge,
        }
    }

    /// Same operator in another precision.
    pub fn cast<S: Scalar>(&self) -> LevelOperator<S> {
        LevelOperator {
            dofs: self.dofs.clone(),
            constraints: self.constraints.clone(),
            gather: self.gather.clone(),
            kernel: LaplaceKernel::new(self.dofs.element(), self.dofs.dim()),
            scales: self.scales.iter().map(|s| S::from_f64(s.to_f64())).collect(),
            reference: self.reference.clone(),
            edge: self.edge.clone(),
        }
    }

    pub fn n_dofs(&self) -> usize {
        self.dofs.n_dofs()
    }

    pub fn dofs(&self) -> &Arc<DofMap> {
        &self.dofs
    }

    pub fn constraints(&self) -> &Arc<ConstraintSet> {
        &self.constraints
    }

    pub fn gather(&self) -> &Arc<ConstrainedGather> {
        &self.gather
    }

    pub fn has_refinement_edge(&self) -> bool {
        self.edge.is_some()
    }

    /// Whether DoF `i` belongs to the refinement edge.
    pub fn is_edge_dof(&self, i: usize) -> bool {
        self.edge.as_ref().is_some_and(|e| e.is_edge[i])
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n_dofs() {
            return Err(MgError::SizeMismatch {
                expected: self.n_dofs(),
                got: len,
            });
        }
        Ok(())
    }

    pub fn apply(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_len(x.len())?;
        let mut y = vec![T::ZERO; x.len()];
        self.vmult(&mut y, x);
        Ok(y)
    }

    /// `y = A x`.
    pub fn vmult(&self, y: &mut [T], x: &[T]) {
        debug_assert_eq!(x.len(), self.n_dofs());
        y.iter_mut().for_each(|v| *v = T::ZERO);
        let npc = self.kernel.dofs_per_cell();
        let mut buf = self.kernel.buffers();
        let mut local = vec![T::ZERO; npc];
        let mut out = vec![T::ZERO; npc];
        for (k, &s) in self.scales.iter().enumerate() {
            self.gather.gather(k, x, &mut local);
            self.kernel.apply(s, &local, &mut out, &mut buf);
            self.gather.scatter_add(k, &out, y);
        }
        for line in self.constraints.lines() {
            let i = line.index as usize;
            y[i] = x[i];
        }
    }

    /// `y = C^T A x` where `x` carries values for every DoF, including
    /// constrained ones (no constraint resolution on the gather side).
    /// Constrained rows of the result are zero. Used to move inhomogeneous
    /// constraint values to the right-hand side.
    pub fn apply_lifted(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_len(x.len())?;
        let npc = self.kernel.dofs_per_cell();
        let mut buf = self.kernel.buffers();
        let mut local = vec![T::ZERO; npc];
        let mut out = vec![T::ZERO; npc];
        let mut y = vec![T::ZERO; x.len()];
        for (k, &s) in self.scales.iter().enumerate() {
            for (l, &g) in local.iter_mut().zip(self.dofs.cell_dofs(k)) {
                *l = x[g as usize];
            }
            self.kernel.apply(s, &local, &mut out, &mut buf);
            self.gather.scatter_add(k, &out, &mut y);
        }
        self.constraints.set_zero(&mut y);
        Ok(y)
    }

    /// Sparse columns of `C_e`: for every global DoF touched by cell `k`,
    /// the local positions and coefficients through which it enters.
    fn cell_columns(&self, k: usize) -> Vec<(u32, Vec<(usize, f64)>)> {
        let mut cols: Vec<(u32, Vec<(usize, f64)>)> = Vec::new();
        let mut push = |g: u32, l: usize, c: f64| match cols.iter_mut().find(|e| e.0 == g) {
            Some(e) => e.1.push((l, c)),
            None => cols.push((g, vec![(l, c)])),
        };
        for (l, &g) in self.gather.direct(k).iter().enumerate() {
            if g != u32::MAX {
                push(g, l, 1.0);
            }
        }
        for &(l, j, c) in self.gather.extras(k) {
            push(j, l as usize, c);
        }
        cols
    }

    /// Diagonal of the condensed operator; 1 on constrained rows.
    pub fn compute_diagonal(&self) -> Vec<T> {
        let n = self.kernel.dofs_per_cell();
        let kref = &self.reference;
        let mut diag = vec![0.0; self.n_dofs()];
        for (k, s) in self.scales.iter().enumerate() {
            let s = s.to_f64();
            if !self.gather.is_constrained_cell(k) {
                for (l, &g) in self.gather.direct(k).iter().enumerate() {
                    diag[g as usize] += s * kref[l * n + l];
                }
                continue;
            }
            for (g, col) in self.cell_columns(k) {
                let mut v = 0.0;
                for &(a, ca) in &col {
                    for &(b, cb) in &col {
                        v += ca * cb * kref[a * n + b];
                    }
                }
                diag[g as usize] += s * v;
            }
        }
        for line in self.constraints.lines() {
            diag[line.index as usize] = 1.0;
        }
        diag.into_iter().map(T::from_f64).collect()
    }

    /// Dense condensed matrix, assembled cell by cell from the reference
    /// matrix; identity on constrained rows and columns.
    pub fn assemble_matrix(&self) -> DMatrix<f64> {
        let n = self.kernel.dofs_per_cell();
        let kref = &self.reference;
        let mut a = DMatrix::zeros(self.n_dofs(), self.n_dofs());
        for (k, s) in self.scales.iter().enumerate() {
            let s = s.to_f64();
            let cols = self.cell_columns(k);
            for (gi, ci) in &cols {
                for (gj, cj) in &cols {
                    let mut v = 0.0;
                    for &(a_, ca) in ci {
                        for &(b_, cb) in cj {
                            v += ca * cb * kref[a_ * n + b_];
                        }
                    }
                    a[(*gi as usize, *gj as usize)] += s * v;
                }
            }
        }
        for line in self.constraints.lines() {
            a[(line.index as usize, line.index as usize)] = 1.0;
        }
        a
    }

    /// Off-diagonal blocks of the full level matrix between interior and
    /// refinement-edge DoFs. Zero when the level has no refinement edge.
    pub fn apply_edge_coupling(&self, which: EdgeProduct, x: &[T]) -> Result<Vec<T>> {
        self.check_len(x.len())?;
        let mut y = vec![T::ZERO; x.len()];
        self.edge_coupling_add(which, x, &mut y);
        Ok(y)
    }

    /// Adds the requested coupling product to `y`.
    pub fn edge_coupling_add(&self, which: EdgeProduct, x: &[T], y: &mut [T]) {
        let Some(edge) = &self.edge else {
            return;
        };
        let npc = self.kernel.dofs_per_cell();
        let mut buf = self.kernel.buffers();
        let mut local = vec![T::ZERO; npc];
        let mut out = vec![T::ZERO; npc];
        // edge DoFs are never constrained by the boundary-only gather
        let source_is_edge = which == EdgeProduct::SE;
        for &k in &edge.cells {
            let direct = edge.gather.direct(k);
            for (l, &g) in local.iter_mut().zip(direct) {
                *l = if g != u32::MAX && edge.is_edge[g as usize] == source_is_edge {
                    x[g as usize]
                } else {
                    T::ZERO
                };
            }
            self.kernel.apply(self.scales[k], &local, &mut out, &mut buf);
            for (&v, &g) in out.iter().zip(direct) {
                if g == u32::MAX || edge.is_edge[g as usize] == source_is_edge {
                    continue;
                }
                match which {
                    EdgeProduct::ES => y[g as usize] -= v,
                    EdgeProduct::SE => y[g as usize] += v,
                }
            }
        }
    }
}
