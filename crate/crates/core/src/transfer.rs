//! Two-level transfer operators.
//!
//! Prolongation is a loop over coarse cells grouped by category. A refined
//! coarse cell maps onto the `(2p+1)^d` nodes of its children, an unrefined
//! one onto itself (possibly with a higher degree). Coarse values are
//! gathered with constraints resolved, fine contributions are weighted by
//! the inverse valence and dropped on constrained fine DoFs. Restriction is
//! the exact transpose.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{MgError, Result};
use crate::fem::{ConstrainedGather, ConstraintSet, DofMap, LagrangeElement, QuadratureRule};
use crate::mesh::{LevelView, TreeMesh};
use crate::scalar::Scalar;
use crate::tensor::{apply_tensor, Matrix1d};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Category {
    /// Coarse cell split into `2^d` children.
    Refined,
    /// Same cell on both levels.
    Unrefined,
}

/// 1D element prolongation by `L2` projection: `M_f^{-1} (phi_f, phi_c)`.
///
/// With `refined`, the fine element is the pair of children `[0, 1/2]`,
/// `[1/2, 1]` and the result has `2 p_f + 1` rows (shared midpoint once).
pub fn prolongation_1d(
    coarse: &LagrangeElement,
    fine: &LagrangeElement,
    refined: bool,
) -> Result<Matrix1d<f64>> {
    if coarse.degree > fine.degree || (refined && coarse.degree != fine.degree) {
        return Err(MgError::NotNested {
            coarse: coarse.degree,
            fine: fine.degree,
        });
    }
    let nf = fine.n_nodes_1d();
    let nc = coarse.n_nodes_1d();
    let quad = QuadratureRule::gauss(nf + 1)?;
    let mass = DMatrix::from_fn(nf, nf, |i, j| {
        quad.points
            .iter()
            .zip(&quad.weights)
            .map(|(&x, &w)| w * fine.value(i, x) * fine.value(j, x))
            .sum::<f64>()
    });
    let lu = mass.lu();
    let children: &[f64] = if refined { &[0.0, 0.5] } else { &[0.0] };
    let width = if refined { 0.5 } else { 1.0 };
    let rows = if refined { 2 * nf - 1 } else { nf };
    let mut out = Matrix1d::<f64>::zeros(rows, nc);
    for (k, &offset) in children.iter().enumerate() {
        let rhs = DMatrix::from_fn(nf, nc, |i, j| {
            quad.points
                .iter()
                .zip(&quad.weights)
                .map(|(&t, &w)| w * fine.value(i, t) * coarse.value(j, offset + width * t))
                .sum::<f64>()
        });
        let p = lu.solve(&rhs).ok_or(MgError::SingularCoarseMatrix)?;
        for i in 0..nf {
            for j in 0..nc {
                out.data[(k * (nf - 1) + i) * nc + j] = p[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Tensorized element prolongation matrix (rows: fine nodes, x fastest).
pub fn element_prolongation_matrix(
    coarse: &LagrangeElement,
    fine: &LagrangeElement,
    refined: bool,
    dim: usize,
) -> Result<DMatrix<f64>> {
    let p1 = prolongation_1d(coarse, fine, refined)?;
    let rows = p1.rows.pow(dim as u32);
    let cols = p1.cols.pow(dim as u32);
    Ok(DMatrix::from_fn(rows, cols, |r, c| {
        let (mut r, mut c) = (r, c);
        let mut v = 1.0;
        for _ in 0..dim {
            v *= p1.get(r % p1.rows, c % p1.cols);
            r /= p1.rows;
            c /= p1.cols;
        }
        v
    }))
}

/// Element prolongation for one category together with its 1D factor.
#[derive(Clone, Debug)]
pub struct TransferScheme<T> {
    pub category: Category,
    pub prolongation: Matrix1d<T>,
    pub restriction: Matrix1d<T>,
    /// 1D evaluation of the fine (patch) basis at the coarse nodes.
    pub interpolation: Matrix1d<T>,
}

impl<T: Scalar> TransferScheme<T> {
    fn new(category: Category, coarse: &LagrangeElement, fine: &LagrangeElement) -> Result<Self> {
        let refined = category == Category::Refined;
        let p = prolongation_1d(coarse, fine, refined)?;
        let nf = fine.n_nodes_1d();
        let interp = Matrix1d::<f64>::from_fn(coarse.n_nodes_1d(), p.rows, |a, r| {
            let x = coarse.nodes[a];
            if !refined {
                return fine.value(r, x);
            }
            // patch basis function r restricted to the child containing x
            let (child, t) = if x <= 0.5 { (0, 2.0 * x) } else { (1, 2.0 * x - 1.0) };
            let lo = child * (nf - 1);
            if r < lo || r > lo + nf - 1 {
                0.0
            } else {
                fine.value(r - lo, t)
            }
        });
        Ok(Self {
            category,
            restriction: p.transpose().cast(),
            prolongation: p.cast(),
            interpolation: interp.cast(),
        })
    }
}

#[derive(Clone, Debug)]
struct Group {
    scheme: usize,
    coarse_slot: usize,
    fine_start: usize,
}

/// Prolongation/restriction between a coarse and a fine DoF map.
#[derive(Clone, Debug)]
pub struct TwoLevelTransfer<T: Scalar> {
    dim: usize,
    schemes: Vec<TransferScheme<T>>,
    groups: Vec<Group>,
    fine_indices: Vec<u32>,
    coarse_gather: Arc<ConstrainedGather>,
    weights: Vec<T>,
    n_coarse: usize,
    n_fine: usize,
}

impl<T: Scalar> TwoLevelTransfer<T> {
    /// Geometric transfer between a level and its one-step coarsening:
    /// every fine cell is either a child of a coarse cell or the coarse cell
    /// itself.
    pub fn geometric(
        mesh: &TreeMesh,
        coarse: &DofMap,
        coarse_constraints: &ConstraintSet,
        fine: &DofMap,
        fine_constraints: &ConstraintSet,
    ) -> Result<Self> {
        if coarse.degree() != fine.degree() {
            return Err(MgError::InconsistentLevels(format!(
                "geometric transfer needs equal degrees, got {} and {}",
                coarse.degree(),
                fine.degree()
            )));
        }
        let element = fine.element();
        let schemes = vec![
            TransferScheme::new(Category::Refined, element, element)?,
            TransferScheme::new(Category::Unrefined, element, element)?,
        ];
        let mut covered = vec![false; fine.n_cells()];
        let mut groups = Vec::new();
        let mut fine_indices = Vec::new();
        let n1 = element.n_nodes_1d();
        let patch1 = 2 * n1 - 1;
        let dim = fine.dim();
        for (slot, &cell) in coarse.cells().iter().enumerate() {
            let fine_start = fine_indices.len();
            if let Some(fs) = fine.cell_slot(cell) {
                covered[fs] = true;
                fine_indices.extend_from_slice(fine.cell_dofs(fs));
                groups.push(Group {
                    scheme: 1,
                    coarse_slot: slot,
                    fine_start,
                });
                continue;
            }
            if mesh.is_active(cell) {
                // local-smoothing levels only continue the refined region
                if matches!(fine.view(), LevelView::Local(_)) {
                    continue;
                }
                return Err(MgError::InconsistentLevels(format!(
                    "coarse cell {} has no counterpart on the fine level",
                    cell.0
                )));
            }
            let mut child_slots = Vec::with_capacity(mesh.n_children());
            for child in mesh.children(cell) {
                let fs = fine.cell_slot(child).ok_or_else(|| {
                    MgError::InconsistentLevels(format!(
                        "child {} of coarse cell {} is not on the fine level",
                        child.0, cell.0
                    ))
                })?;
                covered[fs] = true;
                child_slots.push(fs);
            }
            for r in 0..patch1.pow(dim as u32) {
                let mut child = 0;
                let mut local = 0;
                let mut rr = r;
                let mut stride = 1;
                for d in 0..dim {
                    let rd = rr % patch1;
                    rr /= patch1;
                    let bit = usize::from(rd >= n1);
                    child |= bit << d;
                    local += (rd - bit * (n1 - 1)) * stride;
                    stride *= n1;
                }
                fine_indices.push(fine.cell_dofs(child_slots[child])[local]);
            }
            groups.push(Group {
                scheme: 0,
                coarse_slot: slot,
                fine_start,
            });
        }
        if let Some(k) = covered.iter().position(|&c| !c) {
            return Err(MgError::InconsistentLevels(format!(
                "fine cell {} has no coarse parent",
                fine.cells()[k].0
            )));
        }
        Ok(Self::finish(
            dim,
            schemes,
            groups,
            fine_indices,
            coarse,
            coarse_constraints,
            fine,
            fine_constraints,
        ))
    }

    /// Polynomial transfer on a fixed cell set from degree `p_c` to `p_f`.
    pub fn polynomial(
        coarse: &DofMap,
        coarse_constraints: &ConstraintSet,
        fine: &DofMap,
        fine_constraints: &ConstraintSet,
    ) -> Result<Self> {
        if fine.degree() < 2 {
            return Err(MgError::NoCoarserDegree(fine.degree()));
        }
        if coarse.degree() >= fine.degree() {
            return Err(MgError::NotNested {
                coarse: coarse.degree(),
                fine: fine.degree(),
            });
        }
        if coarse.cells() != fine.cells() {
            return Err(MgError::InconsistentLevels(
                "polynomial transfer needs identical cell sets".into(),
            ));
        }
        let schemes = vec![TransferScheme::new(
            Category::Unrefined,
            coarse.element(),
            fine.element(),
        )?];
        let mut groups = Vec::with_capacity(coarse.n_cells());
        let mut fine_indices = Vec::new();
        for slot in 0..coarse.n_cells() {
            groups.push(Group {
                scheme: 0,
                coarse_slot: slot,
                fine_start: fine_indices.len(),
            });
            fine_indices.extend_from_slice(fine.cell_dofs(slot));
        }
        Ok(Self::finish(
            fine.dim(),
            schemes,
            groups,
            fine_indices,
            coarse,
            coarse_constraints,
            fine,
            fine_constraints,
        ))
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        dim: usize,
        schemes: Vec<TransferScheme<T>>,
        groups: Vec<Group>,
        fine_indices: Vec<u32>,
        coarse: &DofMap,
        coarse_constraints: &ConstraintSet,
        fine: &DofMap,
        fine_constraints: &ConstraintSet,
    ) -> Self {
        let mut valence = vec![0u32; fine.n_dofs()];
        for &g in &fine_indices {
            if !fine_constraints.is_constrained(g as usize) {
                valence[g as usize] += 1;
            }
        }
        let weights = valence
            .iter()
            .map(|&v| {
                if v == 0 {
                    T::ZERO
                } else {
                    T::from_f64(1.0 / v as f64)
                }
            })
            .collect();
        Self {
            dim,
            schemes,
            groups,
            fine_indices,
            coarse_gather: Arc::new(ConstrainedGather::new(coarse, coarse_constraints)),
            weights,
            n_coarse: coarse.n_dofs(),
            n_fine: fine.n_dofs(),
        }
    }

    pub fn n_coarse(&self) -> usize {
        self.n_coarse
    }

    pub fn n_fine(&self) -> usize {
        self.n_fine
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn schemes(&self) -> &[TransferScheme<T>] {
        &self.schemes
    }

    /// Number of coarse cells handled by each scheme.
    pub fn category_counts(&self) -> Vec<(Category, usize)> {
        self.schemes
            .iter()
            .enumerate()
            .map(|(s, scheme)| {
                (
                    scheme.category,
                    self.groups.iter().filter(|g| g.scheme == s).count(),
                )
            })
            .collect()
    }

    fn buffer_len(&self) -> usize {
        self.schemes
            .iter()
            .map(|s| s.prolongation.rows.max(s.prolongation.cols))
            .max()
            .unwrap_or(1)
            .pow(self.dim as u32)
    }

    fn check(&self, coarse: usize, fine: usize) -> Result<()> {
        if coarse != self.n_coarse {
            return Err(MgError::SizeMismatch {
                expected: self.n_coarse,
                got: coarse,
            });
        }
        if fine != self.n_fine {
            return Err(MgError::SizeMismatch {
                expected: self.n_fine,
                got: fine,
            });
        }
        Ok(())
    }

    /// `fine += P coarse`.
    pub fn prolongate_and_add(&self, fine: &mut [T], coarse: &[T]) -> Result<()> {
        self.check(coarse.len(), fine.len())?;
        let len = self.buffer_len();
        let mut cl = vec![T::ZERO; len];
        let mut fl = vec![T::ZERO; len];
        let mut scratch = vec![T::ZERO; len];
        for g in &self.groups {
            let scheme = &self.schemes[g.scheme];
            let m = &scheme.prolongation;
            let nc = m.cols.pow(self.dim as u32);
            let nf = m.rows.pow(self.dim as u32);
            self.coarse_gather.gather(g.coarse_slot, coarse, &mut cl[..nc]);
            apply_tensor(m, self.dim, &cl, &mut fl, &mut scratch);
            for (v, &idx) in fl[..nf].iter().zip(&self.fine_indices[g.fine_start..]) {
                fine[idx as usize] += self.weights[idx as usize] * *v;
            }
        }
        Ok(())
    }

    /// `coarse += P^T fine`.
    pub fn restrict_and_add(&self, coarse: &mut [T], fine: &[T]) -> Result<()> {
        self.check(coarse.len(), fine.len())?;
        let len = self.buffer_len();
        let mut cl = vec![T::ZERO; len];
        let mut fl = vec![T::ZERO; len];
        let mut scratch = vec![T::ZERO; len];
        for g in &self.groups {
            let scheme = &self.schemes[g.scheme];
            let m = &scheme.restriction;
            let nf = m.cols.pow(self.dim as u32);
            let nc = m.rows.pow(self.dim as u32);
            for (v, &idx) in fl[..nf].iter_mut().zip(&self.fine_indices[g.fine_start..]) {
                *v = self.weights[idx as usize] * fine[idx as usize];
            }
            apply_tensor(m, self.dim, &fl, &mut cl, &mut scratch);
            self.coarse_gather
                .scatter_add(g.coarse_slot, &cl[..nc], coarse);
        }
        Ok(())
    }

    /// Coarse nodal values of the fine finite-element function `fine`
    /// (which must carry consistent values on constrained DoFs).
    pub fn interpolate(&self, coarse: &mut [T], fine: &[T], coarse_dofs: &DofMap) -> Result<()> {
        self.check(coarse.len(), fine.len())?;
        let len = self.buffer_len();
        let mut cl = vec![T::ZERO; len];
        let mut fl = vec![T::ZERO; len];
        let mut scratch = vec![T::ZERO; len];
        for g in &self.groups {
            let m = &self.schemes[g.scheme].interpolation;
            let nf = m.cols.pow(self.dim as u32);
            for (v, &idx) in fl[..nf].iter_mut().zip(&self.fine_indices[g.fine_start..]) {
                *v = fine[idx as usize];
            }
            apply_tensor(m, self.dim, &fl, &mut cl, &mut scratch);
            for (&v, &idx) in cl.iter().zip(coarse_dofs.cell_dofs(g.coarse_slot)) {
                coarse[idx as usize] = v;
            }
        }
        Ok(())
    }
}

/// Index pairs `(level DoF, active DoF)` moving data between the active mesh
/// and one local-smoothing level: DoFs of active level cells that are
/// neither on the refinement edge nor on the boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelCopy {
    pub pairs: Vec<(u32, u32)>,
}

impl LevelCopy {
    pub fn new(
        mesh: &TreeMesh,
        level: &DofMap,
        is_edge: &[bool],
        active: &DofMap,
    ) -> Result<Self> {
        if !matches!(level.view(), LevelView::Local(_)) {
            return Err(MgError::InconsistentLevels(
                "level copies are defined for local-smoothing levels".into(),
            ));
        }
        let mut seen = vec![false; level.n_dofs()];
        let mut pairs = Vec::new();
        for (slot, &cell) in level.cells().iter().enumerate() {
            if !mesh.is_active(cell) {
                continue;
            }
            for &g in level.cell_dofs(slot) {
                let gi = g as usize;
                if seen[gi] || is_edge[gi] || level.is_boundary(gi) {
                    continue;
                }
                seen[gi] = true;
                let a = active.dof_of_key(&level.key(gi)).ok_or_else(|| {
                    MgError::InconsistentLevels("active cell DoF missing on the active mesh".into())
                })?;
                pairs.push((g, a as u32));
            }
        }
        Ok(Self { pairs })
    }

    /// `level[i] = active[j]` for every pair.
    pub fn copy_to<T: Scalar>(&self, level: &mut [T], active: &[T]) {
        for &(i, j) in &self.pairs {
            level[i as usize] = active[j as usize];
        }
    }

    /// `active[j] = level[i]` for every pair.
    pub fn copy_from<T: Scalar>(&self, active: &mut [T], level: &[T]) {
        for &(i, j) in &self.pairs {
            active[j as usize] = level[i as usize];
        }
    }
}
