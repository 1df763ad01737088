//! Multigrid hierarchies and the V-cycle.
//!
//! Level 0 is the coarsest level. Every level owns its operator, smoother,
//! the transfer to the next coarser level and its work vectors; a cycle
//! therefore needs `&mut` access and a hierarchy serves one solve at a time.

mod pcg;
mod poisson;
mod smoother;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{Cholesky, DVector, Dyn};

use crate::error::{MgError, Result};
use crate::fem::{build_dirichlet_constraints, level_constraints, ConstraintSet, DofMap, LagrangeElement};
use crate::mesh::{LevelView, TreeMesh};
use crate::mfop::{EdgeDofClassification, EdgeProduct, LevelOperator};
use crate::scalar::{convert, Scalar};
use crate::transfer::{LevelCopy, TwoLevelTransfer};

pub use pcg::{pcg_solve, SolveStats, SolverControl};
pub use poisson::{solve_poisson, PoissonSolution};
pub use smoother::{estimate_eigenvalues, ChebyshevSmoother, LinearOperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    LocalSmoothing,
    GlobalCoarsening,
    PolynomialCoarsening,
}

impl Variant {
    pub fn short_name(self) -> &'static str {
        match self {
            Variant::LocalSmoothing => "LS",
            Variant::GlobalCoarsening => "GC",
            Variant::PolynomialCoarsening => "PC",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Variant {
    type Err = MgError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "LS" => Ok(Variant::LocalSmoothing),
            "GC" => Ok(Variant::GlobalCoarsening),
            "PC" => Ok(Variant::PolynomialCoarsening),
            _ => Err(MgError::Config(format!("unknown multigrid variant '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MgConfig {
    /// Chebyshev steps per pre- and postsmoothing.
    pub smoother_degree: usize,
    /// Smoothing interval as multiples of the estimated largest eigenvalue.
    pub smoothing_range: (f64, f64),
    pub eigenvalue_iterations: usize,
    pub seed: u64,
    /// Geometric hierarchy that handles the `p = 1` problem of polynomial
    /// coarsening; `None` solves it directly.
    pub pc_coarse: Option<Variant>,
}

impl Default for MgConfig {
    fn default() -> Self {
        Self {
            smoother_degree: 3,
            smoothing_range: (0.08, 1.2),
            eigenvalue_iterations: 20,
            seed: 42,
            pc_coarse: Some(Variant::GlobalCoarsening),
        }
    }
}

/// Dense Cholesky factorization of the condensed level matrix.
#[derive(Clone, Debug)]
pub struct DenseCoarseSolver {
    factor: Cholesky<f64, Dyn>,
}

impl DenseCoarseSolver {
    pub fn new<T: Scalar>(op: &LevelOperator<T>) -> Result<Self> {
        let factor = op
            .assemble_matrix()
            .cholesky()
            .ok_or(MgError::SingularCoarseMatrix)?;
        Ok(Self { factor })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.factor
            .solve(&DVector::from_column_slice(b))
            .iter()
            .copied()
            .collect()
    }
}

#[derive(Clone, Debug)]
pub enum CoarseSolver<T: Scalar> {
    Dense(DenseCoarseSolver),
    /// One V-cycle of another hierarchy on the same active mesh.
    Nested(Box<Hierarchy<T>>),
}

#[derive(Clone, Debug)]
struct Level<T: Scalar> {
    degree: usize,
    op: LevelOperator<T>,
    smoother: Option<ChebyshevSmoother<T>>,
    to_coarser: Option<TwoLevelTransfer<T>>,
    copy: Option<LevelCopy>,
    edge_dofs: Vec<u32>,
    b: Vec<T>,
    x: Vec<T>,
    r: Vec<T>,
}

#[derive(Clone, Debug)]
pub struct Hierarchy<T: Scalar> {
    variant: Variant,
    levels: Vec<Level<T>>,
    coarse: CoarseSolver<T>,
    active_op: LevelOperator<f64>,
}

fn smoother_for<T: Scalar>(op: &LevelOperator<T>, config: &MgConfig) -> ChebyshevSmoother<T> {
    let op64 = op.cast::<f64>();
    let diag = op64.compute_diagonal();
    let fixed: Vec<bool> = (0..op.n_dofs())
        .map(|i| op.constraints().is_constrained(i))
        .collect();
    let lambda = estimate_eigenvalues(
        &op64,
        &diag,
        &fixed,
        config.eigenvalue_iterations,
        config.seed,
    );
    let mut s = ChebyshevSmoother::new(
        &convert::<f64, T>(&diag),
        config.smoother_degree,
        config.smoothing_range.0 * lambda,
        config.smoothing_range.1 * lambda,
    );
    s.lambda_max = lambda;
    s
}

impl<T: Scalar> Hierarchy<T> {
    pub fn build(mesh: &TreeMesh, degree: usize, variant: Variant, config: &MgConfig) -> Result<Self> {
        let element = LagrangeElement::new(degree)?;
        let active = Arc::new(DofMap::new(mesh, LevelView::Active, element.clone()));
        let active_cs = Arc::new(level_constraints(mesh, &active)?);
        let active_op = LevelOperator::<f64>::new(mesh, active.clone(), active_cs.clone());
        let mut levels: Vec<Level<T>> = Vec::new();
        let new_level = |degree, op: LevelOperator<T>, to_coarser, copy, edge_dofs| Level {
            degree,
            b: vec![T::ZERO; op.n_dofs()],
            x: vec![T::ZERO; op.n_dofs()],
            r: vec![T::ZERO; op.n_dofs()],
            op,
            smoother: None,
            to_coarser,
            copy,
            edge_dofs,
        };
        match variant {
            Variant::GlobalCoarsening => {
                let top = mesh.max_level();
                let mut prev: Option<(Arc<DofMap>, Arc<ConstraintSet>)> = None;
                for l in 0..=top {
                    let (dofs, cs) = if l == top {
                        (active.clone(), active_cs.clone())
                    } else {
                        let d = Arc::new(DofMap::new(mesh, LevelView::Global(l), element.clone()));
                        let c = Arc::new(level_constraints(mesh, &d)?);
                        (d, c)
                    };
                    let transfer = match &prev {
                        Some((pd, pc)) => Some(TwoLevelTransfer::geometric(mesh, pd, pc, &dofs, &cs)?),
                        None => None,
                    };
                    let op = if l == top {
                        active_op.cast()
                    } else {
                        LevelOperator::new(mesh, dofs.clone(), cs.clone())
                    };
                    levels.push(new_level(degree, op, transfer, None, Vec::new()));
                    prev = Some((dofs, cs));
                }
            }
            Variant::LocalSmoothing => {
                let mut prev: Option<(Arc<DofMap>, Arc<ConstraintSet>)> = None;
                for l in 0..=mesh.max_level() {
                    let dofs = Arc::new(DofMap::new(mesh, LevelView::Local(l), element.clone()));
                    let boundary = Arc::new(build_dirichlet_constraints(&dofs, |_| 0.0));
                    let edge = EdgeDofClassification::new(mesh, &dofs);
                    let transfer = match &prev {
                        Some((pd, pc)) => {
                            Some(TwoLevelTransfer::geometric(mesh, pd, pc, &dofs, &boundary)?)
                        }
                        None => None,
                    };
                    let copy = LevelCopy::new(mesh, &dofs, &edge.is_edge, &active)?;
                    let edge_dofs = (0..dofs.n_dofs() as u32)
                        .filter(|&i| edge.is_edge[i as usize])
                        .collect();
                    let op = LevelOperator::with_refinement_edge(mesh, dofs.clone(), boundary.clone(), &edge);
                    levels.push(new_level(degree, op, transfer, Some(copy), edge_dofs));
                    prev = Some((dofs, boundary));
                }
            }
            Variant::PolynomialCoarsening => {
                if degree < 2 {
                    return Err(MgError::NoCoarserDegree(degree));
                }
                let mut degrees = vec![degree];
                while *degrees.last().unwrap() > 1 {
                    let d = *degrees.last().unwrap() / 2;
                    degrees.push(d);
                }
                degrees.reverse();
                let mut prev: Option<(Arc<DofMap>, Arc<ConstraintSet>)> = None;
                for &p in &degrees {
                    let (dofs, cs) = if p == degree {
                        (active.clone(), active_cs.clone())
                    } else {
                        let d = Arc::new(DofMap::new(mesh, LevelView::Active, LagrangeElement::new(p)?));
                        let c = Arc::new(level_constraints(mesh, &d)?);
                        (d, c)
                    };
                    let transfer = match &prev {
                        Some((pd, pc)) => Some(TwoLevelTransfer::polynomial(pd, pc, &dofs, &cs)?),
                        None => None,
                    };
                    let op = if p == degree {
                        active_op.cast()
                    } else {
                        LevelOperator::new(mesh, dofs.clone(), cs.clone())
                    };
                    levels.push(new_level(p, op, transfer, None, Vec::new()));
                    prev = Some((dofs, cs));
                }
            }
        }
        for level in levels.iter_mut().skip(1) {
            level.smoother = Some(smoother_for(&level.op, config));
        }
        let coarse = match (variant, config.pc_coarse) {
            (Variant::PolynomialCoarsening, Some(geometric)) => {
                if geometric == Variant::PolynomialCoarsening {
                    return Err(MgError::Config(
                        "polynomial coarsening needs a geometric coarse-grid hierarchy".into(),
                    ));
                }
                CoarseSolver::Nested(Box::new(Hierarchy::build(mesh, 1, geometric, config)?))
            }
            _ => CoarseSolver::Dense(DenseCoarseSolver::new(&levels[0].op)?),
        };
        Ok(Self {
            variant,
            levels,
            coarse,
            active_op,
        })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.degree).collect()
    }

    pub fn level_n_dofs(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.op.n_dofs()).collect()
    }

    pub fn level_n_cells(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.op.dofs().n_cells()).collect()
    }

    /// Smoothing operator of level `l` (`A_SS` for local smoothing).
    pub fn level_operator(&self, l: usize) -> &LevelOperator<T> {
        &self.levels[l].op
    }

    /// Transfer between levels `l - 1` and `l` (`l >= 1`).
    pub fn transfer(&self, l: usize) -> Option<&TwoLevelTransfer<T>> {
        self.levels.get(l).and_then(|lev| lev.to_coarser.as_ref())
    }

    pub fn smoother(&self, l: usize) -> Option<&ChebyshevSmoother<T>> {
        self.levels.get(l).and_then(|lev| lev.smoother.as_ref())
    }

    pub fn coarse_solver(&self) -> &CoarseSolver<T> {
        &self.coarse
    }

    /// Operator of the active mesh in double precision (the outer Krylov
    /// operator).
    pub fn active_operator(&self) -> &LevelOperator<f64> {
        &self.active_op
    }

    pub fn n_active_dofs(&self) -> usize {
        self.active_op.n_dofs()
    }

    /// Fills the level right-hand sides from an active-mesh vector.
    pub fn copy_to_mg(&mut self, b: &[T]) -> Result<()> {
        if b.len() != self.n_active_dofs() {
            return Err(MgError::SizeMismatch {
                expected: self.n_active_dofs(),
                got: b.len(),
            });
        }
        for lev in &mut self.levels {
            lev.b.iter_mut().for_each(|v| *v = T::ZERO);
        }
        if self.variant == Variant::LocalSmoothing {
            for lev in &mut self.levels {
                if let Some(copy) = &lev.copy {
                    copy.copy_to(&mut lev.b, b);
                }
            }
        } else {
            let top = self.levels.last_mut().expect("at least one level");
            top.b.copy_from_slice(b);
            top.op.constraints().set_zero(&mut top.b);
        }
        Ok(())
    }

    /// Assembles the active-mesh result from the level solutions.
    pub fn copy_from_mg(&self) -> Vec<T> {
        if self.variant == Variant::LocalSmoothing {
            let mut out = vec![T::ZERO; self.n_active_dofs()];
            for lev in &self.levels {
                if let Some(copy) = &lev.copy {
                    copy.copy_from(&mut out, &lev.x);
                }
            }
            self.active_op.constraints().set_zero(&mut out);
            out
        } else {
            let mut out = self.levels.last().expect("at least one level").x.clone();
            self.active_op.constraints().set_zero(&mut out);
            out
        }
    }

    /// Level right-hand side vector (for inspection).
    pub fn level_rhs(&self, l: usize) -> &[T] {
        &self.levels[l].b
    }

    /// One V-cycle applied to `b` with zero initial guesses throughout.
    pub fn vcycle(&mut self, b: &[T]) -> Result<Vec<T>> {
        self.copy_to_mg(b)?;
        let top = self.levels.len() - 1;
        self.cycle(top)?;
        Ok(self.copy_from_mg())
    }

    fn cycle(&mut self, l: usize) -> Result<()> {
        if l == 0 {
            let lev = &mut self.levels[0];
            lev.op.constraints().set_zero(&mut lev.b);
            lev.x = match &mut self.coarse {
                CoarseSolver::Dense(solver) => convert(&solver.solve(&convert::<T, f64>(&lev.b))),
                CoarseSolver::Nested(h) => h.vcycle(&lev.b)?,
            };
            return Ok(());
        }
        {
            let (lower, upper) = self.levels.split_at_mut(l);
            let lev = &mut upper[0];
            let coarse = &mut lower[l - 1];
            let smoother = lev.smoother.as_ref().expect("smoother on levels >= 1");
            lev.op.constraints().set_zero(&mut lev.b);
            smoother.smooth(&lev.op, &mut lev.x, &lev.b, true);
            lev.op.vmult(&mut lev.r, &lev.x);
            for (r, &b) in lev.r.iter_mut().zip(&lev.b) {
                *r = b - *r;
            }
            lev.op.edge_coupling_add(EdgeProduct::ES, &lev.x, &mut lev.r);
            let transfer = lev.to_coarser.as_ref().expect("transfer on levels >= 1");
            transfer.restrict_and_add(&mut coarse.b, &lev.r)?;
        }
        self.cycle(l - 1)?;
        let (lower, upper) = self.levels.split_at_mut(l);
        let lev = &mut upper[0];
        let coarse = &lower[l - 1];
        let transfer = lev.to_coarser.as_ref().expect("transfer on levels >= 1");
        transfer.prolongate_and_add(&mut lev.x, &coarse.x)?;
        let mut saved = Vec::with_capacity(lev.edge_dofs.len());
        if !lev.edge_dofs.is_empty() {
            lev.r.iter_mut().for_each(|v| *v = T::ZERO);
            lev.op.edge_coupling_add(EdgeProduct::SE, &lev.x, &mut lev.r);
            for (b, &r) in lev.b.iter_mut().zip(&lev.r) {
                *b -= r;
            }
            for &i in &lev.edge_dofs {
                saved.push(lev.x[i as usize]);
                lev.x[i as usize] = T::ZERO;
            }
        }
        let smoother = lev.smoother.as_ref().expect("smoother on levels >= 1");
        smoother.smooth(&lev.op, &mut lev.x, &lev.b, false);
        for (&i, &v) in lev.edge_dofs.iter().zip(&saved) {
            lev.x[i as usize] = v;
        }
        Ok(())
    }

    /// Nodal interpolation of an active-mesh finite-element function (with
    /// consistent constrained values) onto every level, coarsest first.
    pub fn interpolate_to_mg(&self, mesh: &TreeMesh, active: &[T]) -> Result<Vec<Vec<T>>> {
        let n = self.levels.len();
        let mut out: Vec<Vec<T>> = self.levels.iter().map(|l| vec![T::ZERO; l.op.n_dofs()]).collect();
        let active_dofs = self.active_op.dofs().clone();
        let from_active = |dofs: &DofMap, field: &mut [T]| {
            for (slot, &cell) in dofs.cells().iter().enumerate() {
                if !mesh.is_active(cell) {
                    continue;
                }
                for &g in dofs.cell_dofs(slot) {
                    if let Some(a) = active_dofs.dof_of_key(&dofs.key(g as usize)) {
                        field[g as usize] = active[a];
                    }
                }
            }
        };
        match self.variant {
            Variant::LocalSmoothing => from_active(self.levels[n - 1].op.dofs(), &mut out[n - 1]),
            _ => out[n - 1].copy_from_slice(active),
        }
        for l in (1..n).rev() {
            let (lower, upper) = out.split_at_mut(l);
            let transfer = self.levels[l].to_coarser.as_ref().expect("transfer");
            let coarse_dofs = self.levels[l - 1].op.dofs();
            transfer.interpolate(&mut lower[l - 1], &upper[0], coarse_dofs)?;
            if self.variant == Variant::LocalSmoothing {
                from_active(coarse_dofs, &mut lower[l - 1]);
            }
        }
        Ok(out)
    }
}
