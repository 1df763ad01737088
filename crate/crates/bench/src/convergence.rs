use serde::Serialize;

use mfmg::fem::l2_error;
use mfmg::mesh::refine_octant;
use mfmg::multigrid::{solve_poisson, SolverControl};
use mfmg::{Hierarchy, MgConfig, Variant};

use crate::error::Result;
use crate::problem::Gaussian;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    #[serde(rename = "L")]
    pub level: usize,
    pub p: usize,
    pub n_dofs: usize,
    pub iterations: usize,
    pub l2_error: f64,
    /// `log2` of the error ratio to the previous row (the mesh size halves
    /// everywhere from one row to the next).
    pub order: Option<f64>,
}

/// Tolerance of the study's solves, tight enough for the algebraic error to
/// stay far below the discretization error.
pub const STUDY_RTOL: f64 = 1e-10;

/// Gaussian problem on the 3D octant meshes for every `L` in `levels`.
pub fn run_convergence_study(p: usize, levels: &[usize], problem: Gaussian) -> Result<Vec<ConvergenceRow>> {
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &level in levels {
        let mesh = refine_octant(level, problem.dim)?;
        let mut h = Hierarchy::<f64>::build(&mesh, p, Variant::GlobalCoarsening, &MgConfig::default())?;
        let control = SolverControl {
            rtol: STUDY_RTOL,
            max_iterations: 100,
        };
        let s = solve_poisson(&mesh, &mut h, |x| problem.rhs(x), Some(&|x| problem.value(x)), control)?;
        let err = l2_error(&mesh, h.active_operator().dofs(), &s.values, |x| problem.value(x), p + 3);
        let order = rows.last().map(|prev| (prev.l2_error / err).log2());
        rows.push(ConvergenceRow {
            level,
            p,
            n_dofs: h.n_active_dofs(),
            iterations: s.stats.iterations,
            l2_error: err,
            order,
        });
    }
    Ok(rows)
}
