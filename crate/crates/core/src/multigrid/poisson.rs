use crate::error::Result;
use crate::fem::{assemble_rhs, build_dirichlet_constraints, build_hanging_node_constraints};
use crate::mesh::TreeMesh;
use crate::multigrid::pcg::{pcg_solve, SolveStats, SolverControl};
use crate::multigrid::Hierarchy;
use crate::scalar::{convert, Scalar};

#[derive(Clone, Debug)]
pub struct PoissonSolution {
    /// Nodal values on the active mesh, constrained entries filled in.
    pub values: Vec<f64>,
    pub stats: SolveStats,
}

/// Solves `-Δu = f` with `u = g` on the boundary (`g = 0` when `None`) by
/// CG in double precision preconditioned with one V-cycle of `hierarchy`.
///
/// Boundary data is lifted: the constrained interpolant of `g` is moved to
/// the right-hand side and added back after the solve.
pub fn solve_poisson<T: Scalar>(
    mesh: &TreeMesh,
    hierarchy: &mut Hierarchy<T>,
    f: impl Fn([f64; 3]) -> f64,
    g: Option<&dyn Fn([f64; 3]) -> f64>,
    control: SolverControl,
) -> Result<PoissonSolution> {
    let op = hierarchy.active_operator().clone();
    let dofs = op.dofs().clone();
    let n_points = dofs.degree() + 3;
    let mut b = assemble_rhs(mesh, &dofs, op.gather(), f, n_points);
    let hanging = build_hanging_node_constraints(mesh, &dofs)?;
    let full = match g {
        Some(g) => hanging.merge(&build_dirichlet_constraints(&dofs, g))?,
        None => hanging.merge(&build_dirichlet_constraints(&dofs, |_| 0.0))?,
    };
    let mut lift = vec![0.0; dofs.n_dofs()];
    full.distribute(&mut lift);
    let a_lift = op.apply_lifted(&lift)?;
    for (bi, ai) in b.iter_mut().zip(&a_lift) {
        *bi -= ai;
    }
    op.constraints().set_zero(&mut b);
    let (u0, stats) = pcg_solve(
        &op,
        &b,
        |r| {
            let rt: Vec<T> = convert(r);
            let x = hierarchy.vcycle(&rt).expect("residual matches the active space");
            convert(&x)
        },
        control,
    )?;
    let mut values: Vec<f64> = u0.iter().zip(&lift).map(|(u, l)| u + l).collect();
    full.distribute(&mut values);
    Ok(PoissonSolution { values, stats })
}
