use serde::Serialize;

use mfmg::fem::l2_error;
use mfmg::multigrid::{solve_poisson, SolveStats, SolverControl};
use mfmg::partition::HierarchyGraph;
use mfmg::{Hierarchy, MetricsReport, MgConfig, MgError, PartitionModel, Scalar, TreeMesh, Variant};

use crate::config::{BenchmarkConfig, Case, Precision};
use crate::error::Result;
use crate::problem::Gaussian;

/// One line of the results table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub case: String,
    #[serde(rename = "L")]
    pub level: usize,
    pub p: usize,
    pub variant: String,
    #[serde(rename = "P")]
    pub ranks: usize,
    pub policy: String,
    pub k: usize,
    pub precision: String,
    pub iterations: Option<usize>,
    pub n_dofs: Option<usize>,
    #[serde(rename = "W_s")]
    pub serial_workload: usize,
    #[serde(rename = "W_p")]
    pub parallel_workload: usize,
    pub wl_eff: f64,
    pub h_eff: f64,
    pub v_eff: f64,
    pub l2_error: Option<f64>,
}

/// Result of one benchmark run with the details that do not go into the
/// table.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub row: ResultRow,
    pub converged: bool,
    pub level_cells: Vec<usize>,
    pub degrees: Vec<usize>,
    pub solution: Vec<f64>,
}

pub(crate) fn metrics_row(config: &BenchmarkConfig, report: &MetricsReport) -> ResultRow {
    ResultRow {
        case: config.case.name().to_string(),
        level: config.level,
        p: config.degree,
        variant: config.variant.short_name().to_string(),
        ranks: config.ranks,
        policy: config.policy.name().to_string(),
        k: config.smoother_degree,
        precision: config.precision.name().to_string(),
        iterations: None,
        n_dofs: None,
        serial_workload: report.serial_workload,
        parallel_workload: report.parallel_workload,
        wl_eff: report.workload_efficiency,
        h_eff: report.horizontal_efficiency,
        v_eff: report.vertical_efficiency,
        l2_error: None,
    }
}

/// Partition metrics of the geometric hierarchy behind `config`; polynomial
/// coarsening is reported through its geometric continuation.
pub fn hierarchy_metrics(mesh: &TreeMesh, config: &BenchmarkConfig) -> Result<MetricsReport> {
    let geometric = match config.variant {
        Variant::PolynomialCoarsening => config.pc_coarse,
        v => v,
    };
    let graph = HierarchyGraph::for_variant(mesh, geometric)?;
    let model = PartitionModel::build(&graph, config.policy, config.ranks, config.hanging_weight)?;
    Ok(model.report(&graph))
}

fn mg_config(config: &BenchmarkConfig) -> MgConfig {
    MgConfig {
        smoother_degree: config.smoother_degree,
        pc_coarse: Some(config.pc_coarse),
        ..MgConfig::default()
    }
}

struct Solved {
    values: Vec<f64>,
    stats: Option<SolveStats>,
    iterations: usize,
    n_dofs: usize,
    level_cells: Vec<usize>,
    degrees: Vec<usize>,
}

fn solve<T: Scalar>(mesh: &TreeMesh, config: &BenchmarkConfig) -> Result<(Solved, mfmg::fem::DofMap)> {
    let mut h = Hierarchy::<T>::build(mesh, config.degree, config.variant, &mg_config(config))?;
    let control = SolverControl {
        rtol: config.rtol,
        ..SolverControl::default()
    };
    let dofs = (**h.active_operator().dofs()).clone();
    let gaussian = Gaussian::new(3);
    let result = match config.case {
        Case::Gaussian => solve_poisson(mesh, &mut h, |x| gaussian.rhs(x), Some(&|x| gaussian.value(x)), control),
        _ => solve_poisson(mesh, &mut h, |_| 1.0, None, control),
    };
    let (values, stats, iterations) = match result {
        Ok(s) => {
            let it = s.stats.iterations;
            (s.values, Some(s.stats), it)
        }
        Err(MgError::Diverged { iterations, .. }) => (Vec::new(), None, iterations),
        Err(e) => return Err(e.into()),
    };
    Ok((
        Solved {
            values,
            stats,
            iterations,
            n_dofs: h.n_active_dofs(),
            level_cells: h.level_n_cells(),
            degrees: h.degrees(),
        },
        dofs,
    ))
}

/// Builds the mesh and hierarchy of `config`, solves the Poisson problem
/// with CG + one V-cycle and reports iterations, sizes, partition metrics
/// and (for the Gaussian case) the `L2` error. Divergence is reported in the
/// outcome, not as an error.
pub fn run_benchmark(config: &BenchmarkConfig) -> Result<RunOutcome> {
    config.validate()?;
    let mesh = config.case.mesh(config.level)?;
    run_on_mesh(&mesh, config)
}

pub fn run_on_mesh(mesh: &TreeMesh, config: &BenchmarkConfig) -> Result<RunOutcome> {
    config.validate()?;
    let (solved, dofs) = match config.precision {
        Precision::Double => solve::<f64>(mesh, config)?,
        Precision::Single => solve::<f32>(mesh, config)?,
    };
    let converged = solved.stats.is_some();
    let l2 = match (config.case, converged) {
        (Case::Gaussian, true) => {
            let g = Gaussian::new(3);
            Some(l2_error(mesh, &dofs, &solved.values, |x| g.value(x), config.degree + 3))
        }
        _ => None,
    };
    let report = hierarchy_metrics(mesh, config)?;
    let mut row = metrics_row(config, &report);
    row.iterations = Some(solved.iterations);
    row.n_dofs = Some(solved.n_dofs);
    row.l2_error = l2;
    Ok(RunOutcome {
        row,
        converged,
        level_cells: solved.level_cells,
        degrees: solved.degrees,
        solution: solved.values,
    })
}
