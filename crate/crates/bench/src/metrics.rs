use serde::Serialize;

use mfmg::partition::{HierarchyGraph, PartitionPolicy};
use mfmg::{MetricsReport, PartitionModel, Variant};

use crate::config::{BenchmarkConfig, Case};
use crate::error::Result;
use crate::run::{metrics_row, ResultRow};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsEntry {
    pub row: ResultRow,
    pub report: MetricsReport,
}

/// Per-level owned-cell profile, one line per level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelProfileRow {
    pub case: String,
    #[serde(rename = "L")]
    pub level_count: usize,
    pub variant: String,
    #[serde(rename = "P")]
    pub ranks: usize,
    pub policy: String,
    pub level: usize,
    pub n_cells: usize,
    pub min_owned: usize,
    pub max_owned: usize,
    pub avg_owned: f64,
    pub ghosts: usize,
}

/// Metrics of the LS and GC hierarchies of one mesh for every rank count
/// and policy.
pub fn run_metrics_sweep(
    case: Case,
    level: usize,
    ranks: &[usize],
    policies: &[PartitionPolicy],
    hanging_weight: f64,
) -> Result<Vec<MetricsEntry>> {
    let mesh = case.mesh(level)?;
    let mut out = Vec::new();
    for variant in [Variant::LocalSmoothing, Variant::GlobalCoarsening] {
        let graph = HierarchyGraph::for_variant(&mesh, variant)?;
        for &p in ranks {
            for &policy in policies {
                let model = PartitionModel::build(&graph, policy, p, hanging_weight)?;
                let report = model.report(&graph);
                let mut config = BenchmarkConfig::new(case, level, 1, variant);
                config.ranks = p;
                config.policy = policy;
                config.hanging_weight = hanging_weight;
                out.push(MetricsEntry {
                    row: metrics_row(&config, &report),
                    report,
                });
            }
        }
    }
    Ok(out)
}

pub fn level_profile(entries: &[MetricsEntry]) -> Vec<LevelProfileRow> {
    entries
        .iter()
        .flat_map(|e| {
            e.report.levels.iter().map(move |l| LevelProfileRow {
                case: e.row.case.clone(),
                level_count: e.row.level,
                variant: e.row.variant.clone(),
                ranks: e.row.ranks,
                policy: e.row.policy.clone(),
                level: l.level,
                n_cells: l.n_cells,
                min_owned: l.min_owned,
                max_owned: l.max_owned,
                avg_owned: l.avg_owned,
                ghosts: l.ghosts,
            })
        })
        .collect()
}
