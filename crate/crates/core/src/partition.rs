//! Simulated partitions of level hierarchies and load-balance metrics.
//!
//! Nothing here exchanges data: a partition is a rank number per cell and
//! level, and the metrics are counts over those assignments.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{MgError, Result};
use crate::mesh::{CellId, LevelView, TreeMesh};
use crate::multigrid::Variant;

/// Cells of one multigrid level with the adjacency the metrics need.
///
/// Indices in `first_child`, `coarse` and `neighbors` refer to positions
/// in the neighboring levels' (or this level's) cell lists.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LevelGraph {
    pub cells: Vec<CellId>,
    /// Position in the active-cell ordering for leaf cells.
    pub active_index: Vec<Option<u32>>,
    /// First (Morton-lowest) child in the next finer level.
    pub first_child: Vec<Option<u32>>,
    /// Corresponding cell of the next coarser level: the parent, or the cell
    /// itself when it is carried over unrefined.
    pub coarse: Vec<Option<u32>>,
    /// Whether the cell carries hanging nodes within this level.
    pub hanging: Vec<bool>,
    pub neighbor_offsets: Vec<usize>,
    pub neighbors: Vec<u32>,
}

impl LevelGraph {
    pub fn n_cells(&self) -> usize {
        self.active_index.len()
    }

    pub fn neighbors_of(&self, i: usize) -> &[u32] {
        &self.neighbors[self.neighbor_offsets[i]..self.neighbor_offsets[i + 1]]
    }
}

/// Level graphs of a hierarchy, coarsest first.
#[derive(Clone, Debug, PartialEq)]
pub struct HierarchyGraph {
    pub levels: Vec<LevelGraph>,
    /// Hanging-node flags of the active cells in Morton order.
    pub active_hanging: Vec<bool>,
}

impl HierarchyGraph {
    pub fn new(mesh: &TreeMesh, views: &[LevelView]) -> Self {
        let active = mesh.view_cells(LevelView::Active);
        let active_pos: HashMap<CellId, u32> = active
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i as u32))
            .collect();
        let level_cells: Vec<Vec<CellId>> = views.iter().map(|&v| mesh.view_cells(v)).collect();
        let positions: Vec<HashMap<CellId, u32>> = level_cells
            .iter()
            .map(|cells| cells.iter().enumerate().map(|(i, &c)| (c, i as u32)).collect())
            .collect();
        let mut levels = Vec::with_capacity(views.len());
        for (l, &view) in views.iter().enumerate() {
            let cells = &level_cells[l];
            let pos = &positions[l];
            let mut neighbor_offsets = vec![0];
            let mut neighbors = Vec::new();
            for &c in cells {
                neighbors.extend(mesh.view_neighbors(c, view).iter().map(|n| pos[n]));
                neighbor_offsets.push(neighbors.len());
            }
            let first_child = cells
                .iter()
                .map(|&c| {
                    let finer = positions.get(l + 1)?;
                    mesh.child(c, 0).and_then(|ch| finer.get(&ch).copied())
                })
                .collect();
            let coarse = cells
                .iter()
                .map(|&c| {
                    let coarser = positions.get(l.checked_sub(1)?)?;
                    coarser
                        .get(&c)
                        .or_else(|| mesh.cell(c).parent.and_then(|p| coarser.get(&p)))
                        .copied()
                })
                .collect();
            levels.push(LevelGraph {
                cells: cells.clone(),
                active_index: cells.iter().map(|c| active_pos.get(c).copied()).collect(),
                first_child,
                coarse,
                hanging: mesh.hanging_cells(view),
                neighbor_offsets,
                neighbors,
            });
        }
        Self {
            levels,
            active_hanging: mesh.hanging_cells(LevelView::Active),
        }
    }

    /// Level structure of a geometric hierarchy (`LocalSmoothing` or
    /// `GlobalCoarsening`).
    pub fn for_variant(mesh: &TreeMesh, variant: Variant) -> Result<Self> {
        let n = mesh.max_level();
        let views: Vec<LevelView> = match variant {
            Variant::LocalSmoothing => (0..=n).map(LevelView::Local).collect(),
            Variant::GlobalCoarsening => (0..=n).map(LevelView::Global).collect(),
            Variant::PolynomialCoarsening => {
                return Err(MgError::Config(
                    "partition metrics are defined for geometric hierarchies".into(),
                ))
            }
        };
        Ok(Self::new(mesh, &views))
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn n_active(&self) -> usize {
        self.active_hanging.len()
    }
}

/// Cell weights: `hanging_weight` for cells with hanging nodes, 1 otherwise.
pub fn hanging_weights(hanging: &[bool], hanging_weight: f64) -> Vec<f64> {
    hanging
        .iter()
        .map(|&h| if h { hanging_weight } else { 1.0 })
        .collect()
}

/// Splits a sequence of weighted cells into `n_ranks` contiguous pieces:
/// a cell goes to rank `floor(P · w_before / W)`, where `w_before` is the
/// weight of all cells preceding it.
pub fn sfc_partition(weights: &[f64], n_ranks: usize) -> Vec<u32> {
    let total: f64 = weights.iter().sum();
    let p = n_ranks.max(1);
    let mut before = 0.0;
    weights
        .iter()
        .map(|&w| {
            let rank = if total > 0.0 {
                ((before * p as f64 / total).floor() as usize).min(p - 1)
            } else {
                0
            };
            before += w;
            rank as u32
        })
        .collect()
}

/// Partition of the active cells along the Morton curve.
pub fn partition_active_sfc(graph: &HierarchyGraph, n_ranks: usize, hanging_weight: f64) -> Vec<u32> {
    sfc_partition(&hanging_weights(&graph.active_hanging, hanging_weight), n_ranks)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum PartitionPolicy {
    /// Level cells inherit the rank of their first child.
    FirstChild,
    /// Every level is partitioned along the curve on its own.
    SfcPerLevel,
}

impl PartitionPolicy {
    pub fn name(self) -> &'static str {
        match self {
            PartitionPolicy::FirstChild => "first-child",
            PartitionPolicy::SfcPerLevel => "sfc-per-level",
        }
    }
}

impl std::str::FromStr for PartitionPolicy {
    type Err = MgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first-child" => Ok(PartitionPolicy::FirstChild),
            "sfc-per-level" | "repartition" => Ok(PartitionPolicy::SfcPerLevel),
            _ => Err(MgError::Config(format!("unknown partition policy '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionModel {
    pub n_ranks: usize,
    pub policy: PartitionPolicy,
    /// Owner of every cell, per level (coarsest first).
    pub owners: Vec<Vec<u32>>,
    pub weights: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelLoad {
    pub level: usize,
    pub n_cells: usize,
    pub min_owned: usize,
    pub max_owned: usize,
    pub avg_owned: f64,
    pub ghosts: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub n_ranks: usize,
    pub policy: PartitionPolicy,
    pub n_levels: usize,
    pub serial_workload: usize,
    pub parallel_workload: usize,
    pub workload_efficiency: f64,
    pub horizontal_efficiency: f64,
    pub vertical_efficiency: f64,
    pub levels: Vec<LevelLoad>,
}

impl PartitionModel {
    /// Recursive first-child ownership on top of an active partition.
    pub fn first_child(graph: &HierarchyGraph, active_owners: &[u32], n_ranks: usize) -> Result<Self> {
        if active_owners.len() != graph.n_active() {
            return Err(MgError::SizeMismatch {
                expected: graph.n_active(),
                got: active_owners.len(),
            });
        }
        let mut owners: Vec<Vec<u32>> = vec![Vec::new(); graph.n_levels()];
        for l in (0..graph.n_levels()).rev() {
            let level = &graph.levels[l];
            let mut own = Vec::with_capacity(level.n_cells());
            for i in 0..level.n_cells() {
                let rank = match (level.active_index[i], level.first_child[i]) {
                    (Some(a), _) => active_owners[a as usize],
                    (None, Some(c)) => owners[l + 1][c as usize],
                    (None, None) => {
                        return Err(MgError::InconsistentLevels(format!(
                            "cell {i} on level {l} is neither active nor refined into level {}",
                            l + 1
                        )))
                    }
                };
                own.push(rank);
            }
            owners[l] = own;
        }
        let weights = graph.levels.iter().map(|lv| vec![1.0; lv.n_cells()]).collect();
        Ok(Self {
            n_ranks,
            policy: PartitionPolicy::FirstChild,
            owners,
            weights,
        })
    }

    /// Independent weighted curve partition of every level.
    pub fn repartitioned(graph: &HierarchyGraph, n_ranks: usize, hanging_weight: f64) -> Self {
        let weights: Vec<Vec<f64>> = graph
            .levels
            .iter()
            .map(|lv| hanging_weights(&lv.hanging, hanging_weight))
            .collect();
        let owners = weights.iter().map(|w| sfc_partition(w, n_ranks)).collect();
        Self {
            n_ranks,
            policy: PartitionPolicy::SfcPerLevel,
            owners,
            weights,
        }
    }

    pub fn build(graph: &HierarchyGraph, policy: PartitionPolicy, n_ranks: usize, hanging_weight: f64) -> Result<Self> {
        match policy {
            PartitionPolicy::FirstChild => {
                let active = partition_active_sfc(graph, n_ranks, hanging_weight);
                let mut model = Self::first_child(graph, &active, n_ranks)?;
                model.weights = graph
                    .levels
                    .iter()
                    .map(|lv| hanging_weights(&lv.hanging, hanging_weight))
                    .collect();
                Ok(model)
            }
            PartitionPolicy::SfcPerLevel => Ok(Self::repartitioned(graph, n_ranks, hanging_weight)),
        }
    }

    fn owned_counts(&self, l: usize) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_ranks.max(1)];
        for &r in &self.owners[l] {
            counts[r as usize] += 1;
        }
        counts
    }

    pub fn serial_workload(&self) -> usize {
        self.owners.iter().map(Vec::len).sum()
    }

    pub fn parallel_workload(&self) -> usize {
        (0..self.owners.len())
            .map(|l| self.owned_counts(l).into_iter().max().unwrap_or(0))
            .sum()
    }

    pub fn workload_efficiency(&self) -> f64 {
        let wp = self.parallel_workload();
        if wp == 0 {
            return 1.0;
        }
        self.serial_workload() as f64 / (wp * self.n_ranks.max(1)) as f64
    }

    /// Ghost cells of level `l` summed over ranks: a cell is a ghost of every
    /// other rank owning a vertex neighbor of it.
    pub fn ghost_count(&self, graph: &HierarchyGraph, l: usize) -> usize {
        let owners = &self.owners[l];
        let level = &graph.levels[l];
        let mut ranks = Vec::new();
        (0..level.n_cells())
            .map(|i| {
                ranks.clear();
                ranks.extend(
                    level
                        .neighbors_of(i)
                        .iter()
                        .map(|&n| owners[n as usize])
                        .filter(|&r| r != owners[i]),
                );
                ranks.sort_unstable();
                ranks.dedup();
                ranks.len()
            })
            .sum()
    }

    /// Half the ghost count over the number of cells of level `l`.
    pub fn horizontal_efficiency_level(&self, graph: &HierarchyGraph, l: usize) -> f64 {
        let n = self.owners[l].len();
        if n == 0 {
            return 0.0;
        }
        0.5 * self.ghost_count(graph, l) as f64 / n as f64
    }

    /// Half the ghost count over all levels divided by the total cell count.
    pub fn horizontal_efficiency(&self, graph: &HierarchyGraph) -> f64 {
        let ghosts: usize = (0..self.owners.len()).map(|l| self.ghost_count(graph, l)).sum();
        let total = self.serial_workload();
        if total == 0 {
            return 0.0;
        }
        0.5 * ghosts as f64 / total as f64
    }

    /// Share of cells on levels `>= 1` owned by the owner of their
    /// corresponding coarse cell.
    pub fn vertical_efficiency(&self, graph: &HierarchyGraph) -> f64 {
        let mut fine = 0usize;
        let mut same = 0usize;
        for l in 1..self.owners.len() {
            for (i, c) in graph.levels[l].coarse.iter().enumerate() {
                if let Some(c) = c {
                    fine += 1;
                    if self.owners[l][i] == self.owners[l - 1][*c as usize] {
                        same += 1;
                    }
                }
            }
        }
        if fine == 0 {
            return 1.0;
        }
        same as f64 / fine as f64
    }

    pub fn report(&self, graph: &HierarchyGraph) -> MetricsReport {
        let levels = (0..self.owners.len())
            .map(|l| {
                let counts = self.owned_counts(l);
                let n = self.owners[l].len();
                LevelLoad {
                    level: l,
                    n_cells: n,
                    min_owned: counts.iter().copied().min().unwrap_or(0),
                    max_owned: counts.iter().copied().max().unwrap_or(0),
                    avg_owned: n as f64 / counts.len() as f64,
                    ghosts: self.ghost_count(graph, l),
                }
            })
            .collect();
        MetricsReport {
            n_ranks: self.n_ranks,
            policy: self.policy,
            n_levels: self.owners.len(),
            serial_workload: self.serial_workload(),
            parallel_workload: self.parallel_workload(),
            workload_efficiency: self.workload_efficiency(),
            horizontal_efficiency: self.horizontal_efficiency(graph),
            vertical_efficiency: self.vertical_efficiency(graph),
            levels,
        }
    }
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
