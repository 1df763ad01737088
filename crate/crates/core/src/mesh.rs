//! Adaptive tree meshes over `[-1, 1]^d` (a forest with a single tree).
//!
//! Cells are stored in one arena; a refined cell owns `2^d` consecutive
//! children ordered in Morton (z-order) fashion, x bit least significant.
//! Integer cell coordinates are kept per level, and vertices are addressed on
//! a fixed lattice of [`MAX_DEPTH`] levels so that every view of the same mesh
//! shares one vertex numbering.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{MgError, Result};

/// Deepest refinement level representable by the vertex lattice.
pub const MAX_DEPTH: u8 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellId(pub u32);

impl CellId {
    #[inline(always)]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug)]
pub struct Cell {
    pub level: u8,
    /// Integer coordinates on the cell's own level, in `0..2^level`.
    pub coords: [u32; 3],
    pub parent: Option<CellId>,
    pub first_child: Option<CellId>,
    pub child_index: u8,
}

/// Which cells make up a multigrid level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LevelView {
    /// Leaf cells of the tree.
    Active,
    /// Cells on exactly this refinement level (local smoothing).
    Local(u8),
    /// Leaves of the tree truncated at this level (global coarsening).
    Global(u8),
}

/// Level definition selector for [`level_cells`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LevelKind {
    Local,
    Global,
}

#[derive(Clone, Debug)]
pub struct TreeMesh {
    dim: usize,
    cells: Vec<Cell>,
    lookup: Vec<HashMap<[u32; 3], CellId>>,
}

impl TreeMesh {
    /// A single root cell `[-1, 1]^dim`.
    pub fn new(dim: usize) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(MgError::Dimension(dim));
        }
        let root = Cell {
            level: 0,
            coords: [0; 3],
            parent: None,
            first_child: None,
            child_index: 0,
        };
        let mut lookup = vec![HashMap::new()];
        lookup[0].insert([0; 3], CellId(0));
        Ok(Self {
            dim,
            cells: vec![root],
            lookup,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_children(&self) -> usize {
        1 << self.dim
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn root(&self) -> CellId {
        CellId(0)
    }

    pub fn cell(&self, id: CellId) -> &Cell {
        &self.cells[id.index()]
    }

    pub fn is_active(&self, id: CellId) -> bool {
        self.cells[id.index()].first_child.is_none()
    }

    pub fn level(&self, id: CellId) -> u8 {
        self.cells[id.index()].level
    }

    pub fn children(&self, id: CellId) -> impl Iterator<Item = CellId> + '_ {
        let n = self.n_children() as u32;
        self.cells[id.index()]
            .first_child
            .into_iter()
            .flat_map(move |c| (0..n).map(move |i| CellId(c.0 + i)))
    }

    pub fn child(&self, id: CellId, i: usize) -> Option<CellId> {
        self.cells[id.index()]
            .first_child
            .map(|c| CellId(c.0 + i as u32))
    }

    /// Deepest level present in the tree.
    pub fn max_level(&self) -> u8 {
        (self.lookup.len() - 1) as u8
    }

    pub fn find(&self, level: u8, coords: [u32; 3]) -> Option<CellId> {
        self.lookup
            .get(level as usize)
            .and_then(|m| m.get(&coords).copied())
    }

    /// Morton index of a cell on its own level.
    pub fn morton_index(&self, id: CellId) -> u64 {
        morton_encode(self.cells[id.index()].coords, self.dim)
    }

    /// Edge length of a cell.
    pub fn cell_size(&self, id: CellId) -> f64 {
        2.0 / (1u64 << self.level(id)) as f64
    }

    /// Lower corner of a cell in physical coordinates.
    pub fn cell_origin(&self, id: CellId) -> [f64; 3] {
        let c = self.cell(id);
        let h = self.cell_size(id);
        let mut x = [0.0; 3];
        for d in 0..self.dim {
            x[d] = -1.0 + c.coords[d] as f64 * h;
        }
        x
    }

    pub fn cell_center(&self, id: CellId) -> [f64; 3] {
        let h = self.cell_size(id);
        let mut x = self.cell_origin(id);
        for v in x.iter_mut().take(self.dim) {
            *v += 0.5 * h;
        }
        x
    }

    /// Closed box of a cell on the [`MAX_DEPTH`] vertex lattice.
    pub fn lattice_box(&self, id: CellId) -> ([u32; 3], [u32; 3]) {
        let c = self.cell(id);
        let shift = MAX_DEPTH - c.level;
        let mut lo = [0; 3];
        let mut hi = [0; 3];
        for d in 0..self.dim {
            lo[d] = c.coords[d] << shift;
            hi[d] = (c.coords[d] + 1) << shift;
        }
        (lo, hi)
    }

    /// Splits an active cell into `2^d` children.
    pub fn refine_cell(&mut self, id: CellId) {
        assert!(self.is_active(id), "cell {id:?} is already refined");
        let parent = self.cells[id.index()].clone();
        assert!(parent.level < MAX_DEPTH, "maximum tree depth reached");
        let level = parent.level + 1;
        if self.lookup.len() <= level as usize {
            self.lookup.push(HashMap::new());
        }
        let first = CellId(self.cells.len() as u32);
        for i in 0..self.n_children() {
            let mut coords = [0; 3];
            for d in 0..self.dim {
                coords[d] = 2 * parent.coords[d] + ((i >> d) & 1) as u32;
            }
            let cid = CellId(self.cells.len() as u32);
            self.cells.push(Cell {
                level,
                coords,
                parent: Some(id),
                first_child: None,
                child_index: i as u8,
            });
            self.lookup[level as usize].insert(coords, cid);
        }
        self.cells[id.index()].first_child = Some(first);
    }

    /// Refines every active cell selected by `flag` once, then restores 2:1
    /// balance.
    pub fn refine_where(&mut self, mut flag: impl FnMut(&TreeMesh, CellId) -> bool) {
        let marked: Vec<CellId> = self
            .active_cells()
            .into_iter()
            .filter(|&c| flag(self, c))
            .collect();
        for c in marked {
            self.refine_cell(c);
        }
        self.balance_2to1();
    }

    /// Refines the fewest cells needed so that any two active cells sharing a
    /// vertex differ by at most one level. Idempotent.
    pub fn balance_2to1(&mut self) {
        let mut work = self.active_cells();
        while let Some(id) = work.pop() {
            if !self.is_active(id) {
                continue;
            }
            let cell = self.cell(id).clone();
            if cell.level < 2 {
                continue;
            }
            let n_side = 1i64 << cell.level;
            let mut refined_any = false;
            for offset in neighbor_offsets(self.dim) {
                let mut target = [0u32; 3];
                let mut inside = true;
                for d in 0..self.dim {
                    let c = cell.coords[d] as i64 + offset[d];
                    if c < 0 || c >= n_side {
                        inside = false;
                        break;
                    }
                    target[d] = (c >> 1) as u32;
                }
                if !inside {
                    continue;
                }
                let (found, found_level) = self.deepest_existing(cell.level - 1, target);
                if found_level + 1 < cell.level {
                    debug_assert!(self.is_active(found));
                    self.refine_cell(found);
                    work.extend(self.children(found));
                    refined_any = true;
                }
            }
            if refined_any {
                work.push(id);
            }
        }
    }

    /// Deepest existing cell that contains the level-`level` position `coords`.
    fn deepest_existing(&self, level: u8, coords: [u32; 3]) -> (CellId, u8) {
        let mut l = level;
        let mut c = coords;
        loop {
            if let Some(id) = self.find(l, c) {
                return (id, l);
            }
            l -= 1;
            for v in c.iter_mut() {
                *v >>= 1;
            }
        }
    }

    /// Active cells in space-filling-curve (depth-first Morton) order.
    pub fn active_cells(&self) -> Vec<CellId> {
        self.view_cells(LevelView::Active)
    }

    pub fn n_active(&self) -> usize {
        self.cells.iter().filter(|c| c.first_child.is_none()).count()
    }

    /// Whether `id` is a member of the cell set of `view`.
    pub fn in_view(&self, id: CellId, view: LevelView) -> bool {
        let level = self.level(id);
        match view {
            LevelView::Active => self.is_active(id),
            LevelView::Local(l) => level == l,
            LevelView::Global(l) => level == l || (level < l && self.is_active(id)),
        }
    }

    /// Cells of a view in depth-first Morton order.
    pub fn view_cells(&self, view: LevelView) -> Vec<CellId> {
        let mut out = Vec::new();
        let mut stack = vec![self.root()];
        while let Some(id) = stack.pop() {
            if self.in_view(id, view) {
                out.push(id);
                continue;
            }
            if let LevelView::Local(l) | LevelView::Global(l) = view {
                if self.level(id) >= l {
                    continue;
                }
            }
            let n = self.n_children();
            if let Some(first) = self.cell(id).first_child {
                for i in (0..n).rev() {
                    stack.push(CellId(first.0 + i as u32));
                }
            }
        }
        out
    }

    /// Whether two cells' closed boxes intersect, and in how many dimensions
    /// the intersection has positive extent (`None` when disjoint).
    pub fn contact_dimension(&self, a: CellId, b: CellId) -> Option<usize> {
        let (alo, ahi) = self.lattice_box(a);
        let (blo, bhi) = self.lattice_box(b);
        box_contact(self.dim, (alo, ahi), (blo, bhi))
    }

    /// All members of `view` whose closure touches the closure of `id`
    /// (vertex adjacency), excluding `id` itself.
    pub fn view_neighbors(&self, id: CellId, view: LevelView) -> Vec<CellId> {
        let target = self.lattice_box(id);
        let mut out = Vec::new();
        let mut stack = vec![self.root()];
        while let Some(n) = stack.pop() {
            if box_contact(self.dim, self.lattice_box(n), target).is_none() {
                continue;
            }
            if self.in_view(n, view) {
                if n != id {
                    out.push(n);
                }
                continue;
            }
            if let LevelView::Local(l) | LevelView::Global(l) = view {
                if self.level(n) >= l {
                    continue;
                }
            }
            stack.extend(self.children(n));
        }
        out.sort();
        out
    }

    /// For each cell of `view` (in [`view_cells`](Self::view_cells) order):
    /// whether it carries hanging nodes, i.e. shares at least an edge segment
    /// with a coarser member of the view.
    pub fn hanging_cells(&self, view: LevelView) -> Vec<bool> {
        let cells = self.view_cells(view);
        if matches!(view, LevelView::Local(_)) {
            return vec![false; cells.len()];
        }
        cells
            .iter()
            .map(|&id| self.touches_coarser_member(id, view))
            .collect()
    }

    fn touches_coarser_member(&self, id: CellId, view: LevelView) -> bool {
        let level = self.level(id);
        let target = self.lattice_box(id);
        let mut stack = vec![self.root()];
        while let Some(n) = stack.pop() {
            if self.level(n) >= level {
                continue;
            }
            match box_contact(self.dim, self.lattice_box(n), target) {
                Some(k) if k >= 1 => {}
                _ => continue,
            }
            if self.in_view(n, view) {
                return true;
            }
            stack.extend(self.children(n));
        }
        false
    }

    /// Checks vertex-neighbor one-irregularity of a view.
    pub fn check_one_irregular(&self, view: LevelView) -> Result<()> {
        for id in self.view_cells(view) {
            for n in self.view_neighbors(id, view) {
                if self.level(id).abs_diff(self.level(n)) > 1 {
                    return Err(MgError::NotBalanced(id.0, n.0));
                }
            }
        }
        Ok(())
    }

    /// Cell counts and hanging-node statistics for the active mesh and all
    /// multigrid levels.
    pub fn stats(&self) -> MeshStats {
        let levels = self.max_level() as usize + 1;
        let hanging = self.hanging_cells(LevelView::Active);
        let n_active = hanging.len();
        let n_hanging = hanging.iter().filter(|&&h| h).count();
        let mut local = vec![0; levels];
        for c in &self.cells {
            local[c.level as usize] += 1;
        }
        let mut global = Vec::with_capacity(levels);
        let mut global_hanging = Vec::with_capacity(levels);
        for l in 0..levels {
            let view = LevelView::Global(l as u8);
            let h = self.hanging_cells(view);
            global.push(h.len());
            global_hanging.push(h.iter().filter(|&&x| x).count());
        }
        MeshStats {
            dim: self.dim,
            n_levels: levels,
            n_active,
            n_hanging_active: n_hanging,
            hanging_share: n_hanging as f64 / n_active as f64,
            local_level_cells: local,
            global_level_cells: global,
            global_level_hanging_cells: global_hanging,
        }
    }
}

/// Mesh statistics, serializable to JSON.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeshStats {
    pub dim: usize,
    pub n_levels: usize,
    pub n_active: usize,
    pub n_hanging_active: usize,
    pub hanging_share: f64,
    pub local_level_cells: Vec<usize>,
    pub global_level_cells: Vec<usize>,
    pub global_level_hanging_cells: Vec<usize>,
}

impl MeshStats {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("mesh stats are plain data")
    }
}

/// Cells of multigrid level `l` under the given level definition.
pub fn level_cells(mesh: &TreeMesh, kind: LevelKind, l: u8) -> Vec<CellId> {
    match kind {
        LevelKind::Local => mesh.view_cells(LevelView::Local(l)),
        LevelKind::Global => mesh.view_cells(LevelView::Global(l)),
    }
}

/// Uniform refinement: `2^(d·L)` active cells, no hanging nodes.
pub fn refine_uniform(levels: usize, dim: usize) -> Result<TreeMesh> {
    let mut mesh = TreeMesh::new(dim)?;
    for _ in 0..levels {
        mesh.refine_where(|_, _| true);
    }
    Ok(mesh)
}

/// Refines all cells overlapping the open orthant `(-1, 0)^d` `levels` times,
/// with 2:1 closure after every step.
pub fn refine_octant(levels: usize, dim: usize) -> Result<TreeMesh> {
    let mut mesh = TreeMesh::new(dim)?;
    for _ in 0..levels {
        mesh.refine_where(|m, id| {
            let lo = m.cell_origin(id);
            lo[..m.dim()].iter().all(|&x| x < 0.0)
        });
    }
    Ok(mesh)
}

/// Shell mesh: `L - 3` uniform refinements followed by three refinement
/// steps of all cells whose center `c` satisfies `|c| <= 0.55`,
/// `0.3 <= |c| <= 0.43` and `0.335 <= |c| <= 0.39`, respectively.
pub fn refine_shell(levels: usize) -> Result<TreeMesh> {
    if levels < 5 {
        return Err(MgError::Refinements {
            case: "shell",
            got: levels,
            min: 5,
        });
    }
    let mut mesh = refine_uniform(levels - 3, 3)?;
    let bands = [(0.0, 0.55), (0.3, 0.43), (0.335, 0.39)];
    for (lo, hi) in bands {
        mesh.refine_where(|m, id| {
            let c = m.cell_center(id);
            let r = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
            r >= lo && r <= hi
        });
    }
    Ok(mesh)
}

pub fn morton_encode(coords: [u32; 3], dim: usize) -> u64 {
    let mut code = 0u64;
    for bit in 0..21 {
        for (d, &c) in coords.iter().enumerate().take(dim) {
            code |= (((c >> bit) & 1) as u64) << (bit * dim + d);
        }
    }
    code
}

fn neighbor_offsets(dim: usize) -> Vec<[i64; 3]> {
    let n = 3usize.pow(dim as u32);
    (0..n)
        .map(|k| {
            let mut o = [0i64; 3];
            let mut r = k;
            for v in o.iter_mut().take(dim) {
                *v = (r % 3) as i64 - 1;
                r /= 3;
            }
            o
        })
        .filter(|o| o.iter().any(|&v| v != 0))
        .collect()
}

fn box_contact(
    dim: usize,
    (alo, ahi): ([u32; 3], [u32; 3]),
    (blo, bhi): ([u32; 3], [u32; 3]),
) -> Option<usize> {
    let mut extent = 0;
    for d in 0..dim {
        let lo = alo[d].max(blo[d]);
        let hi = ahi[d].min(bhi[d]);
        if lo > hi {
            return None;
        }
        if lo < hi {
            extent += 1;
        }
    }
    Some(extent)
}
