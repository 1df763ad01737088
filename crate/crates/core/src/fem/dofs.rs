use std::collections::HashMap;

use crate::fem::element::LagrangeElement;
use crate::mesh::{CellId, LevelView, TreeMesh, MAX_DEPTH};

/// Geometric identity of a degree of freedom: one packed 1D key per
/// direction (unused directions are 0).
///
/// A 1D key is either a vertex of the [`MAX_DEPTH`] lattice (bit 31 clear) or
/// an interior node of a 1D cell interval, packed as
/// `1 << 31 | level << 26 | node << 21 | coord`.
pub type DofKey = [u32; 3];

const INTERIOR: u32 = 1 << 31;
const LATTICE_END: u32 = 1 << MAX_DEPTH;

fn key_1d(level: u8, coord: u32, node: usize, degree: usize) -> u32 {
    let shift = MAX_DEPTH - level;
    if node == 0 {
        coord << shift
    } else if node == degree {
        (coord + 1) << shift
    } else {
        INTERIOR | (level as u32) << 26 | (node as u32) << 21 | coord
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Key1d {
    Vertex(u32),
    Interior { level: u8, node: usize, coord: u32 },
}

fn decode(k: u32) -> Key1d {
    if k & INTERIOR == 0 {
        Key1d::Vertex(k)
    } else {
        Key1d::Interior {
            level: ((k >> 26) & 31) as u8,
            node: ((k >> 21) & 31) as usize,
            coord: k & ((1 << 21) - 1),
        }
    }
}

/// Global enumeration of the continuous Lagrange space on one cell set.
#[derive(Clone, Debug)]
pub struct DofMap {
    dim: usize,
    element: LagrangeElement,
    view: LevelView,
    cells: Vec<CellId>,
    cell_slot: Vec<u32>,
    cell_dofs: Vec<u32>,
    keys: Vec<DofKey>,
    min_level: Vec<u8>,
    lookup: HashMap<DofKey, u32>,
}

impl DofMap {
    /// Enumerates DoFs cell by cell in view order, local nodes x-fastest.
    pub fn new(mesh: &TreeMesh, view: LevelView, element: LagrangeElement) -> Self {
        let dim = mesh.dim();
        let cells = mesh.view_cells(view);
        let p = element.degree;
        let n1 = p + 1;
        let npc = n1.pow(dim as u32);
        let mut cell_slot = vec![u32::MAX; mesh.n_cells()];
        let mut cell_dofs = Vec::with_capacity(cells.len() * npc);
        let mut keys = Vec::new();
        let mut min_level = Vec::new();
        let mut lookup = HashMap::new();
        for (slot, &id) in cells.iter().enumerate() {
            cell_slot[id.index()] = slot as u32;
            let cell = mesh.cell(id);
            for local in 0..npc {
                let mut key = [0u32; 3];
                let mut r = local;
                for (d, k) in key.iter_mut().enumerate().take(dim) {
                    *k = key_1d(cell.level, cell.coords[d], r % n1, p);
                    r /= n1;
                }
                let idx = *lookup.entry(key).or_insert_with(|| {
                    keys.push(key);
                    min_level.push(cell.level);
                    (keys.len() - 1) as u32
                });
                let ml = &mut min_level[idx as usize];
                *ml = (*ml).min(cell.level);
                cell_dofs.push(idx);
            }
        }
        Self {
            dim,
            element,
            view,
            cells,
            cell_slot,
            cell_dofs,
            keys,
            min_level,
            lookup,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.element.degree
    }

    pub fn element(&self) -> &LagrangeElement {
        &self.element
    }

    pub fn view(&self) -> LevelView {
        self.view
    }

    pub fn n_dofs(&self) -> usize {
        self.keys.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn dofs_per_cell(&self) -> usize {
        self.element.dofs_per_cell(self.dim)
    }

    pub fn cells(&self) -> &[CellId] {
        &self.cells
    }

    /// Position of a mesh cell within [`cells`](Self::cells).
    pub fn cell_slot(&self, id: CellId) -> Option<usize> {
        match self.cell_slot.get(id.index()) {
            Some(&s) if s != u32::MAX => Some(s as usize),
            _ => None,
        }
    }

    /// Global indices of the `k`-th cell's local nodes (the gather list).
    pub fn cell_dofs(&self, k: usize) -> &[u32] {
        let n = self.dofs_per_cell();
        &self.cell_dofs[k * n..(k + 1) * n]
    }

    pub fn key(&self, i: usize) -> DofKey {
        self.keys[i]
    }

    pub fn dof_of_key(&self, key: &DofKey) -> Option<usize> {
        self.lookup.get(key).map(|&i| i as usize)
    }

    /// Coarsest level among the cells sharing this DoF.
    pub fn min_owner_level(&self, i: usize) -> u8 {
        self.min_level[i]
    }

    /// Physical coordinates of a DoF's support point.
    pub fn position(&self, i: usize) -> [f64; 3] {
        let mut x = [0.0; 3];
        for d in 0..self.dim {
            x[d] = 2.0 * self.unit_coordinate(self.keys[i][d]) - 1.0;
        }
        x
    }

    fn unit_coordinate(&self, k: u32) -> f64 {
        match decode(k) {
            Key1d::Vertex(v) => v as f64 / LATTICE_END as f64,
            Key1d::Interior { level, node, coord } => {
                (coord as f64 + self.element.nodes[node]) / (1u64 << level) as f64
            }
        }
    }

    /// Whether the DoF sits on the boundary of `[-1,1]^d`.
    pub fn is_boundary(&self, i: usize) -> bool {
        self.keys[i][..self.dim]
            .iter()
            .any(|&k| k == 0 || k == LATTICE_END)
    }

    /// Whether the DoF lies strictly inside one cell (no face sharing).
    pub fn is_cell_interior(&self, i: usize) -> bool {
        self.keys[i][..self.dim].iter().all(|&k| k & INTERIOR != 0)
    }

    /// Whether the DoF's support point lies in the closure of a cell.
    pub fn point_in_cell(&self, i: usize, mesh: &TreeMesh, cell: CellId) -> bool {
        let c = mesh.cell(cell);
        (0..self.dim).all(|d| match decode(self.keys[i][d]) {
            Key1d::Vertex(v) => {
                let shift = MAX_DEPTH - c.level;
                (c.coords[d] << shift) <= v && v <= ((c.coords[d] + 1) << shift)
            }
            Key1d::Interior { level, coord, .. } => {
                level >= c.level && (coord >> (level - c.level)) == c.coords[d]
            }
        })
    }

    /// Reference coordinates of a DoF's support point inside a cell.
    pub fn local_coordinates(&self, i: usize, mesh: &TreeMesh, cell: CellId) -> [f64; 3] {
        let c = mesh.cell(cell);
        let scale = (1u64 << c.level) as f64;
        let mut t = [0.0; 3];
        for d in 0..self.dim {
            let u = match decode(self.keys[i][d]) {
                Key1d::Vertex(v) => {
                    let shift = MAX_DEPTH - c.level;
                    let lo = (c.coords[d] as u64) << shift;
                    lattice_fraction(v as u64, lo, 1u64 << shift)
                }
                Key1d::Interior { .. } => {
                    self.unit_coordinate(self.keys[i][d]) * scale - c.coords[d] as f64
                }
            };
            t[d] = u;
        }
        t
    }

    /// First cell (in view order) whose gather list contains DoF `i`.
    pub fn owner_cell(&self, i: usize) -> Option<CellId> {
        let n = self.dofs_per_cell();
        self.cell_dofs
            .iter()
            .position(|&g| g as usize == i)
            .map(|k| self.cells[k / n])
    }

    /// Finds a member of this map's view with level below `below` whose
    /// closure contains DoF `i`.
    pub fn find_coarser_cell(&self, i: usize, mesh: &TreeMesh, below: u8) -> Option<CellId> {
        self.find_cell_in_view(i, mesh, self.view, below)
    }

    /// Finds a member of `view` with level below `below` whose closure
    /// contains DoF `i`.
    pub fn find_cell_in_view(
        &self,
        i: usize,
        mesh: &TreeMesh,
        view: LevelView,
        below: u8,
    ) -> Option<CellId> {
        let mut stack = vec![mesh.root()];
        while let Some(n) = stack.pop() {
            if mesh.level(n) >= below || !self.point_in_cell(i, mesh, n) {
                continue;
            }
            if mesh.in_view(n, view) {
                return Some(n);
            }
            stack.extend(mesh.children(n));
        }
        None
    }
}

fn lattice_fraction(v: u64, lo: u64, len: u64) -> f64 {
    (v as f64 - lo as f64) / len as f64
}
