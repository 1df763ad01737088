use std::collections::BTreeMap;

use crate::error::{MgError, Result};
use crate::fem::dofs::DofMap;
use crate::mesh::{LevelView, TreeMesh};
use crate::scalar::Scalar;

/// Coefficients below this magnitude are dropped from constraint lines.
const DROP_TOLERANCE: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintKind {
    Hanging,
    Dirichlet,
}

/// One affine line `x_i = sum_j c_ij x_j + b_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintLine {
    pub index: u32,
    pub kind: ConstraintKind,
    pub entries: Vec<(u32, f64)>,
    pub inhomogeneity: f64,
}

/// Affine constraints on a DoF vector.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSet {
    n_dofs: usize,
    lines: Vec<ConstraintLine>,
    line_of: Vec<u32>,
}

impl ConstraintSet {
    pub fn new(n_dofs: usize) -> Self {
        Self {
            n_dofs,
            lines: Vec::new(),
            line_of: vec![u32::MAX; n_dofs],
        }
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn n_constrained(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    #[inline]
    pub fn is_constrained(&self, i: usize) -> bool {
        self.line_of[i] != u32::MAX
    }

    pub fn line(&self, i: usize) -> Option<&ConstraintLine> {
        match self.line_of[i] {
            u32::MAX => None,
            k => Some(&self.lines[k as usize]),
        }
    }

    pub fn lines(&self) -> &[ConstraintLine] {
        &self.lines
    }

    /// Adds or replaces the line for `line.index`.
    pub fn set_line(&mut self, line: ConstraintLine) {
        let i = line.index as usize;
        match self.line_of[i] {
            u32::MAX => {
                self.line_of[i] = self.lines.len() as u32;
                self.lines.push(line);
            }
            k => self.lines[k as usize] = line,
        }
    }

    /// Pins DoF `i` to `value`.
    pub fn add_dirichlet(&mut self, i: usize, value: f64) {
        self.set_line(ConstraintLine {
            index: i as u32,
            kind: ConstraintKind::Dirichlet,
            entries: Vec::new(),
            inhomogeneity: value,
        });
    }

    /// Combines two sets; lines of `other` win on shared indices. The result
    /// is closed (no chains).
    pub fn merge(&self, other: &ConstraintSet) -> Result<ConstraintSet> {
        if self.n_dofs != other.n_dofs {
            return Err(MgError::SizeMismatch {
                expected: self.n_dofs,
                got: other.n_dofs,
            });
        }
        let mut out = self.clone();
        for line in &other.lines {
            out.set_line(line.clone());
        }
        out.close();
        Ok(out)
    }

    /// Substitutes constrained entries until every line only references
    /// unconstrained DoFs.
    pub fn close(&mut self) {
        loop {
            let mut changed = false;
            let snapshot = self.clone();
            for line in &mut self.lines {
                if !line.entries.iter().any(|&(j, _)| snapshot.is_constrained(j as usize)) {
                    continue;
                }
                changed = true;
                let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
                let mut inh = line.inhomogeneity;
                for &(j, c) in &line.entries {
                    match snapshot.line(j as usize) {
                        Some(sub) => {
                            inh += c * sub.inhomogeneity;
                            for &(k, ck) in &sub.entries {
                                *acc.entry(k).or_default() += c * ck;
                            }
                        }
                        None => *acc.entry(j).or_default() += c,
                    }
                }
                line.entries = acc
                    .into_iter()
                    .filter(|&(_, c)| c.abs() >= DROP_TOLERANCE)
                    .collect();
                line.inhomogeneity = inh;
            }
            if !changed {
                break;
            }
        }
    }

    /// Sets every constrained entry from its line.
    pub fn distribute(&self, x: &mut [f64]) {
        for line in &self.lines {
            let v = line.inhomogeneity
                + line
                    .entries
                    .iter()
                    .map(|&(j, c)| c * x[j as usize])
                    .sum::<f64>();
            x[line.index as usize] = v;
        }
    }

    /// Sets every constrained entry to zero.
    pub fn set_zero<T: Scalar>(&self, x: &mut [T]) {
        for line in &self.lines {
            x[line.index as usize] = T::ZERO;
        }
    }

    /// Same lines with all inhomogeneities dropped.
    pub fn homogeneous(&self) -> ConstraintSet {
        let mut out = self.clone();
        for line in &mut out.lines {
            line.inhomogeneity = 0.0;
        }
        out
    }
}

/// Hanging-node constraints of a DoF map: every DoF whose support point lies
/// in the closure of a coarser member of the view is expressed through the
/// coarse cell's shape functions.
pub fn build_hanging_node_constraints(mesh: &TreeMesh, dofs: &DofMap) -> Result<ConstraintSet> {
    let mut cs = ConstraintSet::new(dofs.n_dofs());
    if matches!(dofs.view(), LevelView::Local(_)) {
        return Ok(cs);
    }
    let dim = dofs.dim();
    let element = dofs.element().clone();
    let n1 = element.n_nodes_1d();
    for i in 0..dofs.n_dofs() {
        if dofs.is_cell_interior(i) {
            continue;
        }
        let level = dofs.min_owner_level(i);
        if level == 0 {
            continue;
        }
        let Some(coarse) = dofs.find_coarser_cell(i, mesh, level) else {
            continue;
        };
        if mesh.level(coarse) + 1 < level {
            let fine = dofs.owner_cell(i).expect("every DoF has an owner");
            return Err(MgError::NotBalanced(coarse.0, fine.0));
        }
        let slot = dofs.cell_slot(coarse).expect("view member has a slot");
        let t = dofs.local_coordinates(i, mesh, coarse);
        let mut vals = [[0.0; 16]; 3];
        for d in 0..dim {
            for a in 0..n1 {
                vals[d][a] = element.value(a, t[d]);
            }
        }
        let mut entries: Vec<(u32, f64)> = Vec::new();
        for (local, &j) in dofs.cell_dofs(slot).iter().enumerate() {
            let mut c = 1.0;
            let mut r = local;
            for v in vals.iter().take(dim) {
                c *= v[r % n1];
                r /= n1;
            }
            if c.abs() >= DROP_TOLERANCE {
                entries.push((j, c));
            }
        }
        cs.set_line(ConstraintLine {
            index: i as u32,
            kind: ConstraintKind::Hanging,
            entries,
            inhomogeneity: 0.0,
        });
    }
    cs.close();
    Ok(cs)
}

/// Dirichlet lines `x_i = g(node_i)` for every DoF on the domain boundary.
pub fn build_dirichlet_constraints(dofs: &DofMap, g: impl Fn([f64; 3]) -> f64) -> ConstraintSet {
    let mut cs = ConstraintSet::new(dofs.n_dofs());
    for i in 0..dofs.n_dofs() {
        if dofs.is_boundary(i) {
            cs.add_dirichlet(i, g(dofs.position(i)));
        }
    }
    cs
}

/// Hanging-node constraints merged with homogeneous Dirichlet lines.
pub fn level_constraints(mesh: &TreeMesh, dofs: &DofMap) -> Result<ConstraintSet> {
    build_hanging_node_constraints(mesh, dofs)?.merge(&build_dirichlet_constraints(dofs, |_| 0.0))
}

/// Per-cell gather/scatter that applies homogeneous constraints on the fly:
/// the fused `C_e G_e` and its transpose.
#[derive(Clone, Debug)]
pub struct ConstrainedGather {
    dofs_per_cell: usize,
    direct: Vec<u32>,
    extra_offsets: Vec<u32>,
    extras: Vec<(u16, u32, f64)>,
}

impl ConstrainedGather {
    pub fn new(dofs: &DofMap, constraints: &ConstraintSet) -> Self {
        let npc = dofs.dofs_per_cell();
        let mut direct = Vec::with_capacity(dofs.n_cells() * npc);
        let mut extra_offsets = vec![0u32];
        let mut extras = Vec::new();
        for k in 0..dofs.n_cells() {
            for (local, &g) in dofs.cell_dofs(k).iter().enumerate() {
                match constraints.line(g as usize) {
                    None => direct.push(g),
                    Some(line) => {
                        direct.push(u32::MAX);
                        for &(j, c) in &line.entries {
                            extras.push((local as u16, j, c));
                        }
                    }
                }
            }
            extra_offsets.push(extras.len() as u32);
        }
        Self {
            dofs_per_cell: npc,
            direct,
            extra_offsets,
            extras,
        }
    }

    pub fn n_cells(&self) -> usize {
        self.extra_offsets.len() - 1
    }

    pub fn dofs_per_cell(&self) -> usize {
        self.dofs_per_cell
    }

    /// Global index of each local DoF, `u32::MAX` where constrained.
    pub fn direct(&self, cell: usize) -> &[u32] {
        &self.direct[cell * self.dofs_per_cell..(cell + 1) * self.dofs_per_cell]
    }

    /// `(local, global, coefficient)` triples of resolved constraints.
    pub fn extras(&self, cell: usize) -> &[(u16, u32, f64)] {
        let a = self.extra_offsets[cell] as usize;
        let b = self.extra_offsets[cell + 1] as usize;
        &self.extras[a..b]
    }

    pub fn is_constrained_cell(&self, cell: usize) -> bool {
        self.direct(cell).contains(&u32::MAX)
    }

    pub fn gather<T: Scalar>(&self, cell: usize, x: &[T], local: &mut [T]) {
        for (l, &g) in local.iter_mut().zip(self.direct(cell)) {
            *l = if g == u32::MAX { T::ZERO } else { x[g as usize] };
        }
        for &(l, j, c) in self.extras(cell) {
            local[l as usize] += T::from_f64(c) * x[j as usize];
        }
    }

    pub fn scatter_add<T: Scalar>(&self, cell: usize, local: &[T], y: &mut [T]) {
        for (&l, &g) in local.iter().zip(self.direct(cell)) {
            if g != u32::MAX {
                y[g as usize] += l;
            }
        }
        for &(l, j, c) in self.extras(cell) {
            y[j as usize] += T::from_f64(c) * local[l as usize];
        }
    }
}
