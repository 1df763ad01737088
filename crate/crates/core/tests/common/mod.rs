#![allow(dead_code)]

use mfmg::fem::{ConstraintSet, DofMap, LagrangeElement, QuadratureRule};
use mfmg::mesh::TreeMesh;
use nalgebra::DMatrix;

/// Cell stiffness matrix on a cube of edge `h` from 1D mass and stiffness
/// matrices evaluated with Gauss quadrature.
pub fn cell_stiffness(element: &LagrangeElement, dim: usize, h: f64) -> DMatrix<f64> {
    let n = element.n_nodes_1d();
    let q = QuadratureRule::gauss(n + 1).unwrap();
    let mut m1 = DMatrix::<f64>::zeros(n, n);
    let mut k1 = DMatrix::<f64>::zeros(n, n);
    for (x, w) in q.points.iter().zip(&q.weights) {
        for i in 0..n {
            for j in 0..n {
                m1[(i, j)] += w * element.value(i, *x) * element.value(j, *x) * h;
                k1[(i, j)] += w * element.derivative(i, *x) * element.derivative(j, *x) / h;
            }
        }
    }
    let nc = n.pow(dim as u32);
    let digits = |mut i: usize| {
        let mut d = [0usize; 3];
        for v in d.iter_mut().take(dim) {
            *v = i % n;
            i /= n;
        }
        d
    };
    DMatrix::from_fn(nc, nc, |i, j| {
        let (a, b) = (digits(i), digits(j));
        (0..dim)
            .map(|d| {
                (0..dim)
                    .map(|e| {
                        if e == d {
                            k1[(a[e], b[e])]
                        } else {
                            m1[(a[e], b[e])]
                        }
                    })
                    .product::<f64>()
            })
            .sum()
    })
}

/// Unconstrained stiffness matrix of all cells of a DoF map.
pub fn assemble_unconstrained(mesh: &TreeMesh, dofs: &DofMap) -> DMatrix<f64> {
    let n = dofs.n_dofs();
    let mut a = DMatrix::zeros(n, n);
    for (k, &cell) in dofs.cells().iter().enumerate() {
        let ke = cell_stiffness(dofs.element(), dofs.dim(), mesh.cell_size(cell));
        let idx = dofs.cell_dofs(k);
        for (i, &gi) in idx.iter().enumerate() {
            for (j, &gj) in idx.iter().enumerate() {
                a[(gi as usize, gj as usize)] += ke[(i, j)];
            }
        }
    }
    a
}

/// Homogeneous constraint map `x -> C x`: free entries pass through,
/// constrained entries are replaced by their lines.
pub fn constraint_matrix(cs: &ConstraintSet) -> DMatrix<f64> {
    let n = cs.n_dofs();
    let mut c = DMatrix::zeros(n, n);
    for i in 0..n {
        match cs.line(i) {
            None => c[(i, i)] = 1.0,
            Some(line) => {
                for &(j, v) in &line.entries {
                    c[(i, j as usize)] = v;
                }
            }
        }
    }
    c
}

/// `C^T A C` on free rows and columns, identity on constrained ones.
pub fn condensed_matrix(mesh: &TreeMesh, dofs: &DofMap, cs: &ConstraintSet) -> DMatrix<f64> {
    let a = assemble_unconstrained(mesh, dofs);
    let c = constraint_matrix(cs);
    let mut ac = c.transpose() * a * c;
    for i in 0..cs.n_dofs() {
        if cs.is_constrained(i) {
            for j in 0..cs.n_dofs() {
                ac[(i, j)] = 0.0;
                ac[(j, i)] = 0.0;
            }
            ac[(i, i)] = 1.0;
        }
    }
    ac
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}

/// 3D mesh with one refined corner cell: hanging nodes on three faces.
pub fn corner_refined(dim: usize) -> TreeMesh {
    let mut m = TreeMesh::new(dim).unwrap();
    m.refine_cell(m.root());
    m.refine_cell(m.child(m.root(), 0).unwrap());
    m
}
