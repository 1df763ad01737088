//! Dense reference assembly from 1D mass and stiffness matrices.

use mfmg::fem::{ConstraintSet, DofMap, LagrangeElement, QuadratureRule};
use mfmg::TreeMesh;
use nalgebra::DMatrix;

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
    let digit = |i: usize, d: usize| (i / n.pow(d as u32)) % n;
    let nc = n.pow(dim as u32);
    DMatrix::from_fn(nc, nc, |i, j| {
        (0..dim)
            .map(|d| {
                (0..dim)
                    .map(|e| {
                        let m = if e == d { &k1 } else { &m1 };
                        m[(digit(i, e), digit(j, e))]
                    })
                    .product::<f64>()
            })
            .sum()
    })
}

pub fn assemble(mesh: &TreeMesh, dofs: &DofMap) -> DMatrix<f64> {
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

/// `C^T A C` with identity rows and columns for constrained DoFs.
pub fn condensed(mesh: &TreeMesh, dofs: &DofMap, cs: &ConstraintSet) -> DMatrix<f64> {
    let n = dofs.n_dofs();
    let mut c = DMatrix::<f64>::zeros(n, n);
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
    let mut ac = c.transpose() * assemble(mesh, dofs) * c;
    for i in 0..n {
        if cs.is_constrained(i) {
            ac.row_mut(i).fill(0.0);
            ac.column_mut(i).fill(0.0);
            ac[(i, i)] = 1.0;
        }
    }
    ac
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}
