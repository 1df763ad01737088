//! Cell integrals against functions given in closed form: load vectors and
//! error norms.

use crate::fem::constraints::ConstrainedGather;
use crate::fem::dofs::DofMap;
use crate::fem::quadrature::QuadratureRule;
use crate::mesh::TreeMesh;
use crate::tensor::{apply_tensor, Matrix1d};

struct CellQuadrature {
    values: Matrix1d<f64>,
    values_t: Matrix1d<f64>,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl CellQuadrature {
    fn new(dofs: &DofMap, n_points: usize) -> Self {
        let quad = QuadratureRule::gauss(n_points).expect("at least one point");
        let values = dofs.element().values_at(&quad.points);
        Self {
            values_t: values.transpose(),
            values,
            weights: quad.tensor_weights(dofs.dim()),
            points: quad.points,
        }
    }

    fn point(&self, dim: usize, q: usize, origin: [f64; 3], h: f64) -> [f64; 3] {
        let n = self.points.len();
        let mut x = [0.0; 3];
        let mut r = q;
        for d in 0..dim {
            x[d] = origin[d] + h * self.points[r % n];
            r /= n;
        }
        x
    }
}

/// Load vector `F_i = (f, phi_i)` with homogeneous constraints applied
/// (constrained rows are zero).
pub fn assemble_rhs(
    mesh: &TreeMesh,
    dofs: &DofMap,
    gather: &ConstrainedGather,
    f: impl Fn([f64; 3]) -> f64,
    n_points: usize,
) -> Vec<f64> {
    let dim = dofs.dim();
    let cq = CellQuadrature::new(dofs, n_points);
    let size = cq.points.len().max(dofs.element().n_nodes_1d()).pow(dim as u32);
    let mut fq = vec![0.0; size];
    let mut local = vec![0.0; size];
    let mut scratch = vec![0.0; size];
    let mut out = vec![0.0; dofs.n_dofs()];
    for (k, &cell) in dofs.cells().iter().enumerate() {
        let h = mesh.cell_size(cell);
        let vol = h.powi(dim as i32);
        let origin = mesh.cell_origin(cell);
        for (q, w) in cq.weights.iter().enumerate() {
            fq[q] = w * vol * f(cq.point(dim, q, origin, h));
        }
        apply_tensor(&cq.values_t, dim, &fq, &mut local, &mut scratch);
        gather.scatter_add(k, &local[..dofs.dofs_per_cell()], &mut out);
    }
    out
}

/// `L2` norm of `u_h - u` where `u_h` holds a value for every DoF
/// (constraints already distributed).
pub fn l2_error(
    mesh: &TreeMesh,
    dofs: &DofMap,
    u_h: &[f64],
    u: impl Fn([f64; 3]) -> f64,
    n_points: usize,
) -> f64 {
    let dim = dofs.dim();
    let cq = CellQuadrature::new(dofs, n_points);
    let size = cq.points.len().max(dofs.element().n_nodes_1d()).pow(dim as u32);
    let mut local = vec![0.0; size];
    let mut uq = vec![0.0; size];
    let mut scratch = vec![0.0; size];
    let mut sum = 0.0;
    for (k, &cell) in dofs.cells().iter().enumerate() {
        let h = mesh.cell_size(cell);
        let vol = h.powi(dim as i32);
        let origin = mesh.cell_origin(cell);
        for (l, &g) in local.iter_mut().zip(dofs.cell_dofs(k)) {
            *l = u_h[g as usize];
        }
        apply_tensor(&cq.values, dim, &local, &mut uq, &mut scratch);
        for (q, w) in cq.weights.iter().enumerate() {
            let e = uq[q] - u(cq.point(dim, q, origin, h));
            sum += w * vol * e * e;
        }
    }
    sum.sqrt()
}

/// Nodal interpolant of `f`.
pub fn interpolate(dofs: &DofMap, f: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
    (0..dofs.n_dofs()).map(|i| f(dofs.position(i))).collect()
}
