use crate::error::{MgError, Result};
use crate::fem::quadrature::{gauss_lobatto_points, QuadratureRule};
use crate::tensor::Matrix1d;

/// Tensor-product Lagrange element of degree `p` on the unit cell, with
/// Gauss-Lobatto support points.
#[derive(Clone, Debug, PartialEq)]
pub struct LagrangeElement {
    pub degree: usize,
    pub nodes: Vec<f64>,
}

impl LagrangeElement {
    pub fn new(degree: usize) -> Result<Self> {
        if degree == 0 || degree > 15 {
            return Err(MgError::Degree(degree));
        }
        Ok(Self {
            degree,
            nodes: gauss_lobatto_points(degree + 1),
        })
    }

    pub fn n_nodes_1d(&self) -> usize {
        self.degree + 1
    }

    pub fn dofs_per_cell(&self, dim: usize) -> usize {
        self.n_nodes_1d().pow(dim as u32)
    }

    /// 1D basis function `i` at `x`.
    pub fn value(&self, i: usize, x: f64) -> f64 {
        let xi = self.nodes[i];
        self.nodes
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &xj)| (x - xj) / (xi - xj))
            .product()
    }

    /// Derivative of 1D basis function `i` at `x`.
    pub fn derivative(&self, i: usize, x: f64) -> f64 {
        let xi = self.nodes[i];
        let mut sum = 0.0;
        for (k, &xk) in self.nodes.iter().enumerate() {
            if k == i {
                continue;
            }
            let mut term = 1.0 / (xi - xk);
            for (j, &xj) in self.nodes.iter().enumerate() {
                if j != i && j != k {
                    term *= (x - xj) / (xi - xj);
                }
            }
            sum += term;
        }
        sum
    }

    /// Tensor-product shape function `i` (x index fastest) at a point.
    pub fn shape_value(&self, dim: usize, i: usize, x: [f64; 3]) -> f64 {
        let n = self.n_nodes_1d();
        let mut r = i;
        let mut v = 1.0;
        for xd in x.iter().take(dim) {
            v *= self.value(r % n, *xd);
            r /= n;
        }
        v
    }

    /// Gradient of tensor-product shape function `i`.
    pub fn shape_grad(&self, dim: usize, i: usize, x: [f64; 3]) -> [f64; 3] {
        let n = self.n_nodes_1d();
        let mut idx = [0; 3];
        let mut r = i;
        for v in idx.iter_mut().take(dim) {
            *v = r % n;
            r /= n;
        }
        let mut g = [0.0; 3];
        for (d, gd) in g.iter_mut().enumerate().take(dim) {
            let mut v = 1.0;
            for e in 0..dim {
                v *= if e == d {
                    self.derivative(idx[e], x[e])
                } else {
                    self.value(idx[e], x[e])
                };
            }
            *gd = v;
        }
        g
    }

    /// Table `B[q][i] = phi_i(x_q)`.
    pub fn values_at(&self, points: &[f64]) -> Matrix1d<f64> {
        Matrix1d::from_fn(points.len(), self.n_nodes_1d(), |q, i| self.value(i, points[q]))
    }

    /// Table `G[q][i] = phi_i'(x_q)`.
    pub fn derivatives_at(&self, points: &[f64]) -> Matrix1d<f64> {
        Matrix1d::from_fn(points.len(), self.n_nodes_1d(), |q, i| {
            self.derivative(i, points[q])
        })
    }

    /// Reference stiffness matrix on `[0,1]^dim`, integrated point by point
    /// with the `(p+1)`-point Gauss rule (no sum factorization). Row-major.
    pub fn reference_stiffness(&self, dim: usize) -> Vec<f64> {
        let quad = QuadratureRule::gauss(self.n_nodes_1d()).expect("degree >= 1");
        let nq = quad.len();
        let n = self.dofs_per_cell(dim);
        let weights = quad.tensor_weights(dim);
        let mut grads = vec![[0.0; 3]; n * weights.len()];
        for (q, _) in weights.iter().enumerate() {
            let mut x = [0.0; 3];
            let mut r = q;
            for xd in x.iter_mut().take(dim) {
                *xd = quad.points[r % nq];
                r /= nq;
            }
            for i in 0..n {
                grads[q * n + i] = self.shape_grad(dim, i, x);
            }
        }
        let mut k = vec![0.0; n * n];
        for (q, w) in weights.iter().enumerate() {
            let g = &grads[q * n..(q + 1) * n];
            for i in 0..n {
                for j in 0..n {
                    let dot: f64 = (0..dim).map(|d| g[i][d] * g[j][d]).sum();
                    k[i * n + j] += w * dot;
                }
            }
        }
        k
    }
}
