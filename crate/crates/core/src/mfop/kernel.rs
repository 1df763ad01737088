//! Reference-cell Laplace kernel evaluated with sum factorization.
//!
//! Values are interpolated to the Gauss points with `B`, differentiated with
//! the collocation derivative `D` of the Lagrange basis on the Gauss points,
//! scaled by the quadrature weights and integrated back with the transposes.

use crate::fem::{LagrangeElement, QuadratureRule};
use crate::scalar::Scalar;
use crate::tensor::{apply_along_axis, apply_tensor, Matrix1d};

#[derive(Clone, Debug)]
pub struct LaplaceKernel<T> {
    dim: usize,
    n: usize,
    values: Matrix1d<T>,
    values_t: Matrix1d<T>,
    colloc: Matrix1d<T>,
    colloc_t: Matrix1d<T>,
    weights: Vec<T>,
}

/// Scratch space for one kernel evaluation.
#[derive(Clone, Debug)]
pub struct KernelBuffers<T> {
    quad: Vec<T>,
    grads: Vec<T>,
    acc: Vec<T>,
    scratch: Vec<T>,
}

impl<T: Scalar> LaplaceKernel<T> {
    pub fn new(element: &LagrangeElement, dim: usize) -> Self {
        let n = element.n_nodes_1d();
        let quad = QuadratureRule::gauss(n).expect("degree >= 1");
        let gauss_basis = LagrangeElement {
            degree: n - 1,
            nodes: quad.points.clone(),
        };
        let values = element.values_at(&quad.points);
        let colloc = gauss_basis.derivatives_at(&quad.points);
        Self {
            dim,
            n,
            values_t: values.transpose().cast(),
            values: values.cast(),
            colloc_t: colloc.transpose().cast(),
            colloc: colloc.cast(),
            weights: quad
                .tensor_weights(dim)
                .into_iter()
                .map(T::from_f64)
                .collect(),
        }
    }

    pub fn dofs_per_cell(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn buffers(&self) -> KernelBuffers<T> {
        let len = self.dofs_per_cell();
        KernelBuffers {
            quad: vec![T::ZERO; len],
            grads: vec![T::ZERO; len * self.dim],
            acc: vec![T::ZERO; len],
            scratch: vec![T::ZERO; len],
        }
    }

    /// `out = scale * K_ref * input` on one cell.
    pub fn apply(&self, scale: T, input: &[T], out: &mut [T], buf: &mut KernelBuffers<T>) {
        let dim = self.dim;
        let len = self.dofs_per_cell();
        let shape = [self.n; 3];
        apply_tensor(&self.values, dim, input, &mut buf.quad, &mut buf.scratch);
        for axis in 0..dim {
            let g = &mut buf.grads[axis * len..(axis + 1) * len];
            apply_along_axis(&self.colloc, dim, shape, axis, &buf.quad, g, false);
            for (v, &w) in g.iter_mut().zip(&self.weights) {
                *v *= w * scale;
            }
        }
        for axis in 0..dim {
            let g = &buf.grads[axis * len..(axis + 1) * len];
            apply_along_axis(&self.colloc_t, dim, shape, axis, g, &mut buf.acc, axis > 0);
        }
        apply_tensor(&self.values_t, dim, &buf.acc, out, &mut buf.scratch);
    }

    /// Dense reference matrix, built column by column from unit vectors.
    pub fn reference_matrix(&self) -> Vec<f64> {
        let n = self.dofs_per_cell();
        let mut buf = self.buffers();
        let mut e = vec![T::ZERO; n];
        let mut col = vec![T::ZERO; n];
        let mut k = vec![0.0; n * n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = T::ZERO);
            e[j] = T::ONE;
            self.apply(T::ONE, &e, &mut col, &mut buf);
            for i in 0..n {
                k[i * n + j] = col[i].to_f64();
            }
        }
        k
    }
}
