//! Sum-factorization kernels: one-dimensional matrices applied along a single
//! axis of a tensor-product coefficient array (x index fastest).

use crate::scalar::Scalar;

/// Row-major dense matrix used for 1D interpolation/derivative tables.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix1d<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> Matrix1d<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::ZERO; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(T::from_f64(f(r, c)));
            }
        }
        Self { rows, cols, data }
    }

    #[inline(always)]
    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).to_f64())
    }

    pub fn cast<S: Scalar>(&self) -> Matrix1d<S> {
        Matrix1d {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| S::from_f64(v.to_f64())).collect(),
        }
    }
}

/// Applies `m` along `axis` of a tensor of shape `shape` (only the first `dim`
/// entries are used). `shape[axis]` must equal `m.cols`; the output has
/// `m.rows` entries along that axis. With `add`, results are accumulated.
pub fn apply_along_axis<T: Scalar>(
    m: &Matrix1d<T>,
    dim: usize,
    shape: [usize; 3],
    axis: usize,
    input: &[T],
    output: &mut [T],
    add: bool,
) {
    debug_assert_eq!(shape[axis], m.cols);
    let n_in = m.cols;
    let n_out = m.rows;
    let pre: usize = shape[..axis].iter().product();
    let post: usize = shape[axis + 1..dim].iter().product();
    debug_assert!(input.len() >= pre * n_in * post);
    debug_assert!(output.len() >= pre * n_out * post);

    for k in 0..post {
        let in_base = k * n_in * pre;
        let out_base = k * n_out * pre;
        for q in 0..n_out {
            let row = &m.data[q * n_in..(q + 1) * n_in];
            let out = &mut output[out_base + q * pre..out_base + (q + 1) * pre];
            if !add {
                out.iter_mut().for_each(|v| *v = T::ZERO);
            }
            for (i, &coef) in row.iter().enumerate() {
                let inp = &input[in_base + i * pre..in_base + (i + 1) * pre];
                for (o, &x) in out.iter_mut().zip(inp) {
                    *o += coef * x;
                }
            }
        }
    }
}

/// Applies the tensor product `m ⊗ m ⊗ ...` (one factor per dimension).
/// `scratch` must hold at least `max(rows, cols)^dim` entries.
pub fn apply_tensor<T: Scalar>(
    m: &Matrix1d<T>,
    dim: usize,
    input: &[T],
    output: &mut [T],
    scratch: &mut [T],
) {
    let mut shape = [m.cols; 3];
    let out_len = m.rows.pow(dim as u32);
    match dim {
        1 => apply_along_axis(m, 1, shape, 0, input, output, false),
        2 => {
            apply_along_axis(m, 2, shape, 0, input, scratch, false);
            shape[0] = m.rows;
            apply_along_axis(m, 2, shape, 1, scratch, output, false);
        }
        3 => {
            apply_along_axis(m, 3, shape, 0, input, output, false);
            shape[0] = m.rows;
            apply_along_axis(m, 3, shape, 1, output, scratch, false);
            shape[1] = m.rows;
            apply_along_axis(m, 3, shape, 2, scratch, output, false);
        }
        _ => unreachable!("dimension checked at construction"),
    }
    debug_assert!(output.len() >= out_len);
}
