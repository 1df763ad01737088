use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mfop::LevelOperator;
use crate::scalar::{dot, Scalar};

/// Square operator acting on plain vectors.
pub trait LinearOperator<T: Scalar> {
    fn size(&self) -> usize;
    /// `y = A x`.
    fn vmult(&self, y: &mut [T], x: &[T]);
}

impl<T: Scalar> LinearOperator<T> for LevelOperator<T> {
    fn size(&self) -> usize {
        self.n_dofs()
    }

    fn vmult(&self, y: &mut [T], x: &[T]) {
        LevelOperator::vmult(self, y, x)
    }
}

/// Largest eigenvalue of `D^{-1} A` by power iteration from a seeded random
/// vector (zero on `fixed` entries), reported as a generalized Rayleigh
/// quotient of the last iterate.
pub fn estimate_eigenvalues<A: LinearOperator<f64>>(
    op: &A,
    diag: &[f64],
    fixed: &[bool],
    iterations: usize,
    seed: u64,
) -> f64 {
    let n = op.size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n)
        .map(|i| if fixed[i] { 0.0 } else { rng.gen_range(-1.0..1.0) })
        .collect();
    if v.iter().all(|&x| x == 0.0) {
        return 1.0;
    }
    let mut av = vec![0.0; n];
    let d_norm = |v: &[f64]| {
        v.iter()
            .zip(diag)
            .map(|(x, d)| x * x * d)
            .sum::<f64>()
            .sqrt()
    };
    let scale = 1.0 / d_norm(&v);
    v.iter_mut().for_each(|x| *x *= scale);
    for _ in 0..iterations {
        op.vmult(&mut av, &v);
        for i in 0..n {
            v[i] = if fixed[i] { 0.0 } else { av[i] / diag[i] };
        }
        let norm = d_norm(&v);
        if norm == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|x| *x /= norm);
    }
    op.vmult(&mut av, &v);
    dot(&v, &av)
}

/// Chebyshev iteration around point Jacobi, targeting the eigenvalues of
/// `D^{-1} A` in `[lo, hi]`.
#[derive(Clone, Debug)]
pub struct ChebyshevSmoother<T> {
    pub degree: usize,
    pub lambda_max: f64,
    pub lo: f64,
    pub hi: f64,
    pub diag_inv: Vec<T>,
}

impl<T: Scalar> ChebyshevSmoother<T> {
    pub fn new(diag: &[T], degree: usize, lo: f64, hi: f64) -> Self {
        Self {
            degree,
            lambda_max: hi,
            lo,
            hi,
            diag_inv: diag.iter().map(|&d| T::ONE / d).collect(),
        }
    }

    /// `degree` Chebyshev steps on `A x = b`. With `zero_start`, `x` is
    /// overwritten and the initial residual costs no operator application.
    pub fn smooth<A: LinearOperator<T>>(&self, op: &A, x: &mut [T], b: &[T], zero_start: bool) {
        let n = x.len();
        if self.degree == 0 {
            return;
        }
        let mut r = vec![T::ZERO; n];
        if zero_start {
            x.iter_mut().for_each(|v| *v = T::ZERO);
            r.copy_from_slice(b);
        } else {
            op.vmult(&mut r, x);
            for i in 0..n {
                r[i] = b[i] - r[i];
            }
        }
        let theta = 0.5 * (self.hi + self.lo);
        let delta = 0.5 * (self.hi - self.lo);
        let mut d: Vec<T> = (0..n)
            .map(|i| self.diag_inv[i] * r[i] * T::from_f64(1.0 / theta))
            .collect();
        let sigma = theta / delta;
        let mut rho_old = delta / theta;
        let mut ad = vec![T::ZERO; n];
        for step in 1..=self.degree {
            for i in 0..n {
                x[i] += d[i];
            }
            if step == self.degree {
                break;
            }
            op.vmult(&mut ad, &d);
            for i in 0..n {
                r[i] -= ad[i];
            }
            let rho = 1.0 / (2.0 * sigma - rho_old);
            let c1 = T::from_f64(rho * rho_old);
            let c2 = T::from_f64(2.0 * rho / delta);
            for i in 0..n {
                d[i] = c1 * d[i] + c2 * self.diag_inv[i] * r[i];
            }
            rho_old = rho;
        }
    }
}
