use crate::error::{MgError, Result};
use crate::multigrid::smoother::LinearOperator;
use crate::scalar::{dot, norm};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverControl {
    pub rtol: f64,
    pub max_iterations: usize,
}

impl Default for SolverControl {
    fn default() -> Self {
        Self {
            rtol: 1e-4,
            max_iterations: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub initial_residual: f64,
    pub final_residual: f64,
}

/// Preconditioned CG from a zero initial guess. Stops once
/// `|r_k| <= rtol |r_0|`.
pub fn pcg_solve<A, M>(
    a: &A,
    b: &[f64],
    mut precondition: M,
    control: SolverControl,
) -> Result<(Vec<f64>, SolveStats)>
where
    A: LinearOperator<f64>,
    M: FnMut(&[f64]) -> Vec<f64>,
{
    let n = a.size();
    if b.len() != n {
        return Err(MgError::SizeMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let r0 = norm(&r);
    let mut stats = SolveStats {
        iterations: 0,
        initial_residual: r0,
        final_residual: r0,
    };
    if r0 == 0.0 {
        return Ok((x, stats));
    }
    let mut z = precondition(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=control.max_iterations {
        a.vmult(&mut ap, &p);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let res = norm(&r);
        stats.iterations = it;
        stats.final_residual = res;
        if res <= control.rtol * r0 {
            return Ok((x, stats));
        }
        z = precondition(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(MgError::Diverged {
        iterations: control.max_iterations,
        relative_residual: stats.final_residual / r0,
    })
}
