use crate::error::{MgError, Result};

/// Gauss-Legendre rule on `[0, 1]`, tensorized on demand.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// `n`-point Gauss-Legendre rule, exact for polynomials of degree `2n - 1`.
    pub fn gauss(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(MgError::Config("quadrature needs at least one point".into()));
        }
        let mut points = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            // Chebyshev guess, refined by Newton on P_n
            let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            points[i] = 0.5 * (x + 1.0);
            weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
        }
        Ok(Self { points, weights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Tensor-product weights in `dim` dimensions, x index fastest.
    pub fn tensor_weights(&self, dim: usize) -> Vec<f64> {
        let n = self.len();
        (0..n.pow(dim as u32))
            .map(|mut q| {
                let mut w = 1.0;
                for _ in 0..dim {
                    w *= self.weights[q % n];
                    q /= n;
                }
                w
            })
            .collect()
    }
}

/// Legendre polynomial `P_n(x)` and its derivative.
pub(crate) fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        // endpoint value n(n+1)/2 * x^(n+1)
        0.5 * n * (n + 1.0) * x.powf(n + 1.0)
    } else {
        n * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, dp)
}

/// Gauss-Lobatto points on `[0, 1]` (`n >= 2`), endpoints included.
pub fn gauss_lobatto_points(n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let m = n - 1;
    let mut pts = vec![0.0; n];
    pts[n - 1] = 1.0;
    for i in 1..m {
        // interior points are the roots of P'_m
        let mut x = -(std::f64::consts::PI * i as f64 / m as f64).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(m, x);
            // d2P from the Legendre ODE: (1-x^2) P'' = 2x P' - m(m+1) P
            let d2p = (2.0 * x * dp - (m * (m + 1)) as f64 * p) / (1.0 - x * x);
            let dx = dp / d2p;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        pts[i] = 0.5 * (x + 1.0);
    }
    pts
}
