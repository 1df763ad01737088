//! Gaussian manufactured solution centred at `(-0.5, -0.5, -0.5)`.

const ALPHA: f64 = 0.1;
const CENTER: [f64; 3] = [-0.5; 3];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gaussian {
    pub dim: usize,
    /// Use `exp(-|x - x0|^2 / a^2)` instead of `exp(-|x - x0| / a^2)`.
    pub squared: bool,
}

impl Gaussian {
    pub fn new(dim: usize) -> Self {
        Self { dim, squared: false }
    }

    pub fn squared(dim: usize) -> Self {
        Self { dim, squared: true }
    }

    fn k() -> f64 {
        1.0 / (ALPHA * ALPHA)
    }

    fn amplitude() -> f64 {
        (1.0 / (ALPHA * (2.0 * std::f64::consts::PI).sqrt())).powi(3)
    }

    fn radius(&self, x: [f64; 3]) -> f64 {
        (0..self.dim)
            .map(|d| (x[d] - CENTER[d]).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn value(&self, x: [f64; 3]) -> f64 {
        let r = self.radius(x);
        let e = if self.squared { r * r } else { r };
        Self::amplitude() * (-Self::k() * e).exp()
    }

    /// `-Δu`.
    pub fn rhs(&self, x: [f64; 3]) -> f64 {
        let r = self.radius(x);
        let k = Self::k();
        let d = self.dim as f64;
        let u = self.value(x);
        if self.squared {
            u * (2.0 * d * k - 4.0 * k * k * r * r)
        } else {
            // the cusp at the centre is integrable; nudge the quadrature
            // point off it
            u * (k * (d - 1.0) / r.max(1e-300) - k * k)
        }
    }
}
