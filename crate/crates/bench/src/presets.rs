//! Named benchmark configurations.

use mfmg::Variant;

use crate::config::{BenchmarkConfig, Case, Precision};
use crate::error::{BenchError, Result};

pub const PRESETS: &[&str] = &["iterations", "cube", "precision", "pc", "gaussian", "smoke"];

/// Octant `L = 3..=6` and shell `L = 5, 6` at `p = 1, 4`.
pub fn iteration_meshes() -> Vec<(Case, usize, usize)> {
    let mut out = Vec::new();
    for (case, levels) in [(Case::Octant, 3..=6), (Case::Shell, 5..=6)] {
        for level in levels {
            for p in [1, 4] {
                out.push((case, level, p));
            }
        }
    }
    out
}

pub fn preset(name: &str) -> Result<Vec<BenchmarkConfig>> {
    let lsgc = [Variant::LocalSmoothing, Variant::GlobalCoarsening];
    let configs = match name {
        "iterations" => iteration_meshes()
            .into_iter()
            .flat_map(|(c, l, p)| lsgc.map(|v| BenchmarkConfig::new(c, l, p, v)))
            .collect(),
        "cube" => (2..=4)
            .flat_map(|l| [1, 2].map(move |p| (l, p)))
            .flat_map(|(l, p)| lsgc.map(|v| BenchmarkConfig::new(Case::Cube, l, p, v)))
            .collect(),
        "precision" => iteration_meshes()
            .into_iter()
            .flat_map(|(c, l, p)| lsgc.map(|v| BenchmarkConfig::new(c, l, p, v).with_precision(Precision::Single)))
            .collect(),
        "pc" => (3..=6)
            .map(|l| BenchmarkConfig::new(Case::Octant, l, 4, Variant::PolynomialCoarsening))
            .collect(),
        "gaussian" => (3..=5)
            .flat_map(|l| [1, 2].map(move |p| (l, p)))
            .map(|(l, p)| BenchmarkConfig::new(Case::Gaussian, l, p, Variant::GlobalCoarsening))
            .collect(),
        "smoke" => vec![
            BenchmarkConfig::new(Case::Octant, 3, 1, Variant::LocalSmoothing),
            BenchmarkConfig::new(Case::Octant, 3, 2, Variant::GlobalCoarsening),
            BenchmarkConfig::new(Case::Octant, 3, 2, Variant::PolynomialCoarsening),
        ],
        _ => return Err(BenchError::UnknownPreset(name.to_string())),
    };
    Ok(configs)
}
