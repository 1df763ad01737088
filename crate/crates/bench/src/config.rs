use std::fmt;
use std::str::FromStr;

use mfmg::mesh::{refine_octant, refine_shell, refine_uniform};
use mfmg::partition::PartitionPolicy;
use mfmg::{TreeMesh, Variant};

use crate::error::{BenchError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Case {
    Octant,
    Shell,
    Cube,
    /// Octant mesh with the Gaussian manufactured solution.
    Gaussian,
}

impl Case {
    pub fn name(self) -> &'static str {
        match self {
            Case::Octant => "octant",
            Case::Shell => "shell",
            Case::Cube => "cube",
            Case::Gaussian => "gaussian",
        }
    }

    pub fn mesh(self, level: usize) -> Result<TreeMesh> {
        Ok(match self {
            Case::Octant | Case::Gaussian => refine_octant(level, 3)?,
            Case::Shell => refine_shell(level)?,
            Case::Cube => refine_uniform(level, 3)?,
        })
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Case {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "octant" => Ok(Case::Octant),
            "shell" => Ok(Case::Shell),
            "cube" => Ok(Case::Cube),
            "gaussian" => Ok(Case::Gaussian),
            _ => Err(BenchError::Config(format!("unknown case '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Precision {
    Double,
    Single,
}

impl Precision {
    pub fn name(self) -> &'static str {
        match self {
            Precision::Double => "double",
            Precision::Single => "single",
        }
    }
}

impl FromStr for Precision {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "double" => Ok(Precision::Double),
            "single" => Ok(Precision::Single),
            _ => Err(BenchError::Config(format!("unknown precision '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkConfig {
    pub case: Case,
    pub level: usize,
    pub degree: usize,
    pub variant: Variant,
    /// Geometric hierarchy below the `p = 1` level of polynomial coarsening.
    pub pc_coarse: Variant,
    pub ranks: usize,
    pub policy: PartitionPolicy,
    pub smoother_degree: usize,
    pub rtol: f64,
    pub precision: Precision,
    pub hanging_weight: f64,
}

impl BenchmarkConfig {
    pub fn new(case: Case, level: usize, degree: usize, variant: Variant) -> Self {
        Self {
            case,
            level,
            degree,
            variant,
            pc_coarse: Variant::GlobalCoarsening,
            ranks: 1,
            policy: default_policy(variant),
            smoother_degree: 3,
            rtol: 1e-4,
            precision: Precision::Double,
            hanging_weight: 2.0,
        }
    }

    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(BenchError::Config(m));
        if self.case == Case::Shell && self.level < 5 {
            return err(format!("shell needs L >= 5, got {}", self.level));
        }
        if self.variant == Variant::PolynomialCoarsening && self.degree < 2 {
            return err(format!("polynomial coarsening needs p >= 2, got {}", self.degree));
        }
        if self.pc_coarse == Variant::PolynomialCoarsening {
            return err("the coarse-grid continuation must be LS or GC".into());
        }
        if !(1..=15).contains(&self.degree) {
            return err(format!("degree {} outside 1..=15", self.degree));
        }
        if self.ranks == 0 {
            return err("at least one rank is needed".into());
        }
        if !(self.rtol > 0.0 && self.rtol < 1.0) {
            return err(format!("rtol {} outside (0, 1)", self.rtol));
        }
        if self.smoother_degree == 0 {
            return err("smoother degree must be positive".into());
        }
        if self.hanging_weight <= 0.0 {
            return err("hanging-node weight must be positive".into());
        }
        Ok(())
    }
}

/// First-child ownership for local smoothing, per-level repartitioning for
/// the globally coarsened hierarchies.
pub fn default_policy(variant: Variant) -> PartitionPolicy {
    match variant {
        Variant::LocalSmoothing => PartitionPolicy::FirstChild,
        _ => PartitionPolicy::SfcPerLevel,
    }
}
