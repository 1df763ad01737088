use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mfmg::partition::PartitionPolicy;
use mfmg::Variant;
use mfmg_bench::config::{default_policy, BenchmarkConfig, Case, Precision};
use mfmg_bench::convergence::run_convergence_study;
use mfmg_bench::metrics::{level_profile, run_metrics_sweep};
use mfmg_bench::output::{write_rows, Format};
use mfmg_bench::presets::preset;
use mfmg_bench::problem::Gaussian;
use mfmg_bench::{run_benchmark, BenchError};

#[derive(Parser)]
#[command(name = "mfmg", about = "Matrix-free multigrid benchmarks on adaptive meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv, global = true)]
    output: OutputFormat,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration or every configuration of a preset.
    Run(RunArgs),
    /// L2 errors and observed orders for the Gaussian problem.
    Convergence {
        #[arg(short = 'p', long, default_value_t = 1)]
        degree: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [3, 4, 5])]
        levels: Vec<usize>,
        /// Use the squared-distance exponent.
        #[arg(long)]
        squared: bool,
    },
    /// Partition metrics of the LS and GC hierarchies.
    Metrics {
        #[arg(long, default_value = "octant")]
        case: String,
        #[arg(short = 'L', long, default_value_t = 5)]
        level: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [8, 16, 32])]
        ranks: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = ["first-child".to_string(), "sfc-per-level".to_string()])]
        policy: Vec<String>,
        #[arg(long, default_value_t = 2.0)]
        hanging_weight: f64,
        /// Emit the per-level owned-cell profile instead of the summary.
        #[arg(long)]
        levels: bool,
    },
    /// Cell, hanging-node and DoF statistics of a benchmark mesh.
    MeshStats {
        #[arg(long, default_value = "octant")]
        case: String,
        #[arg(short = 'L', long, default_value_t = 5)]
        level: usize,
        #[arg(short = 'p', long, value_delimiter = ',', default_values_t = [1])]
        degree: Vec<usize>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, default_value = "octant")]
    case: String,
    #[arg(short = 'L', long, default_value_t = 4)]
    level: usize,
    #[arg(short = 'p', long, default_value_t = 1)]
    degree: usize,
    #[arg(long, default_value = "GC")]
    variant: String,
    #[arg(long, default_value = "GC")]
    pc_coarse: String,
    #[arg(long, default_value_t = 1)]
    ranks: usize,
    /// Defaults to first-child for LS and sfc-per-level otherwise.
    #[arg(long)]
    policy: Option<String>,
    #[arg(long, default_value_t = 3)]
    smoother_degree: usize,
    #[arg(long, default_value_t = 1e-4)]
    rtol: f64,
    #[arg(long, default_value = "double")]
    precision: String,
    #[arg(long, default_value_t = 2.0)]
    hanging_weight: f64,
}

impl RunArgs {
    fn config(&self) -> Result<BenchmarkConfig, BenchError> {
        let variant: Variant = self.variant.parse()?;
        let mut c = BenchmarkConfig::new(self.case.parse()?, self.level, self.degree, variant);
        c.pc_coarse = self.pc_coarse.parse()?;
        c.ranks = self.ranks;
        c.policy = match &self.policy {
            Some(p) => p.parse()?,
            None => default_policy(variant),
        };
        c.smoother_degree = self.smoother_degree;
        c.rtol = self.rtol;
        c.precision = self.precision.parse::<Precision>()?;
        c.hanging_weight = self.hanging_weight;
        c.validate()?;
        Ok(c)
    }
}

#[derive(serde::Serialize)]
struct MeshStatsRow {
    case: String,
    #[serde(rename = "L")]
    level: usize,
    n_active: usize,
    hanging_share: f64,
    p: usize,
    n_dofs: usize,
}

/// Runs the command; `Ok(false)` means some solve diverged.
fn execute(cli: &Cli, sink: &mut dyn Write) -> Result<bool, BenchError> {
    let format = match cli.output {
        OutputFormat::Csv => Format::Csv,
        OutputFormat::Json => Format::Json,
    };
    match &cli.command {
        Command::Run(args) => {
            let configs = match &args.preset {
                Some(name) => preset(name)?,
                None => vec![args.config()?],
            };
            let mut rows = Vec::new();
            let mut all_converged = true;
            for c in &configs {
                let outcome = run_benchmark(c)?;
                all_converged &= outcome.converged;
                rows.push(outcome.row);
            }
            write_rows(sink, &rows, format)?;
            Ok(all_converged)
        }
        Command::Convergence { degree, levels, squared } => {
            let problem = if *squared { Gaussian::squared(3) } else { Gaussian::new(3) };
            let rows = run_convergence_study(*degree, levels, problem)?;
            write_rows(sink, &rows, format)?;
            Ok(true)
        }
        Command::Metrics { case, level, ranks, policy, hanging_weight, levels } => {
            let policies = policy
                .iter()
                .map(|p| p.parse::<PartitionPolicy>())
                .collect::<Result<Vec<_>, _>>()?;
            let entries = run_metrics_sweep(case.parse()?, *level, ranks, &policies, *hanging_weight)?;
            if *levels {
                write_rows(sink, &level_profile(&entries), format)?;
            } else {
                let rows: Vec<_> = entries.into_iter().map(|e| e.row).collect();
                write_rows(sink, &rows, format)?;
            }
            Ok(true)
        }
        Command::MeshStats { case, level, degree } => {
            let case: Case = case.parse()?;
            let mesh = case.mesh(*level)?;
            let stats = mesh.stats();
            let mut rows = Vec::new();
            for &p in degree {
                let dofs = mfmg::fem::distribute_dofs(&mesh, mfmg::LevelView::Active, p)?;
                rows.push(MeshStatsRow {
                    case: case.name().to_string(),
                    level: *level,
                    n_active: stats.n_active,
                    hanging_share: stats.hanging_share,
                    p,
                    n_dofs: dofs.n_dofs(),
                });
            }
            write_rows(sink, &rows, format)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut sink: Box<dyn Write> = match &cli.out {
        Some(path) => match File::create(path) {
            Ok(f) => Box::new(f),
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(1);
            }
        },
        None => Box::new(io::stdout().lock()),
    };
    match execute(&cli, &mut sink) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: solver did not converge");
            ExitCode::from(2)
        }
        Err(BenchError::Solver(e @ mfmg::MgError::Diverged { .. })) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
