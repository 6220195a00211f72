use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use crossedge::experiments::{DrawMode, TestSpec};
use crossedge::{Density, Functional};

#[derive(Debug, Parser)]
#[command(name = "crossedge", version, about = "Graph-based two-sample tests on cross-edge counts")]
pub struct Cli {
    /// Key-value config file; flags on the command line override it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads; 0 uses every available core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[arg(long = "output-dir", global = true, default_value = ".")]
    pub output_dir: PathBuf,

    /// Also write SVG charts where available.
    #[arg(long, global = true)]
    pub svg: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test a labeled CSV sample.
    Test(TestArgs),
    /// Estimate graph constants and store them in a cache file.
    Constants(ConstantsArgs),
    /// Normal-location power curves.
    Power(PowerArgs),
    /// CLT diagnostic of the standardized K-NN statistic.
    Clt(CltArgs),
    /// Henze-Penrose dissimilarity and the weak limits of T/N.
    Dissim(DissimArgs),
    /// Tail of the radius of stabilization.
    Tails(TailsArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Test(_) => "test",
            Command::Constants(_) => "constants",
            Command::Power(_) => "power",
            Command::Clt(_) => "clt",
            Command::Dissim(_) => "dissim",
            Command::Tails(_) => "tails",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FunctionalName {
    Knn,
    Mst,
}

impl FunctionalName {
    pub fn with_k(self, k: usize) -> Functional {
        match self {
            FunctionalName::Knn => Functional::Knn(k),
            FunctionalName::Mst => Functional::Mst,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    Asymptotic,
    Permutation,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct TestArgs {
    /// CSV with columns x1..xd,label.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "knn")]
    pub functional: FunctionalName,
    #[arg(long, default_value_t = 1, value_parser = positive_usize)]
    pub k: usize,
    /// Label-1 proportion of the Poisson means; defaults to the observed share.
    #[arg(long, value_parser = probability)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 0.05, value_parser = probability)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value = "asymptotic")]
    pub method: Method,
    #[arg(long, default_value_t = 999, value_parser = positive_usize)]
    pub permutations: usize,
    /// Constants cache written by `constants`; required for `asymptotic`.
    #[arg(long)]
    pub constants: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ConstantsArgs {
    #[arg(long, value_enum, default_value = "knn")]
    pub functional: FunctionalName,
    #[arg(long, default_value_t = 1, value_parser = positive_usize)]
    pub k: usize,
    #[arg(long, value_parser = positive_usize)]
    pub d: usize,
    #[arg(long, default_value_t = 200, value_parser = positive_usize)]
    pub reps: usize,
    /// Torus side; by default about 2000 points per replicate.
    #[arg(long, value_parser = positive_f64)]
    pub side: Option<f64>,
    /// Cache file to create or update.
    #[arg(long)]
    pub cache: PathBuf,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct PowerArgs {
    #[arg(long, value_parser = positive_usize)]
    pub d: usize,
    /// Rate exponent of the shift h N^-a.
    #[arg(long, default_value_t = 0.25, value_parser = positive_f64)]
    pub a: f64,
    /// `start:end:count` or a comma-separated list.
    #[arg(long = "h-grid", value_parser = grid)]
    pub h_grid: Grid,
    #[arg(long, value_parser = positive_f64)]
    pub n1: f64,
    #[arg(long, value_parser = positive_f64)]
    pub n2: f64,
    #[arg(long, default_value_t = 200, value_parser = positive_usize)]
    pub iters: usize,
    /// Comma-separated subset of knn<K>, fr_mst, hotelling.
    #[arg(long, default_value = "knn1,knn2,knn3,fr_mst,hotelling", value_parser = test_list)]
    pub tests: TestList,
    #[arg(long, default_value_t = 0.05, value_parser = probability)]
    pub alpha: f64,
    #[arg(long, default_value = "poissonized", value_parser = draw_mode)]
    pub mode: DrawMode,
    #[arg(long, default_value_t = crossedge::experiments::DEFAULT_TRUNCATION_RADIUS, value_parser = positive_f64)]
    pub radius: f64,
    #[arg(long, default_value_t = 199, value_parser = positive_usize)]
    pub permutations: usize,
    /// Constants cache; needed when any knn test is requested.
    #[arg(long)]
    pub constants: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct CltArgs {
    #[arg(long, default_value_t = 1, value_parser = positive_usize)]
    pub k: usize,
    /// Density of sample 1, e.g. `gaussian:mu=0,0`.
    #[arg(long, value_parser = density)]
    pub f: Density,
    #[arg(long, value_parser = density)]
    pub g: Density,
    #[arg(long, default_value_t = 0.5, value_parser = probability)]
    pub p: f64,
    #[arg(long, value_parser = positive_f64)]
    pub n: f64,
    #[arg(long, default_value_t = 1000, value_parser = positive_usize)]
    pub reps: usize,
    #[arg(long = "mc-n", default_value_t = 200_000, value_parser = positive_usize)]
    pub mc_n: usize,
    #[arg(long)]
    pub constants: PathBuf,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct DissimArgs {
    #[arg(long, value_parser = density)]
    pub f: Density,
    #[arg(long, value_parser = density)]
    pub g: Density,
    #[arg(long, default_value_t = 0.5, value_parser = probability)]
    pub p: f64,
    #[arg(long = "mc-n", default_value_t = 1_000_000, value_parser = positive_usize)]
    pub mc_n: usize,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct TailsArgs {
    #[arg(long, default_value_t = 1, value_parser = positive_usize)]
    pub k: usize,
    #[arg(long, value_parser = positive_usize)]
    pub d: usize,
    #[arg(long = "s-grid", default_value = "0.25:2:8", value_parser = grid)]
    pub s_grid: Grid,
    #[arg(long, default_value_t = 5000, value_parser = positive_usize)]
    pub reps: usize,
}

/// A parsed grid that remembers its spelling for the manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub spec: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestList {
    pub spec: String,
    pub tests: Vec<TestSpec>,
}

fn positive_usize(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(format!("expected a positive integer, got {s:?}")),
    }
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive number, got {s:?}")),
    }
}

fn probability(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v < 1.0 => Ok(v),
        _ => Err(format!("expected a number in (0, 1), got {s:?}")),
    }
}

fn grid(s: &str) -> Result<Grid, String> {
    let bad = || format!("expected start:end:count or a comma list, got {s:?}");
    let values = if let [a, b, n] = s.split(':').collect::<Vec<_>>()[..] {
        let (a, b): (f64, f64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        match n {
            0 => return Err(bad()),
            1 => vec![a],
            _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
        }
    } else {
        s.split(',').map(|v| v.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_, _>>()?
    };
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(format!("grid values must be finite and nonnegative, got {s:?}"));
    }
    Ok(Grid { spec: s.to_string(), values })
}

fn test_list(s: &str) -> Result<TestList, String> {
    let tests = s
        .split(',')
        .map(|t| t.parse::<TestSpec>().map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    if tests.is_empty() {
        return Err("no tests given".into());
    }
    Ok(TestList { spec: s.to_string(), tests })
}

fn draw_mode(s: &str) -> Result<DrawMode, String> {
    s.parse().map_err(|e: crossedge::Error| e.to_string())
}

fn density(s: &str) -> Result<Density, String> {
    s.parse().map_err(|e: crossedge::Error| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(grid("0:3:4").unwrap().values, vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(grid("0.5, 1").unwrap().values, vec![0.5, 1.0]);
        assert!(grid("0:3").is_err());
        assert!(grid("0:3:0").is_err());
        assert!(grid("-1,2").is_err());
    }

    #[test]
    fn cli_is_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
