use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ebm_core::renorm::RenormOp;
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(
    name = "ebm",
    version,
    about = "Expanding Baker Maps: regions, attractors, renormalization and checks",
    after_help = "Run a saved job with `ebm --config job.json`. EBM_THREADS caps the worker count."
)]
pub struct Cli {
    /// Write output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    /// Output format; single-point commands emit JSON only.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Region membership and fiber bounds at one parameter point.
    Region(RegionArgs),
    /// Attractor census of one map.
    Attractors(AttractorArgs),
    /// Renormalization tree of a parameter point.
    Renorm(RenormArgs),
    /// Search the γ₀ curve for parameters with at least 2ⁿ predicted attractors.
    Cascade(CascadeArgs),
    /// Numerical checks with residuals.
    Verify(VerifyArgs),
    /// Parameter sweep, one CSV row per point.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub b: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MapKind {
    Psi,
    Gamma,
    Lambda,
    Tent,
}

#[derive(Clone, Debug, Args)]
pub struct CensusArgs {
    #[arg(long, default_value_t = 64)]
    pub seeds: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub len: usize,
    #[arg(long, default_value_t = 10_000)]
    pub burn: usize,
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct AttractorArgs {
    #[arg(long, value_enum, default_value_t = MapKind::Psi)]
    pub map: MapKind,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    /// Tent slope for `gamma` and `tent`.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Parameter of `lambda`.
    #[arg(long)]
    pub t: Option<f64>,
    #[command(flatten)]
    pub census: CensusArgs,
    /// Also write every occupied cell as CSV.
    #[arg(long, value_name = "PATH")]
    pub cells: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OpArg {
    Delta,
    Pi,
}

impl From<OpArg> for RenormOp {
    fn from(o: OpArg) -> Self {
        match o {
            OpArg::Delta => RenormOp::Delta,
            OpArg::Pi => RenormOp::Pi,
        }
    }
}

#[derive(Debug, Args)]
pub struct RenormArgs {
    #[arg(long)]
    pub a: f64,
    #[arg(long)]
    pub b: f64,
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    /// Keep only the branch that repeats this operator.
    #[arg(long, value_enum)]
    pub op: Option<OpArg>,
}

#[derive(Debug, Args)]
pub struct CascadeArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 20_000)]
    pub tsteps: usize,
    #[arg(long, value_enum, default_value_t = OpArg::Delta)]
    pub op: OpArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Conjugacy,
    Invariance,
    Spectral,
    Continuity,
    Lyapunov,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepJob {
    Census,
    Lyapunov,
    Region,
    RenormDepth,
}

/// `lo,hi,steps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Range {
    pub fn points(&self) -> Vec<f64> {
        let d = (self.hi - self.lo) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.hi
                } else {
                    self.lo + d * i as f64
                }
            })
            .collect()
    }
}

pub fn parse_range(s: &str) -> Result<Range, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [lo, hi, steps] = parts[..] else {
        return Err(format!("expected lo,hi,steps, got `{s}`"));
    };
    let lo: f64 = lo.parse().map_err(|_| format!("bad lower end `{lo}`"))?;
    let hi: f64 = hi.parse().map_err(|_| format!("bad upper end `{hi}`"))?;
    let steps: usize = steps
        .parse()
        .map_err(|_| format!("bad step count `{steps}`"))?;
    if steps < 2 {
        return Err("a range needs at least 2 steps".into());
    }
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(format!("empty range {lo}..{hi}"));
    }
    Ok(Range { lo, hi, steps })
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub job: SweepJob,
    #[arg(long, value_parser = parse_range, required_unless_present = "t_range")]
    pub a_range: Option<Range>,
    #[arg(long, value_parser = parse_range, required_unless_present = "t_range")]
    pub b_range: Option<Range>,
    /// Follow γ₀ instead of a rectangular grid.
    #[arg(long, value_parser = parse_range, conflicts_with_all = ["a_range", "b_range"])]
    pub t_range: Option<Range>,
    #[command(flatten)]
    pub census: CensusArgs,
    /// Orbit length for the `lyapunov` job.
    #[arg(long, default_value_t = 100_000)]
    pub lyap_len: usize,
    #[arg(long, value_enum, default_value_t = OpArg::Delta)]
    pub op: OpArg,
    #[arg(long, default_value_t = 64)]
    pub max_depth: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        let r = parse_range("1.0, 2.0, 3").unwrap();
        assert_eq!(r.points(), vec![1.0, 1.5, 2.0]);
        assert!(parse_range("1,2").is_err());
        assert!(parse_range("1,2,1").is_err());
        assert!(parse_range("2,1,5").is_err());
    }

    #[test]
    fn cli_shape() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
