//! The `ppalign` command line: `sweep`, `match` and `selftest`.
//!
//! Results go to files or standard output; progress and diagnostics go to
//! standard error.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::algorithms::{build_operator, AlignConfig, Algorithm, DEFAULT_PPA_MAX_ITERS};
use crate::error::{Error, Result};
use crate::graph::parse_edge_list;
use crate::harness::{run_grid, summarize, write_csv_file, write_heatmaps, GridSpec, DEFAULT_TRIALS};
use crate::operator::DEFAULT_EPSILON;
use crate::selftest::{run_selftest, SelftestOptions, DEFAULT_MAX_N};
use crate::spectral::{DEFAULT_MAX_ITERS, DEFAULT_TOL};

#[derive(Debug, Parser)]
#[command(name = "ppalign", version, about = "Graph alignment with EigenAlign and Projected Power Alignment")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run planted Erdős–Rényi trials over an (n, lambda) grid and write CSV and heatmaps.
    Sweep(SweepArgs),
    /// Align two graphs given as edge-list files.
    Match(MatchArgs),
    /// Run the built-in oracle suites.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    /// Score offset added to every pair score.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Cap on projection steps for PPA.
    #[arg(long, default_value_t = DEFAULT_PPA_MAX_ITERS)]
    pub ppa_max_iters: usize,
    /// Stopping tolerance for power iteration.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub eigen_tol: f64,
    /// Cap on power iterations.
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    pub eigen_max_iters: usize,
    /// Report PPA's last iterate instead of its best-scoring one.
    #[arg(long)]
    pub return_last: bool,
}

impl AlignArgs {
    pub fn config(&self) -> AlignConfig {
        AlignConfig {
            epsilon: self.epsilon,
            eigen_tol: self.eigen_tol,
            eigen_max_iters: self.eigen_max_iters,
            ppa_max_iters: self.ppa_max_iters,
            return_best: !self.return_last,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AlgoChoice {
    Eigenalign,
    Ppa,
    Both,
}

impl AlgoChoice {
    fn algorithms(self) -> Vec<Algorithm> {
        match self {
            AlgoChoice::Eigenalign => vec![Algorithm::EigenAlign],
            AlgoChoice::Ppa => vec![Algorithm::Ppa],
            AlgoChoice::Both => Algorithm::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SingleAlgo {
    Eigenalign,
    Ppa,
}

impl From<SingleAlgo> for Algorithm {
    fn from(a: SingleAlgo) -> Self {
        match a {
            SingleAlgo::Eigenalign => Algorithm::EigenAlign,
            SingleAlgo::Ppa => Algorithm::Ppa,
        }
    }
}

fn parse_probability(s: &str) -> std::result::Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|e| format!("{s:?} is not a number: {e}"))?;
    if !(0.0..=1.0).contains(&x) {
        return Err(format!("{x} is outside [0, 1]"));
    }
    Ok(x)
}

fn parse_size(s: &str) -> std::result::Result<usize, String> {
    let n: usize = s.trim().parse().map_err(|e| format!("{s:?} is not a vertex count: {e}"))?;
    if n == 0 {
        return Err("vertex count must be positive".into());
    }
    Ok(n)
}

fn parse_workers(s: &str) -> std::result::Result<usize, String> {
    let w: usize = s.parse().map_err(|e| format!("{s:?} is not a count: {e}"))?;
    if w == 0 {
        return Err("workers must be at least 1".into());
    }
    Ok(w)
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated vertex counts.
    #[arg(long = "n", value_delimiter = ',', value_parser = parse_size, default_value = "10,20,30,40,50")]
    pub n: Vec<usize>,
    /// Edge probability of the base graph.
    #[arg(long, value_parser = parse_probability, default_value_t = 0.2)]
    pub p: f64,
    /// Comma-separated noise levels in [0, 1].
    #[arg(
        long,
        value_delimiter = ',',
        value_parser = parse_probability,
        default_value = "0,0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5"
    )]
    pub lambda: Vec<f64>,
    /// Trials per (n, lambda) cell.
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub trials: usize,
    /// Base seed for every random stream.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = AlgoChoice::Both)]
    pub algo: AlgoChoice,
    #[command(flatten)]
    pub align: AlignArgs,
    /// Output CSV path.
    #[arg(long)]
    pub csv: PathBuf,
    /// Heatmap path; one PGM per algorithm, named `<stem>_<algorithm>.<ext>`.
    #[arg(long)]
    pub heatmap: Option<PathBuf>,
    /// Logarithmic gray scale for heatmaps.
    #[arg(long)]
    pub log_scale: bool,
    /// Worker threads (defaults to available parallelism).
    #[arg(long, value_parser = parse_workers, default_value_t = default_workers())]
    pub workers: usize,
    /// Record wall time per trial. Off by default so output is byte-reproducible.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    /// Edge-list file of the first graph.
    #[arg(long)]
    pub g1: PathBuf,
    /// Edge-list file of the second graph.
    #[arg(long)]
    pub g2: PathBuf,
    #[arg(long, value_enum, default_value_t = SingleAlgo::Ppa)]
    pub algo: SingleAlgo,
    #[command(flatten)]
    pub align: AlignArgs,
    /// Write the result here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Largest graph size for the enumeration-based suites.
    #[arg(long, default_value_t = DEFAULT_MAX_N)]
    pub max_n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, hide = true)]
    pub inject_sign_fault: bool,
}

fn read_graph(path: &PathBuf) -> Result<crate::graph::Graph> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(&text).map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let grid = GridSpec {
        n_list: args.n.clone(),
        lambda_list: args.lambda.clone(),
        p: args.p,
        trials: args.trials,
        algorithms: args.algo.algorithms(),
        base_seed: args.seed,
        cfg: args.align.config(),
        timing: args.timing,
    };
    grid.validate()?;
    eprintln!(
        "sweep: {} sizes x {} noise levels x {} trials, {} algorithm(s), {} worker(s)",
        grid.n_list.len(),
        grid.lambda_list.len(),
        grid.trials,
        grid.algorithms.len(),
        args.workers
    );
    let records = run_grid(&grid, args.workers)?;
    for r in records.iter().filter(|r| r.failed()) {
        eprintln!(
            "failed: n={} lambda={} {} trial {}: {}",
            r.n,
            r.lambda,
            r.algorithm,
            r.trial,
            r.failure.as_deref().unwrap_or("")
        );
    }
    write_csv_file(&args.csv, &records)?;
    eprintln!("wrote {} records to {}", records.len(), args.csv.display());

    let summary = summarize(&records)?;
    for c in &summary {
        eprintln!(
            "  n={:<4} lambda={:<6} {:<10} recovery {:.4}  exact {:.2}  failures {}",
            c.n, c.lambda, c.algorithm, c.mean_recovery, c.exact_rate, c.failures
        );
    }
    if let Some(path) = &args.heatmap {
        for written in write_heatmaps(path, &summary, args.log_scale)? {
            eprintln!("wrote {}", written.display());
        }
    }
    Ok(())
}

pub fn cmd_match(args: &MatchArgs) -> Result<()> {
    let g1 = read_graph(&args.g1)?;
    let g2 = read_graph(&args.g2)?;
    let cfg = args.align.config();
    let op = build_operator(&g1, &g2, &cfg)?;
    let res = Algorithm::from(args.algo).run(&op, &cfg)?;

    let mut text = String::new();
    for (i, j) in res.permutation.as_slice().iter().enumerate() {
        text.push_str(&format!("{i} -> {j}\n"));
    }
    text.push_str(&format!("matched_edges: {}\n", res.matched_edges));
    text.push_str(&format!("objective: {}\n", res.objective));
    text.push_str(&format!("iterations: {}\n", res.iterations));
    text.push_str(&format!("converged: {}\n", res.converged));
    match &args.out {
        Some(path) => fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => io::stdout().write_all(text.as_bytes()).map_err(Error::from),
    }
}

/// Returns whether every suite passed.
pub fn cmd_selftest(args: &SelftestArgs) -> Result<bool> {
    let opts = SelftestOptions {
        max_n: args.max_n,
        seed: args.seed,
        inject_sign_fault: args.inject_sign_fault,
    };
    let reports = run_selftest(&opts)?;
    for r in &reports {
        println!("{r}");
    }
    Ok(reports.iter().all(|r| r.passed()))
}

pub fn run(cli: Cli) -> ExitCode {
    let outcome = match &cli.command {
        Command::Sweep(a) => cmd_sweep(a).map(|()| true),
        Command::Match(a) => cmd_match(a).map(|()| true),
        Command::Selftest(a) => cmd_selftest(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
