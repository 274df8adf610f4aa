//! Planted-instance trials, grid sweeps, per-cell summaries and their
//! serialization (CSV records, PGM heatmaps).
//!
//! A trial draws `G1 ~ ER(n, p)`, flips each vertex pair of `G1` with
//! probability `lambda`, relabels the noisy copy by a uniform permutation
//! `P` to obtain `G2`, and asks an algorithm to recover `P` from `(G1, G2)`.
//!
//! Every random stream is keyed by `(base_seed, n, p, lambda, trial, purpose)`
//! and never by the algorithm, so all algorithms of a grid face identical
//! instances and the output does not depend on scheduling.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::algorithms::{build_operator, AlignConfig, Algorithm};
use crate::error::{Error, Result};
use crate::graph::{apply_noise, generate_er, permute, random_permutation, Graph, Permutation, RngSeed};
use crate::operator::{make_params, AlignmentOperator};

pub const CSV_HEADER: &str =
    "n,p,lambda,algorithm,trial,recovery_fraction,exact,matched_edges,objective,objective_ratio,iterations,wall_seconds";

pub const DEFAULT_TRIALS: usize = 20;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `x` in millionths, rounded; used to key probabilities.
fn micros(x: f64) -> i64 {
    (x * 1e6).round() as i64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamPurpose {
    Graph = 1,
    Noise = 2,
    Permutation = 3,
}

/// Stream id for one random draw of a trial: SplitMix64 folded over
/// `base_seed, n, round(p·10⁶), round(lambda·10⁶), trial, purpose`.
pub fn stream_id(base_seed: u64, n: usize, p: f64, lambda: f64, trial: usize, purpose: StreamPurpose) -> u64 {
    [
        n as u64,
        micros(p) as u64,
        micros(lambda) as u64,
        trial as u64,
        purpose as u64,
    ]
    .into_iter()
    .fold(splitmix64(base_seed), |h, word| splitmix64(h ^ word))
}

/// A planted alignment instance. `planted(i)` is the vertex of `g2` that
/// vertex `i` of `g1` was relabeled to.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub g1: Graph,
    pub g2: Graph,
    pub planted: Permutation,
}

pub fn build_instance(n: usize, p: f64, lambda: f64, trial: usize, base_seed: u64) -> Result<Instance> {
    let seed = |purpose| RngSeed::new(base_seed, stream_id(base_seed, n, p, lambda, trial, purpose));
    let g1 = generate_er(n, p, seed(StreamPurpose::Graph))?;
    let noisy = apply_noise(&g1, lambda, seed(StreamPurpose::Noise))?;
    let planted = random_permutation(n, seed(StreamPurpose::Permutation))?;
    let g2 = permute(&noisy, &planted)?;
    Ok(Instance { g1, g2, planted })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialSpec {
    pub n: usize,
    pub p: f64,
    pub lambda: f64,
    pub trial_index: usize,
    pub base_seed: u64,
    pub algorithm: Algorithm,
    pub cfg: AlignConfig,
    /// Record wall time; off by default so output is reproducible.
    pub timing: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub n: usize,
    pub p: f64,
    pub lambda: f64,
    pub algorithm: Algorithm,
    pub trial: usize,
    pub base_seed: u64,
    pub g1_edges: usize,
    pub g2_edges: usize,
    /// `yᵀAy` of the planted permutation.
    pub planted_objective: f64,
    pub recovery_fraction: f64,
    pub exact: bool,
    pub matched_edges: usize,
    pub objective: f64,
    pub objective_ratio: f64,
    pub iterations: usize,
    pub converged: bool,
    pub wall_seconds: f64,
    /// Set when the algorithm could not run; metric fields are then zero.
    pub failure: Option<String>,
}

impl TrialRecord {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }

    /// The subset of fields that goes into the CSV.
    pub fn csv_row(&self) -> CsvRow {
        let ok = !self.failed();
        CsvRow {
            n: self.n,
            p: self.p,
            lambda: self.lambda,
            algorithm: self.algorithm,
            trial: self.trial,
            recovery_fraction: ok.then_some(self.recovery_fraction),
            exact: ok.then_some(self.exact),
            matched_edges: ok.then_some(self.matched_edges),
            objective: ok.then_some(self.objective),
            objective_ratio: ok.then_some(self.objective_ratio),
            iterations: ok.then_some(self.iterations),
            wall_seconds: self.wall_seconds,
        }
    }
}

fn blank_record(inst: &Instance, spec: &TrialSpec) -> TrialRecord {
    TrialRecord {
        n: spec.n,
        p: spec.p,
        lambda: spec.lambda,
        algorithm: spec.algorithm,
        trial: spec.trial_index,
        base_seed: spec.base_seed,
        g1_edges: inst.g1.edge_count(),
        g2_edges: inst.g2.edge_count(),
        planted_objective: 0.0,
        recovery_fraction: 0.0,
        exact: false,
        matched_edges: 0,
        objective: 0.0,
        objective_ratio: 0.0,
        iterations: 0,
        converged: false,
        wall_seconds: 0.0,
        failure: None,
    }
}

fn failed_record(inst: &Instance, spec: &TrialSpec, err: &Error) -> TrialRecord {
    TrialRecord {
        failure: Some(err.to_string()),
        ..blank_record(inst, spec)
    }
}

fn run_on_instance(inst: &Instance, op: &AlignmentOperator, spec: &TrialSpec) -> Result<TrialRecord> {
    let mut record = blank_record(inst, spec);
    record.planted_objective = op.quadratic_form(&inst.planted)?;
    if spec.n == 1 {
        // Only one bijection exists.
        record.recovery_fraction = 1.0;
        record.exact = true;
        record.objective = record.planted_objective;
        record.objective_ratio = 1.0;
        record.converged = true;
        return Ok(record);
    }
    let start = Instant::now();
    let result = spec.algorithm.run(op, &spec.cfg)?;
    if spec.timing {
        record.wall_seconds = start.elapsed().as_secs_f64();
    }
    let agree = result.permutation.agreement(&inst.planted);
    record.recovery_fraction = agree as f64 / spec.n as f64;
    record.exact = agree == spec.n;
    record.matched_edges = result.matched_edges;
    record.objective = result.objective;
    record.objective_ratio = result.objective / record.planted_objective;
    record.iterations = result.iterations;
    record.converged = result.converged;
    Ok(record)
}

/// Operator for an instance. A single vertex admits only one bijection and
/// has no pairs to balance, so it gets the unit-balance scores.
fn instance_operator(inst: &Instance, cfg: &AlignConfig) -> Result<AlignmentOperator> {
    if inst.g1.n() == 1 {
        return AlignmentOperator::new(inst.g1.clone(), inst.g2.clone(), make_params(1.0, cfg.epsilon)?);
    }
    build_operator(&inst.g1, &inst.g2, cfg)
}

/// Runs one trial. Errors building the instance (invalid `n`, `p` or
/// `lambda`) are returned; errors from the algorithm itself, such as a
/// degenerate balance, are recorded in [`TrialRecord::failure`].
pub fn run_trial(spec: &TrialSpec) -> Result<TrialRecord> {
    spec.cfg.validate()?;
    let inst = build_instance(spec.n, spec.p, spec.lambda, spec.trial_index, spec.base_seed)?;
    Ok(run_instance_trials(&inst, spec, &[spec.algorithm]).remove(0))
}

fn run_instance_trials(inst: &Instance, base: &TrialSpec, algorithms: &[Algorithm]) -> Vec<TrialRecord> {
    let op = instance_operator(inst, &base.cfg);
    algorithms
        .iter()
        .map(|&algorithm| {
            let spec = TrialSpec { algorithm, ..*base };
            match &op {
                Ok(op) => run_on_instance(inst, op, &spec).unwrap_or_else(|e| failed_record(inst, &spec, &e)),
                Err(e) => failed_record(inst, &spec, e),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub n_list: Vec<usize>,
    pub lambda_list: Vec<f64>,
    pub p: f64,
    pub trials: usize,
    pub algorithms: Vec<Algorithm>,
    pub base_seed: u64,
    pub cfg: AlignConfig,
    pub timing: bool,
}

impl GridSpec {
    pub fn new(n_list: Vec<usize>, lambda_list: Vec<f64>, p: f64) -> Self {
        Self {
            n_list,
            lambda_list,
            p,
            trials: DEFAULT_TRIALS,
            algorithms: Algorithm::ALL.to_vec(),
            base_seed: 0,
            cfg: AlignConfig::default(),
            timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() || self.lambda_list.is_empty() || self.algorithms.is_empty() {
            return Err(Error::InvalidParameter("grid lists must be non-empty".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.n_list.contains(&0) {
            return Err(Error::EmptyGraph);
        }
        for (name, value) in std::iter::once(("p", self.p)).chain(self.lambda_list.iter().map(|&l| ("lambda", l))) {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::Probability { name, value });
            }
        }
        self.cfg.validate()
    }
}

/// All records of a sweep: one per `(n, lambda, trial, algorithm)`, sorted
/// by `(n, lambda, algorithm, trial)`. Each `(n, lambda, trial)` instance is
/// built once and shared by every algorithm. With `workers > 1` instances are
/// processed on a dedicated thread pool; the result is identical.
pub fn run_grid(grid: &GridSpec, workers: usize) -> Result<Vec<TrialRecord>> {
    grid.validate()?;
    let mut algorithms = grid.algorithms.clone();
    algorithms.sort();
    algorithms.dedup();

    let mut tasks = Vec::new();
    for &n in &grid.n_list {
        for &lambda in &grid.lambda_list {
            for trial in 0..grid.trials {
                tasks.push((n, lambda, trial));
            }
        }
    }
    let run = |&(n, lambda, trial): &(usize, f64, usize)| -> Result<Vec<TrialRecord>> {
        let inst = build_instance(n, grid.p, lambda, trial, grid.base_seed)?;
        let base = TrialSpec {
            n,
            p: grid.p,
            lambda,
            trial_index: trial,
            base_seed: grid.base_seed,
            algorithm: algorithms[0],
            cfg: grid.cfg,
            timing: grid.timing,
        };
        Ok(run_instance_trials(&inst, &base, &algorithms))
    };

    let nested: Vec<Vec<TrialRecord>> = if workers <= 1 {
        tasks.iter().map(run).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
        pool.install(|| tasks.par_iter().map(run).collect::<Result<_>>())?
    };
    let mut records: Vec<TrialRecord> = nested.into_iter().flatten().collect();
    sort_records(&mut records);
    Ok(records)
}

fn sort_records(records: &mut [TrialRecord]) {
    records.sort_by(|a, b| {
        a.n.cmp(&b.n)
            .then(a.lambda.total_cmp(&b.lambda))
            .then(a.algorithm.cmp(&b.algorithm))
            .then(a.trial.cmp(&b.trial))
    });
}

/// Means over one `(n, lambda, algorithm)` cell. Failed trials are counted
/// in `failures` and excluded from the means.
#[derive(Clone, Debug, PartialEq)]
pub struct CellSummary {
    pub n: usize,
    pub p: f64,
    pub lambda: f64,
    pub algorithm: Algorithm,
    pub trials: usize,
    pub failures: usize,
    pub mean_recovery: f64,
    pub mean_objective_ratio: f64,
    pub exact_rate: f64,
    pub mean_iterations: f64,
}

pub fn summarize(records: &[TrialRecord]) -> Result<Vec<CellSummary>> {
    if records.is_empty() {
        return Err(Error::EmptyInput("no records to summarize"));
    }
    let mut cells: BTreeMap<(usize, i64, Algorithm), Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        cells.entry((r.n, micros(r.lambda), r.algorithm)).or_default().push(r);
    }
    Ok(cells
        .into_values()
        .map(|rs| {
            let done: Vec<&&TrialRecord> = rs.iter().filter(|r| !r.failed()).collect();
            let count = done.len() as f64;
            let mean = |f: &dyn Fn(&TrialRecord) -> f64| {
                if done.is_empty() {
                    f64::NAN
                } else {
                    done.iter().map(|r| f(r)).sum::<f64>() / count
                }
            };
            CellSummary {
                n: rs[0].n,
                p: rs[0].p,
                lambda: rs[0].lambda,
                algorithm: rs[0].algorithm,
                trials: rs.len(),
                failures: rs.len() - done.len(),
                mean_recovery: mean(&|r| r.recovery_fraction),
                mean_objective_ratio: mean(&|r| r.objective_ratio),
                exact_rate: mean(&|r| r.exact as u8 as f64),
                mean_iterations: mean(&|r| r.iterations as f64),
            }
        })
        .collect())
}

/// `%g`-style formatting with six significant digits.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One CSV line. Metric columns are empty for failed trials.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub n: usize,
    pub p: f64,
    pub lambda: f64,
    pub algorithm: Algorithm,
    pub trial: usize,
    pub recovery_fraction: Option<f64>,
    pub exact: Option<bool>,
    pub matched_edges: Option<usize>,
    pub objective: Option<f64>,
    pub objective_ratio: Option<f64>,
    pub iterations: Option<usize>,
    pub wall_seconds: f64,
}

impl CsvRow {
    fn fields(&self) -> [String; 12] {
        let real = |x: Option<f64>| x.map(format_sig6).unwrap_or_default();
        let int = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
        [
            self.n.to_string(),
            format_sig6(self.p),
            format_sig6(self.lambda),
            self.algorithm.to_string(),
            self.trial.to_string(),
            real(self.recovery_fraction),
            self.exact.map(|b| b.to_string()).unwrap_or_default(),
            int(self.matched_edges),
            real(self.objective),
            real(self.objective_ratio),
            int(self.iterations),
            format_sig6(self.wall_seconds),
        ]
    }
}

/// Writes records sorted by `(n, lambda, algorithm, trial)`.
pub fn write_csv<W: Write>(records: &[TrialRecord], sink: W) -> Result<()> {
    if records.is_empty() {
        return Err(Error::EmptyInput("no records to write"));
    }
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    let csv_err = |e: csv::Error| Error::Csv(e.to_string());
    w.write_record(CSV_HEADER.split(',')).map_err(csv_err)?;
    for r in &sorted {
        w.write_record(r.csv_row().fields()).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}

pub fn read_csv<R: Read>(source: R) -> Result<Vec<CsvRow>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
    let header = reader.headers().map_err(|e| Error::Csv(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(Error::Csv(format!("unexpected header {:?}", header)));
    }
    let mut rows = Vec::new();
    for (idx, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Csv(e.to_string()))?;
        let line = idx + 2;
        let bad = |col: &str, value: &str| Error::Csv(format!("line {line}: bad {col} value {value:?}"));
        let get = |k: usize| rec.get(k).unwrap_or("");
        let req_f64 = |k: usize, col: &str| get(k).parse::<f64>().map_err(|_| bad(col, get(k)));
        let req_usize = |k: usize, col: &str| get(k).parse::<usize>().map_err(|_| bad(col, get(k)));
        let opt = |k: usize| (!get(k).is_empty()).then(|| get(k));
        rows.push(CsvRow {
            n: req_usize(0, "n")?,
            p: req_f64(1, "p")?,
            lambda: req_f64(2, "lambda")?,
            algorithm: get(3).parse().map_err(|_| bad("algorithm", get(3)))?,
            trial: req_usize(4, "trial")?,
            recovery_fraction: opt(5).map(|_| req_f64(5, "recovery_fraction")).transpose()?,
            exact: opt(6).map(|v| v.parse::<bool>().map_err(|_| bad("exact", v))).transpose()?,
            matched_edges: opt(7).map(|_| req_usize(7, "matched_edges")).transpose()?,
            objective: opt(8).map(|_| req_f64(8, "objective")).transpose()?,
            objective_ratio: opt(9).map(|_| req_f64(9, "objective_ratio")).transpose()?,
            iterations: opt(10).map(|_| req_usize(10, "iterations")).transpose()?,
            wall_seconds: req_f64(11, "wall_seconds")?,
        });
    }
    Ok(rows)
}

pub fn write_csv_file(path: &Path, records: &[TrialRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut buf = BufWriter::new(file);
    write_csv(records, &mut buf).map_err(|e| match e {
        Error::Csv(msg) => Error::io(path, io::Error::other(msg)),
        other => other,
    })?;
    buf.flush().map_err(|e| Error::io(path, e))
}

/// Curvature of the logarithmic gray mapping `ln(1 + k·r) / ln(1 + k)`.
pub const LOG_SCALE_K: f64 = 99.0;

/// Gray level in `0..=255` for a mean recovery in `[0, 1]`. Undefined
/// (all-failed) cells map to 0.
pub fn gray_level(recovery: f64, log_scale: bool) -> u8 {
    if !recovery.is_finite() {
        return 0;
    }
    let r = recovery.clamp(0.0, 1.0);
    let mapped = if log_scale {
        (LOG_SCALE_K * r).ln_1p() / LOG_SCALE_K.ln_1p()
    } else {
        r
    };
    (255.0 * mapped).round() as u8
}

struct HeatmapGrid<'a> {
    ns: Vec<usize>,
    lambdas: Vec<f64>,
    cells: BTreeMap<(usize, i64), &'a CellSummary>,
}

fn heatmap_grid(summary: &[CellSummary], algorithm: Algorithm) -> Result<HeatmapGrid<'_>> {
    let cells: BTreeMap<(usize, i64), &CellSummary> = summary
        .iter()
        .filter(|c| c.algorithm == algorithm)
        .map(|c| ((c.n, micros(c.lambda)), c))
        .collect();
    if cells.is_empty() {
        return Err(Error::EmptyInput("no summary cells for algorithm"));
    }
    let mut ns: Vec<usize> = cells.keys().map(|k| k.0).collect();
    ns.sort_unstable();
    ns.dedup();
    let mut lambdas: Vec<(i64, f64)> = cells.values().map(|c| (micros(c.lambda), c.lambda)).collect();
    lambdas.sort_by_key(|l| l.0);
    lambdas.dedup_by_key(|l| l.0);
    Ok(HeatmapGrid {
        ns,
        lambdas: lambdas.into_iter().map(|l| l.1).collect(),
        cells,
    })
}

/// Plain PGM (`P2`): one row per lambda (ascending), one column per `n`
/// (ascending), gray `round(255·mean recovery)`.
pub fn render_heatmap<W: Write>(summary: &[CellSummary], algorithm: Algorithm, log_scale: bool, mut sink: W) -> Result<()> {
    let grid = heatmap_grid(summary, algorithm)?;
    let mut out = format!("P2\n{} {}\n255\n", grid.ns.len(), grid.lambdas.len());
    for &lambda in &grid.lambdas {
        let row: Vec<String> = grid
            .ns
            .iter()
            .map(|&n| {
                let r = grid.cells.get(&(n, micros(lambda))).map_or(f64::NAN, |c| c.mean_recovery);
                gray_level(r, log_scale).to_string()
            })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    sink.write_all(out.as_bytes())?;
    Ok(())
}

/// Text legend describing the axes, mapping and cell values of a heatmap.
pub fn render_legend(summary: &[CellSummary], algorithm: Algorithm, log_scale: bool) -> Result<String> {
    let grid = heatmap_grid(summary, algorithm)?;
    let p = grid.cells.values().next().map_or(f64::NAN, |c| c.p);
    let mut s = String::new();
    let _ = writeln!(s, "algorithm: {algorithm}");
    let _ = writeln!(s, "p: {}", format_sig6(p));
    let _ = writeln!(s, "rows (top to bottom): lambda = {}", join(grid.lambdas.iter().map(|&l| format_sig6(l))));
    let _ = writeln!(s, "columns (left to right): n = {}", join(grid.ns.iter().map(|n| n.to_string())));
    if log_scale {
        let _ = writeln!(
            s,
            "gray: round(255 * ln(1 + {k}*r) / ln(1 + {k})), r = mean recovery fraction",
            k = LOG_SCALE_K
        );
    } else {
        let _ = writeln!(s, "gray: round(255 * r), r = mean recovery fraction");
    }
    let _ = writeln!(s, "white (255) = full recovery, black (0) = none or no completed trials");
    let _ = writeln!(s);
    let _ = writeln!(s, "n,lambda,trials,failures,mean_recovery,exact_rate,mean_objective_ratio,mean_iterations,gray");
    for &lambda in &grid.lambdas {
        for &n in &grid.ns {
            if let Some(c) = grid.cells.get(&(n, micros(lambda))) {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{}",
                    c.n,
                    format_sig6(c.lambda),
                    c.trials,
                    c.failures,
                    format_sig6(c.mean_recovery),
                    format_sig6(c.exact_rate),
                    format_sig6(c.mean_objective_ratio),
                    format_sig6(c.mean_iterations),
                    gray_level(c.mean_recovery, log_scale)
                );
            }
        }
    }
    Ok(s)
}

fn join(items: impl Iterator<Item = String>) -> String {
    items.collect::<Vec<_>>().join(", ")
}

/// `dir/heat.pgm` + `ppa` → `dir/heat_ppa.pgm`.
pub fn suffixed_path(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{suffix}"),
    };
    path.with_file_name(name)
}

/// Writes one heatmap and legend per algorithm present in `summary`;
/// returns the heatmap paths written.
pub fn write_heatmaps(path: &Path, summary: &[CellSummary], log_scale: bool) -> Result<Vec<PathBuf>> {
    let mut algorithms: Vec<Algorithm> = summary.iter().map(|c| c.algorithm).collect();
    algorithms.sort();
    algorithms.dedup();
    let mut written = Vec::new();
    for algorithm in algorithms {
        let pgm = suffixed_path(path, algorithm.name());
        let mut buf = Vec::new();
        render_heatmap(summary, algorithm, log_scale, &mut buf)?;
        std::fs::write(&pgm, buf).map_err(|e| Error::io(&pgm, e))?;
        let legend = pgm.with_extension("legend.txt");
        std::fs::write(&legend, render_legend(summary, algorithm, log_scale)?).map_err(|e| Error::io(&legend, e))?;
        written.push(pgm);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, p: f64, lambda: f64, trial: usize, algorithm: Algorithm) -> TrialSpec {
        TrialSpec {
            n,
            p,
            lambda,
            trial_index: trial,
            base_seed: 42,
            algorithm,
            cfg: AlignConfig::default(),
            timing: false,
        }
    }

    fn record(recovery: f64, algorithm: Algorithm, trial: usize) -> TrialRecord {
        TrialRecord {
            n: 10,
            p: 0.2,
            lambda: 0.05,
            algorithm,
            trial,
            base_seed: 0,
            g1_edges: 9,
            g2_edges: 9,
            planted_objective: 100.0,
            recovery_fraction: recovery,
            exact: recovery == 1.0,
            matched_edges: 7,
            objective: 95.5,
            objective_ratio: 0.955,
            iterations: 3 + trial,
            converged: true,
            wall_seconds: 0.0,
            failure: None,
        }
    }

    #[test]
    fn stream_ids_depend_on_every_key() {
        let base = stream_id(1, 10, 0.2, 0.05, 3, StreamPurpose::Graph);
        assert_eq!(base, stream_id(1, 10, 0.2, 0.05, 3, StreamPurpose::Graph));
        let variants = [
            stream_id(2, 10, 0.2, 0.05, 3, StreamPurpose::Graph),
            stream_id(1, 11, 0.2, 0.05, 3, StreamPurpose::Graph),
            stream_id(1, 10, 0.3, 0.05, 3, StreamPurpose::Graph),
            stream_id(1, 10, 0.2, 0.06, 3, StreamPurpose::Graph),
            stream_id(1, 10, 0.2, 0.05, 4, StreamPurpose::Graph),
            stream_id(1, 10, 0.2, 0.05, 3, StreamPurpose::Noise),
            stream_id(1, 10, 0.2, 0.05, 3, StreamPurpose::Permutation),
        ];
        for v in variants {
            assert_ne!(v, base);
        }
    }

    #[test]
    fn noiseless_trials_recover_everything() {
        for alg in Algorithm::ALL {
            let r = run_trial(&spec(20, 0.2, 0.0, 0, alg)).unwrap();
            assert_eq!(r.recovery_fraction, 1.0, "{alg}");
            assert!(r.exact);
            assert!((r.objective_ratio - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_vertex_trial() {
        for alg in Algorithm::ALL {
            for (p, lambda) in [(0.0, 0.0), (0.7, 0.4), (1.0, 1.0)] {
                let r = run_trial(&spec(1, p, lambda, 0, alg)).unwrap();
                assert_eq!(r.recovery_fraction, 1.0);
                assert!(r.failure.is_none());
                assert_eq!(r.objective_ratio, 1.0);
            }
        }
    }

    #[test]
    fn trial_matches_independent_recomputation() {
        let s = spec(6, 0.5, 0.1, 4, Algorithm::Ppa);
        let r = run_trial(&s).unwrap();
        // Rebuild the instance from the raw seeds without `build_instance`.
        let seed = |purpose| RngSeed::new(42, stream_id(42, 6, 0.5, 0.1, 4, purpose));
        let g1 = generate_er(6, 0.5, seed(StreamPurpose::Graph)).unwrap();
        let g2_pre = apply_noise(&g1, 0.1, seed(StreamPurpose::Noise)).unwrap();
        let planted = random_permutation(6, seed(StreamPurpose::Permutation)).unwrap();
        let g2 = permute(&g2_pre, &planted).unwrap();
        let res = crate::algorithms::projected_power_align(&g1, &g2, &AlignConfig::default()).unwrap();
        let frac = (0..6).filter(|&i| res.permutation.apply(i) == planted.apply(i)).count() as f64 / 6.0;
        assert_eq!(r.recovery_fraction, frac);
        assert_eq!(r.matched_edges, res.matched_edges);
        assert_eq!(run_trial(&s).unwrap(), r);
    }

    #[test]
    fn degenerate_trials_are_recorded_as_failures() {
        // p = 0 and lambda = 0: both graphs empty.
        let r = run_trial(&spec(5, 0.0, 0.0, 0, Algorithm::EigenAlign)).unwrap();
        assert!(r.failed());
        assert!(r.failure.as_ref().unwrap().contains("degenerate"));
        assert_eq!(r.recovery_fraction, 0.0);
        let row = r.csv_row();
        assert_eq!(row.objective, None);
    }

    #[test]
    fn trial_rejects_invalid_probability() {
        assert!(run_trial(&spec(5, 0.2, 1.5, 0, Algorithm::Ppa)).is_err());
    }

    #[test]
    fn grid_shares_instances() {
        let mut grid = GridSpec::new(vec![12], vec![0.1], 0.3);
        grid.trials = 1;
        let records = run_grid(&grid, 1).unwrap();
        assert_eq!(records.len(), 2);
        let (a, b) = (&records[0], &records[1]);
        assert_eq!((a.algorithm, b.algorithm), (Algorithm::EigenAlign, Algorithm::Ppa));
        assert_eq!((a.g1_edges, a.g2_edges), (b.g1_edges, b.g2_edges));
        assert_eq!(a.planted_objective, b.planted_objective);
        let inst = build_instance(12, 0.3, 0.1, 0, 0).unwrap();
        assert_eq!(a.g1_edges, inst.g1.edge_count());
        assert_eq!(a.g2_edges, inst.g2.edge_count());
    }

    #[test]
    fn grid_cardinality_and_worker_independence() {
        let mut grid = GridSpec::new(vec![10, 20], vec![0.0, 0.05], 0.2);
        grid.base_seed = 3;
        let serial = run_grid(&grid, 1).unwrap();
        assert_eq!(serial.len(), 160);
        let parallel = run_grid(&grid, 8).unwrap();
        assert_eq!(serial, parallel);
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_csv(&serial, &mut a).unwrap();
        write_csv(&parallel, &mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn grid_validation() {
        let mut grid = GridSpec::new(vec![], vec![0.0], 0.2);
        assert!(run_grid(&grid, 1).is_err());
        grid.n_list = vec![5];
        grid.trials = 0;
        assert!(run_grid(&grid, 1).is_err());
        grid.trials = 1;
        grid.lambda_list = vec![-0.1];
        assert!(run_grid(&grid, 1).is_err());
    }

    #[test]
    fn summary_means() {
        let single = summarize(&[record(0.4, Algorithm::Ppa, 0)]).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].mean_recovery, 0.4);
        assert_eq!(single[0].mean_objective_ratio, 0.955);
        assert_eq!(single[0].mean_iterations, 3.0);

        let pair = summarize(&[record(0.0, Algorithm::Ppa, 0), record(1.0, Algorithm::Ppa, 1)]).unwrap();
        assert_eq!(pair[0].mean_recovery, 0.5);
        assert_eq!(pair[0].exact_rate, 0.5);
        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn summary_matches_reverse_order_recomputation() {
        let records: Vec<TrialRecord> = (0..20)
            .map(|t| record(((t * 7) % 11) as f64 / 10.0, Algorithm::EigenAlign, t))
            .collect();
        let cell = &summarize(&records).unwrap()[0];
        let mut total = 0.0;
        for r in records.iter().rev() {
            total += r.recovery_fraction;
        }
        assert!((cell.mean_recovery - total / 20.0).abs() < 1e-12);
        assert_eq!(cell.trials, 20);
    }

    #[test]
    fn summary_excludes_failures() {
        let mut bad = record(0.0, Algorithm::Ppa, 1);
        bad.failure = Some("x".into());
        let s = summarize(&[record(0.8, Algorithm::Ppa, 0), bad]).unwrap();
        assert_eq!((s[0].trials, s[0].failures), (2, 1));
        assert_eq!(s[0].mean_recovery, 0.8);
    }

    #[test]
    fn sig6_formatting() {
        assert_eq!(format_sig6(0.0), "0");
        assert_eq!(format_sig6(1.0), "1");
        assert_eq!(format_sig6(0.05), "0.05");
        assert_eq!(format_sig6(0.123456789), "0.123457");
        assert_eq!(format_sig6(1234.56789), "1234.57");
        assert_eq!(format_sig6(123456.7), "123457");
        assert_eq!(format_sig6(1234567.0), "1.23457e6");
        assert_eq!(format_sig6(0.0000123456), "1.23456e-5");
        assert_eq!(format_sig6(-2.5), "-2.5");
        assert_eq!(format_sig6(999999.5), "1e6");
    }

    #[test]
    fn one_record_csv() {
        let mut out = Vec::new();
        write_csv(&[record(1.0, Algorithm::Ppa, 0)], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            format!("{CSV_HEADER}\n10,0.2,0.05,ppa,0,1,true,7,95.5,0.955,3,0\n")
        );
        assert!(write_csv(&[], Vec::new()).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let mut grid = GridSpec::new(vec![8, 6], vec![0.2, 0.0], 0.4);
        grid.trials = 3;
        let mut records = run_grid(&grid, 2).unwrap();
        let mut failed = run_trial(&spec(4, 0.0, 0.0, 0, Algorithm::Ppa)).unwrap();
        failed.p = 0.4;
        records.push(failed);
        let mut out = Vec::new();
        write_csv(&records, &mut out).unwrap();
        let parsed = read_csv(out.as_slice()).unwrap();
        sort_records(&mut records);
        let round6 = |x: f64| format_sig6(x).parse::<f64>().unwrap();
        let expected: Vec<CsvRow> = records
            .iter()
            .map(|r| {
                let mut row = r.csv_row();
                row.p = round6(row.p);
                row.lambda = round6(row.lambda);
                row.recovery_fraction = row.recovery_fraction.map(round6);
                row.objective = row.objective.map(round6);
                row.objective_ratio = row.objective_ratio.map(round6);
                row.wall_seconds = round6(row.wall_seconds);
                row
            })
            .collect();
        assert_eq!(parsed, expected);
        assert!(parsed.iter().any(|r| r.objective.is_none()));
        assert!(read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn heatmap_endpoints_and_layout() {
        let mut cells = summarize(&[record(1.0, Algorithm::Ppa, 0)]).unwrap();
        let mut other = cells[0].clone();
        other.lambda = 0.3;
        other.mean_recovery = 0.0;
        cells.push(other);
        let mut third = cells[0].clone();
        third.n = 20;
        third.mean_recovery = 0.5;
        cells.push(third);
        let mut out = Vec::new();
        render_heatmap(&cells, Algorithm::Ppa, false, &mut out).unwrap();
        // Rows are lambda (0.05, 0.3), columns are n (10, 20); (20, 0.3) is absent.
        assert_eq!(String::from_utf8(out).unwrap(), "P2\n2 2\n255\n255 128\n0 0\n");
        assert!(render_heatmap(&cells, Algorithm::EigenAlign, false, Vec::new()).is_err());
        let legend = render_legend(&cells, Algorithm::Ppa, false).unwrap();
        assert!(legend.contains("columns (left to right): n = 10, 20"));
    }

    #[test]
    fn gray_mapping() {
        assert_eq!(gray_level(1.0, false), 255);
        assert_eq!(gray_level(0.0, false), 0);
        assert_eq!(gray_level(1.0, true), 255);
        assert_eq!(gray_level(0.0, true), 0);
        assert!(gray_level(0.1, true) > gray_level(0.1, false));
        assert_eq!(gray_level(f64::NAN, false), 0);
    }

    #[test]
    fn suffix_paths() {
        assert_eq!(suffixed_path(Path::new("out/heat.pgm"), "ppa"), PathBuf::from("out/heat_ppa.pgm"));
        assert_eq!(suffixed_path(Path::new("heat"), "eigenalign"), PathBuf::from("heat_eigenalign"));
    }
}
