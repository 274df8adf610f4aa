//! End-to-end alignment pipelines: EigenAlign and Projected Power Alignment.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{matched_edges, Graph, Permutation};
use crate::operator::{selected_sum, AlignmentOperator, DEFAULT_EPSILON};
use crate::rounding::{greedy_round, max_weight_matching, ScoreMatrix};
use crate::spectral::{top_eigenvector, EigenResult, DEFAULT_MAX_ITERS, DEFAULT_TOL};

pub const DEFAULT_PPA_MAX_ITERS: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlignConfig {
    pub epsilon: f64,
    pub eigen_tol: f64,
    pub eigen_max_iters: usize,
    pub ppa_max_iters: usize,
    /// Report the best-scoring PPA iterate rather than the last one.
    pub return_best: bool,
}

impl Default for AlignConfig {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            eigen_tol: DEFAULT_TOL,
            eigen_max_iters: DEFAULT_MAX_ITERS,
            ppa_max_iters: DEFAULT_PPA_MAX_ITERS,
            return_best: true,
        }
    }
}

impl AlignConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.eigen_tol.is_nan() || self.eigen_tol <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "eigen tolerance must be positive, got {}",
                self.eigen_tol
            )));
        }
        if self.eigen_max_iters == 0 || self.ppa_max_iters == 0 {
            return Err(Error::InvalidParameter("iteration caps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    EigenAlign,
    Ppa,
}

impl Algorithm {
    pub const ALL: [Algorithm; 2] = [Algorithm::EigenAlign, Algorithm::Ppa];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::EigenAlign => "eigenalign",
            Algorithm::Ppa => "ppa",
        }
    }

    pub fn run(self, op: &AlignmentOperator, cfg: &AlignConfig) -> Result<AlignmentResult> {
        match self {
            Algorithm::EigenAlign => eigen_align_with(op, cfg),
            Algorithm::Ppa => projected_power_align_with(op, cfg),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eigenalign" => Ok(Algorithm::EigenAlign),
            "ppa" => Ok(Algorithm::Ppa),
            other => Err(Error::InvalidParameter(format!("unknown algorithm {other:?}"))),
        }
    }
}

/// One PPA step: the objective of the iterate that was multiplied by `A`
/// and how many vertices the following projection reassigned.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryStep {
    pub objective: f64,
    pub changed_vertices: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlignmentResult {
    /// Vertex `i` of the first graph maps to `permutation(i)` of the second.
    pub permutation: Permutation,
    /// `yᵀAy` of `permutation`.
    pub objective: f64,
    pub matched_edges: usize,
    /// Power iterations for EigenAlign, projection steps for PPA.
    pub iterations: usize,
    pub converged: bool,
    pub trajectory: Option<Vec<TrajectoryStep>>,
}

/// Builds the balanced operator shared by both pipelines.
pub fn build_operator(g1: &Graph, g2: &Graph, cfg: &AlignConfig) -> Result<AlignmentOperator> {
    cfg.validate()?;
    AlignmentOperator::balanced(g1.clone(), g2.clone(), cfg.epsilon)
}

pub fn eigen_align(g1: &Graph, g2: &Graph, cfg: &AlignConfig) -> Result<AlignmentResult> {
    eigen_align_with(&build_operator(g1, g2, cfg)?, cfg)
}

pub fn projected_power_align(g1: &Graph, g2: &Graph, cfg: &AlignConfig) -> Result<AlignmentResult> {
    projected_power_align_with(&build_operator(g1, g2, cfg)?, cfg)
}

fn perron(op: &AlignmentOperator, cfg: &AlignConfig) -> Result<EigenResult> {
    cfg.validate()?;
    top_eigenvector(op, cfg.eigen_tol, cfg.eigen_max_iters, None)
}

/// Perron vector of `A`, rounded by exact maximum-weight matching.
pub fn eigen_align_with(op: &AlignmentOperator, cfg: &AlignConfig) -> Result<AlignmentResult> {
    let eig = perron(op, cfg)?;
    let scores = ScoreMatrix::new(op.n(), eig.vector)?;
    let permutation = max_weight_matching(&scores);
    let objective = op.quadratic_form(&permutation)?;
    Ok(AlignmentResult {
        matched_edges: matched_edges(op.g1(), op.g2(), &permutation)?,
        permutation,
        objective,
        iterations: eig.iterations,
        converged: eig.converged,
        trajectory: None,
    })
}

/// Projected power iteration on permutations.
///
/// The Perron vector `v⁰` is multiplied by `A` once and greedily rounded;
/// from then on each step multiplies the current permutation's indicator by
/// `A` and rounds again, stopping at a fixed point or after
/// `cfg.ppa_max_iters` steps.
pub fn projected_power_align_with(op: &AlignmentOperator, cfg: &AlignConfig) -> Result<AlignmentResult> {
    let n = op.n();
    let eig = perron(op, cfg)?;
    let first = op.apply(&eig.vector)?;
    let mut current = greedy_round(&ScoreMatrix::new(n, first)?);

    let mut best: Option<(Permutation, f64)> = None;
    let mut consider = |perm: &Permutation, objective: f64| {
        if best.as_ref().is_none_or(|(_, b)| objective > *b) {
            best = Some((perm.clone(), objective));
        }
    };

    let mut trajectory = Vec::new();
    let mut converged = false;
    let mut last_objective = None;
    let mut u = vec![0.0; op.dim()];
    while trajectory.len() < cfg.ppa_max_iters {
        op.apply_into(&current.to_indicator(), &mut u)?;
        let objective = selected_sum(&u, &current);
        consider(&current, objective);
        let next = greedy_round(&ScoreMatrix::new(n, u.clone())?);
        let changed_vertices = n - next.agreement(&current);
        trajectory.push(TrajectoryStep {
            objective,
            changed_vertices,
        });
        if changed_vertices == 0 {
            converged = true;
            last_objective = Some(objective);
            break;
        }
        current = next;
    }
    let last_objective = match last_objective {
        Some(obj) => obj,
        None => {
            let obj = op.quadratic_form(&current)?;
            consider(&current, obj);
            obj
        }
    };

    let (permutation, objective) = match (cfg.return_best, best) {
        (true, Some(best)) => best,
        _ => (current, last_objective),
    };
    Ok(AlignmentResult {
        matched_edges: matched_edges(op.g1(), op.g2(), &permutation)?,
        permutation,
        objective,
        iterations: trajectory.len(),
        converged,
        trajectory: Some(trajectory),
    })
}
