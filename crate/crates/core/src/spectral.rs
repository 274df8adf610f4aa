//! Power iteration for the Perron vector of the alignment operator.
//!
//! The alignment matrix is symmetric and entrywise positive, so its dominant
//! eigenvalue is simple and positive and plain power iteration converges
//! without a shift.

use crate::error::{Error, Result};
use crate::operator::AlignmentOperator;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITERS: usize = 1000;

#[derive(Clone, Debug)]
pub struct EigenResult {
    /// Unit-norm, entrywise nonnegative.
    pub vector: Vec<f64>,
    /// Rayleigh quotient `vᵀAv`.
    pub value: f64,
    /// Number of operator applications.
    pub iterations: usize,
    /// `‖Av − value·v‖₂`.
    pub residual: f64,
    /// False when the iteration cap was hit first.
    pub converged: bool,
    /// `‖v_{t+1} − v_t‖₂` for the last step taken.
    pub step: f64,
    /// Rayleigh quotient after each application.
    pub rayleigh_history: Vec<f64>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Top eigenvector of `op` by power iteration.
///
/// Each step applies the operator once to the current unit vector `v`,
/// forms the Rayleigh quotient and residual, and stops when the residual is
/// below `tol`. Otherwise it normalizes `Av` and stops if the step length is
/// below `tol`, returning the vector the statistics were computed for. The
/// default start is the uniform vector with entries `1/n`.
pub fn top_eigenvector(
    op: &AlignmentOperator,
    tol: f64,
    max_iters: usize,
    start: Option<&[f64]>,
) -> Result<EigenResult> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    if max_iters == 0 {
        return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
    }
    let dim = op.dim();
    let mut v = match start {
        Some(s) => {
            if s.len() != dim {
                return Err(Error::SizeMismatch {
                    expected: dim,
                    actual: s.len(),
                });
            }
            let nrm = norm(s);
            if nrm == 0.0 || !nrm.is_finite() {
                return Err(Error::ZeroVector);
            }
            s.iter().map(|x| x / nrm).collect()
        }
        None => vec![1.0 / op.n() as f64; dim],
    };

    let mut av = vec![0.0; dim];
    let mut history = Vec::new();
    let mut step = f64::INFINITY;
    let mut value = 0.0;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iters {
        op.apply_into(&v, &mut av)?;
        iterations += 1;
        value = v.iter().zip(&av).map(|(a, b)| a * b).sum();
        residual = av
            .iter()
            .zip(&v)
            .map(|(a, x)| (a - value * x).powi(2))
            .sum::<f64>()
            .sqrt();
        history.push(value);
        if residual < tol {
            converged = true;
            break;
        }
        let nrm = norm(&av);
        if nrm == 0.0 {
            return Err(Error::ZeroVector);
        }
        let next: Vec<f64> = av.iter().map(|x| x / nrm).collect();
        step = norm(&next.iter().zip(&v).map(|(a, b)| a - b).collect::<Vec<_>>());
        if step < tol {
            converged = true;
            break;
        }
        v = next;
    }

    // Perron vector: fix the sign, then clamp roundoff below zero.
    if v.iter().sum::<f64>() < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    for x in &mut v {
        if *x < 0.0 {
            *x = 0.0;
        }
    }

    Ok(EigenResult {
        vector: v,
        value,
        iterations,
        residual,
        converged,
        step,
        rayleigh_history: history,
    })
}
