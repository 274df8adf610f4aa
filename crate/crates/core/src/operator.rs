//! The alignment matrix as a matrix-free operator.
//!
//! Rows and columns of the `n² × n²` matrix are indexed by vertex pairs
//! `(i, j')` flattened as `i·n + j'`, where `i` is a vertex of the first graph
//! and `j'` a vertex of the second. Entry `[(i,j'),(r,s')]` scores the pair of
//! correspondences: `s1` when both `(i,r)` and `(j',s')` are edges, `s2` when
//! neither is, `s3` otherwise. Diagonal pairs (`i = r` or `j' = s'`) count as
//! non-edges.
//!
//! Writing `a = G1(i,r)` and `b = G2(j',s')`, every entry equals
//! `(s1 + s2 − 2 s3)·ab + (s3 − s2)·(a + b) + s2`, so the product with a
//! reshaped vector `V` is
//!
//! ```text
//! U = (s1 + s2 − 2 s3)·G1 V G2 + (s3 − s2)·(G1 V J + J V G2) + s2·J V J
//! ```
//!
//! with `J` the all-ones matrix. The implementation evaluates this with
//! neighbor lists and row/column sums in `O(n·(e1 + e2) + n²)`.

use crate::error::{Error, Result};
use crate::graph::{Graph, Permutation};

pub const DEFAULT_EPSILON: f64 = 0.001;

/// Largest `n` for which [`dense_alignment_matrix`] will build the matrix.
pub const DEFAULT_ORACLE_CAP: usize = 12;

/// Match, non-edge match and mismatch scores.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoringParams {
    s1: f64,
    s2: f64,
    s3: f64,
    epsilon: f64,
    alpha: f64,
}

impl ScoringParams {
    pub fn s1(&self) -> f64 {
        self.s1
    }

    pub fn s2(&self) -> f64 {
        self.s2
    }

    pub fn s3(&self) -> f64 {
        self.s3
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn score(&self, edge1: bool, edge2: bool) -> f64 {
        match (edge1, edge2) {
            (true, true) => self.s1,
            (false, false) => self.s2,
            _ => self.s3,
        }
    }
}

/// `s1 = alpha + epsilon`, `s2 = 1 + epsilon`, `s3 = epsilon`.
pub fn make_params(alpha: f64, epsilon: f64) -> Result<ScoringParams> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(alpha >= 1.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha must be at least 1, got {alpha}")));
    }
    Ok(ScoringParams {
        s1: alpha + epsilon,
        s2: 1.0 + epsilon,
        s3: epsilon,
        epsilon,
        alpha,
    })
}

/// Counts of matching and mismatching entries of the alignment matrix.
///
/// Each graph contributes its `n²` ordered vertex pairs, `2·edge_count` of
/// which are edges. Matches pair an edge with an edge; mismatches pair an
/// edge with a non-edge in either order.
pub fn match_counts(g1: &Graph, g2: &Graph) -> Result<(f64, f64)> {
    if g1.n() != g2.n() {
        return Err(Error::SizeMismatch {
            expected: g1.n(),
            actual: g2.n(),
        });
    }
    let n2 = (g1.n() as f64).powi(2);
    let e1 = 2.0 * g1.edge_count() as f64;
    let e2 = 2.0 * g2.edge_count() as f64;
    Ok((e1 * e2, e1 * (n2 - e2) + (n2 - e1) * e2))
}

/// `alpha = 1 + matches / mismatches`.
pub fn compute_alpha(g1: &Graph, g2: &Graph) -> Result<f64> {
    let (matches, mismatches) = match_counts(g1, g2)?;
    if mismatches == 0.0 {
        return Err(Error::DegenerateAlpha { matches });
    }
    Ok(1.0 + matches / mismatches)
}

/// Coefficients of the Kronecker decomposition of the alignment matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Coefficients {
    both: f64,
    cross: f64,
    constant: f64,
}

impl Coefficients {
    fn from_params(p: &ScoringParams) -> Self {
        Self {
            both: p.s1 + p.s2 - 2.0 * p.s3,
            cross: p.s3 - p.s2,
            constant: p.s2,
        }
    }
}

/// Matrix-free alignment matrix for a pair of equal-size graphs.
#[derive(Clone, Debug)]
pub struct AlignmentOperator {
    g1: Graph,
    g2: Graph,
    params: ScoringParams,
    coef: Coefficients,
    n: usize,
}

impl AlignmentOperator {
    pub fn new(g1: Graph, g2: Graph, params: ScoringParams) -> Result<Self> {
        if g1.n() != g2.n() {
            return Err(Error::SizeMismatch {
                expected: g1.n(),
                actual: g2.n(),
            });
        }
        let n = g1.n();
        Ok(Self {
            coef: Coefficients::from_params(&params),
            g1,
            g2,
            params,
            n,
        })
    }

    /// Operator with balanced scores: `alpha` from [`compute_alpha`].
    pub fn balanced(g1: Graph, g2: Graph, epsilon: f64) -> Result<Self> {
        let alpha = compute_alpha(&g1, &g2)?;
        Self::new(g1, g2, make_params(alpha, epsilon)?)
    }

    /// Deliberately wrong operator for self-test fault injection: the sign of
    /// the mismatch term is flipped.
    pub(crate) fn with_flipped_cross_term(mut self) -> Self {
        self.coef.cross = -self.coef.cross;
        self
    }

    pub fn g1(&self) -> &Graph {
        &self.g1
    }

    pub fn g2(&self) -> &Graph {
        &self.g2
    }

    pub fn params(&self) -> &ScoringParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n * self.n
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        self.apply_into(v, &mut out)?;
        Ok(out)
    }

    /// Writes `A·v` into `out`.
    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        let (n, dim) = (self.n, self.dim());
        for len in [v.len(), out.len()] {
            if len != dim {
                return Err(Error::SizeMismatch {
                    expected: dim,
                    actual: len,
                });
            }
        }

        let mut row_sums = vec![0.0; n];
        let mut col_sums = vec![0.0; n];
        for (r, row) in v.chunks_exact(n).enumerate() {
            for (s, &x) in row.iter().enumerate() {
                row_sums[r] += x;
                col_sums[s] += x;
            }
        }
        let total: f64 = row_sums.iter().sum();

        // W = V·G2, row by row.
        let mut w = vec![0.0; dim];
        for (vr, wr) in v.chunks_exact(n).zip(w.chunks_exact_mut(n)) {
            for (j, wj) in wr.iter_mut().enumerate() {
                *wj = self.g2.neighbors(j).iter().map(|&s| vr[s]).sum();
            }
        }

        // (G1 V J)[i][*] and (J V G2)[*][j].
        let g1_rows: Vec<f64> = (0..n)
            .map(|i| self.g1.neighbors(i).iter().map(|&r| row_sums[r]).sum())
            .collect();
        let g2_cols: Vec<f64> = (0..n)
            .map(|j| self.g2.neighbors(j).iter().map(|&s| col_sums[s]).sum())
            .collect();

        let Coefficients {
            both,
            cross,
            constant,
        } = self.coef;
        let base = constant * total;
        let mut acc = vec![0.0; n];
        for (i, out_row) in out.chunks_exact_mut(n).enumerate() {
            acc.iter_mut().for_each(|a| *a = 0.0);
            for &r in self.g1.neighbors(i) {
                for (a, &x) in acc.iter_mut().zip(&w[r * n..(r + 1) * n]) {
                    *a += x;
                }
            }
            let row_term = cross * g1_rows[i] + base;
            for ((o, &a), &c) in out_row.iter_mut().zip(&acc).zip(&g2_cols) {
                *o = both * a + cross * c + row_term;
            }
        }
        Ok(())
    }

    /// `yᵀ A y` for the 0/1 vectorization `y` of `perm`.
    pub fn quadratic_form(&self, perm: &Permutation) -> Result<f64> {
        if perm.len() != self.n {
            return Err(Error::SizeMismatch {
                expected: self.n,
                actual: perm.len(),
            });
        }
        let u = self.apply(&perm.to_indicator())?;
        Ok(selected_sum(&u, perm))
    }
}

/// `Σᵢ u[i·n + perm(i)]`, i.e. `yᵀu` for the indicator `y` of `perm`.
pub(crate) fn selected_sum(u: &[f64], perm: &Permutation) -> f64 {
    let n = perm.len();
    (0..n).map(|i| u[i * n + perm.apply(i)]).sum()
}

/// Explicit alignment matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseAlignment {
    dim: usize,
    entries: Vec<f64>,
}

impl DenseAlignment {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        self.entries
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `yᵀ A y` for the indicator of `perm`, summed over selected entries.
    pub fn quadratic_form(&self, perm: &Permutation) -> f64 {
        let n = perm.len();
        let mut total = 0.0;
        for i in 0..n {
            for r in 0..n {
                total += self.get(i * n + perm.apply(i), r * n + perm.apply(r));
            }
        }
        total
    }
}

/// Builds the alignment matrix entry by entry. Refuses `n` above
/// [`DEFAULT_ORACLE_CAP`].
pub fn dense_alignment_matrix(g1: &Graph, g2: &Graph, params: &ScoringParams) -> Result<DenseAlignment> {
    dense_alignment_matrix_capped(g1, g2, params, DEFAULT_ORACLE_CAP)
}

pub fn dense_alignment_matrix_capped(
    g1: &Graph,
    g2: &Graph,
    params: &ScoringParams,
    cap: usize,
) -> Result<DenseAlignment> {
    if g1.n() != g2.n() {
        return Err(Error::SizeMismatch {
            expected: g1.n(),
            actual: g2.n(),
        });
    }
    let n = g1.n();
    if n > cap {
        return Err(Error::OracleCap { n, cap });
    }
    let dim = n * n;
    let mut entries = Vec::with_capacity(dim * dim);
    for i in 0..n {
        for j in 0..n {
            for r in 0..n {
                for s in 0..n {
                    entries.push(params.score(g1.has_edge(i, r), g2.has_edge(j, s)));
                }
            }
        }
    }
    Ok(DenseAlignment { dim, entries })
}
