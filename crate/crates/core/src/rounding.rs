//! Projections from an `n × n` score matrix onto permutations.

use crate::error::{Error, Result};
use crate::graph::Permutation;

/// Square matrix of finite scores, row-major (`i·n + j'`).
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl ScoreMatrix {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::SizeMismatch {
                expected: n * n,
                actual: entries.len(),
            });
        }
        if let Some(k) = entries.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { row: k / n, col: k % n });
        }
        Ok(Self { n, entries })
    }

    /// Reshapes a vector of length `n²`.
    pub fn from_vector(v: Vec<f64>) -> Result<Self> {
        let n = (v.len() as f64).sqrt().round() as usize;
        Self::new(n, v)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::SizeMismatch {
                expected: n,
                actual: bad.len(),
            });
        }
        Self::new(n, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// `Σᵢ S[i][perm(i)]`, summed in row order.
    pub fn total(&self, perm: &Permutation) -> f64 {
        (0..self.n).map(|i| self.get(i, perm.apply(i))).sum()
    }
}

/// Maximum-weight perfect matching (exact assignment).
///
/// Shortest augmenting paths with row/column potentials, `O(n³)`. Among
/// several optimal assignments the one returned is determined by the fixed
/// row order of augmentation.
pub fn max_weight_matching(scores: &ScoreMatrix) -> Permutation {
    let n = scores.n;
    if n == 0 {
        return Permutation::identity(0);
    }
    // Minimize cost = -score. Arrays are 1-based; index 0 is a sentinel column.
    let cost = |i: usize, j: usize| -scores.get(i - 1, j - 1);
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![0.0f64; n + 1];
    let mut used = vec![false; n + 1];

    for row in 1..=n {
        owner[0] = row;
        let mut j0 = 0;
        minv.iter_mut().for_each(|m| *m = f64::INFINITY);
        used.iter_mut().for_each(|b| *b = false);
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost(i0, j) - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut map = vec![0; n];
    for j in 1..=n {
        map[owner[j] - 1] = j - 1;
    }
    Permutation::new(map).expect("assignment is a bijection")
}

/// Greedy projection: repeatedly take the largest remaining entry, assign its
/// row to its column, and retire both. Ties go to the smaller linear index.
pub fn greedy_round(scores: &ScoreMatrix) -> Permutation {
    let n = scores.n;
    let s = &scores.entries;
    let mut order: Vec<usize> = (0..n * n).collect();
    order.sort_unstable_by(|&a, &b| {
        s[b].partial_cmp(&s[a])
            .expect("finite scores")
            .then(a.cmp(&b))
    });
    let mut row_used = vec![false; n];
    let mut col_used = vec![false; n];
    let mut map = vec![0; n];
    let mut assigned = 0;
    for k in order {
        if assigned == n {
            break;
        }
        let (i, j) = (k / n, k % n);
        if row_used[i] || col_used[j] {
            continue;
        }
        row_used[i] = true;
        col_used[j] = true;
        map[i] = j;
        assigned += 1;
    }
    Permutation::new(map).expect("greedy assignment is a bijection")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{random_permutation, RngSeed};
    use proptest::prelude::*;
    use rand::Rng;

    fn all_permutations(n: usize) -> Vec<Vec<usize>> {
        fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
            if prefix.len() == used.len() {
                out.push(prefix.clone());
                return;
            }
            for k in 0..used.len() {
                if !used[k] {
                    used[k] = true;
                    prefix.push(k);
                    rec(prefix, used, out);
                    prefix.pop();
                    used[k] = false;
                }
            }
        }
        let mut out = Vec::new();
        rec(&mut Vec::new(), &mut vec![false; n], &mut out);
        out
    }

    fn random_scores(n: usize, seed: u64) -> ScoreMatrix {
        let mut rng = RngSeed::new(seed, 5).rng();
        ScoreMatrix::new(n, (0..n * n).map(|_| rng.gen_range(-10.0..10.0)).collect()).unwrap()
    }

    fn permutation_matrix(p: &Permutation) -> ScoreMatrix {
        ScoreMatrix::new(p.len(), p.to_indicator()).unwrap()
    }

    #[test]
    fn rejects_non_finite() {
        assert!(matches!(
            ScoreMatrix::new(2, vec![0.0, f64::NAN, 1.0, 2.0]),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
        assert!(ScoreMatrix::new(2, vec![0.0, 1.0, f64::INFINITY, 2.0]).is_err());
        assert!(ScoreMatrix::new(2, vec![0.0; 3]).is_err());
        assert!(ScoreMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn matching_on_identity_and_anti_identity() {
        let n = 5;
        let id = ScoreMatrix::new(n, Permutation::identity(n).to_indicator()).unwrap();
        let p = max_weight_matching(&id);
        assert_eq!(p, Permutation::identity(n));
        assert_eq!(id.total(&p), n as f64);

        let anti = ScoreMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let p = max_weight_matching(&anti);
        assert_eq!(p.as_slice(), &[1, 0]);
        assert_eq!(anti.total(&p), 2.0);
    }

    #[test]
    fn matching_equals_exhaustive_search() {
        let perms: Vec<Permutation> = all_permutations(6)
            .into_iter()
            .map(|m| Permutation::new(m).unwrap())
            .collect();
        assert_eq!(perms.len(), 720);
        for seed in 0..200 {
            let s = random_scores(6, seed);
            let best = perms.iter().map(|p| s.total(p)).fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(s.total(&max_weight_matching(&s)), best, "seed {seed}");
        }
    }

    #[test]
    fn matching_handles_trivial_sizes() {
        let s = ScoreMatrix::new(1, vec![-3.0]).unwrap();
        assert_eq!(max_weight_matching(&s).as_slice(), &[0]);
        assert_eq!(greedy_round(&s).as_slice(), &[0]);
        let s = ScoreMatrix::new(0, vec![]).unwrap();
        assert!(max_weight_matching(&s).is_empty());
        assert!(greedy_round(&s).is_empty());
    }

    #[test]
    fn greedy_hand_examples() {
        let s = ScoreMatrix::from_rows(&[vec![0.9, 0.5], vec![0.8, 0.1]]).unwrap();
        assert_eq!(greedy_round(&s).as_slice(), &[0, 1]);
        let s = ScoreMatrix::from_rows(&[vec![0.1, 0.9], vec![0.8, 0.7]]).unwrap();
        assert_eq!(greedy_round(&s).as_slice(), &[1, 0]);
    }

    #[test]
    fn greedy_ties_go_to_smallest_index() {
        let s = ScoreMatrix::new(3, vec![1.0; 9]).unwrap();
        assert_eq!(greedy_round(&s), Permutation::identity(3));
        let s = ScoreMatrix::from_rows(&[vec![0.0, 2.0, 2.0], vec![2.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(greedy_round(&s).as_slice(), &[1, 0, 2]);
    }

    #[test]
    fn greedy_fixes_permutation_matrices() {
        for map in all_permutations(4) {
            let p = Permutation::new(map).unwrap();
            assert_eq!(greedy_round(&permutation_matrix(&p)), p);
        }
    }

    proptest! {
        #[test]
        fn exact_dominates_greedy(seed in any::<u64>(), n in 1usize..=12) {
            let s = random_scores(n, seed);
            let exact = max_weight_matching(&s);
            let greedy = greedy_round(&s);
            prop_assert!(s.total(&exact) >= s.total(&greedy) - 1e-9);
        }

        #[test]
        fn projections_ignore_positive_scaling(seed in any::<u64>(), n in 1usize..=10, c in 0.001f64..1000.0) {
            let s = random_scores(n, seed);
            let scaled = ScoreMatrix::new(n, s.entries().iter().map(|x| c * x).collect()).unwrap();
            prop_assert_eq!(greedy_round(&s), greedy_round(&scaled));
            prop_assert_eq!(max_weight_matching(&s), max_weight_matching(&scaled));
        }

        #[test]
        fn greedy_is_equivariant(seed in any::<u64>(), n in 1usize..=10) {
            // Distinct entries with probability one.
            let s = random_scores(n, seed);
            let rho = random_permutation(n, RngSeed::new(seed, 1)).unwrap();
            let tau = random_permutation(n, RngSeed::new(seed, 2)).unwrap();
            // Move entry (i, j) to (rho(i), tau(j)).
            let mut moved = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    moved[rho.apply(i) * n + tau.apply(j)] = s.get(i, j);
                }
            }
            let g = greedy_round(&s);
            let h = greedy_round(&ScoreMatrix::new(n, moved).unwrap());
            prop_assert_eq!(h, tau.compose(&g).compose(&rho.inverse()));
        }
    }
}
