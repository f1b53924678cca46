//! Exact linear algebra over ℚ: dense row reduction, kernels and solves, a sparse
//! eliminator for incidence-like systems, and an integer lattice check.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::rational::Q;

/// Dense matrix as a list of rows.
pub type Matrix = Vec<Vec<Q>>;

/// Reduced row-echelon form of a dense matrix.
#[derive(Clone, Debug)]
pub struct Rref {
    pub rows: Matrix,
    /// Pivot column of each nonzero row, strictly increasing.
    pub pivots: Vec<usize>,
    pub cols: usize,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn free_columns(&self) -> Vec<usize> {
        let mut is_pivot = vec![false; self.cols];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        (0..self.cols).filter(|&c| !is_pivot[c]).collect()
    }

    /// Kernel basis: one vector per free column, with that column set to 1.
    pub fn kernel(&self) -> Vec<Vec<Q>> {
        self.free_columns()
            .into_iter()
            .map(|fc| {
                let mut v = vec![Q::zero(); self.cols];
                v[fc] = Q::one();
                for (row, &pc) in self.rows.iter().zip(&self.pivots) {
                    v[pc] = -row[fc].clone();
                }
                v
            })
            .collect()
    }
}

pub fn rref(m: &[Vec<Q>], cols: usize) -> Rref {
    let mut a: Matrix = m.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == a.len() {
            break;
        }
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    Rref {
        rows: a,
        pivots,
        cols,
    }
}

pub fn rank(m: &[Vec<Q>], cols: usize) -> usize {
    rref(m, cols).rank()
}

pub fn kernel(m: &[Vec<Q>], cols: usize) -> Vec<Vec<Q>> {
    rref(m, cols).kernel()
}

/// Outcome of solving `A x = b`.
#[derive(Clone, Debug)]
pub enum Solve {
    /// A particular solution with every free variable set to zero.
    Solution(Vec<Q>),
    /// No solution; the index of an original equation that is inconsistent with
    /// the ones before it.
    Inconsistent { equation: usize },
}

pub fn solve(a: &[Vec<Q>], b: &[Q], cols: usize) -> Solve {
    assert_eq!(a.len(), b.len());
    // Augment and reduce incrementally so that the first inconsistent row can be named.
    let mut sys = SparseSystem::new(cols + 1);
    for (i, (row, rhs)) in a.iter().zip(b).enumerate() {
        let mut sparse: BTreeMap<usize, Q> = row
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(j, x)| (j, x.clone()))
            .collect();
        if !rhs.is_zero() {
            sparse.insert(cols, rhs.clone());
        }
        if let Some(p) = sys.insert(sparse) {
            if p == cols {
                return Solve::Inconsistent { equation: i };
            }
        }
    }
    let full = sys.reduce_fully();
    let mut x = vec![Q::zero(); cols];
    for (p, row) in &full {
        x[*p] = row.get(&cols).cloned().unwrap_or_else(Q::zero);
    }
    Solve::Solution(x)
}

/// Incremental sparse Gaussian elimination. Rows are kept in echelon form keyed by
/// their leading column; incidence rows stay two-term under elimination, so the
/// kernel of a transition graph's incidence matrix is cheap to compute.
#[derive(Clone, Debug, Default)]
pub struct SparseSystem {
    cols: usize,
    rows: BTreeMap<usize, BTreeMap<usize, Q>>,
}

impl SparseSystem {
    pub fn new(cols: usize) -> Self {
        SparseSystem {
            cols,
            rows: BTreeMap::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `row` against the current pivots and stores it. Returns the new
    /// pivot column, or `None` if the row was dependent.
    pub fn insert(&mut self, mut row: BTreeMap<usize, Q>) -> Option<usize> {
        loop {
            let (&lead, lead_val) = row.iter().next()?;
            match self.rows.get(&lead) {
                Some(pivot) => {
                    let f = lead_val.clone();
                    for (c, v) in pivot {
                        let e = row.entry(*c).or_insert_with(Q::zero);
                        *e -= &f * v;
                        if e.is_zero() {
                            row.remove(c);
                        }
                    }
                }
                None => {
                    let inv = lead_val.recip();
                    for v in row.values_mut() {
                        *v *= &inv;
                    }
                    self.rows.insert(lead, row);
                    return Some(lead);
                }
            }
        }
    }

    /// Back-substitutes so that every pivot column is zero in all other rows.
    pub fn reduce_fully(&self) -> BTreeMap<usize, BTreeMap<usize, Q>> {
        let mut done: BTreeMap<usize, BTreeMap<usize, Q>> = BTreeMap::new();
        for (&p, row) in self.rows.iter().rev() {
            let mut r = row.clone();
            let hits: Vec<(usize, Q)> = r
                .iter()
                .filter(|(c, _)| **c != p && done.contains_key(c))
                .map(|(c, v)| (*c, v.clone()))
                .collect();
            for (c, f) in hits {
                for (cc, v) in &done[&c] {
                    let e = r.entry(*cc).or_insert_with(Q::zero);
                    *e -= &f * v;
                    if e.is_zero() {
                        r.remove(cc);
                    }
                }
            }
            done.insert(p, r);
        }
        done
    }

    /// Kernel basis of the inserted rows over the first `cols` columns.
    pub fn kernel(&self) -> Vec<Vec<Q>> {
        let full = self.reduce_fully();
        (0..self.cols)
            .filter(|c| !full.contains_key(c))
            .map(|fc| {
                let mut v = vec![Q::zero(); self.cols];
                v[fc] = Q::one();
                for (p, row) in &full {
                    if let Some(x) = row.get(&fc) {
                        v[*p] = -x.clone();
                    }
                }
                v
            })
            .collect()
    }
}

/// Index of the sublattice of ℤ^d spanned by integer vectors: `Some(1)` means
/// they generate ℤ^d, `None` means the span has rank below d.
pub fn lattice_index(vectors: &[Vec<i64>], d: usize) -> Option<u128> {
    let mut rows: Vec<Vec<i128>> = vectors
        .iter()
        .map(|v| v.iter().map(|&x| x as i128).collect())
        .collect();
    let mut index: u128 = 1;
    let mut r = 0;
    for c in 0..d {
        // Euclid on column c among rows r.. until a single nonzero entry remains.
        loop {
            let nz: Vec<usize> = (r..rows.len()).filter(|&i| rows[i][c] != 0).collect();
            if nz.is_empty() {
                return None;
            }
            let best = *nz.iter().min_by_key(|&&i| rows[i][c].abs()).unwrap();
            rows.swap(r, best);
            let mut changed = false;
            for i in (r + 1)..rows.len() {
                if rows[i][c] != 0 {
                    let q = rows[i][c] / rows[r][c];
                    let pivot = rows[r].clone();
                    for (x, y) in rows[i].iter_mut().zip(&pivot) {
                        *x -= q * y;
                    }
                    changed = true;
                }
            }
            if !changed || (r + 1..rows.len()).all(|i| rows[i][c] == 0) {
                break;
            }
        }
        index *= rows[r][c].unsigned_abs();
        r += 1;
    }
    Some(index)
}

/// Convenience for tests and callers holding integer data.
pub fn to_q_matrix(m: &[Vec<i64>]) -> Matrix {
    m.iter()
        .map(|r| r.iter().map(|&x| Q::from_integer(x.into())).collect())
        .collect()
}

pub fn is_zero_vec(v: &[Q]) -> bool {
    v.iter().all(|x| x.is_zero())
}

/// `true` iff the rows are pairwise proportional to rows of `other` spanning the
/// same subspace (compared through their reduced row-echelon forms).
pub fn same_row_space(a: &[Vec<Q>], b: &[Vec<Q>], cols: usize) -> bool {
    let ra = rref(a, cols);
    let rb = rref(b, cols);
    ra.pivots == rb.pivots && ra.rows == rb.rows
}

pub fn abs_max(v: &[Q]) -> Q {
    v.iter().map(|x| x.abs()).max().unwrap_or_else(Q::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    #[test]
    fn kernel_of_small_matrix() {
        let m = to_q_matrix(&[vec![1, 1, 0], vec![0, 1, 1]]);
        let k = kernel(&m, 3);
        assert_eq!(k, vec![vec![int(1), int(-1), int(1)]]);
    }

    #[test]
    fn solve_and_inconsistency() {
        let a = to_q_matrix(&[vec![1, 1], vec![1, -1]]);
        match solve(&a, &[int(3), int(1)], 2) {
            Solve::Solution(x) => assert_eq!(x, vec![int(2), int(1)]),
            _ => panic!(),
        }
        let a = to_q_matrix(&[vec![1, 1], vec![2, 2]]);
        match solve(&a, &[int(1), int(3)], 2) {
            Solve::Inconsistent { equation } => assert_eq!(equation, 1),
            _ => panic!(),
        }
    }

    #[test]
    fn sparse_matches_dense() {
        let m = vec![
            vec![int(1), int(-1), int(0), int(0)],
            vec![int(0), int(1), int(-1), int(0)],
            vec![int(1), int(0), int(-1), int(0)],
            vec![frac(1, 2), int(0), int(0), int(2)],
        ];
        let mut sys = SparseSystem::new(4);
        for row in &m {
            sys.insert(
                row.iter()
                    .enumerate()
                    .filter(|(_, x)| !x.is_zero())
                    .map(|(j, x)| (j, x.clone()))
                    .collect(),
            );
        }
        assert_eq!(sys.rank(), rank(&m, 4));
        let ks = sys.kernel();
        assert!(same_row_space(&ks, &kernel(&m, 4), 4));
    }

    #[test]
    fn lattice_index_cases() {
        assert_eq!(lattice_index(&[vec![1, 0], vec![0, 1]], 2), Some(1));
        assert_eq!(lattice_index(&[vec![2, 0], vec![0, 1]], 2), Some(2));
        assert_eq!(lattice_index(&[vec![1, 1], vec![1, -1]], 2), Some(2));
        assert_eq!(lattice_index(&[vec![2, 3], vec![1, 1]], 2), Some(1));
        assert_eq!(lattice_index(&[vec![1, 0]], 2), None);
    }
}
