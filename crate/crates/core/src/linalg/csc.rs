//! Compressed sparse column storage for complex matrices.
//!
//! Assembly goes through triplets; `from_triplets` sorts by (column, row)
//! with a stable sort and folds duplicates by sequential summation, so the
//! assembled values are a deterministic function of the triplet list.
//! Stiffness and mass matrices of one mesh are built through
//! [`CscMatrix::pair_from_triplets`] and therefore share one sparsity
//! pattern, which makes linear combinations (`K + μM`, `K − σM`) a pure
//! value-array operation.

use crate::scalar::{Cplx, Real};

#[derive(Clone, Debug)]
pub struct CscMatrix<T> {
    pub n_rows: usize,
    pub n_cols: usize,
    /// Length `n_cols + 1`.
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub values: Vec<Cplx<T>>,
}

impl<T: Real> CscMatrix<T> {
    /// Assemble from (row, col, value) triplets, summing duplicates.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, Cplx<T>)]) -> Self {
        let (pattern, values) =
            compress(n_rows, n_cols, triplets.iter().map(|&(r, c, v)| (r, c, [v])));
        let (col_ptr, row_idx) = pattern;
        Self {
            n_rows,
            n_cols,
            col_ptr,
            row_idx,
            values: values.into_iter().map(|[v]| v).collect(),
        }
    }

    /// Assemble two matrices over one shared pattern from parallel triplet
    /// value pairs `(row, col, a_value, b_value)`.
    pub fn pair_from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, Cplx<T>, Cplx<T>)],
    ) -> (Self, Self) {
        let (pattern, values) = compress(
            n_rows,
            n_cols,
            triplets.iter().map(|&(r, c, a, b)| (r, c, [a, b])),
        );
        let (col_ptr, row_idx) = pattern;
        let a = Self {
            n_rows,
            n_cols,
            col_ptr: col_ptr.clone(),
            row_idx: row_idx.clone(),
            values: values.iter().map(|v| v[0]).collect(),
        };
        let b = Self {
            n_rows,
            n_cols,
            col_ptr,
            row_idx,
            values: values.into_iter().map(|v| v[1]).collect(),
        };
        (a, b)
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[Cplx<T>], y: &mut [Cplx<T>]) {
        assert_eq!(x.len(), self.n_cols);
        assert_eq!(y.len(), self.n_rows);
        for v in y.iter_mut() {
            *v = Cplx::new(T::zero(), T::zero());
        }
        for j in 0..self.n_cols {
            let xj = x[j];
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                y[self.row_idx[p]] += self.values[p] * xj;
            }
        }
    }

    pub fn matvec_alloc(&self, x: &[Cplx<T>]) -> Vec<Cplx<T>> {
        let mut y = vec![Cplx::new(T::zero(), T::zero()); self.n_rows];
        self.matvec(x, &mut y);
        y
    }

    /// `self + alpha * other`; panics unless the patterns are identical.
    pub fn add_scaled(&self, alpha: Cplx<T>, other: &Self) -> Self {
        assert_eq!(self.col_ptr, other.col_ptr, "patterns must match");
        assert_eq!(self.row_idx, other.row_idx, "patterns must match");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a + alpha * b)
            .collect();
        Self {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            col_ptr: self.col_ptr.clone(),
            row_idx: self.row_idx.clone(),
            values,
        }
    }

    /// Real part of the trace.
    pub fn trace_real(&self) -> T {
        let mut t = T::zero();
        for j in 0..self.n_cols {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                if self.row_idx[p] == j {
                    t += self.values[p].re;
                }
            }
        }
        t
    }

    /// Maximum column sum of absolute values (the induced 1-norm; equals the
    /// ∞-norm for Hermitian matrices). Used for residual scaling.
    pub fn norm_one(&self) -> T {
        let mut best = T::zero();
        for j in 0..self.n_cols {
            let mut s = T::zero();
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                s += self.values[p].norm();
            }
            if s > best {
                best = s;
            }
        }
        best
    }

    /// Entries with `row >= col`, as triplets in column-major order.
    pub fn lower_triangle(&self) -> Vec<(usize, usize, Cplx<T>)> {
        let mut out = Vec::new();
        for j in 0..self.n_cols {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                if self.row_idx[p] >= j {
                    out.push((self.row_idx[p], j, self.values[p]));
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<Cplx<T>>> {
        let zero = Cplx::new(T::zero(), T::zero());
        let mut d = vec![vec![zero; self.n_cols]; self.n_rows];
        for j in 0..self.n_cols {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                d[self.row_idx[p]][j] = self.values[p];
            }
        }
        d
    }

    /// Symmetric permutation `B = A(perm, perm)` (entry `B[i][j] = A[perm[i]][perm[j]]`).
    pub fn permute_sym(&self, perm: &[usize]) -> Self {
        assert_eq!(self.n_rows, self.n_cols);
        let n = self.n_rows;
        assert_eq!(perm.len(), n);
        let mut inv = vec![0usize; n];
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        let mut triplets = Vec::with_capacity(self.nnz());
        for j in 0..n {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                triplets.push((inv[self.row_idx[p]], inv[j], self.values[p]));
            }
        }
        Self::from_triplets(n, n, &triplets)
    }
}

type Pattern = (Vec<usize>, Vec<usize>);

/// Shared triplet compression: stable sort by (col, row), sequential
/// duplicate folding. `K` parallel value channels ride along.
fn compress<T: Real, const K: usize>(
    n_rows: usize,
    n_cols: usize,
    triplets: impl Iterator<Item = (usize, usize, [Cplx<T>; K])>,
) -> (Pattern, Vec<[Cplx<T>; K]>) {
    let mut items: Vec<(usize, usize, [Cplx<T>; K])> = triplets.collect();
    for &(r, c, _) in &items {
        assert!(r < n_rows && c < n_cols, "triplet out of bounds");
    }
    items.sort_by_key(|&(r, c, _)| (c, r));
    let mut col_ptr = vec![0usize; n_cols + 1];
    let mut row_idx: Vec<usize> = Vec::with_capacity(items.len());
    let mut values: Vec<[Cplx<T>; K]> = Vec::with_capacity(items.len());
    let mut prev: Option<(usize, usize)> = None;
    for (r, c, v) in items {
        if prev == Some((r, c)) {
            let last = values.last_mut().unwrap();
            for k in 0..K {
                last[k] += v[k];
            }
        } else {
            row_idx.push(r);
            values.push(v);
            col_ptr[c + 1] += 1;
            prev = Some((r, c));
        }
    }
    for c in 0..n_cols {
        col_ptr[c + 1] += col_ptr[c];
    }
    ((col_ptr, row_idx), values)
}
