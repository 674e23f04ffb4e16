//! Sparse real matrices and a left-looking LU factorization.
//!
//! The factorization follows Gilbert and Peierls: each column is obtained by a
//! sparse triangular solve against the columns already factored, with the
//! nonzero pattern found by depth-first search. Rows are pivoted with a
//! diagonal preference threshold so a well-ordered Jacobian keeps its
//! ordering. Callers supply the fill-reducing order by building the matrix
//! in that order; [`minimum_degree`] computes one from a graph.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const NONE: usize = usize::MAX;

/// Compressed sparse column matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CscMatrix {
    /// Assembles from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; ncols + 1];
        for &(r, c, _) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            counts[c + 1] += 1;
        }
        for c in 0..ncols {
            counts[c + 1] += counts[c];
        }
        let mut next = counts.clone();
        let mut rows = vec![0; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(r, c, v) in triplets {
            let slot = next[c];
            rows[slot] = r;
            vals[slot] = v;
            next[c] += 1;
        }

        // sort each column by row and merge duplicates
        let mut col_ptr = Vec::with_capacity(ncols + 1);
        let mut row_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        col_ptr.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for c in 0..ncols {
            scratch.clear();
            scratch.extend((counts[c]..counts[c + 1]).map(|p| (rows[p], vals[p])));
            scratch.sort_unstable_by_key(|&(r, _)| r);
            for &(r, v) in &scratch {
                if row_idx.len() > col_ptr[c] && *row_idx.last().unwrap() == r {
                    *values.last_mut().unwrap() += v;
                } else {
                    row_idx.push(r);
                    values.push(v);
                }
            }
            col_ptr.push(row_idx.len());
        }
        CscMatrix {
            nrows,
            ncols,
            col_ptr,
            row_idx,
            values,
        }
    }

    /// Zero-valued matrix with the pattern of `coords`, plus for each
    /// coordinate the index of its slot in the value array. Repeated
    /// coordinates share a slot.
    pub fn with_slots(nrows: usize, ncols: usize, coords: &[(usize, usize)]) -> (Self, Vec<usize>) {
        let mut order: Vec<usize> = (0..coords.len()).collect();
        order.sort_unstable_by_key(|&t| (coords[t].1, coords[t].0));
        let mut col_ptr = vec![0usize; ncols + 1];
        let mut row_idx = Vec::with_capacity(coords.len());
        let mut slots = vec![0usize; coords.len()];
        let mut last = None;
        for &t in &order {
            let (r, c) = coords[t];
            assert!(r < nrows && c < ncols, "entry ({r}, {c}) out of bounds");
            if last != Some((r, c)) {
                row_idx.push(r);
                col_ptr[c + 1] += 1;
                last = Some((r, c));
            }
            slots[t] = row_idx.len() - 1;
        }
        for c in 0..ncols {
            col_ptr[c + 1] += col_ptr[c];
        }
        let values = vec![0.0; row_idx.len()];
        (
            CscMatrix {
                nrows,
                ncols,
                col_ptr,
                row_idx,
                values,
            },
            slots,
        )
    }

    /// Overwrites the values, summing `vals[t]` into `slots[t]`.
    pub fn fill_slots(&mut self, slots: &[usize], vals: &[f64]) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
        for (&s, &v) in slots.iter().zip(vals) {
            self.values[s] += v;
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    /// Entries of column `c` as `(row, value)`.
    pub fn column(&self, c: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.col_ptr[c]..self.col_ptr[c + 1]).map(move |p| (self.row_idx[p], self.values[p]))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        for c in 0..self.ncols {
            for (r, v) in self.column(c) {
                y[r] += v * x[c];
            }
        }
        y
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for c in 0..self.ncols {
            for (r, v) in self.column(c) {
                d[r][c] += v;
            }
        }
        d
    }
}

/// `P A = L U` with unit lower-triangular `L`.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    // strictly-lower part of L by column; row indices are pivot positions
    l_ptr: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    // U by column, diagonal stored last in each column
    u_ptr: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<f64>,
    // original row -> pivot position
    pinv: Vec<usize>,
}

impl LuFactors {
    /// Factors a square matrix.
    ///
    /// `pivot_threshold` in (0, 1]: the diagonal entry is kept as pivot while
    /// its magnitude is at least this fraction of the largest candidate.
    pub fn factor(a: &CscMatrix, pivot_threshold: f64) -> Result<Self> {
        assert_eq!(a.nrows, a.ncols, "LU needs a square matrix");
        let n = a.ncols;
        let mut pinv = vec![NONE; n];
        let mut l_ptr = Vec::with_capacity(n + 1);
        let mut l_idx: Vec<usize> = Vec::with_capacity(a.nnz() * 2);
        let mut l_val: Vec<f64> = Vec::with_capacity(a.nnz() * 2);
        let mut u_ptr = Vec::with_capacity(n + 1);
        let mut u_idx: Vec<usize> = Vec::with_capacity(a.nnz() * 2);
        let mut u_val: Vec<f64> = Vec::with_capacity(a.nnz() * 2);
        l_ptr.push(0);
        u_ptr.push(0);

        let mut x = vec![0.0; n];
        let mut mark = vec![NONE; n];
        let mut reach: Vec<usize> = Vec::with_capacity(n);
        let mut dfs_stack: Vec<(usize, usize)> = Vec::with_capacity(n);

        for k in 0..n {
            // nonzero pattern of L \ A(:, k) in topological order
            reach.clear();
            for (i, _) in a.column(k) {
                if mark[i] == k {
                    continue;
                }
                mark[i] = k;
                dfs_stack.push((i, 0));
                while let Some(&mut (node, ref mut slot)) = dfs_stack.last_mut() {
                    let col = pinv[node];
                    let end = if col == NONE { 0 } else { l_ptr[col + 1] - l_ptr[col] };
                    if *slot < end {
                        let child = l_idx[l_ptr[col] + *slot];
                        *slot += 1;
                        if mark[child] != k {
                            mark[child] = k;
                            dfs_stack.push((child, 0));
                        }
                    } else {
                        dfs_stack.pop();
                        reach.push(node);
                    }
                }
            }

            for (i, v) in a.column(k) {
                x[i] = v;
            }
            for &j in reach.iter().rev() {
                let col = pinv[j];
                if col == NONE {
                    continue;
                }
                let xj = x[j];
                if xj != 0.0 {
                    for p in l_ptr[col]..l_ptr[col + 1] {
                        x[l_idx[p]] -= l_val[p] * xj;
                    }
                }
            }

            let mut best = NONE;
            let mut best_abs = -1.0;
            for &i in reach.iter().rev() {
                let col = pinv[i];
                if col == NONE {
                    let m = x[i].abs();
                    if m > best_abs {
                        best_abs = m;
                        best = i;
                    }
                } else {
                    u_idx.push(col);
                    u_val.push(x[i]);
                }
            }
            if best == NONE || !(best_abs > 0.0) || !best_abs.is_finite() {
                return Err(Error::Singular(k));
            }
            if pinv[k] == NONE && mark[k] == k && x[k].abs() >= pivot_threshold * best_abs {
                best = k;
            }
            let pivot = x[best];
            u_idx.push(k);
            u_val.push(pivot);
            u_ptr.push(u_idx.len());
            pinv[best] = k;

            for &i in reach.iter().rev() {
                if pinv[i] == NONE {
                    l_idx.push(i);
                    l_val.push(x[i] / pivot);
                }
                x[i] = 0.0;
            }
            l_ptr.push(l_idx.len());
        }

        for i in l_idx.iter_mut() {
            *i = pinv[*i];
        }
        Ok(LuFactors {
            n,
            l_ptr,
            l_idx,
            l_val,
            u_ptr,
            u_idx,
            u_val,
            pinv,
        })
    }

    /// Numeric refactorization of a matrix with the same pattern as the one
    /// originally factored, reusing its pivot sequence.
    ///
    /// Fails with [`Error::Singular`] when a reused pivot falls below
    /// `pivot_threshold` times the largest entry of its column; callers then
    /// fall back to [`LuFactors::factor`].
    pub fn refactor(&mut self, a: &CscMatrix, pivot_threshold: f64) -> Result<()> {
        assert_eq!(a.ncols, self.n, "refactor needs the original dimension");
        let mut x = vec![0.0; self.n];
        for k in 0..self.n {
            for (i, v) in a.column(k) {
                x[self.pinv[i]] = v;
            }
            let diag = self.u_ptr[k + 1] - 1;
            for p in self.u_ptr[k]..diag {
                let j = self.u_idx[p];
                let xj = x[j];
                self.u_val[p] = xj;
                x[j] = 0.0;
                if xj != 0.0 {
                    for q in self.l_ptr[j]..self.l_ptr[j + 1] {
                        x[self.l_idx[q]] -= self.l_val[q] * xj;
                    }
                }
            }
            let pivot = x[k];
            x[k] = 0.0;
            let largest = (self.l_ptr[k]..self.l_ptr[k + 1]).fold(0.0f64, |m, q| m.max(x[self.l_idx[q]].abs()));
            if !(pivot.abs() > 0.0) || !pivot.is_finite() || pivot.abs() < pivot_threshold * largest {
                return Err(Error::Singular(k));
            }
            self.u_val[diag] = pivot;
            for q in self.l_ptr[k]..self.l_ptr[k + 1] {
                let i = self.l_idx[q];
                self.l_val[q] = x[i] / pivot;
                x[i] = 0.0;
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Fill of the factors (strictly-lower L plus U).
    pub fn nnz(&self) -> usize {
        self.l_idx.len() + self.u_idx.len()
    }

    /// Solves `A x = b`, overwriting `b` with `x`.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let mut y = vec![0.0; self.n];
        for (i, &bi) in b.iter().enumerate() {
            y[self.pinv[i]] = bi;
        }
        for j in 0..self.n {
            let yj = y[j];
            if yj != 0.0 {
                for p in self.l_ptr[j]..self.l_ptr[j + 1] {
                    y[self.l_idx[p]] -= self.l_val[p] * yj;
                }
            }
        }
        for j in (0..self.n).rev() {
            let diag = self.u_ptr[j + 1] - 1;
            y[j] /= self.u_val[diag];
            let yj = y[j];
            if yj != 0.0 {
                for p in self.u_ptr[j]..diag {
                    y[self.u_idx[p]] -= self.u_val[p] * yj;
                }
            }
        }
        b.copy_from_slice(&y);
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Minimum-degree elimination order of an undirected graph.
///
/// `adjacency[v]` lists the neighbours of `v` (self loops and duplicates are
/// ignored). Ties go to the lowest vertex index, so the order is deterministic.
pub fn minimum_degree(adjacency: &[Vec<usize>]) -> Vec<usize> {
    let n = adjacency.len();
    let mut adj: Vec<Vec<usize>> = adjacency
        .iter()
        .enumerate()
        .map(|(v, nbrs)| {
            let mut list: Vec<usize> = nbrs.iter().copied().filter(|&w| w != v).collect();
            list.sort_unstable();
            list.dedup();
            list
        })
        .collect();
    let mut eliminated = vec![false; n];
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
        (0..n).map(|v| Reverse((adj[v].len(), v))).collect();
    let mut order = Vec::with_capacity(n);
    let mut merged = Vec::new();

    while let Some(Reverse((deg, v))) = heap.pop() {
        if eliminated[v] || deg != adj[v].len() {
            continue;
        }
        eliminated[v] = true;
        order.push(v);
        let nbrs = std::mem::take(&mut adj[v]);
        for &u in &nbrs {
            // u loses v and gains the rest of v's neighbourhood (the fill clique)
            merged.clear();
            let (a, b) = (&adj[u], &nbrs);
            let (mut i, mut j) = (0, 0);
            while i < a.len() || j < b.len() {
                let next = match (a.get(i), b.get(j)) {
                    (Some(&x), Some(&y)) if x == y => {
                        i += 1;
                        j += 1;
                        x
                    }
                    (Some(&x), Some(&y)) if x < y => {
                        i += 1;
                        x
                    }
                    (Some(_), Some(&y)) => {
                        j += 1;
                        y
                    }
                    (Some(&x), None) => {
                        i += 1;
                        x
                    }
                    (None, Some(&y)) => {
                        j += 1;
                        y
                    }
                    (None, None) => unreachable!(),
                };
                if next != u && next != v {
                    merged.push(next);
                }
            }
            std::mem::swap(&mut adj[u], &mut merged);
            heap.push(Reverse((adj[u].len(), u)));
        }
    }
    order
}
