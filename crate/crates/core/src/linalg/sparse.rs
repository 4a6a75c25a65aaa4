//! Compressed sparse row storage.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::dense::DenseMatrix;
use crate::error::{check_len, Error, Result};

/// A real matrix in compressed sparse row form.
///
/// Columns inside each row are strictly increasing, so there are no duplicate
/// entries and traversal order is fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from raw CSR arrays, validating every structural invariant.
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != n_rows + 1 {
            return Err(Error::InvalidStructure(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                n_rows + 1
            )));
        }
        if row_offsets[0] != 0 {
            return Err(Error::InvalidStructure("row_offsets[0] must be 0".into()));
        }
        if col_indices.len() != values.len() || row_offsets[n_rows] != values.len() {
            return Err(Error::InvalidStructure(format!(
                "row_offsets ends at {} but there are {} column indices and {} values",
                row_offsets[n_rows],
                col_indices.len(),
                values.len()
            )));
        }
        for i in 0..n_rows {
            let (start, end) = (row_offsets[i], row_offsets[i + 1]);
            if end < start {
                return Err(Error::InvalidStructure(format!(
                    "row_offsets decreases at row {i}"
                )));
            }
            let cols = &col_indices[start..end];
            for (pos, &c) in cols.iter().enumerate() {
                if c >= n_cols {
                    return Err(Error::InvalidStructure(format!(
                        "column index {c} out of range in row {i} (n_cols = {n_cols})"
                    )));
                }
                if pos > 0 && cols[pos - 1] >= c {
                    return Err(Error::InvalidStructure(format!(
                        "column indices in row {i} are not strictly increasing"
                    )));
                }
            }
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("sparse matrix values"));
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Assembles from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut counts = vec![0usize; n_rows + 1];
        for &(i, j, _) in triplets {
            if i >= n_rows || j >= n_cols {
                return Err(Error::InvalidStructure(format!(
                    "triplet ({i}, {j}) outside a {n_rows}x{n_cols} matrix"
                )));
            }
            counts[i + 1] += 1;
        }
        for i in 0..n_rows {
            counts[i + 1] += counts[i];
        }
        // Bucket by row, keeping insertion order, then sort and merge each row.
        let mut slots = counts.clone();
        let mut bucket: Vec<(usize, f64)> = vec![(0, 0.0); triplets.len()];
        for &(i, j, v) in triplets {
            bucket[slots[i]] = (j, v);
            slots[i] += 1;
        }
        let mut row_offsets = Vec::with_capacity(n_rows + 1);
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_offsets.push(0);
        for i in 0..n_rows {
            let row = &mut bucket[counts[i]..counts[i + 1]];
            row.sort_by_key(|&(j, _)| j);
            let mut last: Option<usize> = None;
            for &(j, v) in row.iter() {
                if last == Some(j) {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_indices.push(j);
                    values.push(v);
                    last = Some(j);
                }
            }
            row_offsets.push(values.len());
        }
        Self::new(n_rows, n_cols, row_offsets, col_indices, values)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Sparse copy of a dense matrix; exact zeros are not stored.
    pub fn from_dense(dense: &DenseMatrix) -> Self {
        let mut row_offsets = Vec::with_capacity(dense.n_rows() + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for i in 0..dense.n_rows() {
            for (j, &v) in dense.row(i).iter().enumerate() {
                if v != 0.0 {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_offsets.push(values.len());
        }
        Self {
            n_rows: dense.n_rows(),
            n_cols: dense.n_cols(),
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                d[(i, j)] = v;
            }
        }
        d
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    /// Stored entries of row `i` as `(column, value)` pairs.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        self.col_indices[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        match self.col_indices[range.clone()].binary_search(&j) {
            Ok(pos) => self.values[range.start + pos],
            Err(_) => 0.0,
        }
    }

    /// Largest absolute stored value.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| f64::max(m, v.abs()))
    }

    /// `y = A x` written into `y`.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n_cols, "spmv: x has wrong length");
        assert_eq!(y.len(), self.n_rows, "spmv: y has wrong length");
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                acc += self.values[k] * x[self.col_indices[k]];
            }
            *yi = acc;
        }
    }

    /// `y = A^T x` written into `y`.
    pub fn mul_vec_t_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n_rows, "spmv_t: x has wrong length");
        assert_eq!(y.len(), self.n_cols, "spmv_t: y has wrong length");
        y.fill(0.0);
        for (i, &xi) in x.iter().enumerate() {
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                y[self.col_indices[k]] += self.values[k] * xi;
            }
        }
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &j in &self.col_indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.n_cols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut col_indices = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        // Rows are visited in increasing order, so each transposed row comes out sorted.
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                let slot = next[j];
                col_indices[slot] = i;
                values[slot] = v;
                next[j] += 1;
            }
        }
        Self {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_offsets: counts,
            col_indices,
            values,
        }
    }

    /// Sparse product `self * other` (Gustavson's row-by-row algorithm).
    ///
    /// `nnz_cap` bounds the number of stored entries in the result.
    pub fn matmul(&self, other: &SparseMatrix, nnz_cap: usize) -> Result<Self> {
        check_len("sparse matmul", self.n_cols, other.n_rows)?;
        let mut marker = vec![usize::MAX; other.n_cols];
        let mut accum = vec![0.0; other.n_cols];
        let mut row_cols: Vec<usize> = Vec::new();
        let mut row_offsets = Vec::with_capacity(self.n_rows + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for i in 0..self.n_rows {
            row_cols.clear();
            for (k, a_ik) in self.row(i) {
                for (j, b_kj) in other.row(k) {
                    if marker[j] != i {
                        marker[j] = i;
                        accum[j] = 0.0;
                        row_cols.push(j);
                    }
                    accum[j] += a_ik * b_kj;
                }
            }
            row_cols.sort_unstable();
            for &j in &row_cols {
                col_indices.push(j);
                values.push(accum[j]);
            }
            if values.len() > nnz_cap {
                return Err(Error::Capacity {
                    what: "sparse product",
                    size: values.len(),
                    cap: nnz_cap,
                    hint: "raise the nnz cap or use a smaller problem",
                });
            }
            row_offsets.push(values.len());
        }
        Ok(Self {
            n_rows: self.n_rows,
            n_cols: other.n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// `self + alpha * other` on the union of both sparsity patterns.
    pub fn add_scaled(&self, alpha: f64, other: &SparseMatrix) -> Result<Self> {
        check_len("sparse add (rows)", self.n_rows, other.n_rows)?;
        check_len("sparse add (cols)", self.n_cols, other.n_cols)?;
        let mut row_offsets = Vec::with_capacity(self.n_rows + 1);
        let mut col_indices = Vec::with_capacity(self.nnz() + other.nnz());
        let mut values = Vec::with_capacity(self.nnz() + other.nnz());
        row_offsets.push(0);
        for i in 0..self.n_rows {
            let mut a = self.row(i).peekable();
            let mut b = other.row(i).peekable();
            loop {
                match (a.peek().copied(), b.peek().copied()) {
                    (Some((ja, va)), Some((jb, vb))) if ja == jb => {
                        col_indices.push(ja);
                        values.push(va + alpha * vb);
                        a.next();
                        b.next();
                    }
                    (Some((ja, va)), Some((jb, _))) if ja < jb => {
                        col_indices.push(ja);
                        values.push(va);
                        a.next();
                    }
                    (Some((ja, va)), None) => {
                        col_indices.push(ja);
                        values.push(va);
                        a.next();
                    }
                    (_, Some((jb, vb))) => {
                        col_indices.push(jb);
                        values.push(alpha * vb);
                        b.next();
                    }
                    (None, None) => break,
                }
            }
            row_offsets.push(values.len());
        }
        Ok(Self {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Checks structural and numerical symmetry: every `|a_ij - a_ji|` must be
    /// at most `rel_tol * max|a|`.
    pub fn check_symmetric(&self, rel_tol: f64) -> Result<()> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                context: "symmetry check (square matrix)",
                expected: self.n_rows,
                got: self.n_cols,
            });
        }
        let threshold = rel_tol * self.max_abs();
        let t = self.transpose();
        for i in 0..self.n_rows {
            // Compare row i of A against row i of A^T over the union pattern.
            let diff = self.add_row_diff(&t, i);
            if let Some((j, d)) = diff.into_iter().find(|&(_, d)| d > threshold) {
                return Err(Error::NotSymmetric {
                    row: i,
                    col: j,
                    diff: d,
                });
            }
        }
        Ok(())
    }

    fn add_row_diff(&self, other: &SparseMatrix, i: usize) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        let mut a = self.row(i).peekable();
        let mut b = other.row(i).peekable();
        loop {
            match (a.peek().copied(), b.peek().copied()) {
                (Some((ja, va)), Some((jb, vb))) if ja == jb => {
                    out.push((ja, (va - vb).abs()));
                    a.next();
                    b.next();
                }
                (Some((ja, va)), Some((jb, _))) if ja < jb => {
                    out.push((ja, va.abs()));
                    a.next();
                }
                (Some((ja, va)), None) => {
                    out.push((ja, va.abs()));
                    a.next();
                }
                (_, Some((jb, vb))) => {
                    out.push((jb, vb.abs()));
                    b.next();
                }
                (None, None) => break,
            }
        }
        out
    }
}

/// `y = A x`
pub fn spmv(a: &SparseMatrix, x: &[f64]) -> Result<Vec<f64>> {
    check_len("spmv", a.n_cols(), x.len())?;
    let mut y = vec![0.0; a.n_rows()];
    a.mul_vec_into(x, &mut y);
    Ok(y)
}

/// `y = A^T x`
pub fn spmv_t(a: &SparseMatrix, x: &[f64]) -> Result<Vec<f64>> {
    check_len("spmv_t", a.n_rows(), x.len())?;
    let mut y = vec![0.0; a.n_cols()];
    a.mul_vec_t_into(x, &mut y);
    Ok(y)
}
