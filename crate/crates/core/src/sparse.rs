//! Compressed sparse row matrices and the row-stochastic operators built
//! from them.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CsrMatrix {
            rows,
            cols,
            indptr: vec![0; rows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds a matrix from `(row, col, value)` entries in any order.
    /// Duplicate coordinates are summed and zero results are not stored.
    pub fn from_triplets(rows: usize, cols: usize, mut entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        for &(r, c, _) in &entries {
            if r >= rows {
                return Err(Error::DimensionMismatch { what: "triplet row", expected: rows, found: r });
            }
            if c >= cols {
                return Err(Error::DimensionMismatch { what: "triplet column", expected: cols, found: c });
            }
        }
        entries.sort_by_key(|a| (a.0, a.1));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indptr[r + 1] += 1;
                indices.push(c);
                values.push(v);
                last = Some((r, c));
            }
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        let mut m = CsrMatrix { rows, cols, indptr, indices, values };
        m.prune_zeros();
        Ok(m)
    }

    fn prune_zeros(&mut self) {
        if self.values.iter().all(|&v| v != 0.0) {
            return;
        }
        let mut indptr = vec![0usize; self.rows + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..self.rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                if v != 0.0 {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr[r + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.values = values;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let span = self.indptr[r]..self.indptr[r + 1];
        (&self.indices[span.clone()], &self.values[span])
    }

    pub fn row_nnz(&self, r: usize) -> usize {
        self.indptr[r + 1] - self.indptr[r]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterates `(row, col, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.cols + 1];
        for &c in &self.indices {
            counts[c + 1] += 1;
        }
        for c in 0..self.cols {
            counts[c + 1] += counts[c];
        }
        let indptr = counts.clone();
        let mut next = counts;
        let mut indices = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for r in 0..self.rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                let slot = next[c];
                indices[slot] = r;
                values[slot] = v;
                next[c] += 1;
            }
        }
        CsrMatrix { rows: self.cols, cols: self.rows, indptr, indices, values }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|r| self.row(r).1.iter().sum()).collect()
    }

    /// Number of stored entries per column.
    pub fn col_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.cols];
        for &c in &self.indices {
            counts[c] += 1;
        }
        counts
    }

    pub fn map_values(&self, mut f: impl FnMut(usize, usize, f64) -> f64) -> CsrMatrix {
        let mut out = self.clone();
        for r in 0..self.rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                out.values[k] = f(r, self.indices[k], self.values[k]);
            }
        }
        out.prune_zeros();
        out
    }

    /// Keeps entries whose row and column both map to a new index.
    pub fn submatrix(&self, row_map: &[Option<usize>], col_map: &[Option<usize>]) -> CsrMatrix {
        let new_rows = row_map.iter().flatten().count();
        let new_cols = col_map.iter().flatten().count();
        let mut indptr = vec![0usize; new_rows + 1];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for (r, nr) in row_map.iter().enumerate() {
            let Some(nr) = *nr else { continue };
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                if let Some(nc) = col_map[c] {
                    indices.push(nc);
                    values.push(v);
                }
            }
            indptr[nr + 1] = indices.len();
        }
        // Retained rows are visited in ascending order, so cumulative fill is
        // already correct for them; rows in between never exist.
        CsrMatrix { rows: new_rows, cols: new_cols, indptr, indices, values }
    }

    /// `out += x^T * self`, i.e. pushes a row vector one step through the
    /// matrix. Zero entries of `x` are skipped.
    pub fn accumulate_left(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        if x.len() != self.rows {
            return Err(Error::DimensionMismatch { what: "left vector", expected: self.rows, found: x.len() });
        }
        if out.len() != self.cols {
            return Err(Error::DimensionMismatch { what: "output vector", expected: self.cols, found: out.len() });
        }
        for (r, &xr) in x.iter().enumerate() {
            if xr == 0.0 {
                continue;
            }
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                out[c] += xr * v;
            }
        }
        Ok(())
    }

    /// `x^T * self`.
    pub fn left_mul(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.cols];
        self.accumulate_left(x, &mut out)?;
        Ok(out)
    }

    /// `self * x`.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch { what: "right vector", expected: self.cols, found: x.len() });
        }
        Ok((0..self.rows)
            .map(|r| {
                let (cols, vals) = self.row(r);
                cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum()
            })
            .collect())
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.rows * self.cols];
        for (r, c, v) in self.iter() {
            d[r * self.cols + c] = v;
        }
        d
    }

    /// Raw CSR parts `(indptr, indices, values)`.
    pub fn parts(&self) -> (&[usize], &[usize], &[f64]) {
        (&self.indptr, &self.indices, &self.values)
    }

    /// Reassembles a matrix from raw CSR parts, validating the layout.
    pub fn from_parts(
        rows: usize,
        cols: usize,
        indptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let bad = |msg: &str| Err(Error::InvalidParameter(alloc::format!("malformed CSR: {msg}")));
        if indptr.len() != rows + 1 || indptr[0] != 0 {
            return bad("row pointer length");
        }
        if indices.len() != values.len() || *indptr.last().unwrap() != indices.len() {
            return bad("entry count");
        }
        for r in 0..rows {
            if indptr[r] > indptr[r + 1] {
                return bad("row pointers not monotone");
            }
            let row = &indices[indptr[r]..indptr[r + 1]];
            if row.iter().any(|&c| c >= cols) || row.windows(2).any(|w| w[0] >= w[1]) {
                return bad("column indices");
            }
        }
        Ok(CsrMatrix { rows, cols, indptr, indices, values })
    }
}

/// Row-stochastic matrix: each row with positive mass sums to one, rows
/// without out-edges are flagged dangling and stay empty.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionOperator {
    matrix: CsrMatrix,
    dangling: Vec<bool>,
}

impl TransitionOperator {
    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn is_dangling(&self, row: usize) -> bool {
        self.dangling[row]
    }

    pub fn dangling(&self) -> &[bool] {
        &self.dangling
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols
    }

    /// One walk step for a distribution given as a row vector.
    pub fn step(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.matrix.left_mul(x)
    }
}

/// Divides each row by its sum. Zero-sum rows are marked dangling.
pub fn row_normalize(m: &CsrMatrix) -> Result<TransitionOperator> {
    let mut dangling = vec![false; m.rows];
    let mut matrix = m.clone();
    for (r, flag) in dangling.iter_mut().enumerate() {
        let span = m.indptr[r]..m.indptr[r + 1];
        let mut sum = 0.0;
        for k in span.clone() {
            let v = m.values[k];
            if v < 0.0 || v.is_nan() {
                return Err(Error::NegativeWeight { row: r, col: m.indices[k], value: v });
            }
            sum += v;
        }
        if sum > 0.0 {
            for k in span {
                matrix.values[k] = m.values[k] / sum;
            }
        } else {
            *flag = true;
        }
    }
    matrix.prune_zeros();
    Ok(TransitionOperator { matrix, dangling })
}
