//! Compressed sparse row matrices and the kernels every other module builds on.

use alloc::vec;
use alloc::vec::Vec;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Entries with magnitude below this are dropped from sparse products.
pub const PRODUCT_DROP_TOL: f64 = 1e-300;

/// Which diagonal [`SparseMatrix::extract_diagonal`] returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagonalMode {
    /// `d_i = a_ii` (zero when not stored).
    Plain,
    /// `d_i = sum_j |a_ij|`, the SIMPLEC lumping.
    AbsRowSum,
}

/// CSR matrix with strictly increasing column indices in every row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    num_rows: usize,
    num_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from raw CSR arrays, validating every structural invariant.
    pub fn from_csr(
        num_rows: usize,
        num_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != num_rows + 1 {
            return Err(Error::DimensionMismatch {
                context: "row_offsets length",
                expected: num_rows + 1,
                found: row_offsets.len(),
            });
        }
        if row_offsets[0] != 0 {
            return Err(Error::InvalidStructure("row_offsets[0] must be 0"));
        }
        if col_indices.len() != values.len() || row_offsets[num_rows] != values.len() {
            return Err(Error::InvalidStructure(
                "row_offsets[num_rows], col_indices and values lengths disagree",
            ));
        }
        for i in 0..num_rows {
            let (start, end) = (row_offsets[i], row_offsets[i + 1]);
            if start > end {
                return Err(Error::InvalidStructure(
                    "row_offsets must be non-decreasing",
                ));
            }
            let cols = &col_indices[start..end];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidStructure(
                    "column indices must be strictly increasing within a row",
                ));
            }
            if cols.last().is_some_and(|&c| c >= num_cols) {
                return Err(Error::InvalidStructure("column index out of range"));
            }
        }
        Ok(Self {
            num_rows,
            num_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Assembles from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(
        num_rows: usize,
        num_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut counts = vec![0usize; num_rows + 1];
        for &(r, c, _) in triplets {
            if r >= num_rows || c >= num_cols {
                return Err(Error::InvalidStructure("triplet index out of range"));
            }
            counts[r + 1] += 1;
        }
        for i in 0..num_rows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(r, c, v) in triplets {
            cols[next[r]] = c;
            vals[next[r]] = v;
            next[r] += 1;
        }

        let mut row_offsets = Vec::with_capacity(num_rows + 1);
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_offsets.push(0);
        let mut row: Vec<(usize, f64)> = Vec::new();
        for i in 0..num_rows {
            row.clear();
            row.extend((counts[i]..counts[i + 1]).map(|k| (cols[k], vals[k])));
            row.sort_by_key(|&(c, _)| c);
            for &(c, v) in &row {
                if col_indices.len() > row_offsets[i] && *col_indices.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_indices.push(c);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(Self {
            num_rows,
            num_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            num_rows: n,
            num_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn zeros(num_rows: usize, num_cols: usize) -> Self {
        Self {
            num_rows,
            num_cols,
            row_offsets: vec![0; num_rows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::identity(diag.len());
        m.values.copy_from_slice(diag);
        m
    }

    /// Converts a dense matrix, storing entries with `|a_ij| > drop_tol`.
    pub fn from_dense(a: &DenseMatrix, drop_tol: f64) -> Self {
        let mut row_offsets = Vec::with_capacity(a.num_rows() + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for i in 0..a.num_rows() {
            for j in 0..a.num_cols() {
                let v = a.get(i, j);
                if v.abs() > drop_tol {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Self {
            num_rows: a.num_rows(),
            num_cols: a.num_cols(),
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn num_cols(&self) -> usize {
        self.num_cols
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
        self.num_rows == self.num_cols
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[range.clone()], &self.values[range])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// Iterates all stored entries as `(row, col, value)` in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.num_rows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&c, &v)| (i, c, v))
        })
    }

    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.num_rows];
        self.spmv_into(x, &mut y)?;
        Ok(y)
    }

    /// `y = A x`
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.check_apply(x, y)?;
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum();
        }
        Ok(())
    }

    /// `y += alpha * A x`
    pub fn spmv_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.check_apply(x, y)?;
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            let s: f64 = cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum();
            *yi += alpha * s;
        }
        Ok(())
    }

    fn check_apply(&self, x: &[f64], y: &[f64]) -> Result<()> {
        if x.len() != self.num_cols {
            return Err(Error::DimensionMismatch {
                context: "spmv input",
                expected: self.num_cols,
                found: x.len(),
            });
        }
        if y.len() != self.num_rows {
            return Err(Error::DimensionMismatch {
                context: "spmv output",
                expected: self.num_rows,
                found: y.len(),
            });
        }
        Ok(())
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.num_cols + 1];
        for &c in &self.col_indices {
            counts[c + 1] += 1;
        }
        for j in 0..self.num_cols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut col_indices = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        // rows are visited in ascending order, so every output row comes out sorted
        for (i, j, v) in self.triplets() {
            col_indices[next[j]] = i;
            values[next[j]] = v;
            next[j] += 1;
        }
        SparseMatrix {
            num_rows: self.num_cols,
            num_cols: self.num_rows,
            row_offsets: counts,
            col_indices,
            values,
        }
    }

    /// Sparse product `self * other` (row-by-row accumulation).
    pub fn matmul(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        if self.num_cols != other.num_rows {
            return Err(Error::DimensionMismatch {
                context: "sparse matmul",
                expected: self.num_cols,
                found: other.num_rows,
            });
        }
        let n = other.num_cols;
        let mut acc = vec![0.0; n];
        let mut marker = vec![usize::MAX; n];
        let mut pattern: Vec<usize> = Vec::new();
        let mut row_offsets = Vec::with_capacity(self.num_rows + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for i in 0..self.num_rows {
            pattern.clear();
            let (acols, avals) = self.row(i);
            for (&k, &a) in acols.iter().zip(avals) {
                let (bcols, bvals) = other.row(k);
                for (&j, &b) in bcols.iter().zip(bvals) {
                    if marker[j] != i {
                        marker[j] = i;
                        acc[j] = 0.0;
                        pattern.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            pattern.sort_unstable();
            for &j in &pattern {
                if acc[j].abs() >= PRODUCT_DROP_TOL {
                    col_indices.push(j);
                    values.push(acc[j]);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(SparseMatrix {
            num_rows: self.num_rows,
            num_cols: n,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// `alpha * self + beta * other` with the union pattern.
    pub fn add_scaled(&self, alpha: f64, other: &SparseMatrix, beta: f64) -> Result<SparseMatrix> {
        if self.num_rows != other.num_rows || self.num_cols != other.num_cols {
            return Err(Error::DimensionMismatch {
                context: "sparse add",
                expected: self.num_rows * self.num_cols,
                found: other.num_rows * other.num_cols,
            });
        }
        let mut row_offsets = Vec::with_capacity(self.num_rows + 1);
        let mut col_indices = Vec::with_capacity(self.nnz() + other.nnz());
        let mut values = Vec::with_capacity(self.nnz() + other.nnz());
        row_offsets.push(0);
        for i in 0..self.num_rows {
            let (ac, av) = self.row(i);
            let (bc, bv) = other.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ac.len() || q < bc.len() {
                let take_a = q >= bc.len() || (p < ac.len() && ac[p] <= bc[q]);
                let take_b = p >= ac.len() || (q < bc.len() && bc[q] <= ac[p]);
                let (c, v) = match (take_a, take_b) {
                    (true, true) => {
                        let r = (ac[p], alpha * av[p] + beta * bv[q]);
                        p += 1;
                        q += 1;
                        r
                    }
                    (true, false) => {
                        p += 1;
                        (ac[p - 1], alpha * av[p - 1])
                    }
                    _ => {
                        q += 1;
                        (bc[q - 1], beta * bv[q - 1])
                    }
                };
                col_indices.push(c);
                values.push(v);
            }
            row_offsets.push(col_indices.len());
        }
        Ok(SparseMatrix {
            num_rows: self.num_rows,
            num_cols: self.num_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// `diag(d) * self`
    pub fn scale_rows(&self, d: &[f64]) -> Result<SparseMatrix> {
        if d.len() != self.num_rows {
            return Err(Error::DimensionMismatch {
                context: "row scaling",
                expected: self.num_rows,
                found: d.len(),
            });
        }
        let mut out = self.clone();
        for (i, &di) in d.iter().enumerate() {
            for v in &mut out.values[self.row_offsets[i]..self.row_offsets[i + 1]] {
                *v *= di;
            }
        }
        Ok(out)
    }

    pub fn scale(&self, alpha: f64) -> SparseMatrix {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    pub fn extract_diagonal(&self, mode: DiagonalMode) -> Result<Vec<f64>> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                context: "diagonal of non-square matrix",
                expected: self.num_rows,
                found: self.num_cols,
            });
        }
        (0..self.num_rows)
            .map(|i| match mode {
                DiagonalMode::Plain => Ok(self.get(i, i)),
                DiagonalMode::AbsRowSum => {
                    let s: f64 = self.row(i).1.iter().map(|v| v.abs()).sum();
                    if s == 0.0 {
                        Err(Error::SingularLumping { row: i })
                    } else {
                        Ok(s)
                    }
                }
            })
            .collect()
    }

    /// Max absolute difference between `A` and `A^T` entries.
    pub fn symmetry_defect(&self) -> f64 {
        let t = self.transpose();
        match self.add_scaled(1.0, &t, -1.0) {
            Ok(d) => d.values.iter().fold(0.0f64, |m, v| m.max(v.abs())),
            Err(_) => f64::INFINITY,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// True when the row has no stored nonzero entry.
    pub fn row_is_zero(&self, i: usize) -> bool {
        self.row(i).1.iter().all(|&v| v == 0.0)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.num_rows, self.num_cols);
        for (i, j, v) in self.triplets() {
            d.set(i, j, d.get(i, j) + v);
        }
        d
    }
}

/// `R * A * P`, the Galerkin coarse operator.
pub fn galerkin_triple(
    r: &SparseMatrix,
    a: &SparseMatrix,
    p: &SparseMatrix,
) -> Result<SparseMatrix> {
    if r.num_cols() != a.num_rows() {
        return Err(Error::DimensionMismatch {
            context: "galerkin R*A",
            expected: a.num_rows(),
            found: r.num_cols(),
        });
    }
    if a.num_cols() != p.num_rows() {
        return Err(Error::DimensionMismatch {
            context: "galerkin A*P",
            expected: a.num_cols(),
            found: p.num_rows(),
        });
    }
    r.matmul(&a.matmul(p)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn m(rows: &[&[f64]]) -> SparseMatrix {
        let nr = rows.len();
        let nc = rows[0].len();
        let mut t = Vec::new();
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        SparseMatrix::from_triplets(nr, nc, &t).unwrap()
    }

    #[test]
    fn spmv_examples() {
        let i3 = SparseMatrix::identity(3);
        assert_eq!(i3.spmv(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        let z = SparseMatrix::zeros(2, 2);
        assert_eq!(z.spmv(&[5.0, 7.0]).unwrap(), vec![0.0, 0.0]);
        let a = m(&[&[2.0, 0.0], &[1.0, 3.0]]);
        assert_eq!(a.spmv(&[1.0, 1.0]).unwrap(), vec![2.0, 4.0]);
        assert!(matches!(
            a.spmv(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn transpose_examples() {
        assert_eq!(
            SparseMatrix::identity(4).transpose(),
            SparseMatrix::identity(4)
        );
        let a = m(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let expected = m(&[&[0.0, 0.0], &[1.0, 0.0]]);
        assert_eq!(a.transpose(), expected);
    }

    #[test]
    fn from_triplets_sums_duplicates() {
        let a =
            SparseMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (0, 1, 2.0), (1, 0, 4.0)]).unwrap();
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.get(0, 1), 3.0);
    }

    #[test]
    fn from_csr_rejects_bad_structure() {
        assert!(SparseMatrix::from_csr(1, 3, vec![0, 2], vec![2, 1], vec![1.0, 1.0]).is_err());
        assert!(SparseMatrix::from_csr(1, 2, vec![0, 1], vec![2], vec![1.0]).is_err());
        assert!(SparseMatrix::from_csr(2, 2, vec![0, 1], vec![0], vec![1.0]).is_err());
        assert!(SparseMatrix::from_csr(1, 2, vec![1, 1], vec![0], vec![1.0]).is_err());
        assert!(SparseMatrix::from_csr(1, 2, vec![0, 2], vec![0, 1], vec![1.0, 2.0]).is_ok());
    }

    #[test]
    fn matmul_identity_and_permutation() {
        let a = m(&[&[1.0, 2.0, 0.0], &[0.0, 0.0, 3.0]]);
        assert_eq!(a.matmul(&SparseMatrix::identity(3)).unwrap(), a);
        let p = m(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]]);
        assert_eq!(p.matmul(&p.transpose()).unwrap(), SparseMatrix::identity(3));
        assert!(a.matmul(&a).is_err());
    }

    #[test]
    fn galerkin_aggregate_of_all() {
        let n = 5;
        let ones =
            SparseMatrix::from_triplets(n, 1, &(0..n).map(|i| (i, 0, 1.0)).collect::<Vec<_>>())
                .unwrap();
        let c = galerkin_triple(&ones.transpose(), &SparseMatrix::identity(n), &ones).unwrap();
        assert_eq!(c.num_rows(), 1);
        assert_eq!(c.get(0, 0), n as f64);
        let a = m(&[&[4.0, -1.0], &[-1.0, 4.0]]);
        let i2 = SparseMatrix::identity(2);
        assert_eq!(galerkin_triple(&i2, &a, &i2).unwrap(), a);
    }

    #[test]
    fn diagonal_modes() {
        assert_eq!(
            SparseMatrix::identity(3)
                .extract_diagonal(DiagonalMode::Plain)
                .unwrap(),
            vec![1.0, 1.0, 1.0]
        );
        let a = m(&[&[2.0, -1.0], &[-1.0, 2.0]]);
        assert_eq!(
            a.extract_diagonal(DiagonalMode::AbsRowSum).unwrap(),
            vec![3.0, 3.0]
        );
        let b = m(&[&[1.0, 0.0], &[0.0, -5.0]]);
        assert_eq!(
            b.extract_diagonal(DiagonalMode::Plain).unwrap(),
            vec![1.0, -5.0]
        );
        let z = m(&[&[1.0, 0.0], &[0.0, 0.0]]);
        assert_eq!(
            z.extract_diagonal(DiagonalMode::AbsRowSum),
            Err(Error::SingularLumping { row: 1 })
        );
        assert_eq!(
            z.extract_diagonal(DiagonalMode::Plain).unwrap(),
            vec![1.0, 0.0]
        );
    }

    #[test]
    fn add_scaled_union_pattern() {
        let a = m(&[&[1.0, 0.0], &[0.0, 2.0]]);
        let b = m(&[&[0.0, 3.0], &[0.0, 4.0]]);
        let c = a.add_scaled(2.0, &b, -1.0).unwrap();
        assert_eq!(c.to_dense().get(0, 0), 2.0);
        assert_eq!(c.to_dense().get(0, 1), -3.0);
        assert_eq!(c.to_dense().get(1, 1), 0.0);
    }
}
