//! Small dense matrices: near-kernel blocks, coarse direct solves and test oracles.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    num_rows: usize,
    num_cols: usize,
    values: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(num_rows: usize, num_cols: usize) -> Self {
        Self {
            num_rows,
            num_cols,
            values: vec![0.0; num_rows * num_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_row_major(num_rows: usize, num_cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != num_rows * num_cols {
            return Err(Error::DimensionMismatch {
                context: "dense values",
                expected: num_rows * num_cols,
                found: values.len(),
            });
        }
        Ok(Self {
            num_rows,
            num_cols,
            values,
        })
    }

    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn num_cols(&self) -> usize {
        self.num_cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.num_cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.num_cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.num_cols..(i + 1) * self.num_cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.num_rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = Self::zeros(self.num_cols, self.num_rows);
        for i in 0..self.num_rows {
            for j in 0..self.num_cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.num_cols {
            return Err(Error::DimensionMismatch {
                context: "dense matvec",
                expected: self.num_cols,
                found: x.len(),
            });
        }
        Ok((0..self.num_rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.num_cols != other.num_rows {
            return Err(Error::DimensionMismatch {
                context: "dense matmul",
                expected: self.num_cols,
                found: other.num_rows,
            });
        }
        let mut c = Self::zeros(self.num_rows, other.num_cols);
        for i in 0..self.num_rows {
            for k in 0..self.num_cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.num_cols {
                    c.values[i * other.num_cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(c)
    }

    /// `alpha * self + beta * other`
    pub fn add_scaled(&self, alpha: f64, other: &DenseMatrix, beta: f64) -> Result<DenseMatrix> {
        if self.num_rows != other.num_rows || self.num_cols != other.num_cols {
            return Err(Error::DimensionMismatch {
                context: "dense add",
                expected: self.values.len(),
                found: other.values.len(),
            });
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        Ok(DenseMatrix {
            num_rows: self.num_rows,
            num_cols: self.num_cols,
            values,
        })
    }

    pub fn scaled(&self, alpha: f64) -> DenseMatrix {
        DenseMatrix {
            num_rows: self.num_rows,
            num_cols: self.num_cols,
            values: self.values.iter().map(|v| alpha * v).collect(),
        }
    }

    /// Copy of rows `r0..r1`, columns `c0..c1`.
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> DenseMatrix {
        let mut b = Self::zeros(r1 - r0, c1 - c0);
        for i in r0..r1 {
            for j in c0..c1 {
                b.set(i - r0, j - c0, self.get(i, j));
            }
        }
        b
    }

    /// Writes `b` into this matrix with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, b: &DenseMatrix) {
        for i in 0..b.num_rows {
            for j in 0..b.num_cols {
                self.set(r0 + i, c0 + j, b.get(i, j));
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn lu(&self) -> Result<DenseLu> {
        DenseLu::factor(self)
    }

    pub fn inverse(&self) -> Result<DenseMatrix> {
        let lu = self.lu()?;
        let n = self.num_rows;
        let mut inv = Self::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = lu.solve(&e)?;
            for (i, v) in col.into_iter().enumerate() {
                inv.set(i, j, v);
            }
        }
        Ok(inv)
    }
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLu {
    n: usize,
    factors: Vec<f64>,
    pivots: Vec<usize>,
}

impl DenseLu {
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        if a.num_rows != a.num_cols {
            return Err(Error::DimensionMismatch {
                context: "LU of non-square matrix",
                expected: a.num_rows,
                found: a.num_cols,
            });
        }
        let n = a.num_rows;
        let mut f = a.values.clone();
        let mut pivots = vec![0usize; n];
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, f[i * n + k].abs()))
                .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
            if pmax == 0.0 {
                return Err(Error::SingularMatrix { row: k });
            }
            pivots[k] = p;
            if p != k {
                for j in 0..n {
                    f.swap(k * n + j, p * n + j);
                }
            }
            let pivot = f[k * n + k];
            for i in k + 1..n {
                let l = f[i * n + k] / pivot;
                f[i * n + k] = l;
                if l != 0.0 {
                    for j in k + 1..n {
                        f[i * n + j] -= l * f[k * n + j];
                    }
                }
            }
        }
        Ok(Self {
            n,
            factors: f,
            pivots,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    pub fn solve_in_place(&self, x: &mut [f64]) -> Result<()> {
        let n = self.n;
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                context: "LU solve",
                expected: n,
                found: x.len(),
            });
        }
        for k in 0..n {
            x.swap(k, self.pivots[k]);
        }
        let f = &self.factors;
        for i in 0..n {
            let s: f64 = (0..i).map(|j| f[i * n + j] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| f[i * n + j] * x[j]).sum();
            x[i] = (x[i] - s) / f[i * n + i];
        }
        Ok(())
    }
}

/// Solves `A x = b` by LU with partial pivoting.
pub fn dense_lu_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    a.lu()?.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_examples() {
        assert_eq!(
            dense_lu_solve(&DenseMatrix::identity(2), &[3.0, 4.0]).unwrap(),
            vec![3.0, 4.0]
        );
        let a = DenseMatrix::from_row_major(2, 2, vec![2.0, 1.0, 1.0, 3.0]).unwrap();
        let x = dense_lu_solve(&a, &[3.0, 4.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lu_hilbert() {
        let n = 4;
        let mut h = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                h.set(i, j, 1.0 / (i + j + 1) as f64);
            }
        }
        let b = h.matvec(&[1.0; 4]).unwrap();
        let x = dense_lu_solve(&h, &b).unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn lu_needs_pivoting_and_detects_singularity() {
        let a = DenseMatrix::from_row_major(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(dense_lu_solve(&a, &[2.0, 3.0]).unwrap(), vec![3.0, 2.0]);
        let s = DenseMatrix::from_row_major(2, 2, vec![1.0, 2.0, 2.0, 4.0]).unwrap();
        assert!(matches!(s.lu(), Err(Error::SingularMatrix { .. })));
    }
}
