//! The generalized saddle-point operator `[[K, B1], [B2, -Cz]]`.

use alloc::vec::Vec;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;
use crate::vector::BlockVector;

/// Block operator `[[K, B1], [B2, -Cz]]`. The `-` in front of `Cz` is part of
/// the operator, `cz` stores the block without it.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleOperator {
    pub k: SparseMatrix,
    pub b1: SparseMatrix,
    pub b2: SparseMatrix,
    pub cz: SparseMatrix,
}

/// Saddle-point operator plus its block right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleSystem {
    pub op: SaddleOperator,
    pub rhs: BlockVector,
}

fn expect(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}

impl SaddleOperator {
    pub fn new(
        k: SparseMatrix,
        b1: SparseMatrix,
        b2: SparseMatrix,
        cz: SparseMatrix,
    ) -> Result<Self> {
        let op = Self { k, b1, b2, cz };
        op.validate()?;
        Ok(op)
    }

    pub fn validate(&self) -> Result<()> {
        let n_u = self.k.num_rows();
        let n_lam = self.cz.num_rows();
        expect("K columns", n_u, self.k.num_cols())?;
        expect("B1 rows", n_u, self.b1.num_rows())?;
        expect("B1 columns", n_lam, self.b1.num_cols())?;
        expect("B2 rows", n_lam, self.b2.num_rows())?;
        expect("B2 columns", n_u, self.b2.num_cols())?;
        expect("Cz columns", n_lam, self.cz.num_cols())
    }

    pub fn n_u(&self) -> usize {
        self.k.num_rows()
    }

    pub fn n_lam(&self) -> usize {
        self.cz.num_rows()
    }

    pub fn dim(&self) -> usize {
        self.n_u() + self.n_lam()
    }

    /// Stored entries over all four blocks.
    pub fn nnz(&self) -> usize {
        self.k.nnz() + self.b1.nnz() + self.b2.nnz() + self.cz.nnz()
    }

    pub fn apply(&self, x: &BlockVector) -> Result<BlockVector> {
        let mut y = BlockVector::zeros(self.n_u(), self.n_lam());
        self.apply_into(&x.u, &x.lam, &mut y.u, &mut y.lam)?;
        Ok(y)
    }

    pub fn apply_into(
        &self,
        u: &[f64],
        lam: &[f64],
        out_u: &mut [f64],
        out_lam: &mut [f64],
    ) -> Result<()> {
        self.k.spmv_into(u, out_u)?;
        self.b1.spmv_add(1.0, lam, out_u)?;
        self.b2.spmv_into(u, out_lam)?;
        self.cz.spmv_add(-1.0, lam, out_lam)
    }

    /// `b - A x`
    pub fn residual(&self, x: &BlockVector, b: &BlockVector) -> Result<BlockVector> {
        let mut r = self.apply(x)?;
        for (ri, bi) in r.u.iter_mut().zip(&b.u) {
            *ri = bi - *ri;
        }
        for (ri, bi) in r.lam.iter_mut().zip(&b.lam) {
            *ri = bi - *ri;
        }
        Ok(r)
    }

    /// Merged monolithic matrix of size `(n_u + n_lam)^2`.
    pub fn to_merged(&self) -> SparseMatrix {
        let n_u = self.n_u();
        let mut t: Vec<(usize, usize, f64)> = Vec::with_capacity(self.nnz());
        t.extend(self.k.triplets());
        t.extend(self.b1.triplets().map(|(i, j, v)| (i, n_u + j, v)));
        t.extend(self.b2.triplets().map(|(i, j, v)| (n_u + i, j, v)));
        t.extend(self.cz.triplets().map(|(i, j, v)| (n_u + i, n_u + j, -v)));
        SparseMatrix::from_triplets(self.dim(), self.dim(), &t)
            .expect("block indices are in range by construction")
    }

    pub fn to_dense(&self) -> DenseMatrix {
        self.to_merged().to_dense()
    }
}

impl SaddleSystem {
    pub fn new(op: SaddleOperator, rhs: BlockVector) -> Result<Self> {
        op.validate()?;
        expect("rhs.u", op.n_u(), rhs.u.len())?;
        expect("rhs.lam", op.n_lam(), rhs.lam.len())?;
        Ok(Self { op, rhs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn apply_matches_merged() {
        let k =
            SparseMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (1, 1, 3.0), (0, 1, 1.0)]).unwrap();
        let b1 = SparseMatrix::from_triplets(2, 1, &[(0, 0, 1.0)]).unwrap();
        let b2 = SparseMatrix::from_triplets(1, 2, &[(0, 1, 4.0)]).unwrap();
        let cz = SparseMatrix::from_triplets(1, 1, &[(0, 0, 0.5)]).unwrap();
        let op = SaddleOperator::new(k, b1, b2, cz).unwrap();
        let x = BlockVector::new(vec![1.0, 2.0], vec![3.0]);
        let y = op.apply(&x).unwrap();
        let ym = op.to_merged().spmv(&x.to_merged()).unwrap();
        assert_eq!(y.to_merged(), ym);
        assert_eq!(y.lam, vec![8.0 - 1.5]);
    }

    #[test]
    fn inconsistent_blocks_rejected() {
        let op = SaddleOperator::new(
            SparseMatrix::identity(2),
            SparseMatrix::zeros(2, 1),
            SparseMatrix::zeros(1, 3),
            SparseMatrix::identity(1),
        );
        assert!(op.is_err());
    }
}
