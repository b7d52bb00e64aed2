//! Dense vector kernels and the two-field block vector.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        });
    }
    Ok(())
}

pub fn dot(x: &[f64], y: &[f64]) -> Result<f64> {
    check_len("dot", x.len(), y.len())?;
    Ok(x.iter().zip(y).map(|(a, b)| a * b).sum())
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) -> Result<()> {
    check_len("axpy", y.len(), x.len())?;
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
    Ok(())
}

/// Euclidean norm; zero for an empty slice.
pub fn norm2(x: &[f64]) -> f64 {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let sum: f64 = x.iter().map(|v| (v / scale) * (v / scale)).sum();
    scale * math::sqrt(sum)
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Displacement / Lagrange-multiplier pair `[u; lam]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BlockVector {
    pub u: Vec<f64>,
    pub lam: Vec<f64>,
}

impl BlockVector {
    pub fn new(u: Vec<f64>, lam: Vec<f64>) -> Self {
        Self { u, lam }
    }

    pub fn zeros(n_u: usize, n_lam: usize) -> Self {
        Self {
            u: vec![0.0; n_u],
            lam: vec![0.0; n_lam],
        }
    }

    /// Splits a merged `[u; lam]` vector after `n_u` entries.
    pub fn from_merged(merged: &[f64], n_u: usize) -> Self {
        Self {
            u: merged[..n_u].to_vec(),
            lam: merged[n_u..].to_vec(),
        }
    }

    pub fn to_merged(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        out.extend_from_slice(&self.u);
        out.extend_from_slice(&self.lam);
        out
    }

    pub fn len(&self) -> usize {
        self.u.len() + self.lam.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn norm2(&self) -> f64 {
        math::hypot(norm2(&self.u), norm2(&self.lam))
    }

    pub fn axpy(&mut self, alpha: f64, x: &BlockVector) -> Result<()> {
        axpy(alpha, &x.u, &mut self.u)?;
        axpy(alpha, &x.lam, &mut self.lam)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        assert_eq!(dot(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 11.0);
        assert_eq!(norm2(&[3.0, 4.0]), 5.0);
        assert_eq!(norm2(&[]), 0.0);
        let mut y = vec![0.0, 1.0];
        axpy(2.0, &[1.0, 1.0], &mut y).unwrap();
        assert_eq!(y, vec![2.0, 3.0]);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(dot(&[1.0], &[1.0, 2.0]).is_err());
        let mut y = vec![0.0; 3];
        assert!(axpy(1.0, &[1.0], &mut y).is_err());
    }

    #[test]
    fn norm_does_not_overflow() {
        let n = norm2(&[1e300, 1e300]);
        assert!((n / 1e300 - core::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn block_vector_merge_split() {
        let b = BlockVector::new(vec![1.0, 2.0], vec![3.0]);
        let m = b.to_merged();
        assert_eq!(m, vec![1.0, 2.0, 3.0]);
        assert_eq!(BlockVector::from_merged(&m, 2), b);
    }
}
