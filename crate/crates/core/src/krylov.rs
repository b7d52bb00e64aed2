//! Right-preconditioned restarted GMRES.

use alloc::vec;
use alloc::vec::Vec;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::math;
use crate::saddle::SaddleOperator;
use crate::sparse::SparseMatrix;
use crate::vector::{dot, norm2, BlockVector};

/// A linear map on merged vectors.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()>;
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        self.num_rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.spmv_into(x, y)
    }
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.num_rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        y.copy_from_slice(&self.matvec(x)?);
        Ok(())
    }
}

impl LinearOperator for SaddleOperator {
    fn dim(&self) -> usize {
        SaddleOperator::dim(self)
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let n_u = self.n_u();
        if x.len() != self.dim() || y.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "saddle operator merged vector",
                expected: self.dim(),
                found: x.len(),
            });
        }
        let (yu, yl) = y.split_at_mut(n_u);
        self.apply_into(&x[..n_u], &x[n_u..], yu, yl)
    }
}

/// The identity on vectors of length `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Identity(pub usize);

impl LinearOperator for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        y.copy_from_slice(x);
        Ok(())
    }
}

/// Wraps a closure as a [`LinearOperator`].
pub struct FnOperator<F> {
    pub dim: usize,
    pub f: F,
}

impl<F> LinearOperator for FnOperator<F>
where
    F: Fn(&[f64], &mut [f64]) -> Result<()>,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        (self.f)(x, y)
    }
}

/// Helper for operators that act on block vectors.
pub fn apply_block<Op: LinearOperator + ?Sized>(op: &Op, x: &BlockVector) -> Result<BlockVector> {
    let mut y = vec![0.0; x.len()];
    op.apply(&x.to_merged(), &mut y)?;
    Ok(BlockVector::from_merged(&y, x.u.len()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresConfig {
    pub rel_tol: f64,
    pub max_iters: usize,
    pub restart: usize,
}

impl Default for GmresConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            max_iters: 1000,
            restart: 100,
        }
    }
}

impl GmresConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::InvalidConfig("rel_tol must lie in (0, 1)"));
        }
        if self.restart == 0 {
            return Err(Error::InvalidConfig("restart must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveReport {
    pub iterations: usize,
    /// Relative residual estimates, starting with 1 for `x0 = 0`.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    /// `||b - A x|| / ||b||` of the returned iterate.
    pub final_relative_residual: f64,
    /// Filled in by callers that own a clock.
    pub setup_seconds: f64,
    pub solve_seconds: f64,
}

fn true_residual<A: LinearOperator + ?Sized>(a: &A, x: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let mut r = vec![0.0; b.len()];
    a.apply(x, &mut r)?;
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    Ok(r)
}

/// Solves `A x = b` from `x0 = 0` with right preconditioner `M^-1`.
///
/// Convergence is declared on the true residual `||b - A x|| <= rel_tol ||b||`,
/// recomputed whenever the Givens estimate reaches the tolerance and at every
/// restart.
pub fn gmres<A, M>(
    a: &A,
    m_inv: &M,
    b: &[f64],
    cfg: &GmresConfig,
) -> Result<(Vec<f64>, SolveReport)>
where
    A: LinearOperator + ?Sized,
    M: LinearOperator + ?Sized,
{
    cfg.validate()?;
    let n = a.dim();
    if b.len() != n || m_inv.dim() != n {
        return Err(Error::DimensionMismatch {
            context: "gmres operator sizes",
            expected: n,
            found: if b.len() != n { b.len() } else { m_inv.dim() },
        });
    }
    let mut x = vec![0.0; n];
    let mut report = SolveReport::default();
    let beta0 = norm2(b);
    report.residual_history.push(1.0);
    if beta0 == 0.0 {
        report.converged = true;
        return Ok((x, report));
    }
    let target = cfg.rel_tol * beta0;
    let mut r = b.to_vec();
    let mut beta = beta0;
    let restart = cfg.restart.min(n.max(1));

    while report.iterations < cfg.max_iters {
        let mut v: Vec<Vec<f64>> = Vec::with_capacity(restart + 1);
        let mut z: Vec<Vec<f64>> = Vec::with_capacity(restart);
        // column-major Hessenberg, column j has j + 2 entries
        let mut h: Vec<Vec<f64>> = Vec::with_capacity(restart);
        let mut cs: Vec<f64> = Vec::with_capacity(restart);
        let mut sn: Vec<f64> = Vec::with_capacity(restart);
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        v.push(r.iter().map(|ri| ri / beta).collect());

        while z.len() < restart && report.iterations < cfg.max_iters {
            let j = z.len();
            let mut zj = vec![0.0; n];
            m_inv.apply(&v[j], &mut zj)?;
            let mut w = vec![0.0; n];
            a.apply(&zj, &mut w)?;
            z.push(zj);
            let mut col = vec![0.0; j + 2];
            for (i, vi) in v.iter().enumerate() {
                let hij = dot(&w, vi)?;
                col[i] = hij;
                for (wk, vk) in w.iter_mut().zip(vi) {
                    *wk -= hij * vk;
                }
            }
            let hnext = norm2(&w);
            col[j + 1] = hnext;
            for i in 0..j {
                let t = cs[i] * col[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            let denom = math::hypot(col[j], col[j + 1]);
            let (c, s) = if denom == 0.0 {
                (1.0, 0.0)
            } else {
                (col[j] / denom, col[j + 1] / denom)
            };
            col[j] = denom;
            col[j + 1] = 0.0;
            g[j + 1] = -s * g[j];
            g[j] *= c;
            cs.push(c);
            sn.push(s);
            h.push(col);
            report.iterations += 1;
            let estimate = g[j + 1].abs();
            report.residual_history.push(estimate / beta0);
            if hnext == 0.0 {
                break;
            }
            if estimate <= target {
                break;
            }
            v.push(w.iter().map(|wi| wi / hnext).collect());
        }

        // back substitution for the least-squares coefficients
        let k = h.len();
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for jj in i + 1..k {
                s -= h[jj][i] * y[jj];
            }
            y[i] = if h[i][i] == 0.0 { 0.0 } else { s / h[i][i] };
        }
        for (yi, zi) in y.iter().zip(&z) {
            for (xk, zk) in x.iter_mut().zip(zi) {
                *xk += yi * zk;
            }
        }
        r = true_residual(a, &x, b)?;
        beta = norm2(&r);
        report.final_relative_residual = beta / beta0;
        if beta <= target {
            report.converged = true;
            break;
        }
        // otherwise restart from the current iterate, also after a breakdown
        // whose estimate was spoiled by rounding
    }
    Ok((x, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::dense_lu_solve;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_converges_in_one() {
        let a = SparseMatrix::identity(4);
        let b = [1.0, 2.0, 3.0, 4.0];
        let (x, rep) = gmres(&a, &Identity(4), &b, &GmresConfig::default()).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged);
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-14);
        }
    }

    #[test]
    fn perfect_preconditioner() {
        let a = SparseMatrix::from_diagonal(&[1.0, 10.0, 100.0]);
        let m = SparseMatrix::from_diagonal(&[1.0, 0.1, 0.01]);
        let (x, rep) = gmres(&a, &m, &[1.0, 1.0, 1.0], &GmresConfig::default()).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!((x[2] - 0.01).abs() < 1e-15);
    }

    #[test]
    fn finite_termination_on_random_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 15;
        let vals: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut a = DenseMatrix::from_row_major(n, n, vals).unwrap();
        for i in 0..n {
            a.set(i, i, a.get(i, i) + 3.0);
        }
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let cfg = GmresConfig {
            rel_tol: 1e-12,
            ..GmresConfig::default()
        };
        let (x, rep) = gmres(&a, &Identity(n), &b, &cfg).unwrap();
        assert!(rep.iterations <= n);
        let xe = dense_lu_solve(&a, &b).unwrap();
        for (xi, ei) in x.iter().zip(&xe) {
            assert!((xi - ei).abs() < 1e-10);
        }
        for w in rep.residual_history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-14));
        }
    }

    #[test]
    fn restarted_run_reaches_tolerance() {
        let n = 40;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.5));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.2));
            }
        }
        let a = SparseMatrix::from_triplets(n, n, &t).unwrap();
        let b = vec![1.0; n];
        let cfg = GmresConfig {
            rel_tol: 1e-10,
            restart: 5,
            max_iters: 500,
        };
        let (x, rep) = gmres(&a, &Identity(n), &b, &cfg).unwrap();
        assert!(rep.converged);
        let r = true_residual(&a, &x, &b).unwrap();
        assert!(norm2(&r) <= 2.0 * 1e-10 * norm2(&b));
        assert!((rep.final_relative_residual - norm2(&r) / norm2(&b)).abs() < 1e-15);
    }

    #[test]
    fn iteration_cap_reports_failure() {
        let n = 30;
        let a = SparseMatrix::from_diagonal(&(1..=n).map(|i| i as f64).collect::<Vec<_>>());
        let cfg = GmresConfig {
            rel_tol: 1e-12,
            restart: 3,
            max_iters: 4,
        };
        let (_, rep) = gmres(&a, &Identity(n), &vec![1.0; n], &cfg).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 4);
    }

    #[test]
    fn zero_rhs() {
        let (x, rep) = gmres(
            &SparseMatrix::identity(2),
            &Identity(2),
            &[0.0, 0.0],
            &GmresConfig::default(),
        )
        .unwrap();
        assert!(rep.converged && rep.iterations == 0);
        assert_eq!(x, vec![0.0, 0.0]);
    }
}
