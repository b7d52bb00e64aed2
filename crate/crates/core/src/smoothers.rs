//! Point smoothers and saddle-point block smoothers.
//!
//! Inner solves always start from zero, so one application of any smoother
//! is an affine map of the iterate and a linear map of the residual.

use alloc::vec;
use alloc::vec::Vec;

use crate::dense::{DenseLu, DenseMatrix};
use crate::error::{Error, Result};
use crate::hierarchy::ScalarAmg;
use crate::saddle::SaddleOperator;
use crate::sparse::{DiagonalMode, SparseMatrix};
use crate::vector::BlockVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointSmootherKind {
    Jacobi,
    /// Symmetric Gauss-Seidel: one forward and one backward pass per sweep.
    Sgs,
    Ilu0,
    /// Dense LU solve. Meant for small matrices only.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSmootherConfig {
    pub kind: PointSmootherKind,
    pub sweeps: usize,
    pub damping: f64,
}

impl PointSmootherConfig {
    pub fn new(kind: PointSmootherKind, sweeps: usize, damping: f64) -> Self {
        Self {
            kind,
            sweeps,
            damping,
        }
    }

    pub fn jacobi(sweeps: usize, damping: f64) -> Self {
        Self::new(PointSmootherKind::Jacobi, sweeps, damping)
    }

    pub fn sgs(sweeps: usize, damping: f64) -> Self {
        Self::new(PointSmootherKind::Sgs, sweeps, damping)
    }

    pub fn ilu0() -> Self {
        Self::new(PointSmootherKind::Ilu0, 1, 1.0)
    }

    pub fn direct() -> Self {
        Self::new(PointSmootherKind::Direct, 1, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweeps == 0 {
            return Err(Error::InvalidConfig(
                "point smoother needs at least one sweep",
            ));
        }
        if !(self.damping > 0.0 && self.damping < 2.0) {
            return Err(Error::InvalidConfig(
                "point smoother damping must lie in (0, 2)",
            ));
        }
        Ok(())
    }
}

/// ILU(0) factors stored on the pattern of the input matrix: strict lower
/// part holds `L` (unit diagonal implied), the rest holds `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ilu0 {
    lu: SparseMatrix,
    diag_pos: Vec<usize>,
}

impl Ilu0 {
    pub fn factor(a: &SparseMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                context: "ILU(0) of a non-square matrix",
                expected: a.num_rows(),
                found: a.num_cols(),
            });
        }
        let n = a.num_rows();
        let offsets = a.row_offsets().to_vec();
        let cols = a.col_indices().to_vec();
        let mut vals = a.values().to_vec();
        let mut diag_pos = vec![usize::MAX; n];
        for i in 0..n {
            for p in offsets[i]..offsets[i + 1] {
                if cols[p] == i {
                    diag_pos[i] = p;
                }
            }
            if diag_pos[i] == usize::MAX {
                return Err(Error::ZeroPivot { row: i });
            }
        }
        let mut marker = vec![usize::MAX; n];
        for i in 0..n {
            for p in offsets[i]..offsets[i + 1] {
                marker[cols[p]] = p;
            }
            for p in offsets[i]..offsets[i + 1] {
                let k = cols[p];
                if k >= i {
                    break;
                }
                let pivot = vals[diag_pos[k]];
                vals[p] /= pivot;
                let lik = vals[p];
                for q in diag_pos[k] + 1..offsets[k + 1] {
                    let m = marker[cols[q]];
                    if m != usize::MAX {
                        vals[m] -= lik * vals[q];
                    }
                }
            }
            for p in offsets[i]..offsets[i + 1] {
                marker[cols[p]] = usize::MAX;
            }
            if vals[diag_pos[i]] == 0.0 {
                return Err(Error::ZeroPivot { row: i });
            }
        }
        Ok(Self {
            lu: SparseMatrix::from_csr(n, n, offsets, cols, vals)?,
            diag_pos,
        })
    }

    pub fn factors(&self) -> &SparseMatrix {
        &self.lu
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let offsets = self.lu.row_offsets();
        let cols = self.lu.col_indices();
        let vals = self.lu.values();
        let n = x.len();
        for i in 0..n {
            let mut s = x[i];
            for p in offsets[i]..self.diag_pos[i] {
                s -= vals[p] * x[cols[p]];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for p in self.diag_pos[i] + 1..offsets[i + 1] {
                s -= vals[p] * x[cols[p]];
            }
            x[i] = s / vals[self.diag_pos[i]];
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum PointData {
    Diagonal(Vec<f64>),
    Ilu(Ilu0),
    Lu(DenseLu),
}

/// A point smoother bound to one matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSmoother {
    cfg: PointSmootherConfig,
    a: SparseMatrix,
    data: PointData,
}

impl PointSmoother {
    pub fn new(cfg: PointSmootherConfig, a: &SparseMatrix) -> Result<Self> {
        cfg.validate()?;
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                context: "point smoother matrix must be square",
                expected: a.num_rows(),
                found: a.num_cols(),
            });
        }
        let data = match cfg.kind {
            PointSmootherKind::Jacobi | PointSmootherKind::Sgs => {
                let d = a.extract_diagonal(DiagonalMode::Plain)?;
                if let Some(row) = d.iter().position(|&v| v == 0.0) {
                    return Err(Error::ZeroDiagonal { row });
                }
                PointData::Diagonal(d)
            }
            PointSmootherKind::Ilu0 => PointData::Ilu(Ilu0::factor(a)?),
            PointSmootherKind::Direct => PointData::Lu(DenseLu::factor(&a.to_dense())?),
        };
        Ok(Self {
            cfg,
            a: a.clone(),
            data,
        })
    }

    pub fn config(&self) -> &PointSmootherConfig {
        &self.cfg
    }

    pub fn dim(&self) -> usize {
        self.a.num_rows()
    }

    /// Applies the configured sweeps to `x` in place.
    pub fn smooth(&self, x: &mut [f64], b: &[f64]) -> Result<()> {
        let n = self.dim();
        if x.len() != n || b.len() != n {
            return Err(Error::DimensionMismatch {
                context: "point smoother vectors",
                expected: n,
                found: if x.len() != n { x.len() } else { b.len() },
            });
        }
        let w = self.cfg.damping;
        for _ in 0..self.cfg.sweeps {
            match &self.data {
                PointData::Diagonal(d) if self.cfg.kind == PointSmootherKind::Jacobi => {
                    let mut r = b.to_vec();
                    self.a.spmv_add(-1.0, x, &mut r)?;
                    for ((xi, ri), di) in x.iter_mut().zip(&r).zip(d) {
                        *xi += w * ri / di;
                    }
                }
                PointData::Diagonal(d) => {
                    self.gs_pass(x, b, d, 0..n);
                    self.gs_pass(x, b, d, (0..n).rev());
                }
                PointData::Ilu(f) => {
                    let mut r = b.to_vec();
                    self.a.spmv_add(-1.0, x, &mut r)?;
                    f.solve_in_place(&mut r);
                    for (xi, ri) in x.iter_mut().zip(&r) {
                        *xi += w * ri;
                    }
                }
                PointData::Lu(lu) => {
                    let mut r = b.to_vec();
                    self.a.spmv_add(-1.0, x, &mut r)?;
                    lu.solve_in_place(&mut r)?;
                    for (xi, ri) in x.iter_mut().zip(&r) {
                        *xi += w * ri;
                    }
                }
            }
        }
        Ok(())
    }

    fn gs_pass(&self, x: &mut [f64], b: &[f64], d: &[f64], order: impl Iterator<Item = usize>) {
        let w = self.cfg.damping;
        for i in order {
            let (cols, vals) = self.a.row(i);
            let mut r = b[i];
            for (&j, &v) in cols.iter().zip(vals) {
                r -= v * x[j];
            }
            x[i] += w * r / d[i];
        }
    }

    /// Smoothing from a zero initial guess; linear in `b`.
    pub fn solve_from_zero(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut x = vec![0.0; self.dim()];
        self.smooth(&mut x, b)?;
        Ok(x)
    }
}

/// One-shot form of [`PointSmoother::smooth`].
pub fn point_smooth(
    cfg: PointSmootherConfig,
    a: &SparseMatrix,
    x: &[f64],
    b: &[f64],
) -> Result<Vec<f64>> {
    let s = PointSmoother::new(cfg, a)?;
    let mut x = x.to_vec();
    s.smooth(&mut x, b)?;
    Ok(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockSmootherKind {
    Uzawa,
    BraessSarazin,
    Simple,
    Simplec,
}

/// Approximation of `K` used inside the Schur complement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AHatMode {
    PlainDiag,
    AbsRowSum,
    /// `K` itself; densified, for small systems only.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockSmootherConfig {
    pub kind: BlockSmootherKind,
    pub alpha: f64,
    pub outer_sweeps: usize,
    /// Inner solver for `K`; unused by Braess-Sarazin.
    pub predictor: PointSmootherConfig,
    /// Inner solver for the Schur complement approximation.
    pub corrector: PointSmootherConfig,
    /// Ignored by Braess-Sarazin (always plain diagonal) and SIMPLEC
    /// (always absolute row sums).
    pub a_hat_mode: AHatMode,
}

impl BlockSmootherConfig {
    pub fn cheap_uzawa() -> Self {
        Self {
            kind: BlockSmootherKind::Uzawa,
            alpha: 0.7,
            outer_sweeps: 3,
            predictor: PointSmootherConfig::sgs(1, 0.7),
            corrector: PointSmootherConfig::ilu0(),
            a_hat_mode: AHatMode::PlainDiag,
        }
    }

    pub fn cheap_braess_sarazin() -> Self {
        Self {
            kind: BlockSmootherKind::BraessSarazin,
            alpha: 1.9,
            outer_sweeps: 3,
            predictor: PointSmootherConfig::jacobi(1, 1.0),
            corrector: PointSmootherConfig::ilu0(),
            a_hat_mode: AHatMode::PlainDiag,
        }
    }

    pub fn cheap_simplec() -> Self {
        Self {
            kind: BlockSmootherKind::Simplec,
            alpha: 0.7,
            outer_sweeps: 3,
            predictor: PointSmootherConfig::sgs(1, 0.7),
            corrector: PointSmootherConfig::ilu0(),
            a_hat_mode: AHatMode::AbsRowSum,
        }
    }

    pub fn cheap_simple() -> Self {
        Self {
            kind: BlockSmootherKind::Simple,
            alpha: 0.8,
            outer_sweeps: 3,
            predictor: PointSmootherConfig::sgs(1, 1.0),
            corrector: PointSmootherConfig::sgs(1, 1.0),
            a_hat_mode: AHatMode::PlainDiag,
        }
    }

    /// Same smoother with exact (dense) inner solves.
    pub fn with_exact_inner(mut self) -> Self {
        self.predictor = PointSmootherConfig::direct();
        self.corrector = PointSmootherConfig::direct();
        self
    }

    pub fn effective_a_hat_mode(&self) -> AHatMode {
        match self.kind {
            BlockSmootherKind::BraessSarazin => AHatMode::PlainDiag,
            BlockSmootherKind::Simplec => AHatMode::AbsRowSum,
            _ => self.a_hat_mode,
        }
    }

    /// Scale of `S~`: `alpha` for SIMPLE(C), 1 otherwise. Braess-Sarazin uses
    /// its own `Cz + (1/alpha) B2 A^-1 B1`.
    fn schur_scaling(&self) -> (f64, f64) {
        match self.kind {
            BlockSmootherKind::Uzawa => (1.0, 1.0),
            BlockSmootherKind::BraessSarazin => (1.0, 1.0 / self.alpha),
            BlockSmootherKind::Simple | BlockSmootherKind::Simplec => (self.alpha, self.alpha),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidConfig(
                "block smoother alpha must be positive",
            ));
        }
        if self.outer_sweeps == 0 {
            return Err(Error::InvalidConfig(
                "block smoother needs at least one outer sweep",
            ));
        }
        self.predictor.validate()?;
        self.corrector.validate()
    }
}

/// Inverse of the `K` approximation.
#[derive(Debug, Clone, PartialEq)]
pub enum AHatInverse {
    Diagonal(Vec<f64>),
    Dense(DenseLu),
}

impl AHatInverse {
    pub fn build(k: &SparseMatrix, mode: AHatMode) -> Result<Self> {
        let diag_mode = match mode {
            AHatMode::PlainDiag => DiagonalMode::Plain,
            AHatMode::AbsRowSum => DiagonalMode::AbsRowSum,
            AHatMode::Exact => return Ok(Self::Dense(DenseLu::factor(&k.to_dense())?)),
        };
        let d = k.extract_diagonal(diag_mode)?;
        if let Some(row) = d.iter().position(|&v| v == 0.0) {
            return Err(Error::ZeroDiagonal { row });
        }
        Ok(Self::Diagonal(d.iter().map(|v| 1.0 / v).collect()))
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        match self {
            Self::Diagonal(d) => Ok(v.iter().zip(d).map(|(a, b)| a * b).collect()),
            Self::Dense(lu) => lu.solve(v),
        }
    }

    /// `A^-1 B` as a sparse matrix.
    fn times(&self, b: &SparseMatrix) -> Result<SparseMatrix> {
        match self {
            Self::Diagonal(d) => b.scale_rows(d),
            Self::Dense(lu) => {
                let mut out = DenseMatrix::zeros(b.num_rows(), b.num_cols());
                let bd = b.to_dense();
                for j in 0..b.num_cols() {
                    let x = lu.solve(&bd.column(j))?;
                    for (i, v) in x.iter().enumerate() {
                        out.set(i, j, *v);
                    }
                }
                Ok(SparseMatrix::from_dense(&out, 0.0))
            }
        }
    }

    fn to_dense(&self, n: usize) -> Result<DenseMatrix> {
        match self {
            Self::Diagonal(d) => Ok(SparseMatrix::from_diagonal(d).to_dense()),
            Self::Dense(lu) => {
                let mut out = DenseMatrix::zeros(n, n);
                for j in 0..n {
                    let mut e = vec![0.0; n];
                    e[j] = 1.0;
                    for (i, v) in lu.solve(&e)?.iter().enumerate() {
                        out.set(i, j, *v);
                    }
                }
                Ok(out)
            }
        }
    }
}

/// Explicit Schur complement approximation `c_scale Cz + b_scale B2 A^-1 B1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurOperator {
    pub s_tilde: SparseMatrix,
    pub a_hat_inv: AHatInverse,
}

fn build_schur_scaled(
    op: &SaddleOperator,
    mode: AHatMode,
    c_scale: f64,
    b_scale: f64,
) -> Result<SchurOperator> {
    let a_hat_inv = AHatInverse::build(&op.k, mode)?;
    let prod = op.b2.matmul(&a_hat_inv.times(&op.b1)?)?;
    Ok(SchurOperator {
        s_tilde: op.cz.add_scaled(c_scale, &prod, b_scale)?,
        a_hat_inv,
    })
}

/// `S~ = scale (Cz + B2 A^-1 B1)` with `scale = alpha` when
/// `scale_with_alpha`, else 1.
pub fn build_schur(
    op: &SaddleOperator,
    mode: AHatMode,
    alpha: f64,
    scale_with_alpha: bool,
) -> Result<SchurOperator> {
    let s = if scale_with_alpha { alpha } else { 1.0 };
    build_schur_scaled(op, mode, s, s)
}

/// Approximate inverse of `K` used by the predictor step.
#[derive(Debug, Clone, PartialEq)]
pub enum Predictor {
    Point(PointSmoother),
    /// One V-cycle of a single-field AMG on `K`.
    Amg(alloc::boxed::Box<ScalarAmg>),
}

impl Predictor {
    pub fn solve_from_zero(&self, b: &[f64]) -> Result<Vec<f64>> {
        match self {
            Self::Point(p) => p.solve_from_zero(b),
            Self::Amg(amg) => amg.apply(b),
        }
    }
}

/// A block smoother bound to one saddle operator.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSmoother {
    cfg: BlockSmootherConfig,
    schur: SchurOperator,
    predictor: Option<Predictor>,
    corrector: PointSmoother,
}

impl BlockSmoother {
    pub fn new(op: &SaddleOperator, cfg: BlockSmootherConfig) -> Result<Self> {
        let predictor = match cfg.kind {
            BlockSmootherKind::BraessSarazin => None,
            _ => Some(Predictor::Point(PointSmoother::new(cfg.predictor, &op.k)?)),
        };
        Self::build(op, cfg, predictor)
    }

    /// Uses `predictor` in place of `cfg.predictor`. Braess-Sarazin has no
    /// predictor solve and rejects this.
    pub fn with_predictor(
        op: &SaddleOperator,
        cfg: BlockSmootherConfig,
        predictor: Predictor,
    ) -> Result<Self> {
        if cfg.kind == BlockSmootherKind::BraessSarazin {
            return Err(Error::UnsupportedConfiguration(
                "Braess-Sarazin uses a fixed Jacobi predictor",
            ));
        }
        Self::build(op, cfg, Some(predictor))
    }

    fn build(
        op: &SaddleOperator,
        cfg: BlockSmootherConfig,
        predictor: Option<Predictor>,
    ) -> Result<Self> {
        cfg.validate()?;
        op.validate()?;
        let (c_scale, b_scale) = cfg.schur_scaling();
        let schur = build_schur_scaled(op, cfg.effective_a_hat_mode(), c_scale, b_scale)?;
        let corrector = PointSmoother::new(cfg.corrector, &schur.s_tilde)?;
        Ok(Self {
            cfg,
            schur,
            predictor,
            corrector,
        })
    }

    pub fn config(&self) -> &BlockSmootherConfig {
        &self.cfg
    }

    pub fn schur(&self) -> &SchurOperator {
        &self.schur
    }

    /// Runs `outer_sweeps` sweeps on `x` for the system `op x = b`.
    pub fn smooth(&self, op: &SaddleOperator, x: &mut BlockVector, b: &BlockVector) -> Result<()> {
        if x.u.len() != op.n_u() || x.lam.len() != op.n_lam() {
            return Err(Error::DimensionMismatch {
                context: "block smoother iterate",
                expected: op.dim(),
                found: x.len(),
            });
        }
        for _ in 0..self.cfg.outer_sweeps {
            match self.cfg.kind {
                BlockSmootherKind::Uzawa => self.uzawa_sweep(op, x, b)?,
                BlockSmootherKind::BraessSarazin => self.braess_sarazin_sweep(op, x, b)?,
                BlockSmootherKind::Simple | BlockSmootherKind::Simplec => {
                    self.simple_sweep(op, x, b)?
                }
            }
        }
        Ok(())
    }

    /// Smoothing from a zero initial guess; linear in `b`.
    pub fn solve_from_zero(&self, op: &SaddleOperator, b: &BlockVector) -> Result<BlockVector> {
        let mut x = BlockVector::zeros(op.n_u(), op.n_lam());
        self.smooth(op, &mut x, b)?;
        Ok(x)
    }

    fn predictor(&self) -> &Predictor {
        self.predictor
            .as_ref()
            .expect("predictor exists for every kind but Braess-Sarazin")
    }

    /// One Uzawa sweep: `K du = r_u`, `S~ dl = B2 du - r_lam`, then both
    /// increments damped by `alpha`.
    pub fn uzawa_sweep(
        &self,
        op: &SaddleOperator,
        x: &mut BlockVector,
        b: &BlockVector,
    ) -> Result<()> {
        let r = op.residual(x, b)?;
        let du = self.predictor().solve_from_zero(&r.u)?;
        let mut rhs = op.b2.spmv(&du)?;
        for (v, rl) in rhs.iter_mut().zip(&r.lam) {
            *v -= rl;
        }
        let dl = self.corrector.solve_from_zero(&rhs)?;
        let a = self.cfg.alpha;
        for (xi, d) in x.u.iter_mut().zip(&du) {
            *xi += a * d;
        }
        for (xi, d) in x.lam.iter_mut().zip(&dl) {
            *xi += a * d;
        }
        Ok(())
    }

    /// One Braess-Sarazin sweep with damped Jacobi predictor.
    pub fn braess_sarazin_sweep(
        &self,
        op: &SaddleOperator,
        x: &mut BlockVector,
        b: &BlockVector,
    ) -> Result<()> {
        let inv_alpha = 1.0 / self.cfg.alpha;
        let r = op.residual(x, b)?;
        let step = self.schur.a_hat_inv.apply(&r.u)?;
        for (xi, s) in x.u.iter_mut().zip(&step) {
            *xi += inv_alpha * s;
        }
        // B2 u_half - b_lam - Cz lam
        let mut rhs = op.b2.spmv(&x.u)?;
        op.cz.spmv_add(-1.0, &x.lam, &mut rhs)?;
        for (v, bl) in rhs.iter_mut().zip(&b.lam) {
            *v -= bl;
        }
        let dl = self.corrector.solve_from_zero(&rhs)?;
        for (xi, d) in x.lam.iter_mut().zip(&dl) {
            *xi += d;
        }
        let back = self.schur.a_hat_inv.apply(&op.b1.spmv(&dl)?)?;
        for (xi, s) in x.u.iter_mut().zip(&back) {
            *xi -= inv_alpha * s;
        }
        Ok(())
    }

    /// One SIMPLE / SIMPLEC sweep in increment form.
    pub fn simple_sweep(
        &self,
        op: &SaddleOperator,
        x: &mut BlockVector,
        b: &BlockVector,
    ) -> Result<()> {
        let a = self.cfg.alpha;
        let r = op.residual(x, b)?;
        let du = self.predictor().solve_from_zero(&r.u)?;
        for (xi, d) in x.u.iter_mut().zip(&du) {
            *xi += d;
        }
        let mut rhs = op.b2.spmv(&du)?;
        for (v, rl) in rhs.iter_mut().zip(&r.lam) {
            *v -= rl;
        }
        let dl = self.corrector.solve_from_zero(&rhs)?;
        for (xi, d) in x.lam.iter_mut().zip(&dl) {
            *xi += a * d;
        }
        let back = self.schur.a_hat_inv.apply(&op.b1.spmv(&dl)?)?;
        for (xi, s) in x.u.iter_mut().zip(&back) {
            *xi -= a * s;
        }
        Ok(())
    }
}

/// Dense `M` of the smoother's defining splitting, with exact inner solves
/// and the configured `A^` and `S~`.
pub fn splitting_matrix(op: &SaddleOperator, cfg: &BlockSmootherConfig) -> Result<DenseMatrix> {
    cfg.validate()?;
    let (n_u, n_lam) = (op.n_u(), op.n_lam());
    let n = n_u + n_lam;
    let (c_scale, b_scale) = cfg.schur_scaling();
    let schur = build_schur_scaled(op, cfg.effective_a_hat_mode(), c_scale, b_scale)?;
    let k = op.k.to_dense();
    let b1 = op.b1.to_dense();
    let b2 = op.b2.to_dense();
    let s = schur.s_tilde.to_dense();
    let a = cfg.alpha;
    let mut m = DenseMatrix::zeros(n, n);
    match cfg.kind {
        BlockSmootherKind::Uzawa => {
            m.set_block(0, 0, &k);
            m.set_block(n_u, 0, &b2);
            m.set_block(n_u, n_u, &s.scaled(-1.0));
            m = m.scaled(1.0 / a);
        }
        BlockSmootherKind::BraessSarazin => {
            let a_hat = schur.a_hat_inv.to_dense(n_u)?.inverse()?;
            m.set_block(0, 0, &a_hat.scaled(a));
            m.set_block(0, n_u, &b1);
            m.set_block(n_u, 0, &b2);
            m.set_block(n_u, n_u, &op.cz.to_dense().scaled(-1.0));
        }
        BlockSmootherKind::Simple | BlockSmootherKind::Simplec => {
            let mut lower = DenseMatrix::zeros(n, n);
            lower.set_block(0, 0, &k);
            lower.set_block(n_u, 0, &b2);
            lower.set_block(n_u, n_u, &s.scaled(-1.0));
            let mut upper = DenseMatrix::identity(n);
            let ainv_b1 = schur.a_hat_inv.to_dense(n_u)?.matmul(&b1)?;
            upper.set_block(0, n_u, &ainv_b1);
            for i in n_u..n {
                upper.set(i, i, 1.0 / a);
            }
            m = lower.matmul(&upper)?;
        }
    }
    Ok(m)
}

/// `E = A - M` for the configured smoother.
pub fn error_matrix(op: &SaddleOperator, cfg: &BlockSmootherConfig) -> Result<DenseMatrix> {
    let m = splitting_matrix(op, cfg)?;
    op.to_dense().add_scaled(1.0, &m, -1.0)
}
