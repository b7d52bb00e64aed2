//! Tentative and smoothed prolongators, segregated block transfers and the
//! blockwise Galerkin coarse operator.

use alloc::vec;
use alloc::vec::Vec;

use crate::aggregation::{Aggregation, DofMap};
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::problem::{ContactProblem, DOFS_PER_NODE};
use crate::saddle::SaddleOperator;
use crate::sparse::{galerkin_triple, DiagonalMode, SparseMatrix};
use crate::vector::{norm2, BlockVector};

/// Relative threshold below which an orthogonalized null-space column counts
/// as dependent inside an aggregate.
pub const QR_DROP_TOL: f64 = 1e-10;

/// Number of power iterations used to estimate `lambda_max(D^-1 A)`.
pub const POWER_ITERATIONS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NullSpaceKind {
    RigidBody2d,
    ConstantPerComponent,
    /// Coarse-level null space produced by a tentative prolongator.
    Coarse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullSpace {
    /// `n_dofs x k`
    pub vectors: DenseMatrix,
    pub kind: NullSpaceKind,
}

impl NullSpace {
    /// Columns `(1,0)`, `(0,1)` and `(-y,x)` per node.
    pub fn rigid_body_2d(coords: &[[f64; 2]]) -> Self {
        let mut v = DenseMatrix::zeros(DOFS_PER_NODE * coords.len(), 3);
        for (n, p) in coords.iter().enumerate() {
            v.set(2 * n, 0, 1.0);
            v.set(2 * n + 1, 1, 1.0);
            v.set(2 * n, 2, -p[1]);
            v.set(2 * n + 1, 2, p[0]);
        }
        Self {
            vectors: v,
            kind: NullSpaceKind::RigidBody2d,
        }
    }

    /// Rigid-body modes of the problem mesh with Dirichlet rows zeroed.
    pub fn for_problem(problem: &ContactProblem) -> Self {
        let mut ns = Self::rigid_body_2d(&problem.node_coords);
        for &d in &problem.dirichlet_dofs {
            for c in 0..3 {
                ns.vectors.set(d, c, 0.0);
            }
        }
        ns
    }

    /// One indicator column per Cartesian component.
    pub fn constant_per_component(num_nodes: usize, components: usize) -> Self {
        let mut v = DenseMatrix::zeros(components * num_nodes, components);
        for n in 0..num_nodes {
            for c in 0..components {
                v.set(components * n + c, c, 1.0);
            }
        }
        Self {
            vectors: v,
            kind: NullSpaceKind::ConstantPerComponent,
        }
    }

    pub fn num_dofs(&self) -> usize {
        self.vectors.num_rows()
    }

    pub fn num_vectors(&self) -> usize {
        self.vectors.num_cols()
    }
}

/// Output of [`tentative_prolongator`].
#[derive(Debug, Clone, PartialEq)]
pub struct Tentative {
    pub p: SparseMatrix,
    pub coarse_ns: NullSpace,
    /// Coarse nodes are aggregates; each carries as many dofs as null-space
    /// columns survived in it.
    pub coarse_dofs: DofMap,
    /// Null-space columns dropped as locally dependent, summed over aggregates.
    pub dropped_columns: usize,
}

/// Modified Gram-Schmidt with one reorthogonalization pass.
///
/// `block` is `m x k` row-major. Returns the retained orthonormal columns
/// `Q` (`m x r`, column-major) and `R` (`r x k`, row-major) with
/// `block = Q R`.
fn local_qr(block: &[f64], m: usize, k: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let cols: Vec<Vec<f64>> = (0..k)
        .map(|j| (0..m).map(|i| block[i * k + j]).collect())
        .collect();
    let scale = cols.iter().map(|c| norm2(c)).fold(0.0, f64::max);
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut r: Vec<Vec<f64>> = Vec::new();
    for (j, col) in cols.iter().enumerate() {
        let mut v = col.clone();
        let mut coef = vec![0.0; q.len()];
        for _ in 0..2 {
            for (qi, c) in q.iter().zip(coef.iter_mut()) {
                let h: f64 = qi.iter().zip(&v).map(|(a, b)| a * b).sum();
                *c += h;
                for (vi, qv) in v.iter_mut().zip(qi) {
                    *vi -= h * qv;
                }
            }
        }
        for (row, c) in r.iter_mut().zip(&coef) {
            row[j] = *c;
        }
        let nv = norm2(&v);
        if nv > QR_DROP_TOL * scale && nv > 0.0 {
            for x in &mut v {
                *x /= nv;
            }
            let mut row = vec![0.0; k];
            row[j] = nv;
            q.push(v);
            r.push(row);
        }
    }
    (q, r)
}

/// Piecewise null-space interpolation: per aggregate, the null-space rows of
/// its dofs are QR-factorized, `Q` becomes the aggregate's block column of
/// `P` and `R` its rows of the coarse null space.
///
/// Nodes without an aggregate give zero rows.
pub fn tentative_prolongator(
    aggs: &Aggregation,
    ns: &NullSpace,
    dofs: &DofMap,
) -> Result<Tentative> {
    if ns.num_dofs() != dofs.num_dofs() {
        return Err(Error::DimensionMismatch {
            context: "null space rows vs dofs",
            expected: dofs.num_dofs(),
            found: ns.num_dofs(),
        });
    }
    if aggs.node_to_agg.len() != dofs.num_nodes() {
        return Err(Error::DimensionMismatch {
            context: "aggregation nodes vs dof map",
            expected: dofs.num_nodes(),
            found: aggs.node_to_agg.len(),
        });
    }
    let k = ns.num_vectors();
    let members = aggs.members();
    let mut triplets = Vec::new();
    let mut counts = Vec::with_capacity(aggs.num_aggs);
    let mut coarse_rows: Vec<Vec<f64>> = Vec::new();
    let mut dropped = 0;
    for nodes in &members {
        let agg_dofs: Vec<usize> = nodes.iter().flat_map(|&n| dofs.dofs_of(n)).collect();
        let m = agg_dofs.len();
        let mut block = Vec::with_capacity(m * k);
        for &d in &agg_dofs {
            block.extend_from_slice(ns.vectors.row(d));
        }
        let (q, r) = local_qr(&block, m, k);
        let offset = coarse_rows.len();
        for (c, qc) in q.iter().enumerate() {
            for (&d, &v) in agg_dofs.iter().zip(qc) {
                if v != 0.0 {
                    triplets.push((d, offset + c, v));
                }
            }
        }
        dropped += k - q.len();
        counts.push(q.len());
        coarse_rows.extend(r);
    }
    let nc = coarse_rows.len();
    let flat: Vec<f64> = coarse_rows.into_iter().flatten().collect();
    Ok(Tentative {
        p: SparseMatrix::from_triplets(dofs.num_dofs(), nc, &triplets)?,
        coarse_ns: NullSpace {
            vectors: DenseMatrix::from_row_major(nc, k, flat)?,
            kind: NullSpaceKind::Coarse,
        },
        coarse_dofs: DofMap::from_counts(&counts),
        dropped_columns: dropped,
    })
}

/// Estimates `lambda_max(D^-1 A)` with [`POWER_ITERATIONS`] steps from the
/// all-ones vector.
pub fn estimate_lambda_max(a: &SparseMatrix) -> Result<f64> {
    let diag = a.extract_diagonal(DiagonalMode::Plain)?;
    if let Some(row) = diag.iter().position(|&d| d == 0.0) {
        return Err(Error::ZeroDiagonal { row });
    }
    let n = a.num_rows();
    let mut x = vec![1.0; n];
    let mut lambda = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let nx = norm2(&x);
        if nx == 0.0 {
            break;
        }
        let mut y = a.spmv(&x)?;
        for (yi, di) in y.iter_mut().zip(&diag) {
            *yi /= di;
        }
        let ny = norm2(&y);
        lambda = ny / nx;
        for v in &mut y {
            *v /= ny.max(f64::MIN_POSITIVE);
        }
        x = y;
    }
    Ok(lambda)
}

/// Returns `P_tent - (omega_in / lambda_max) D^-1 A P_tent` together with the
/// estimated `lambda_max`. With `omega_in == 0` the tentative prolongator is
/// returned unchanged and no estimate is made.
pub fn smooth_prolongator(
    p_tent: &SparseMatrix,
    a: &SparseMatrix,
    omega_in: f64,
) -> Result<(SparseMatrix, f64)> {
    if !a.is_square() || a.num_cols() != p_tent.num_rows() {
        return Err(Error::DimensionMismatch {
            context: "smoothing operator vs prolongator rows",
            expected: p_tent.num_rows(),
            found: a.num_cols(),
        });
    }
    let diag = a.extract_diagonal(DiagonalMode::Plain)?;
    if let Some(row) = diag.iter().position(|&d| d == 0.0) {
        return Err(Error::ZeroDiagonal { row });
    }
    if omega_in == 0.0 {
        return Ok((p_tent.clone(), 0.0));
    }
    let lambda = estimate_lambda_max(a)?;
    let omega = omega_in / lambda;
    let ap = a.matmul(p_tent)?;
    let inv: Vec<f64> = diag.iter().map(|d| 1.0 / d).collect();
    let ap = ap.scale_rows(&inv)?;
    Ok((p_tent.add_scaled(1.0, &ap, -omega)?, lambda))
}

/// Block-diagonal transfer `diag(P_u, P_lam)` with transpose restrictions.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTransfer {
    pub p_u: SparseMatrix,
    pub r_u: SparseMatrix,
    pub p_lam: SparseMatrix,
    pub r_lam: SparseMatrix,
}

impl BlockTransfer {
    pub fn new(p_u: SparseMatrix, p_lam: SparseMatrix) -> Self {
        Self {
            r_u: p_u.transpose(),
            r_lam: p_lam.transpose(),
            p_u,
            p_lam,
        }
    }

    pub fn restrict(&self, x: &BlockVector) -> Result<BlockVector> {
        Ok(BlockVector::new(
            self.r_u.spmv(&x.u)?,
            self.r_lam.spmv(&x.lam)?,
        ))
    }

    pub fn prolongate(&self, x: &BlockVector) -> Result<BlockVector> {
        Ok(BlockVector::new(
            self.p_u.spmv(&x.u)?,
            self.p_lam.spmv(&x.lam)?,
        ))
    }

    /// Merged `diag(P_u, P_lam)`, used for checks only.
    pub fn merged_prolongator(&self) -> SparseMatrix {
        let (nu, ncu) = (self.p_u.num_rows(), self.p_u.num_cols());
        let mut t: Vec<(usize, usize, f64)> = self.p_u.triplets().collect();
        t.extend(self.p_lam.triplets().map(|(i, j, v)| (nu + i, ncu + j, v)));
        SparseMatrix::from_triplets(nu + self.p_lam.num_rows(), ncu + self.p_lam.num_cols(), &t)
            .expect("block indices are in range by construction")
    }
}

pub fn build_block_transfer(p_u: SparseMatrix, p_lam: SparseMatrix) -> BlockTransfer {
    BlockTransfer::new(p_u, p_lam)
}

/// Blockwise Galerkin product keeping the saddle structure.
pub fn coarsen_block(op: &SaddleOperator, t: &BlockTransfer) -> Result<SaddleOperator> {
    if t.p_u.num_rows() != op.n_u() || t.p_lam.num_rows() != op.n_lam() {
        return Err(Error::DimensionMismatch {
            context: "transfer rows vs operator blocks",
            expected: op.dim(),
            found: t.p_u.num_rows() + t.p_lam.num_rows(),
        });
    }
    SaddleOperator::new(
        galerkin_triple(&t.r_u, &op.k, &t.p_u)?,
        galerkin_triple(&t.r_u, &op.b1, &t.p_lam)?,
        galerkin_triple(&t.r_lam, &op.b2, &t.p_u)?,
        galerkin_triple(&t.r_lam, &op.cz, &t.p_lam)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregation::AggregationReport;
    use crate::problem::{assemble_stiffness_unconstrained, build_mesh, MeshSpec};

    fn aggs(node_to_agg: Vec<usize>) -> Aggregation {
        let num_aggs = node_to_agg.iter().max().map_or(0, |m| m + 1);
        let mut agg_root = vec![usize::MAX; num_aggs];
        for (n, &a) in node_to_agg.iter().enumerate() {
            agg_root[a] = agg_root[a].min(n);
        }
        Aggregation {
            node_to_agg: node_to_agg.into_iter().map(Some).collect(),
            num_aggs,
            agg_root,
            report: AggregationReport::default(),
        }
    }

    fn laplace_1d(n: usize) -> SparseMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        SparseMatrix::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn rotation_column_vanishes_at_origin() {
        let ns = NullSpace::rigid_body_2d(&[[0.0, 0.0]]);
        assert_eq!(ns.vectors.column(2), vec![0.0, 0.0]);
    }

    #[test]
    fn rigid_modes_in_kernel_of_unconstrained_stiffness() {
        let spec = MeshSpec {
            angle: 0.3,
            ..MeshSpec::default()
        };
        let p = build_mesh(&spec).unwrap();
        let k = assemble_stiffness_unconstrained(&p, &spec).unwrap();
        let ns = NullSpace::rigid_body_2d(&p.node_coords);
        for c in 0..3 {
            let kv = k.spmv(&ns.vectors.column(c)).unwrap();
            let m = kv.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
            assert!(m <= 1e-10 * k.max_abs(), "column {c}: {m}");
        }
    }

    #[test]
    fn lambda_null_space_indicator_columns() {
        let ns = NullSpace::constant_per_component(3, 2);
        assert_eq!(ns.vectors.column(0), vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        assert_eq!(ns.vectors.column(1), vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn single_aggregate_constant() {
        let n = 4;
        let ns = NullSpace::constant_per_component(n, 1);
        let t = tentative_prolongator(&aggs(vec![0; n]), &ns, &DofMap::uniform(n, 1)).unwrap();
        for i in 0..n {
            assert!((t.p.get(i, 0) - 0.5).abs() < 1e-15);
        }
        assert!((t.coarse_ns.vectors.get(0, 0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn two_aggregates_one_entry_per_row() {
        let ns = NullSpace::constant_per_component(6, 1);
        let t = tentative_prolongator(&aggs(vec![0, 0, 0, 1, 1, 1]), &ns, &DofMap::uniform(6, 1))
            .unwrap();
        for i in 0..6 {
            assert_eq!(t.p.row(i).0.len(), 1);
        }
    }

    #[test]
    fn rigid_body_reproduction_on_4x4_mesh() {
        let coords: Vec<[f64; 2]> = (0..25).map(|i| [(i % 5) as f64, (i / 5) as f64]).collect();
        let ns = NullSpace::rigid_body_2d(&coords);
        let dofs = DofMap::uniform(25, 2);
        let map: Vec<usize> = (0..25)
            .map(|i| usize::from(i % 5 >= 3) + 2 * usize::from(i / 5 >= 3))
            .collect();
        let t = tentative_prolongator(&aggs(map), &ns, &dofs).unwrap();
        assert_eq!(t.dropped_columns, 0);
        let ptp = t.p.transpose().matmul(&t.p).unwrap();
        let eye = SparseMatrix::identity(ptp.num_rows());
        assert!(ptp.add_scaled(1.0, &eye, -1.0).unwrap().max_abs() < 1e-12);
        let rec = t.p.to_dense().matmul(&t.coarse_ns.vectors).unwrap();
        assert!(rec.add_scaled(1.0, &ns.vectors, -1.0).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn single_node_aggregate_drops_rotation() {
        let coords = [[1.0, 2.0], [3.0, 4.0]];
        let ns = NullSpace::rigid_body_2d(&coords);
        let t = tentative_prolongator(&aggs(vec![0, 1]), &ns, &DofMap::uniform(2, 2)).unwrap();
        assert_eq!(t.dropped_columns, 2);
        assert_eq!(t.coarse_dofs.num_dofs(), 4);
        let rec = t.p.to_dense().matmul(&t.coarse_ns.vectors).unwrap();
        assert!(rec.add_scaled(1.0, &ns.vectors, -1.0).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn omega_zero_keeps_tentative() {
        let p = SparseMatrix::from_triplets(3, 1, &[(0, 0, 1.0), (1, 0, 1.0)]).unwrap();
        let (s, _) = smooth_prolongator(&p, &laplace_1d(3), 0.0).unwrap();
        assert_eq!(s, p);
    }

    #[test]
    fn identity_operator_annihilates() {
        let p = SparseMatrix::from_triplets(3, 1, &[(0, 0, 1.0), (2, 0, 1.0)]).unwrap();
        let (s, lambda) = smooth_prolongator(&p, &SparseMatrix::identity(3), 1.0).unwrap();
        assert!((lambda - 1.0).abs() < 1e-15);
        assert!(s.max_abs() < 1e-15);
    }

    #[test]
    fn zero_diagonal_rejected() {
        let a =
            SparseMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]).unwrap();
        let p = SparseMatrix::identity(2);
        assert_eq!(
            smooth_prolongator(&p, &a, 1.0),
            Err(Error::ZeroDiagonal { row: 0 })
        );
    }

    #[test]
    fn smoothing_widens_support() {
        let a = laplace_1d(8);
        let ns = NullSpace::constant_per_component(8, 1);
        let t = tentative_prolongator(
            &aggs(vec![0, 0, 0, 0, 1, 1, 1, 1]),
            &ns,
            &DofMap::uniform(8, 1),
        )
        .unwrap();
        let (p, lambda) = smooth_prolongator(&t.p, &a, 4.0 / 3.0).unwrap();
        // explicit triple product oracle
        let omega = 4.0 / 3.0 / lambda;
        let dinv = SparseMatrix::from_diagonal(&[0.5; 8]);
        let expected =
            t.p.add_scaled(1.0, &dinv.matmul(&a).unwrap().matmul(&t.p).unwrap(), -omega)
                .unwrap();
        assert!(p.add_scaled(1.0, &expected, -1.0).unwrap().max_abs() < 1e-14);
        assert!(p.get(4, 0) != 0.0 && p.get(3, 1) != 0.0);
        assert_eq!(p.get(5, 0), 0.0);
        assert!(lambda > 1.0 && lambda <= 2.0);
    }

    #[test]
    fn identity_transfers_keep_operator() {
        let k = laplace_1d(3);
        let b1 = SparseMatrix::from_triplets(3, 2, &[(0, 0, 1.0), (2, 1, -1.0)]).unwrap();
        let op =
            SaddleOperator::new(k, b1.clone(), b1.transpose(), SparseMatrix::zeros(2, 2)).unwrap();
        let t = build_block_transfer(SparseMatrix::identity(3), SparseMatrix::identity(2));
        let c = coarsen_block(&op, &t).unwrap();
        assert_eq!(c.to_dense(), op.to_dense());
        assert_eq!(c.cz.nnz(), 0);
        let x = BlockVector::new(vec![1.0, 2.0, 3.0], vec![0.0, 0.0]);
        assert_eq!(t.restrict(&x).unwrap().lam, vec![0.0, 0.0]);
        assert_eq!(t.r_u.num_rows(), t.p_u.num_cols());
    }

    #[test]
    fn blockwise_matches_merged_galerkin() {
        let k = laplace_1d(6);
        let b1 =
            SparseMatrix::from_triplets(6, 2, &[(4, 0, 0.5), (5, 1, 0.25), (4, 1, 0.1)]).unwrap();
        let b2 = SparseMatrix::from_triplets(2, 6, &[(0, 4, 0.3), (1, 5, -0.2)]).unwrap();
        let cz = SparseMatrix::from_triplets(2, 2, &[(1, 1, 0.7)]).unwrap();
        let op = SaddleOperator::new(k, b1, b2, cz).unwrap();
        let ns = NullSpace::constant_per_component(6, 1);
        let tu = tentative_prolongator(&aggs(vec![0, 0, 0, 1, 1, 1]), &ns, &DofMap::uniform(6, 1))
            .unwrap();
        let (pu, _) = smooth_prolongator(&tu.p, &op.k, 4.0 / 3.0).unwrap();
        let pl = SparseMatrix::from_triplets(2, 1, &[(0, 0, 1.0), (1, 0, 1.0)]).unwrap();
        let t = build_block_transfer(pu, pl);
        let c = coarsen_block(&op, &t).unwrap();
        let p = t.merged_prolongator();
        let merged = galerkin_triple(&p.transpose(), &op.to_merged(), &p).unwrap();
        let diff = merged
            .to_dense()
            .add_scaled(1.0, &c.to_dense(), -1.0)
            .unwrap();
        assert!(diff.max_abs() < 1e-13);
        assert!(c.k.symmetry_defect() < 1e-14);
    }
}
