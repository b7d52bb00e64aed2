//! Fully coupled saddle-point multigrid hierarchy, V-cycle, and a
//! single-field AMG used by the nested preconditioner.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::aggregation::{
    aggregate_greedy, aggregate_lagrange, build_graph, Aggregation, DofMap, LagrangeMap, NodeTags,
};
use crate::dense::DenseLu;
use crate::error::{Error, Result};
use crate::krylov::LinearOperator;
use crate::problem::{Body, ContactProblem, InterfaceTag, DOFS_PER_NODE};
use crate::saddle::SaddleOperator;
use crate::smoothers::{
    BlockSmoother, BlockSmootherConfig, PointSmoother, PointSmootherConfig, Predictor,
};
use crate::sparse::SparseMatrix;
use crate::transfer::{
    coarsen_block, smooth_prolongator, tentative_prolongator, BlockTransfer, NullSpace,
};
use crate::vector::BlockVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoarseSolverKind {
    /// Dense LU of the merged coarsest operator.
    MergedLu,
    /// The level's block smoother, applied `coarse_sweeps` times.
    BlockSmoother,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HierarchyConfig {
    pub max_levels: usize,
    /// Coarsening stops once the saddle system has fewer total rows.
    pub max_coarse_size: usize,
    pub coarse_solver: CoarseSolverKind,
    pub coarse_sweeps: usize,
    pub min_agg_size: usize,
    pub smooth_displacement_transfers: bool,
    pub omega: f64,
    pub drop_tol: f64,
    pub smoother: BlockSmootherConfig,
    pub pre_sweeps: usize,
    pub post_sweeps: usize,
}

impl Default for HierarchyConfig {
    fn default() -> Self {
        Self {
            max_levels: 10,
            max_coarse_size: 500,
            coarse_solver: CoarseSolverKind::MergedLu,
            coarse_sweeps: 1,
            min_agg_size: 6,
            smooth_displacement_transfers: true,
            omega: 4.0 / 3.0,
            drop_tol: 0.0,
            smoother: BlockSmootherConfig::cheap_simplec(),
            pre_sweeps: 1,
            post_sweeps: 1,
        }
    }
}

impl HierarchyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_levels == 0 {
            return Err(Error::InvalidConfig("max_levels must be at least 1"));
        }
        if self.max_coarse_size == 0 {
            return Err(Error::InvalidConfig("max_coarse_size must be at least 1"));
        }
        if self.min_agg_size == 0 {
            return Err(Error::InvalidConfig("min_agg_size must be at least 1"));
        }
        if self.coarse_sweeps == 0 {
            return Err(Error::InvalidConfig("coarse_sweeps must be at least 1"));
        }
        self.smoother.validate()
    }
}

/// Per-level data needed for aggregation and transfers.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelMeta {
    pub u_dofs: DofMap,
    pub tags: NodeTags,
    pub u_null_space: NullSpace,
    pub lam_dofs: DofMap,
    pub lam_null_space: NullSpace,
    /// Displacement dofs x multiplier dofs, slave side only. `D` on the
    /// finest level, slave-body rows of `B1` below.
    pub d_surrogate: SparseMatrix,
    pub lagrange: LagrangeMap,
}

impl LevelMeta {
    pub fn from_problem(problem: &ContactProblem) -> Self {
        let ns = problem.slave_nodes.len();
        Self {
            u_dofs: DofMap::uniform(problem.num_nodes(), DOFS_PER_NODE),
            tags: NodeTags::from_problem(problem),
            u_null_space: NullSpace::for_problem(problem),
            lam_dofs: DofMap::uniform(ns, DOFS_PER_NODE),
            lam_null_space: NullSpace::constant_per_component(ns, DOFS_PER_NODE),
            d_surrogate: problem.d_global(),
            lagrange: LagrangeMap::from_problem(problem),
        }
    }
}

/// Setup diagnostics for one level.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LevelStats {
    pub n_u: usize,
    pub n_lam: usize,
    pub nnz_k: usize,
    pub nnz_b1: usize,
    pub nnz_b2: usize,
    pub nnz_cz: usize,
    /// Aggregates formed on this level (zero on the coarsest).
    pub u_aggregates: usize,
    pub lam_aggregates: usize,
    pub lam_overlaps: usize,
    pub u_singletons: usize,
    pub dropped_null_space_columns: usize,
    /// Spectral estimate used for prolongator smoothing, 0 when unsmoothed.
    pub lambda_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub op: SaddleOperator,
    pub transfer_down: Option<BlockTransfer>,
    pub smoother: Option<BlockSmoother>,
    pub pre_sweeps: usize,
    pub post_sweeps: usize,
    pub u_aggregation: Option<Aggregation>,
    pub lam_aggregation: Option<Aggregation>,
    pub stats: LevelStats,
}

#[derive(Debug, Clone, PartialEq)]
enum CoarseSolve {
    Lu(DenseLu),
    Smoother(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hierarchy {
    pub levels: Vec<Level>,
    coarse: CoarseSolve,
    pub complexity: f64,
}

struct Coarsened {
    transfer: BlockTransfer,
    op: SaddleOperator,
    meta: LevelMeta,
    u_agg: Aggregation,
    lam_agg: Aggregation,
    dropped: usize,
    lambda_max: f64,
}

fn coarse_tags(agg: &Aggregation, tags: &NodeTags) -> NodeTags {
    let n = agg.num_aggs;
    let mut out = NodeTags {
        body: vec![Body::Slave; n],
        interface: vec![InterfaceTag::None; n],
        excluded: vec![false; n],
    };
    for (node, a) in agg.node_to_agg.iter().enumerate() {
        if let Some(a) = *a {
            out.body[a] = tags.body[node];
            if tags.interface[node] != InterfaceTag::None {
                out.interface[a] = tags.interface[node];
            }
        }
    }
    out
}

/// Rows of `b1` that belong to slave-body nodes.
fn slave_rows(b1: &SparseMatrix, dofs: &DofMap, tags: &NodeTags) -> Result<SparseMatrix> {
    let t: Vec<_> = b1
        .triplets()
        .filter(|&(i, _, _)| tags.body[dofs.node_of(i)] == Body::Slave)
        .collect();
    SparseMatrix::from_triplets(b1.num_rows(), b1.num_cols(), &t)
}

fn coarsen(op: &SaddleOperator, meta: &LevelMeta, cfg: &HierarchyConfig) -> Result<Coarsened> {
    let graph = build_graph(&op.k, &meta.u_dofs, &meta.tags, cfg.drop_tol)?;
    let u_agg = aggregate_greedy(&graph, cfg.min_agg_size)?;
    if u_agg.num_aggs == 0 {
        return Err(Error::EmptyAggregation);
    }
    let lam_agg = aggregate_lagrange(&u_agg, &meta.d_surrogate, &meta.u_dofs, &meta.lagrange)?;
    if let Some(node) = lam_agg.node_to_agg.iter().position(|a| a.is_none()) {
        return Err(Error::UnaggregatedLagrangeNode { node });
    }
    let tu = tentative_prolongator(&u_agg, &meta.u_null_space, &meta.u_dofs)?;
    let (p_u, lambda_max) = if cfg.smooth_displacement_transfers {
        smooth_prolongator(&tu.p, &op.k, cfg.omega)?
    } else {
        (tu.p, 0.0)
    };
    let tl = tentative_prolongator(&lam_agg, &meta.lam_null_space, &meta.lam_dofs)?;
    let transfer = BlockTransfer::new(p_u, tl.p);
    let cop = coarsen_block(op, &transfer)?;
    let tags = coarse_tags(&u_agg, &meta.tags);
    let d_surrogate = slave_rows(&cop.b1, &tu.coarse_dofs, &tags)?;
    let meta = LevelMeta {
        lagrange: LagrangeMap::from_dof_map(&tl.coarse_dofs),
        u_dofs: tu.coarse_dofs,
        tags,
        u_null_space: tu.coarse_ns,
        lam_dofs: tl.coarse_dofs,
        lam_null_space: tl.coarse_ns,
        d_surrogate,
    };
    Ok(Coarsened {
        transfer,
        op: cop,
        meta,
        u_agg,
        lam_agg,
        dropped: tu.dropped_columns + tl.dropped_columns,
        lambda_max,
    })
}

fn base_stats(op: &SaddleOperator) -> LevelStats {
    LevelStats {
        n_u: op.n_u(),
        n_lam: op.n_lam(),
        nnz_k: op.k.nnz(),
        nnz_b1: op.b1.nnz(),
        nnz_b2: op.b2.nnz(),
        nnz_cz: op.cz.nnz(),
        ..LevelStats::default()
    }
}

impl Hierarchy {
    pub fn setup(fine: &SaddleOperator, meta: LevelMeta, cfg: &HierarchyConfig) -> Result<Self> {
        cfg.validate()?;
        fine.validate()?;
        let mut levels = Vec::new();
        let mut op = fine.clone();
        let mut meta = meta;
        loop {
            let last = levels.len() + 1 >= cfg.max_levels || op.dim() < cfg.max_coarse_size;
            let next = if last {
                None
            } else {
                Some(coarsen(&op, &meta, cfg)?)
            };
            match next {
                Some(c) if c.op.dim() < op.dim() => {
                    let stats = LevelStats {
                        u_aggregates: c.u_agg.num_aggs,
                        lam_aggregates: c.lam_agg.num_aggs,
                        lam_overlaps: c.lam_agg.report.overlaps,
                        u_singletons: c.u_agg.report.singletons,
                        dropped_null_space_columns: c.dropped,
                        lambda_max: c.lambda_max,
                        ..base_stats(&op)
                    };
                    levels.push(Level {
                        smoother: Some(BlockSmoother::new(&op, cfg.smoother)?),
                        op,
                        transfer_down: Some(c.transfer),
                        pre_sweeps: cfg.pre_sweeps,
                        post_sweeps: cfg.post_sweeps,
                        u_aggregation: Some(c.u_agg),
                        lam_aggregation: Some(c.lam_agg),
                        stats,
                    });
                    op = c.op;
                    meta = c.meta;
                }
                // coarsening stagnated or was not attempted
                _ => {
                    let (smoother, coarse) = match cfg.coarse_solver {
                        CoarseSolverKind::MergedLu => {
                            (None, CoarseSolve::Lu(DenseLu::factor(&op.to_dense())?))
                        }
                        CoarseSolverKind::BlockSmoother => (
                            Some(BlockSmoother::new(&op, cfg.smoother)?),
                            CoarseSolve::Smoother(cfg.coarse_sweeps),
                        ),
                    };
                    levels.push(Level {
                        stats: base_stats(&op),
                        op,
                        transfer_down: None,
                        smoother,
                        pre_sweeps: cfg.pre_sweeps,
                        post_sweeps: cfg.post_sweeps,
                        u_aggregation: None,
                        lam_aggregation: None,
                    });
                    let fine_nnz = levels[0].op.nnz() as f64;
                    let total: usize = levels.iter().map(|l| l.op.nnz()).sum();
                    return Ok(Self {
                        complexity: total as f64 / fine_nnz,
                        levels,
                        coarse,
                    });
                }
            }
        }
    }

    /// Convenience setup from a generated contact problem.
    pub fn from_problem(
        fine: &SaddleOperator,
        problem: &ContactProblem,
        cfg: &HierarchyConfig,
    ) -> Result<Self> {
        Self::setup(fine, LevelMeta::from_problem(problem), cfg)
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn fine(&self) -> &SaddleOperator {
        &self.levels[0].op
    }

    /// One V-cycle on level `l` improving `x` for `A_l x = b`.
    pub fn vcycle(&self, l: usize, x: &mut BlockVector, b: &BlockVector) -> Result<()> {
        let level = &self.levels[l];
        let Some(t) = &level.transfer_down else {
            return self.coarse_solve(level, x, b);
        };
        let smoother = level
            .smoother
            .as_ref()
            .expect("non-coarsest levels carry a smoother");
        for _ in 0..level.pre_sweeps {
            smoother.smooth(&level.op, x, b)?;
        }
        let r = level.op.residual(x, b)?;
        let rc = t.restrict(&r)?;
        let mut xc = BlockVector::zeros(rc.u.len(), rc.lam.len());
        self.vcycle(l + 1, &mut xc, &rc)?;
        x.axpy(1.0, &t.prolongate(&xc)?)?;
        for _ in 0..level.post_sweeps {
            smoother.smooth(&level.op, x, b)?;
        }
        Ok(())
    }

    fn coarse_solve(&self, level: &Level, x: &mut BlockVector, b: &BlockVector) -> Result<()> {
        match &self.coarse {
            CoarseSolve::Lu(lu) => {
                let mut r = level.op.residual(x, b)?.to_merged();
                lu.solve_in_place(&mut r)?;
                x.axpy(1.0, &BlockVector::from_merged(&r, level.op.n_u()))
            }
            CoarseSolve::Smoother(sweeps) => {
                let s = level
                    .smoother
                    .as_ref()
                    .expect("block-smoother coarse level carries a smoother");
                for _ in 0..*sweeps {
                    s.smooth(&level.op, x, b)?;
                }
                Ok(())
            }
        }
    }

    /// One V-cycle from a zero initial guess; linear in `b`.
    pub fn apply(&self, b: &BlockVector) -> Result<BlockVector> {
        let mut x = BlockVector::zeros(b.u.len(), b.lam.len());
        self.vcycle(0, &mut x, b)?;
        Ok(x)
    }

    pub fn stats(&self) -> Vec<LevelStats> {
        self.levels.iter().map(|l| l.stats.clone()).collect()
    }
}

impl LinearOperator for Hierarchy {
    fn dim(&self) -> usize {
        self.fine().dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let n_u = self.fine().n_u();
        let out = Hierarchy::apply(self, &BlockVector::from_merged(x, n_u))?;
        y[..n_u].copy_from_slice(&out.u);
        y[n_u..].copy_from_slice(&out.lam);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarAmgConfig {
    pub max_levels: usize,
    pub max_coarse_size: usize,
    pub min_agg_size: usize,
    pub smooth_transfers: bool,
    pub omega: f64,
    pub drop_tol: f64,
    pub smoother: PointSmootherConfig,
    pub pre_sweeps: usize,
    pub post_sweeps: usize,
}

impl Default for ScalarAmgConfig {
    fn default() -> Self {
        Self {
            max_levels: 10,
            max_coarse_size: 500,
            min_agg_size: 6,
            smooth_transfers: true,
            omega: 4.0 / 3.0,
            drop_tol: 0.0,
            smoother: PointSmootherConfig::sgs(1, 1.0),
            pre_sweeps: 1,
            post_sweeps: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct ScalarLevel {
    a: SparseMatrix,
    p: SparseMatrix,
    r: SparseMatrix,
    smoother: PointSmoother,
}

/// Smoothed-aggregation AMG for a single field, coarsest level solved by
/// dense LU.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarAmg {
    levels: Vec<ScalarLevel>,
    coarse_a: SparseMatrix,
    coarse: DenseLu,
    pre_sweeps: usize,
    post_sweeps: usize,
}

impl ScalarAmg {
    pub fn setup(
        a: &SparseMatrix,
        dofs: DofMap,
        tags: NodeTags,
        null_space: NullSpace,
        cfg: &ScalarAmgConfig,
    ) -> Result<Self> {
        if cfg.max_levels == 0 || cfg.max_coarse_size == 0 {
            return Err(Error::InvalidConfig(
                "scalar AMG needs positive max_levels and max_coarse_size",
            ));
        }
        cfg.smoother.validate()?;
        let mut levels = Vec::new();
        let (mut a, mut dofs, mut tags, mut ns) = (a.clone(), dofs, tags, null_space);
        while levels.len() + 1 < cfg.max_levels && a.num_rows() >= cfg.max_coarse_size {
            let graph = build_graph(&a, &dofs, &tags, cfg.drop_tol)?;
            let agg = aggregate_greedy(&graph, cfg.min_agg_size)?;
            if agg.num_aggs == 0 {
                return Err(Error::EmptyAggregation);
            }
            let t = tentative_prolongator(&agg, &ns, &dofs)?;
            let p = if cfg.smooth_transfers {
                smooth_prolongator(&t.p, &a, cfg.omega)?.0
            } else {
                t.p
            };
            if p.num_cols() >= a.num_rows() {
                break;
            }
            let r = p.transpose();
            let ac = r.matmul(&a)?.matmul(&p)?;
            let next_tags = coarse_tags(&agg, &tags);
            levels.push(ScalarLevel {
                smoother: PointSmoother::new(cfg.smoother, &a)?,
                a,
                p,
                r,
            });
            a = ac;
            dofs = t.coarse_dofs;
            tags = next_tags;
            ns = t.coarse_ns;
        }
        Ok(Self {
            levels,
            coarse: DenseLu::factor(&a.to_dense())?,
            coarse_a: a,
            pre_sweeps: cfg.pre_sweeps,
            post_sweeps: cfg.post_sweeps,
        })
    }

    /// Builds the AMG for the displacement block of a contact problem.
    pub fn for_problem(
        k: &SparseMatrix,
        problem: &ContactProblem,
        cfg: &ScalarAmgConfig,
    ) -> Result<Self> {
        Self::setup(
            k,
            DofMap::uniform(problem.num_nodes(), DOFS_PER_NODE),
            NodeTags::from_problem(problem),
            NullSpace::for_problem(problem),
            cfg,
        )
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len() + 1
    }

    fn cycle(&self, l: usize, x: &mut [f64], b: &[f64]) -> Result<()> {
        let Some(level) = self.levels.get(l) else {
            let mut r = b.to_vec();
            self.coarse_a.spmv_add(-1.0, x, &mut r)?;
            self.coarse.solve_in_place(&mut r)?;
            for (xi, ri) in x.iter_mut().zip(&r) {
                *xi += ri;
            }
            return Ok(());
        };
        for _ in 0..self.pre_sweeps {
            level.smoother.smooth(x, b)?;
        }
        let mut r = b.to_vec();
        level.a.spmv_add(-1.0, x, &mut r)?;
        let rc = level.r.spmv(&r)?;
        let mut xc = vec![0.0; rc.len()];
        self.cycle(l + 1, &mut xc, &rc)?;
        level.p.spmv_add(1.0, &xc, x)?;
        for _ in 0..self.post_sweeps {
            level.smoother.smooth(x, b)?;
        }
        Ok(())
    }

    /// One V-cycle from zero.
    pub fn apply(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut x = vec![0.0; b.len()];
        self.cycle(0, &mut x, b)?;
        Ok(x)
    }
}

/// Fine-level SIMPLE-type smoother whose `K` solve is one V-cycle of a
/// single-field AMG, applied as a preconditioner from zero.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedPreconditioner {
    op: SaddleOperator,
    smoother: BlockSmoother,
}

impl NestedPreconditioner {
    pub fn new(
        op: &SaddleOperator,
        simple_cfg: BlockSmootherConfig,
        amg: ScalarAmg,
    ) -> Result<Self> {
        Ok(Self {
            smoother: BlockSmoother::with_predictor(op, simple_cfg, Predictor::Amg(Box::new(amg)))?,
            op: op.clone(),
        })
    }

    pub fn apply(&self, b: &BlockVector) -> Result<BlockVector> {
        self.smoother.solve_from_zero(&self.op, b)
    }
}

impl LinearOperator for NestedPreconditioner {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let n_u = self.op.n_u();
        let out = NestedPreconditioner::apply(self, &BlockVector::from_merged(x, n_u))?;
        y[..n_u].copy_from_slice(&out.u);
        y[n_u..].copy_from_slice(&out.lam);
        Ok(())
    }
}

/// Builds the nested preconditioner for a generated contact problem.
pub fn nested_preconditioner(
    op: &SaddleOperator,
    problem: &ContactProblem,
    simple_cfg: BlockSmootherConfig,
    inner: &ScalarAmgConfig,
) -> Result<NestedPreconditioner> {
    NestedPreconditioner::new(
        op,
        simple_cfg,
        ScalarAmg::for_problem(&op.k, problem, inner)?,
    )
}
