//! Displacement aggregation that never crosses the contact interface, and
//! Lagrange-multiplier aggregation derived from it.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::problem::{Body, ContactProblem, DofClass, InterfaceTag, DOFS_PER_NODE};
use crate::sparse::SparseMatrix;

/// Maps degrees of freedom to nodes. Nodes own contiguous dof ranges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofMap {
    node_offsets: Vec<usize>,
    node_of_dof: Vec<usize>,
}

impl DofMap {
    pub fn uniform(num_nodes: usize, dofs_per_node: usize) -> Self {
        Self::from_counts(&vec![dofs_per_node; num_nodes])
    }

    pub fn from_counts(counts: &[usize]) -> Self {
        let mut node_offsets = Vec::with_capacity(counts.len() + 1);
        let mut node_of_dof = Vec::new();
        node_offsets.push(0);
        for (n, &c) in counts.iter().enumerate() {
            node_of_dof.extend(core::iter::repeat_n(n, c));
            node_offsets.push(node_of_dof.len());
        }
        Self {
            node_offsets,
            node_of_dof,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.node_offsets.len() - 1
    }

    pub fn num_dofs(&self) -> usize {
        self.node_of_dof.len()
    }

    pub fn node_of(&self, dof: usize) -> usize {
        self.node_of_dof[dof]
    }

    pub fn dofs_of(&self, node: usize) -> core::ops::Range<usize> {
        self.node_offsets[node]..self.node_offsets[node + 1]
    }
}

/// Node connectivity of the displacement block with cross-body links removed.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeGraph {
    pub num_nodes: usize,
    /// Sorted, symmetric, no self loops.
    pub adjacency: Vec<Vec<usize>>,
    pub body_tag: Vec<Body>,
    pub interface_tag: Vec<InterfaceTag>,
    /// Fully constrained nodes take no part in aggregation.
    pub excluded: Vec<bool>,
}

/// Per-node tags needed to build a [`NodeGraph`].
#[derive(Debug, Clone, PartialEq)]
pub struct NodeTags {
    pub body: Vec<Body>,
    pub interface: Vec<InterfaceTag>,
    pub excluded: Vec<bool>,
}

impl NodeTags {
    pub fn from_problem(problem: &ContactProblem) -> Self {
        Self {
            body: problem.node_body.clone(),
            interface: problem.node_interface.clone(),
            excluded: problem.node_is_dirichlet(),
        }
    }

    /// Tags derived from per-dof classes only. Fully Dirichlet nodes are
    /// excluded; their body tag is irrelevant and reported as slave.
    pub fn from_dof_classes(dof_class: &[DofClass], dofs: &DofMap) -> Result<Self> {
        if dof_class.len() != dofs.num_dofs() {
            return Err(Error::DimensionMismatch {
                context: "dof_class length",
                expected: dofs.num_dofs(),
                found: dof_class.len(),
            });
        }
        let n = dofs.num_nodes();
        let mut tags = Self {
            body: vec![Body::Slave; n],
            interface: vec![InterfaceTag::None; n],
            excluded: vec![true; n],
        };
        for node in 0..n {
            for d in dofs.dofs_of(node) {
                let (body, iface) = match dof_class[d] {
                    DofClass::Dirichlet => continue,
                    DofClass::InteriorSlaveBody => (Body::Slave, InterfaceTag::None),
                    DofClass::InteriorMasterBody => (Body::Master, InterfaceTag::None),
                    DofClass::SlaveInterface => (Body::Slave, InterfaceTag::Slave),
                    DofClass::MasterInterface => (Body::Master, InterfaceTag::Master),
                };
                tags.body[node] = body;
                tags.interface[node] = iface;
                tags.excluded[node] = false;
            }
        }
        Ok(tags)
    }
}

/// Builds the node graph from the pattern of `K`.
///
/// Nodes `a != b` are adjacent when some dof pair satisfies
/// `|K_ij| > drop_tol * sqrt(|K_ii K_jj|)` and both nodes belong to the same
/// body. Cross-body candidates are skipped while scanning, the filtered
/// matrix is never formed.
pub fn build_graph(
    k: &SparseMatrix,
    dofs: &DofMap,
    tags: &NodeTags,
    drop_tol: f64,
) -> Result<NodeGraph> {
    if !k.is_square() || k.num_rows() != dofs.num_dofs() {
        return Err(Error::DimensionMismatch {
            context: "graph matrix vs dof map",
            expected: dofs.num_dofs(),
            found: k.num_rows(),
        });
    }
    let n = dofs.num_nodes();
    for (context, len) in [
        ("body tags", tags.body.len()),
        ("interface tags", tags.interface.len()),
        ("excluded flags", tags.excluded.len()),
    ] {
        if len != n {
            return Err(Error::DimensionMismatch {
                context,
                expected: n,
                found: len,
            });
        }
    }
    let diag: Vec<f64> = (0..k.num_rows()).map(|i| k.get(i, i).abs()).collect();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..k.num_rows() {
        let a = dofs.node_of(i);
        if tags.excluded[a] {
            continue;
        }
        let (cols, vals) = k.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            let b = dofs.node_of(j);
            if a == b || tags.excluded[b] || tags.body[a] != tags.body[b] {
                continue;
            }
            if v.abs() > drop_tol * math::sqrt(diag[i] * diag[j]) {
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        }
    }
    for list in &mut adjacency {
        list.sort_unstable();
        list.dedup();
    }
    Ok(NodeGraph {
        num_nodes: n,
        adjacency,
        body_tag: tags.body.clone(),
        interface_tag: tags.interface.clone(),
        excluded: tags.excluded.clone(),
    })
}

/// [`build_graph`] for a uniform number of dofs per node, with tags taken
/// from the dof classification.
pub fn build_filtered_graph(
    k: &SparseMatrix,
    dofs_per_node: usize,
    dof_class: &[DofClass],
    drop_tol: f64,
) -> Result<NodeGraph> {
    if dofs_per_node == 0 || !k.num_rows().is_multiple_of(dofs_per_node) {
        return Err(Error::DimensionMismatch {
            context: "rows divisible by dofs_per_node",
            expected: dofs_per_node,
            found: k.num_rows(),
        });
    }
    let dofs = DofMap::uniform(k.num_rows() / dofs_per_node, dofs_per_node);
    let tags = NodeTags::from_dof_classes(dof_class, &dofs)?;
    build_graph(k, &dofs, &tags, drop_tol)
}

/// Diagnostics collected while aggregating.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AggregationReport {
    /// Aggregates with a single node.
    pub singletons: usize,
    /// Aggregates left below the minimum size because they have no neighbor.
    pub undersized: usize,
    /// Nodes excluded from aggregation (fully constrained).
    pub excluded: usize,
    /// Multiplier nodes also referenced from a displacement aggregate other
    /// than the one that placed them.
    pub overlaps: usize,
}

/// Partition of the (non-excluded) nodes into aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregation {
    /// `None` for excluded nodes.
    pub node_to_agg: Vec<Option<usize>>,
    pub num_aggs: usize,
    pub agg_root: Vec<usize>,
    pub report: AggregationReport,
}

impl Aggregation {
    /// Member nodes per aggregate, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut m = vec![Vec::new(); self.num_aggs];
        for (n, a) in self.node_to_agg.iter().enumerate() {
            if let Some(a) = a {
                m[*a].push(n);
            }
        }
        m
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.num_aggs];
        for a in self.node_to_agg.iter().flatten() {
            s[*a] += 1;
        }
        s
    }
}

/// Greedy uncoupled aggregation in three phases.
///
/// 1. Sweep nodes by ascending id; an unassigned node whose neighbors are all
///    unassigned becomes a root and takes its neighbors.
/// 2. Leftover nodes join the adjacent aggregate with most adjacent members.
/// 3. Aggregates below `min_agg_size` merge into the neighboring aggregate
///    with most connections.
///
/// Ties always go to the lowest aggregate id.
pub fn aggregate_greedy(graph: &NodeGraph, min_agg_size: usize) -> Result<Aggregation> {
    if min_agg_size == 0 {
        return Err(Error::InvalidConfig("min_agg_size must be at least 1"));
    }
    let n = graph.num_nodes;
    let mut agg: Vec<Option<usize>> = vec![None; n];
    let mut roots = Vec::new();

    for node in 0..n {
        if graph.excluded[node] || agg[node].is_some() {
            continue;
        }
        if graph.adjacency[node].iter().all(|&nb| agg[nb].is_none()) {
            let id = roots.len();
            roots.push(node);
            agg[node] = Some(id);
            for &nb in &graph.adjacency[node] {
                agg[nb] = Some(id);
            }
        }
    }

    // phase 2 decisions only look at phase-1 membership
    let phase1 = agg.clone();
    let mut counts: Vec<usize> = vec![0; roots.len()];
    for node in 0..n {
        if graph.excluded[node] || phase1[node].is_some() {
            continue;
        }
        let mut touched = Vec::new();
        for &nb in &graph.adjacency[node] {
            if let Some(a) = phase1[nb] {
                if counts[a] == 0 {
                    touched.push(a);
                }
                counts[a] += 1;
            }
        }
        let best = touched
            .iter()
            .copied()
            .max_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a)));
        for &a in &touched {
            counts[a] = 0;
        }
        match best {
            Some(a) => agg[node] = Some(a),
            None => {
                // every neighbor is still unassigned in a later phase-2 slot; seed
                let id = roots.len();
                roots.push(node);
                counts.push(0);
                agg[node] = Some(id);
            }
        }
    }

    let mut report = AggregationReport {
        excluded: graph.excluded.iter().filter(|&&e| e).count(),
        ..AggregationReport::default()
    };

    // phase 3: merge undersized aggregates
    let num = roots.len();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); num];
    for (node, a) in agg.iter().enumerate() {
        if let Some(a) = a {
            members[*a].push(node);
        }
    }
    let mut alive = vec![true; num];
    let mut links = vec![0usize; num];
    for a in 0..num {
        if !alive[a] || members[a].len() >= min_agg_size {
            continue;
        }
        let mut touched = Vec::new();
        for &node in &members[a] {
            for &nb in &graph.adjacency[node] {
                if let Some(b) = agg[nb] {
                    if b != a {
                        if links[b] == 0 {
                            touched.push(b);
                        }
                        links[b] += 1;
                    }
                }
            }
        }
        let target = touched
            .iter()
            .copied()
            .max_by(|&x, &y| links[x].cmp(&links[y]).then(y.cmp(&x)));
        for &b in &touched {
            links[b] = 0;
        }
        if let Some(b) = target {
            let moved = core::mem::take(&mut members[a]);
            for &node in &moved {
                agg[node] = Some(b);
            }
            members[b].extend(moved);
            members[b].sort_unstable();
            alive[a] = false;
        } else {
            report.undersized += 1;
        }
    }

    let mut remap = vec![usize::MAX; num];
    let mut agg_root = Vec::new();
    for a in 0..num {
        if alive[a] {
            remap[a] = agg_root.len();
            agg_root.push(roots[a]);
        }
    }
    let node_to_agg: Vec<Option<usize>> = agg.iter().map(|a| a.map(|a| remap[a])).collect();
    let num_aggs = agg_root.len();
    let result = Aggregation {
        node_to_agg,
        num_aggs,
        agg_root,
        report,
    };
    let singletons = result.sizes().iter().filter(|&&s| s == 1).count();
    Ok(Aggregation {
        report: AggregationReport {
            singletons,
            ..result.report.clone()
        },
        ..result
    })
}

/// Multiplier dof bookkeeping for the interface aggregation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LagrangeMap {
    /// Displacement dof to multiplier dof, where the dof is a slave interface dof.
    pub slave_dof_to_lm_dof: Vec<Option<usize>>,
    /// Multiplier dof to its pseudo node.
    pub lm_node_of_lm_dof: Vec<usize>,
    pub num_lm_nodes: usize,
}

impl LagrangeMap {
    pub fn from_problem(problem: &ContactProblem) -> Self {
        let mut slave_dof_to_lm_dof = vec![None; problem.num_dofs()];
        for (j, &node) in problem.slave_nodes.iter().enumerate() {
            for c in 0..DOFS_PER_NODE {
                slave_dof_to_lm_dof[DOFS_PER_NODE * node + c] = Some(DOFS_PER_NODE * j + c);
            }
        }
        Self {
            slave_dof_to_lm_dof,
            ..Self::uniform(problem.slave_nodes.len(), DOFS_PER_NODE)
        }
    }

    /// Pseudo nodes carrying `dofs_per_node` consecutive multiplier dofs.
    pub fn uniform(num_lm_nodes: usize, dofs_per_node: usize) -> Self {
        Self {
            slave_dof_to_lm_dof: Vec::new(),
            lm_node_of_lm_dof: (0..num_lm_nodes * dofs_per_node)
                .map(|d| d / dofs_per_node)
                .collect(),
            num_lm_nodes,
        }
    }

    pub fn from_dof_map(dofs: &DofMap) -> Self {
        Self {
            slave_dof_to_lm_dof: Vec::new(),
            lm_node_of_lm_dof: (0..dofs.num_dofs()).map(|d| dofs.node_of(d)).collect(),
            num_lm_nodes: dofs.num_nodes(),
        }
    }
}

/// Aggregates for the Lagrange multipliers, read off the displacement
/// aggregates through the nonzero pattern of `D`.
///
/// `d` has displacement dofs as rows and multiplier dofs as columns; rows are
/// visited in ascending order. For row `i` with owning node in displacement
/// aggregate `k`, every multiplier `j` with `D_ij != 0` puts its pseudo node
/// into the multiplier aggregate associated with `k`, which is created on
/// first use. A pseudo node keeps the first aggregate it was placed in;
/// later references from another aggregate are counted as overlaps.
pub fn aggregate_lagrange(
    disp_aggs: &Aggregation,
    d: &SparseMatrix,
    dofs: &DofMap,
    lmap: &LagrangeMap,
) -> Result<Aggregation> {
    if d.num_rows() != dofs.num_dofs() {
        return Err(Error::DimensionMismatch {
            context: "D rows vs displacement dofs",
            expected: dofs.num_dofs(),
            found: d.num_rows(),
        });
    }
    if d.num_cols() != lmap.lm_node_of_lm_dof.len() {
        return Err(Error::DimensionMismatch {
            context: "D columns vs multiplier dofs",
            expected: lmap.lm_node_of_lm_dof.len(),
            found: d.num_cols(),
        });
    }
    let mut disp_to_lag: Vec<Option<usize>> = vec![None; disp_aggs.num_aggs];
    let mut node_to_agg: Vec<Option<usize>> = vec![None; lmap.num_lm_nodes];
    // displacement aggregate that placed each pseudo node
    let mut owner: Vec<usize> = vec![usize::MAX; lmap.num_lm_nodes];
    let mut overlapping = vec![false; lmap.num_lm_nodes];
    let mut agg_root = Vec::new();
    for i in 0..d.num_rows() {
        let (cols, vals) = d.row(i);
        if vals.iter().all(|&v| v == 0.0) {
            continue;
        }
        let node = dofs.node_of(i);
        let k = disp_aggs.node_to_agg[node].ok_or(Error::UnaggregatedSlaveDof { dof: i, node })?;
        for (&j, &v) in cols.iter().zip(vals) {
            if v == 0.0 {
                continue;
            }
            let lm_node = lmap.lm_node_of_lm_dof[j];
            if node_to_agg[lm_node].is_some() {
                if owner[lm_node] != k {
                    overlapping[lm_node] = true;
                }
                continue;
            }
            let l = match disp_to_lag[k] {
                Some(l) => l,
                None => {
                    let l = agg_root.len();
                    agg_root.push(lm_node);
                    disp_to_lag[k] = Some(l);
                    l
                }
            };
            node_to_agg[lm_node] = Some(l);
            owner[lm_node] = k;
        }
    }
    let overlaps = overlapping.iter().filter(|&&o| o).count();
    let num_aggs = agg_root.len();
    let mut agg = Aggregation {
        node_to_agg,
        num_aggs,
        agg_root,
        report: AggregationReport {
            overlaps,
            ..AggregationReport::default()
        },
    };
    agg.report.singletons = agg.sizes().iter().filter(|&&s| s == 1).count();
    Ok(agg)
}
