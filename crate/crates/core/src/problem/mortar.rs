//! Mortar matrices for a matching slave/master interface.

use alloc::vec;
use alloc::vec::Vec;

use super::{ContactProblem, DOFS_PER_NODE};
use crate::error::{Error, Result};
use crate::math;
use crate::sparse::SparseMatrix;

const GAUSS_2: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];

#[derive(Debug, Clone, PartialEq)]
pub struct MortarMatrices {
    /// Slave interface dofs x multiplier dofs.
    pub d: SparseMatrix,
    /// Multiplier dofs x master interface dofs.
    pub m: SparseMatrix,
    /// Per slave node.
    pub weighted_gaps: Vec<f64>,
}

/// Consistent mass of one linear line element, integrated with 2-point Gauss.
pub fn interface_mass_1d(length: f64) -> [[f64; 2]; 2] {
    let mut m = [[0.0; 2]; 2];
    for &xi in &GAUSS_2 {
        let n = [0.5 * (1.0 - xi), 0.5 * (1.0 + xi)];
        for a in 0..2 {
            for b in 0..2 {
                m[a][b] += n[a] * n[b] * 0.5 * length;
            }
        }
    }
    m
}

fn expand(node_matrix: &[(usize, usize, f64)], rows: usize, cols: usize) -> Result<SparseMatrix> {
    let t: Vec<_> = node_matrix
        .iter()
        .flat_map(|&(a, b, v)| {
            (0..DOFS_PER_NODE).map(move |c| (DOFS_PER_NODE * a + c, DOFS_PER_NODE * b + c, v))
        })
        .collect();
    SparseMatrix::from_triplets(DOFS_PER_NODE * rows, DOFS_PER_NODE * cols, &t)
}

/// Builds `D`, `M` and the weighted gaps `g_j = sum_k D_jk * gap0`.
///
/// Slave multipliers use standard linear shape functions. On a matching
/// interface the cross mass `M` equals `D` node by node. With `lumped`, both
/// are row-sum lumped to the same diagonal.
pub fn assemble_mortar(
    problem: &ContactProblem,
    gap0: f64,
    lumped: bool,
) -> Result<MortarMatrices> {
    let ns = problem.slave_nodes.len();
    if ns != problem.master_nodes.len() || ns < 2 {
        return Err(Error::UnsupportedConfiguration(
            "mortar assembly needs matching interfaces with at least one element",
        ));
    }
    let mut d_node = Vec::with_capacity(4 * (ns - 1));
    let mut m_node = Vec::with_capacity(4 * (ns - 1));
    for e in 0..ns - 1 {
        let (p, q) = (
            problem.node_coords[problem.slave_nodes[e]],
            problem.node_coords[problem.slave_nodes[e + 1]],
        );
        let length = math::hypot(q[0] - p[0], q[1] - p[1]);
        // master trace shape functions coincide with the slave ones on a matching mesh
        let me = interface_mass_1d(length);
        for a in 0..2 {
            for b in 0..2 {
                d_node.push((e + a, e + b, me[a][b]));
                m_node.push((e + a, e + b, me[a][b]));
            }
        }
    }
    if lumped {
        let mut rowsum = vec![0.0; ns];
        for &(a, _, v) in &d_node {
            rowsum[a] += v;
        }
        d_node = rowsum.iter().enumerate().map(|(a, &v)| (a, a, v)).collect();
        m_node = d_node.clone();
    }
    let mut rowsum = vec![0.0; ns];
    for &(a, _, v) in &d_node {
        rowsum[a] += v;
    }
    Ok(MortarMatrices {
        d: expand(&d_node, ns, ns)?,
        m: expand(&m_node, ns, ns)?,
        weighted_gaps: rowsum.iter().map(|s| s * gap0).collect(),
    })
}
