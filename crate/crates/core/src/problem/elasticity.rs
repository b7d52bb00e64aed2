//! Plane-strain bilinear quadrilateral stiffness.

use alloc::vec::Vec;

use super::{ContactProblem, MeshSpec, DOFS_PER_NODE};
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

const GAUSS_2: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];

/// Isotropic plane-strain constitutive matrix in Voigt order `(xx, yy, xy)`.
pub fn plane_strain_matrix(youngs_modulus: f64, poisson_ratio: f64) -> [[f64; 3]; 3] {
    let (e, nu) = (youngs_modulus, poisson_ratio);
    let f = e / ((1.0 + nu) * (1.0 - 2.0 * nu));
    [
        [f * (1.0 - nu), f * nu, 0.0],
        [f * nu, f * (1.0 - nu), 0.0],
        [0.0, 0.0, f * (1.0 - 2.0 * nu) / 2.0],
    ]
}

/// 8x8 stiffness of a 4-node quadrilateral with 2x2 Gauss quadrature.
///
/// Local dof order is `(x0, y0, x1, y1, ...)` following the node order.
/// `element` only labels the error for inverted geometry.
pub fn element_stiffness(
    coords: &[[f64; 2]; 4],
    cmat: &[[f64; 3]; 3],
    element: usize,
) -> Result<[[f64; 8]; 8]> {
    const XI: [f64; 4] = [-1.0, 1.0, 1.0, -1.0];
    const ETA: [f64; 4] = [-1.0, -1.0, 1.0, 1.0];
    let mut ke = [[0.0; 8]; 8];
    for &xi in &GAUSS_2 {
        for &eta in &GAUSS_2 {
            let mut dn_dxi = [0.0; 4];
            let mut dn_deta = [0.0; 4];
            for a in 0..4 {
                dn_dxi[a] = 0.25 * XI[a] * (1.0 + ETA[a] * eta);
                dn_deta[a] = 0.25 * ETA[a] * (1.0 + XI[a] * xi);
            }
            let mut jac = [[0.0; 2]; 2];
            for a in 0..4 {
                jac[0][0] += dn_dxi[a] * coords[a][0];
                jac[0][1] += dn_dxi[a] * coords[a][1];
                jac[1][0] += dn_deta[a] * coords[a][0];
                jac[1][1] += dn_deta[a] * coords[a][1];
            }
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            if !(det > 0.0) {
                return Err(Error::DegenerateElement { element, det });
            }
            let inv = [
                [jac[1][1] / det, -jac[0][1] / det],
                [-jac[1][0] / det, jac[0][0] / det],
            ];
            // B is 3x8, strain = B u
            let mut b = [[0.0; 8]; 3];
            for a in 0..4 {
                let dx = inv[0][0] * dn_dxi[a] + inv[0][1] * dn_deta[a];
                let dy = inv[1][0] * dn_dxi[a] + inv[1][1] * dn_deta[a];
                b[0][2 * a] = dx;
                b[1][2 * a + 1] = dy;
                b[2][2 * a] = dy;
                b[2][2 * a + 1] = dx;
            }
            let mut cb = [[0.0; 8]; 3];
            for i in 0..3 {
                for j in 0..8 {
                    cb[i][j] = (0..3).map(|k| cmat[i][k] * b[k][j]).sum();
                }
            }
            for i in 0..8 {
                for j in 0..8 {
                    ke[i][j] += det * (0..3).map(|k| b[k][i] * cb[k][j]).sum::<f64>();
                }
            }
        }
    }
    Ok(ke)
}

/// Global stiffness before Dirichlet elimination.
pub fn assemble_stiffness_unconstrained(
    problem: &ContactProblem,
    spec: &MeshSpec,
) -> Result<SparseMatrix> {
    let cmat = plane_strain_matrix(spec.youngs_modulus, spec.poisson_ratio);
    let mut triplets = Vec::with_capacity(64 * problem.elements.len());
    for (e, nodes) in problem.elements.iter().enumerate() {
        let coords = nodes.map(|n| problem.node_coords[n]);
        let ke = element_stiffness(&coords, &cmat, e)?;
        for (a, &na) in nodes.iter().enumerate() {
            for (b, &nb) in nodes.iter().enumerate() {
                for ca in 0..DOFS_PER_NODE {
                    for cb in 0..DOFS_PER_NODE {
                        triplets.push((
                            DOFS_PER_NODE * na + ca,
                            DOFS_PER_NODE * nb + cb,
                            ke[2 * a + ca][2 * b + cb],
                        ));
                    }
                }
            }
        }
    }
    let n = problem.num_dofs();
    SparseMatrix::from_triplets(n, n, &triplets)
}

/// Stiffness with Dirichlet rows and columns replaced by unit diagonal entries.
///
/// Prescribed values are zero, so the right-hand side needs no lifting.
pub fn assemble_elasticity(problem: &ContactProblem, spec: &MeshSpec) -> Result<SparseMatrix> {
    let k = assemble_stiffness_unconstrained(problem, spec)?;
    let n = k.num_rows();
    let fixed: Vec<bool> = (0..n).map(|d| problem.is_dirichlet(d)).collect();
    let mut triplets = Vec::with_capacity(k.nnz());
    for (i, j, v) in k.triplets() {
        if !fixed[i] && !fixed[j] {
            triplets.push((i, j, v));
        }
    }
    for (d, _) in fixed.iter().enumerate().filter(|(_, &f)| f) {
        triplets.push((d, d, 1.0));
    }
    SparseMatrix::from_triplets(n, n, &triplets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{build_mesh, Body};

    fn unit_square() -> [[f64; 2]; 4] {
        [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
    }

    #[test]
    fn rigid_translation_in_kernel() {
        let ke = element_stiffness(&unit_square(), &plane_strain_matrix(1.0, 0.3), 0).unwrap();
        let u = [1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        for row in &ke {
            let s: f64 = row.iter().zip(&u).map(|(a, b)| a * b).sum();
            assert!(s.abs() < 1e-12);
        }
        // rigid rotation about the origin: u = (-y, x)
        let c = unit_square();
        let rot: Vec<f64> = c.iter().flat_map(|p| [-p[1], p[0]]).collect();
        for row in &ke {
            let s: f64 = row.iter().zip(&rot).map(|(a, b)| a * b).sum();
            assert!(s.abs() < 1e-12);
        }
    }

    #[test]
    fn inverted_element_rejected() {
        let mut c = unit_square();
        c.swap(1, 3);
        let err = element_stiffness(&c, &plane_strain_matrix(1.0, 0.3), 7).unwrap_err();
        assert!(matches!(err, Error::DegenerateElement { element: 7, .. }));
    }

    #[test]
    fn no_coupling_between_bodies() {
        let spec = MeshSpec::default();
        let p = build_mesh(&spec).unwrap();
        let k = assemble_elasticity(&p, &spec).unwrap();
        for (i, j, v) in k.triplets() {
            let (bi, bj) = (p.node_body[i / 2], p.node_body[j / 2]);
            if bi != bj {
                assert_eq!(v, 0.0, "coupling between bodies at ({i},{j})");
            }
        }
        assert!(p.node_body.contains(&Body::Slave));
    }

    #[test]
    fn dirichlet_rows_are_unit() {
        let spec = MeshSpec::default();
        let p = build_mesh(&spec).unwrap();
        let k = assemble_elasticity(&p, &spec).unwrap();
        for &d in &p.dirichlet_dofs {
            let (cols, vals) = k.row(d);
            assert_eq!(cols, &[d]);
            assert_eq!(vals, &[1.0]);
        }
    }
}
