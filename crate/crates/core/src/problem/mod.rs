//! Linear, fully active, frictionless two-body contact on structured
//! plane-strain quadrilateral meshes.
//!
//! Two axis-aligned rectangular blocks are stacked along `+y`: the master
//! block occupies `[0, W] x [0, H_m]`, the slave block sits on top and
//! overlaps it by `gap0`. The whole configuration is then rotated about the
//! origin by `angle`. Faces opposite to the contact interface carry
//! homogeneous Dirichlet conditions.

mod elasticity;
mod mortar;

use alloc::vec;
use alloc::vec::Vec;

pub use elasticity::{
    assemble_elasticity, assemble_stiffness_unconstrained, element_stiffness, plane_strain_matrix,
};
pub use mortar::{assemble_mortar, interface_mass_1d, MortarMatrices};

use crate::error::{Error, Result};
use crate::math;
use crate::saddle::{SaddleOperator, SaddleSystem};
use crate::sparse::SparseMatrix;
use crate::vector::BlockVector;

/// Displacement degrees of freedom per node.
pub const DOFS_PER_NODE: usize = 2;

/// Which rows are supported on the faces opposite to the interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FarFaceSupport {
    /// Both displacement components fixed.
    #[default]
    Clamped,
    /// Face-normal component fixed on the whole face plus the tangential
    /// component of the first face node. Only valid when the rotation maps
    /// the coordinate axes onto themselves.
    Roller,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshSpec {
    /// `(width, height)` of the slave block.
    pub slave_dims: (f64, f64),
    /// `(width, height)` of the master block.
    pub master_dims: (f64, f64),
    /// `(nx, ny)` elements of the slave block.
    pub slave_elems: (usize, usize),
    /// `(nx, ny)` elements of the master block.
    pub master_elems: (usize, usize),
    /// Initial overlap along the contact normal (positive = penetration).
    pub gap0: f64,
    /// Rotation of the whole configuration in radians.
    pub angle: f64,
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
    /// Row-sum lumped mortar matrices instead of consistent ones.
    pub lumped_mortar: bool,
    pub support: FarFaceSupport,
}

impl Default for MeshSpec {
    fn default() -> Self {
        Self {
            slave_dims: (1.0, 0.5),
            master_dims: (1.0, 0.5),
            slave_elems: (10, 5),
            master_elems: (10, 5),
            gap0: 0.001,
            angle: 0.0,
            youngs_modulus: 1.0,
            poisson_ratio: 0.3,
            lumped_mortar: false,
            support: FarFaceSupport::Clamped,
        }
    }
}

impl MeshSpec {
    /// Square `m x m` element blocks of equal size.
    pub fn square_blocks(m: usize) -> Self {
        Self {
            slave_dims: (1.0, 1.0),
            master_dims: (1.0, 1.0),
            slave_elems: (m, m),
            master_elems: (m, m),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (sx, sy) = self.slave_elems;
        let (mx, my) = self.master_elems;
        if sx == 0 || sy == 0 || mx == 0 || my == 0 {
            return Err(Error::InvalidMesh("element counts must be at least 1"));
        }
        let dims = [
            self.slave_dims.0,
            self.slave_dims.1,
            self.master_dims.0,
            self.master_dims.1,
        ];
        if dims.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::InvalidMesh("block dimensions must be positive"));
        }
        if !(self.poisson_ratio > 0.0 && self.poisson_ratio < 0.5) {
            return Err(Error::InvalidMesh("poisson_ratio must lie in (0, 0.5)"));
        }
        if !(self.youngs_modulus > 0.0 && self.youngs_modulus.is_finite()) {
            return Err(Error::InvalidMesh("youngs_modulus must be positive"));
        }
        if !self.gap0.is_finite() || !self.angle.is_finite() {
            return Err(Error::InvalidMesh("gap0 and angle must be finite"));
        }
        if self.gap0 >= self.slave_dims.1.min(self.master_dims.1) {
            return Err(Error::InvalidMesh(
                "gap0 must be smaller than both block heights",
            ));
        }
        if sx != mx {
            return Err(Error::UnsupportedConfiguration(
                "non-matching interface: slave and master need the same number of interface elements",
            ));
        }
        if (self.slave_dims.0 - self.master_dims.0).abs() > 1e-12 * self.master_dims.0 {
            return Err(Error::UnsupportedConfiguration(
                "non-matching interface: slave and master blocks need the same width",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Body {
    Slave,
    Master,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InterfaceTag {
    None,
    Slave,
    Master,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DofClass {
    InteriorSlaveBody,
    InteriorMasterBody,
    SlaveInterface,
    MasterInterface,
    Dirichlet,
}

/// Generated mesh plus interface data.
#[derive(Debug, Clone)]
pub struct ContactProblem {
    pub node_coords: Vec<[f64; 2]>,
    pub node_body: Vec<Body>,
    pub node_interface: Vec<InterfaceTag>,
    /// Bilinear quadrilaterals, counterclockwise.
    pub elements: Vec<[usize; 4]>,
    pub dof_class: Vec<DofClass>,
    /// Slave interface nodes ordered along the interface.
    pub slave_nodes: Vec<usize>,
    /// Master interface nodes, `master_nodes[i]` faces `slave_nodes[i]`.
    pub master_nodes: Vec<usize>,
    /// Outward unit normal of the slave surface per slave node.
    pub normals: Vec<[f64; 2]>,
    pub tangents: Vec<[f64; 2]>,
    /// Slave mortar matrix over slave interface dofs x multiplier dofs.
    pub d: SparseMatrix,
    /// Master mortar matrix over multiplier dofs x master interface dofs.
    pub m: SparseMatrix,
    /// Per slave node: `sum_k D_jk * gap0`.
    pub weighted_gaps: Vec<f64>,
    /// Sorted list of constrained dofs.
    pub dirichlet_dofs: Vec<usize>,
}

fn rotate(angle: f64, p: [f64; 2]) -> [f64; 2] {
    let (s, c) = (math::sin(angle), math::cos(angle));
    [c * p[0] - s * p[1], s * p[0] + c * p[1]]
}

/// Generates the two-block mesh, tags, interface frame and mortar matrices.
pub fn build_mesh(spec: &MeshSpec) -> Result<ContactProblem> {
    spec.validate()?;
    let (nx, sny) = spec.slave_elems;
    let (_, mny) = spec.master_elems;
    let width = spec.master_dims.0;
    let (h_s, h_m) = (spec.slave_dims.1, spec.master_dims.1);
    let row = nx + 1;

    let n_slave = row * (sny + 1);
    let n_master = row * (mny + 1);
    let n_nodes = n_slave + n_master;
    let mut coords = Vec::with_capacity(n_nodes);
    let mut body = Vec::with_capacity(n_nodes);
    let mut iface = vec![InterfaceTag::None; n_nodes];

    // slave block: row 0 is the contact surface, row sny the far face
    let slave_bottom = h_m - spec.gap0;
    for j in 0..=sny {
        for i in 0..=nx {
            let p = [
                width * i as f64 / nx as f64,
                slave_bottom + h_s * j as f64 / sny as f64,
            ];
            coords.push(rotate(spec.angle, p));
            body.push(Body::Slave);
        }
    }
    // master block: row 0 is the far face, row mny the contact surface
    for j in 0..=mny {
        for i in 0..=nx {
            let p = [width * i as f64 / nx as f64, h_m * j as f64 / mny as f64];
            coords.push(rotate(spec.angle, p));
            body.push(Body::Master);
        }
    }

    let mut elements = Vec::with_capacity(nx * (sny + mny));
    for (offset, ny) in [(0, sny), (n_slave, mny)] {
        for j in 0..ny {
            for i in 0..nx {
                let a = offset + j * row + i;
                elements.push([a, a + 1, a + 1 + row, a + row]);
            }
        }
    }

    let slave_nodes: Vec<usize> = (0..=nx).collect();
    let master_nodes: Vec<usize> = (0..=nx).map(|i| n_slave + mny * row + i).collect();
    for &n in &slave_nodes {
        iface[n] = InterfaceTag::Slave;
    }
    for &n in &master_nodes {
        iface[n] = InterfaceTag::Master;
    }

    let normal = rotate(spec.angle, [0.0, -1.0]);
    let tangent = rotate(spec.angle, [1.0, 0.0]);
    let normals = vec![normal; slave_nodes.len()];
    let tangents = vec![tangent; slave_nodes.len()];

    let slave_far: Vec<usize> = (0..=nx).map(|i| sny * row + i).collect();
    let master_far: Vec<usize> = (0..=nx).map(|i| n_slave + i).collect();
    let mut dirichlet_dofs = Vec::new();
    match spec.support {
        FarFaceSupport::Clamped => {
            for &n in slave_far.iter().chain(&master_far) {
                dirichlet_dofs.extend((0..DOFS_PER_NODE).map(|c| DOFS_PER_NODE * n + c));
            }
        }
        FarFaceSupport::Roller => {
            // component carrying the rotated y axis
            let axis = rotate(spec.angle, [0.0, 1.0]);
            let normal_comp = if axis[1].abs() > 1.0 - 1e-12 {
                1
            } else if axis[0].abs() > 1.0 - 1e-12 {
                0
            } else {
                return Err(Error::UnsupportedConfiguration(
                    "roller support needs a rotation that keeps the faces axis-aligned",
                ));
            };
            for face in [&slave_far, &master_far] {
                for &n in face.iter() {
                    dirichlet_dofs.push(DOFS_PER_NODE * n + normal_comp);
                }
                dirichlet_dofs.push(DOFS_PER_NODE * face[0] + (1 - normal_comp));
            }
        }
    }
    dirichlet_dofs.sort_unstable();
    dirichlet_dofs.dedup();

    let mut dof_class = Vec::with_capacity(DOFS_PER_NODE * n_nodes);
    for n in 0..n_nodes {
        let class = match (body[n], iface[n]) {
            (_, InterfaceTag::Slave) => DofClass::SlaveInterface,
            (_, InterfaceTag::Master) => DofClass::MasterInterface,
            (Body::Slave, InterfaceTag::None) => DofClass::InteriorSlaveBody,
            (Body::Master, InterfaceTag::None) => DofClass::InteriorMasterBody,
        };
        dof_class.extend([class; DOFS_PER_NODE]);
    }
    for &d in &dirichlet_dofs {
        dof_class[d] = DofClass::Dirichlet;
    }

    let mut problem = ContactProblem {
        node_coords: coords,
        node_body: body,
        node_interface: iface,
        elements,
        dof_class,
        slave_nodes,
        master_nodes,
        normals,
        tangents,
        d: SparseMatrix::zeros(0, 0),
        m: SparseMatrix::zeros(0, 0),
        weighted_gaps: Vec::new(),
        dirichlet_dofs,
    };
    let mortar = assemble_mortar(&problem, spec.gap0, spec.lumped_mortar)?;
    problem.d = mortar.d;
    problem.m = mortar.m;
    problem.weighted_gaps = mortar.weighted_gaps;
    Ok(problem)
}

impl ContactProblem {
    pub fn num_nodes(&self) -> usize {
        self.node_coords.len()
    }

    pub fn num_dofs(&self) -> usize {
        DOFS_PER_NODE * self.num_nodes()
    }

    /// Two multipliers (Cartesian components) per slave node.
    pub fn num_lagrange_dofs(&self) -> usize {
        DOFS_PER_NODE * self.slave_nodes.len()
    }

    pub fn is_dirichlet(&self, dof: usize) -> bool {
        self.dof_class[dof] == DofClass::Dirichlet
    }

    /// Constraint rows `(normal, tangential)` of slave node `j`.
    ///
    /// The normal row sits in the multiplier slot of the dominant normal
    /// component (ties go to `x`), so the approximate Schur complement keeps a
    /// nonzero diagonal at every orientation.
    pub fn constraint_rows(&self, j: usize) -> (usize, usize) {
        let n = self.normals[j];
        let slot = if n[1].abs() > n[0].abs() + 1e-12 {
            1
        } else {
            0
        };
        (DOFS_PER_NODE * j + slot, DOFS_PER_NODE * j + 1 - slot)
    }

    /// Per-node flag: every dof of the node is Dirichlet-constrained.
    pub fn node_is_dirichlet(&self) -> Vec<bool> {
        (0..self.num_nodes())
            .map(|n| (0..DOFS_PER_NODE).all(|c| self.is_dirichlet(DOFS_PER_NODE * n + c)))
            .collect()
    }

    /// Slave mortar matrix mapped to global displacement rows (`n_u x n_lam`).
    pub fn d_global(&self) -> SparseMatrix {
        let t: Vec<_> = self
            .d
            .triplets()
            .map(|(i, j, v)| (self.slave_dof(i), j, v))
            .collect();
        SparseMatrix::from_triplets(self.num_dofs(), self.num_lagrange_dofs(), &t)
            .expect("slave dofs are in range")
    }

    fn slave_dof(&self, local: usize) -> usize {
        DOFS_PER_NODE * self.slave_nodes[local / DOFS_PER_NODE] + local % DOFS_PER_NODE
    }

    fn master_dof(&self, local: usize) -> usize {
        DOFS_PER_NODE * self.master_nodes[local / DOFS_PER_NODE] + local % DOFS_PER_NODE
    }
}

/// Assembles the block system `[[K, B1], [B2, -Cz]] [u; lam] = rhs`.
///
/// * `B1 = [D^T on slave rows; -M^T on master rows]`,
/// * normal row of slave node `j`: `n_j^T (D u_s - M u_m) = -g_j`,
/// * tangential row of slave node `j`: `t_j^T lam_j = 0`, stored as `Cz = -T`.
///
/// Multipliers stay in the global Cartesian frame; with this sign choice
/// interpenetration produces `lam_j . n_j > 0`.
pub fn assemble_saddle(
    problem: &ContactProblem,
    k: SparseMatrix,
    d: &SparseMatrix,
    m: &SparseMatrix,
    weighted_gaps: &[f64],
) -> Result<SaddleSystem> {
    let n_u = problem.num_dofs();
    let n_lam = problem.num_lagrange_dofs();
    let n_s = problem.slave_nodes.len();
    let n_mi = DOFS_PER_NODE * problem.master_nodes.len();
    let dims = [
        ("K rows", n_u, k.num_rows()),
        ("D rows", n_lam, d.num_rows()),
        ("D columns", n_lam, d.num_cols()),
        ("M rows", n_lam, m.num_rows()),
        ("M columns", n_mi, m.num_cols()),
        ("weighted gaps", n_s, weighted_gaps.len()),
    ];
    for (context, expected, found) in dims {
        if expected != found {
            return Err(Error::DimensionMismatch {
                context,
                expected,
                found,
            });
        }
    }

    let mut b1 = Vec::new();
    for (i, j, v) in d.triplets() {
        b1.push((problem.slave_dof(i), j, v));
    }
    for (j, i, v) in m.triplets() {
        b1.push((problem.master_dof(i), j, -v));
    }

    let mut b2 = Vec::new();
    let mut cz = Vec::new();
    let mut rhs_lam = vec![0.0; n_lam];
    for j in 0..n_s {
        let (row_n, row_t) = problem.constraint_rows(j);
        let n = problem.normals[j];
        let t = problem.tangents[j];
        for c in 0..DOFS_PER_NODE {
            let (cols, vals) = d.row(DOFS_PER_NODE * j + c);
            for (&col, &v) in cols.iter().zip(vals) {
                b2.push((row_n, problem.slave_dof(col), n[c] * v));
            }
            let (cols, vals) = m.row(DOFS_PER_NODE * j + c);
            for (&col, &v) in cols.iter().zip(vals) {
                b2.push((row_n, problem.master_dof(col), -n[c] * v));
            }
            cz.push((row_t, DOFS_PER_NODE * j + c, -t[c]));
        }
        rhs_lam[row_n] = -weighted_gaps[j];
    }

    let op = SaddleOperator::new(
        k,
        SparseMatrix::from_triplets(n_u, n_lam, &b1)?,
        SparseMatrix::from_triplets(n_lam, n_u, &b2)?,
        SparseMatrix::from_triplets(n_lam, n_lam, &cz)?,
    )?;
    SaddleSystem::new(op, BlockVector::new(vec![0.0; n_u], rhs_lam))
}

/// Mesh, stiffness and saddle system in one call.
pub fn assemble_contact_system(spec: &MeshSpec) -> Result<(ContactProblem, SaddleSystem)> {
    let problem = build_mesh(spec)?;
    let k = assemble_elasticity(&problem, spec)?;
    let system = assemble_saddle(&problem, k, &problem.d, &problem.m, &problem.weighted_gaps)?;
    Ok((problem, system))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_PI_2;

    fn small(nx: usize, ny: usize) -> MeshSpec {
        MeshSpec {
            slave_elems: (nx, ny),
            master_elems: (nx, ny),
            ..MeshSpec::default()
        }
    }

    #[test]
    fn smallest_mesh_counts() {
        let p = build_mesh(&small(1, 1)).unwrap();
        assert_eq!(p.num_nodes(), 8);
        assert_eq!(p.slave_nodes.len(), 2);
        assert_eq!(p.master_nodes.len(), 2);
        assert_eq!(p.elements.len(), 2);
        assert_eq!(p.dirichlet_dofs.len(), 8);
    }

    #[test]
    fn axis_aligned_normals() {
        let p = build_mesh(&small(2, 1)).unwrap();
        for (n, t) in p.normals.iter().zip(&p.tangents) {
            assert_eq!(n[0], 0.0);
            assert_eq!(n[1], -1.0);
            assert!((n[0] * t[0] + n[1] * t[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn rotated_normals_keep_tags() {
        let p0 = build_mesh(&small(2, 1)).unwrap();
        let spec = MeshSpec {
            angle: FRAC_PI_2,
            ..small(2, 1)
        };
        let p = build_mesh(&spec).unwrap();
        for n in &p.normals {
            assert!((n[0] - 1.0).abs() < 1e-12 && n[1].abs() < 1e-12);
            assert!((math::hypot(n[0], n[1]) - 1.0).abs() < 1e-12);
        }
        assert_eq!(p.dof_class, p0.dof_class);
    }

    #[test]
    fn non_matching_interface_rejected() {
        let spec = MeshSpec {
            slave_elems: (3, 2),
            master_elems: (4, 2),
            ..MeshSpec::default()
        };
        assert!(matches!(
            build_mesh(&spec),
            Err(Error::UnsupportedConfiguration(_))
        ));
        let spec = MeshSpec {
            slave_dims: (0.8, 0.4),
            ..MeshSpec::default()
        };
        assert!(matches!(
            build_mesh(&spec),
            Err(Error::UnsupportedConfiguration(_))
        ));
    }

    #[test]
    fn invalid_material_rejected() {
        let spec = MeshSpec {
            poisson_ratio: 0.5,
            ..MeshSpec::default()
        };
        assert!(matches!(build_mesh(&spec), Err(Error::InvalidMesh(_))));
        let spec = MeshSpec {
            slave_elems: (0, 1),
            ..MeshSpec::default()
        };
        assert!(build_mesh(&spec).is_err());
    }

    #[test]
    fn roller_needs_axis_aligned_rotation() {
        let spec = MeshSpec {
            support: FarFaceSupport::Roller,
            angle: 0.3,
            ..MeshSpec::default()
        };
        assert!(build_mesh(&spec).is_err());
        let spec = MeshSpec {
            support: FarFaceSupport::Roller,
            ..MeshSpec::default()
        };
        let p = build_mesh(&spec).unwrap();
        // (nx + 1) normal components plus one tangential pin per far face
        assert_eq!(p.dirichlet_dofs.len(), 2 * (10 + 1 + 1));
    }

    #[test]
    fn saddle_row_split() {
        let (p, sys) = assemble_contact_system(&small(3, 2)).unwrap();
        for j in 0..p.slave_nodes.len() {
            let (rn, rt) = p.constraint_rows(j);
            assert!(sys.op.b2.row_is_zero(rt));
            assert!(sys.op.cz.row_is_zero(rn));
            assert!(!sys.op.b2.row_is_zero(rn));
            assert!(!sys.op.cz.row_is_zero(rt));
            assert!(sys.rhs.lam[rn] < 0.0);
            assert_eq!(sys.rhs.lam[rt], 0.0);
        }
        assert!(sys.op.k.symmetry_defect() < 1e-12 * sys.op.k.max_abs());
    }

    #[test]
    fn zero_gap_zero_load_has_trivial_solution() {
        let spec = MeshSpec {
            gap0: 0.0,
            ..small(2, 2)
        };
        let (p, sys) = assemble_contact_system(&spec).unwrap();
        assert!(p.weighted_gaps.iter().all(|&g| g == 0.0));
        assert!(sys.rhs.u.iter().chain(&sys.rhs.lam).all(|&v| v == 0.0));
    }
}
