use contact_amg::dense::dense_lu_solve;
use contact_amg::problem::*;
use contact_amg::vector::norm_inf;
use contact_amg::BlockVector;
use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8};

fn blocks(nx: usize, ny: usize) -> MeshSpec {
    MeshSpec {
        slave_elems: (nx, ny),
        master_elems: (nx, ny),
        ..MeshSpec::default()
    }
}

fn dense_solve(spec: &MeshSpec) -> (ContactProblem, BlockVector) {
    let (p, sys) = assemble_contact_system(spec).unwrap();
    let x = dense_lu_solve(&sys.op.to_dense(), &sys.rhs.to_merged()).unwrap();
    (p, BlockVector::from_merged(&x, sys.op.n_u()))
}

fn eigenvalues(n: usize, f: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(DMatrix::from_fn(n, n, f))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[test]
fn element_stiffness_has_three_rigid_modes() {
    let cmat = plane_strain_matrix(1.0, 0.3);
    let coords = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let ke = element_stiffness(&coords, &cmat, 0).unwrap();
    let ev = eigenvalues(8, |i, j| ke[i][j]);
    let scale = ev[7];
    assert!(ev[..3].iter().all(|l| l.abs() < 1e-12 * scale), "{ev:?}");
    assert!(ev[3] > 1e-3 * scale, "{ev:?}");
}

#[test]
fn free_stiffness_block_is_spd() {
    let spec = blocks(6, 3);
    let p = build_mesh(&spec).unwrap();
    let k = assemble_elasticity(&p, &spec).unwrap().to_dense();
    assert!(assemble_elasticity(&p, &spec).unwrap().symmetry_defect() < 1e-12);
    let free: Vec<usize> = (0..p.num_dofs()).filter(|&d| !p.is_dirichlet(d)).collect();
    let ev = eigenvalues(free.len(), |i, j| k.get(free[i], free[j]));
    assert!(ev[0] > 0.0, "smallest eigenvalue {}", ev[0]);
}

#[test]
fn linear_field_produces_no_interior_forces() {
    let spec = blocks(5, 4);
    let p = build_mesh(&spec).unwrap();
    let k = assemble_stiffness_unconstrained(&p, &spec).unwrap();
    // uniaxial stretch plus shear, exactly representable by bilinear elements
    let u: Vec<f64> = p
        .node_coords
        .iter()
        .flat_map(|&[x, y]| [1e-3 * x + 2e-4 * y, -3e-4 * y])
        .collect();
    let f = k.spmv(&u).unwrap();
    // interior nodes belong to exactly four elements
    let mut count = vec![0usize; p.num_nodes()];
    for e in &p.elements {
        for &n in e {
            count[n] += 1;
        }
    }
    for n in (0..p.num_nodes()).filter(|&n| count[n] == 4) {
        assert!(
            f[2 * n].abs() < 1e-14 && f[2 * n + 1].abs() < 1e-14,
            "node {n}"
        );
    }
}

#[test]
fn compression_patch_test_gives_uniform_pressure() {
    let spec = MeshSpec {
        support: FarFaceSupport::Roller,
        ..blocks(8, 4)
    };
    let (p, x) = dense_solve(&spec);
    let pressure: Vec<f64> = (0..p.slave_nodes.len())
        .map(|j| x.lam[2 * j] * p.normals[j][0] + x.lam[2 * j + 1] * p.normals[j][1])
        .collect();
    let ref_p = pressure[pressure.len() / 2];
    assert!(
        ref_p > 0.0,
        "interpenetration must give compressive multipliers"
    );
    for &pj in &pressure[1..pressure.len() - 1] {
        assert!((pj - ref_p).abs() <= 1e-8 * ref_p.abs(), "{pressure:?}");
    }
    // tangential multipliers vanish
    for j in 0..p.slave_nodes.len() {
        let t = x.lam[2 * j] * p.tangents[j][0] + x.lam[2 * j + 1] * p.tangents[j][1];
        assert!(t.abs() <= 1e-10 * ref_p);
    }
}

fn rotate(angle: f64, v: &[f64]) -> Vec<f64> {
    let (s, c) = angle.sin_cos();
    v.chunks(2)
        .flat_map(|w| [c * w[0] - s * w[1], s * w[0] + c * w[1]])
        .collect()
}

fn assert_covariant(angle: f64) {
    let (_, x0) = dense_solve(&blocks(6, 3));
    let (_, xa) = dense_solve(&MeshSpec {
        angle,
        ..blocks(6, 3)
    });
    for (got, base) in [(&xa.u, &x0.u), (&xa.lam, &x0.lam)] {
        let want = rotate(angle, base);
        let diff: Vec<f64> = got.iter().zip(&want).map(|(a, b)| a - b).collect();
        assert!(norm_inf(&diff) <= 1e-8 * norm_inf(&want), "angle {angle}");
    }
}

#[test]
fn solution_rotates_with_the_frame() {
    for angle in [FRAC_PI_8, FRAC_PI_4, FRAC_PI_2] {
        assert_covariant(angle);
    }
}

#[test]
fn exact_solution_satisfies_constraints_at_every_angle() {
    for angle in [0.0, FRAC_PI_8, FRAC_PI_4, 3.0 * FRAC_PI_8, FRAC_PI_2] {
        let spec = MeshSpec {
            angle,
            ..blocks(5, 2)
        };
        let (_, sys) = assemble_contact_system(&spec).unwrap();
        let x = dense_lu_solve(&sys.op.to_dense(), &sys.rhs.to_merged()).unwrap();
        let x = BlockVector::from_merged(&x, sys.op.n_u());
        let r = sys.op.residual(&x, &sys.rhs).unwrap();
        assert!(
            norm_inf(&r.lam) <= 1e-10,
            "angle {angle}: {}",
            norm_inf(&r.lam)
        );
    }
}
