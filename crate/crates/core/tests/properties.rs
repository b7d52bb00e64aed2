use contact_amg::hierarchy::{Hierarchy, HierarchyConfig};
use contact_amg::problem::{assemble_contact_system, MeshSpec};
use contact_amg::sparse::{galerkin_triple, DiagonalMode};
use contact_amg::{BlockVector, SparseMatrix};
use proptest::prelude::*;
use std::sync::OnceLock;

fn sparse(rows: usize, cols: usize) -> impl Strategy<Value = SparseMatrix> {
    prop::collection::vec((0..rows, 0..cols, -5.0f64..5.0), 0..3 * rows.max(cols))
        .prop_map(move |t| SparseMatrix::from_triplets(rows, cols, &t).unwrap())
}

fn dims() -> impl Strategy<Value = (usize, usize, usize)> {
    (1usize..9, 1usize..9, 1usize..9)
}

fn symmetric(n: usize) -> impl Strategy<Value = SparseMatrix> {
    sparse(n, n).prop_map(|a| a.add_scaled(1.0, &a.transpose(), 1.0).unwrap())
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| (x - y).abs() <= tol * (1.0 + y.abs()))
}

proptest! {
    #[test]
    fn matmul_agrees_with_dense(
        (a, b) in dims().prop_flat_map(|(m, k, n)| (sparse(m, k), sparse(k, n)))
    ) {
        let c = a.matmul(&b).unwrap().to_dense();
        let d = a.to_dense().matmul(&b.to_dense()).unwrap();
        prop_assert!(close(c.values(), d.values(), 1e-12));
    }

    #[test]
    fn transpose_is_an_involution(a in (1usize..12, 1usize..12).prop_flat_map(|(m, n)| sparse(m, n))) {
        prop_assert_eq!(a.transpose().transpose(), a);
    }

    #[test]
    fn galerkin_keeps_symmetry(
        (a, p) in (1usize..10, 1usize..6).prop_flat_map(|(n, c)| (symmetric(n), sparse(n, c)))
    ) {
        let ac = galerkin_triple(&p.transpose(), &a, &p).unwrap();
        prop_assert!(ac.symmetry_defect() <= 1e-12 * (1.0 + ac.max_abs()));
    }

    #[test]
    fn abs_row_sum_dominates_diagonal(a in (1usize..12).prop_flat_map(|n| sparse(n, n))) {
        let plain = a.extract_diagonal(DiagonalMode::Plain).unwrap();
        // rows without entries are rejected by the lumping
        if let Ok(lumped) = a.extract_diagonal(DiagonalMode::AbsRowSum) {
            for (l, p) in lumped.iter().zip(&plain) {
                prop_assert!(*l >= p.abs());
            }
        }
    }
}

fn desk_hierarchy() -> &'static (Hierarchy, usize, usize) {
    static H: OnceLock<(Hierarchy, usize, usize)> = OnceLock::new();
    H.get_or_init(|| {
        let (p, sys) = assemble_contact_system(&MeshSpec::square_blocks(8)).unwrap();
        let cfg = HierarchyConfig {
            max_coarse_size: 60,
            ..HierarchyConfig::default()
        };
        let h = Hierarchy::from_problem(&sys.op, &p, &cfg).unwrap();
        (h, sys.op.n_u(), sys.op.n_lam())
    })
}

fn block(v: &[f64], n_u: usize) -> BlockVector {
    BlockVector::from_merged(v, n_u)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn vcycle_is_linear(
        seed_a in prop::collection::vec(-1.0f64..1.0, 250),
        seed_b in prop::collection::vec(-1.0f64..1.0, 250),
        s in -3.0f64..3.0,
    ) {
        let (h, n_u, n_lam) = desk_hierarchy();
        let n = n_u + n_lam;
        let a: Vec<f64> = (0..n).map(|i| seed_a[i % seed_a.len()] * (1.0 + (i / 250) as f64)).collect();
        let b: Vec<f64> = (0..n).map(|i| seed_b[i % seed_b.len()] - 0.1 * (i / 250) as f64).collect();
        let combo: Vec<f64> = a.iter().zip(&b).map(|(x, y)| s * x + y).collect();
        let ya = h.apply(&block(&a, *n_u)).unwrap().to_merged();
        let yb = h.apply(&block(&b, *n_u)).unwrap().to_merged();
        let yc = h.apply(&block(&combo, *n_u)).unwrap().to_merged();
        let want: Vec<f64> = ya.iter().zip(&yb).map(|(x, y)| s * x + y).collect();
        let scale = want.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        prop_assert!(yc.iter().zip(&want).all(|(x, y)| (x - y).abs() <= 1e-9 * scale));
    }
}
