use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use contact_amg_cli::mtx;

fn run(args: &[&str], config: &str, dir: &Path) -> Output {
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_contact-amg"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir)
        .output()
        .unwrap()
}

fn residuals(dir: &Path) -> Vec<f64> {
    let text = fs::read_to_string(dir.join("report.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("iteration,relative_residual"));
    lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect()
}

const MINIMAL: &str = "mesh.m = 16\n";

#[test]
fn minimal_solve_writes_monotone_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["solve"], MINIMAL, dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = residuals(dir.path());
    assert_eq!(r[0], 1.0);
    assert!(r.windows(2).all(|w| w[1] <= w[0]));
    assert!(*r.last().unwrap() <= 1e-8);
    assert!(dir.path().join("setup.txt").exists());

    let aggs = fs::read_to_string(dir.path().join("aggregates.txt")).unwrap();
    let rows: Vec<&str> = aggs.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 2 * 17 * 17);
    assert!(rows.iter().all(|l| l.split_whitespace().count() == 3));
}

#[test]
fn export_system_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["solve", "--export-system"], MINIMAL, dir.path());
    assert!(out.status.success());
    let (_, sys) = contact_amg::problem::assemble_contact_system(
        &contact_amg_cli::ExperimentConfig::parse(MINIMAL)
            .unwrap()
            .mesh,
    )
    .unwrap();
    let op = &sys.op;
    for (name, a) in [("K", &op.k), ("B1", &op.b1), ("B2", &op.b2), ("Cz", &op.cz)] {
        assert_eq!(
            &mtx::load_matrix(&dir.path().join(format!("{name}.mtx"))).unwrap(),
            a
        );
    }
    assert_eq!(
        mtx::load_vector(&dir.path().join("rhs_u.vec")).unwrap(),
        sys.rhs.u
    );
    assert_eq!(
        mtx::load_vector(&dir.path().join("rhs_lam.vec")).unwrap(),
        sys.rhs.lam
    );
}

#[test]
fn repeated_runs_are_bit_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run(&["solve"], MINIMAL, a.path()).status.success());
    assert!(run(&["solve"], MINIMAL, b.path()).status.success());
    for f in ["report.csv", "aggregates.txt"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap()
        );
    }
}

#[test]
fn merged_lu_coarse_solve_needs_no_more_iterations() {
    let count = |solver: &str| {
        let dir = tempfile::tempdir().unwrap();
        let cfg = format!("mesh.m = 16\namg.max_levels = 2\namg.coarse_solver = {solver}\n");
        let out = run(&["solve"], &cfg, dir.path());
        assert!(out.status.success(), "{solver}");
        residuals(dir.path()).len() - 1
    };
    assert!(count("merged_lu") <= count("block_smoother"));
}

#[test]
fn non_convergence_exits_nonzero_but_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["solve"], "mesh.m = 16\ngmres.max_iters = 2\n", dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(residuals(dir.path()).len(), 3);
}

#[test]
fn config_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["solve"],
        "mesh.m = 8\n\nsmoother.kind = jacobi\n",
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn sweeps_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["rotation-sweep"], "mesh.m = 6\n", dir.path());
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("rotation.csv")).unwrap();
    assert_eq!(text.lines().count(), 6);

    let out = run(&["refine-sweep"], "mesh.m = 4\n", dir.path());
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("refine.csv")).unwrap();
    assert!(text.starts_with("factor,nx,ny,"));
    assert_eq!(text.lines().count(), 4);
}
