//! CSV tables, the setup summary, aggregate listings and system export.
//!
//! Reals are written with 17 significant digits so they round-trip exactly.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use contact_amg::aggregation::Aggregation;
use contact_amg::krylov::SolveReport;
use contact_amg::problem::{Body, ContactProblem};
use contact_amg::SaddleSystem;

use crate::config::{ExperimentConfig, PreconditionerKind};
use crate::experiments::{RefineRow, RotationRow, SolveOutcome};
use crate::mtx;

pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn optional(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

fn csv_error(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

fn write_csv<W: io::Write>(w: W, header: &[&str], rows: Vec<Vec<String>>) -> io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header).map_err(csv_error)?;
    for r in rows {
        out.write_record(&r).map_err(csv_error)?;
    }
    out.flush()
}

/// `iteration,relative_residual`, one row per GMRES iteration starting at 0.
pub fn write_history<W: io::Write>(w: W, report: &SolveReport) -> io::Result<()> {
    let rows = report
        .residual_history
        .iter()
        .enumerate()
        .map(|(i, r)| vec![i.to_string(), real(*r)])
        .collect();
    write_csv(w, &["iteration", "relative_residual"], rows)
}

pub fn write_rotation<W: io::Write>(w: W, rows: &[RotationRow]) -> io::Result<()> {
    let rows = rows
        .iter()
        .map(|r| {
            vec![
                real(r.angle),
                r.iterations.to_string(),
                r.converged.to_string(),
                real(r.final_relative_residual),
                optional(r.complexity),
            ]
        })
        .collect();
    write_csv(
        w,
        &[
            "angle",
            "iterations",
            "converged",
            "final_relative_residual",
            "complexity",
        ],
        rows,
    )
}

pub fn write_refine<W: io::Write>(w: W, rows: &[RefineRow]) -> io::Result<()> {
    let rows = rows
        .iter()
        .map(|r| {
            vec![
                r.factor.to_string(),
                r.elems_per_block.0.to_string(),
                r.elems_per_block.1.to_string(),
                r.n_u.to_string(),
                r.n_lam.to_string(),
                r.levels.to_string(),
                r.iterations.to_string(),
                r.converged.to_string(),
                optional(r.complexity),
                real(r.setup_seconds),
                real(r.solve_seconds),
            ]
        })
        .collect();
    write_csv(
        w,
        &[
            "factor",
            "nx",
            "ny",
            "n_u",
            "n_lam",
            "levels",
            "iterations",
            "converged",
            "complexity",
            "setup_seconds",
            "solve_seconds",
        ],
        rows,
    )
}

/// Human-readable summary of the hierarchy and the solve.
pub fn setup_summary(cfg: &ExperimentConfig, out: &SolveOutcome) -> String {
    let mut s = String::new();
    let op = &out.system.op;
    let _ = writeln!(s, "displacement dofs   {}", op.n_u());
    let _ = writeln!(s, "multiplier dofs     {}", op.n_lam());
    let _ = writeln!(s, "angle               {}", cfg.mesh.angle);
    let _ = writeln!(s, "smoother            {:?}", cfg.hierarchy.smoother.kind);
    match cfg.preconditioner {
        PreconditionerKind::FullyCoupled => {
            let _ = writeln!(s, "preconditioner      fully coupled AMG");
        }
        PreconditionerKind::Nested => {
            let _ = writeln!(
                s,
                "preconditioner      nested (block smoother + scalar AMG)"
            );
        }
    }
    if !out.levels.is_empty() {
        let _ = writeln!(s, "levels              {}", out.levels.len());
        let _ = writeln!(
            s,
            "{:>5} {:>8} {:>6} {:>9} {:>7} {:>7} {:>7} {:>6} {:>6} {:>8} {:>10}",
            "level",
            "n_u",
            "n_lam",
            "nnz(K)",
            "nnz(B1)",
            "nnz(B2)",
            "nnz(Cz)",
            "u_agg",
            "l_agg",
            "overlaps",
            "lambda_max"
        );
        for (i, l) in out.levels.iter().enumerate() {
            let _ = writeln!(
                s,
                "{:>5} {:>8} {:>6} {:>9} {:>7} {:>7} {:>7} {:>6} {:>6} {:>8} {:>10.4}",
                i,
                l.n_u,
                l.n_lam,
                l.nnz_k,
                l.nnz_b1,
                l.nnz_b2,
                l.nnz_cz,
                l.u_aggregates,
                l.lam_aggregates,
                l.lam_overlaps,
                l.lambda_max
            );
        }
    }
    if let Some(c) = out.complexity {
        let _ = writeln!(s, "operator complexity {c:.4}");
    }
    let r = &out.report;
    let _ = writeln!(s, "iterations          {}", r.iterations);
    let _ = writeln!(s, "converged           {}", r.converged);
    let _ = writeln!(s, "relative residual   {:.3e}", r.final_relative_residual);
    let _ = writeln!(s, "setup seconds       {:.3}", r.setup_seconds);
    let _ = writeln!(s, "solve seconds       {:.3}", r.solve_seconds);
    s
}

/// `node_id aggregate_id body_tag`; unaggregated nodes get aggregate `-1`.
pub fn write_aggregates<W: io::Write>(
    mut w: W,
    problem: &ContactProblem,
    aggs: &Aggregation,
) -> io::Result<()> {
    writeln!(w, "# node_id aggregate_id body_tag")?;
    for (n, agg) in aggs.node_to_agg.iter().enumerate() {
        let body = match problem.node_body[n] {
            Body::Slave => "slave",
            Body::Master => "master",
        };
        match agg {
            Some(a) => writeln!(w, "{n} {a} {body}")?,
            None => writeln!(w, "{n} -1 {body}")?,
        }
    }
    w.flush()
}

/// Writes `K.mtx`, `B1.mtx`, `B2.mtx`, `Cz.mtx`, `rhs_u.vec` and `rhs_lam.vec`.
pub fn export_system(dir: &Path, system: &SaddleSystem) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let op = &system.op;
    for (name, a) in [("K", &op.k), ("B1", &op.b1), ("B2", &op.b2), ("Cz", &op.cz)] {
        mtx::save_matrix(&dir.join(format!("{name}.mtx")), a)?;
    }
    mtx::save_vector(&dir.join("rhs_u.vec"), &system.rhs.u)?;
    mtx::save_vector(&dir.join("rhs_lam.vec"), &system.rhs.lam)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip_with_17_digits() {
        for x in [0.1, 1.0 / 3.0, -2.5e-17, 6.02214076e23] {
            let s = real(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
        }
    }

    #[test]
    fn history_has_header_and_rows() {
        let report = SolveReport {
            iterations: 2,
            residual_history: vec![1.0, 0.5, 0.01],
            converged: true,
            final_relative_residual: 0.01,
            setup_seconds: 0.0,
            solve_seconds: 0.0,
        };
        let mut buf = Vec::new();
        write_history(&mut buf, &report).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "iteration,relative_residual");
        assert_eq!(lines.len(), 4);
        assert!(lines[3].starts_with("2,1.0000000000000000e-2"));
    }
}
