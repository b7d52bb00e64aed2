//! Solve, rotation sweep and refinement sweep drivers.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8};
use std::time::Instant;

use contact_amg::aggregation::Aggregation;
use contact_amg::hierarchy::{nested_preconditioner, Hierarchy, LevelStats, NestedPreconditioner};
use contact_amg::krylov::{gmres, LinearOperator, SolveReport};
use contact_amg::problem::{assemble_contact_system, ContactProblem, MeshSpec};
use contact_amg::{BlockVector, Result, SaddleSystem};

use crate::config::{ExperimentConfig, PreconditionerKind};

pub const ROTATION_ANGLES: [f64; 5] = [0.0, FRAC_PI_8, FRAC_PI_4, 3.0 * FRAC_PI_8, FRAC_PI_2];

/// Element-count multipliers of the refinement sweep.
pub const REFINE_FACTORS: [usize; 3] = [1, 2, 4];

pub enum Preconditioner {
    FullyCoupled(Hierarchy),
    Nested(NestedPreconditioner),
}

impl LinearOperator for Preconditioner {
    fn dim(&self) -> usize {
        match self {
            Self::FullyCoupled(h) => h.dim(),
            Self::Nested(n) => n.dim(),
        }
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        match self {
            Self::FullyCoupled(h) => LinearOperator::apply(h, x, y),
            Self::Nested(n) => LinearOperator::apply(n, x, y),
        }
    }
}

impl Preconditioner {
    pub fn build(
        cfg: &ExperimentConfig,
        problem: &ContactProblem,
        system: &SaddleSystem,
    ) -> Result<Self> {
        Ok(match cfg.preconditioner {
            PreconditionerKind::FullyCoupled => Self::FullyCoupled(Hierarchy::from_problem(
                &system.op,
                problem,
                &cfg.hierarchy,
            )?),
            PreconditionerKind::Nested => Self::Nested(nested_preconditioner(
                &system.op,
                problem,
                cfg.hierarchy.smoother,
                &cfg.nested,
            )?),
        })
    }

    pub fn hierarchy(&self) -> Option<&Hierarchy> {
        match self {
            Self::FullyCoupled(h) => Some(h),
            Self::Nested(_) => None,
        }
    }
}

pub struct SolveOutcome {
    pub problem: ContactProblem,
    pub system: SaddleSystem,
    pub solution: BlockVector,
    pub report: SolveReport,
    /// Per-level statistics; empty for the nested preconditioner.
    pub levels: Vec<LevelStats>,
    pub complexity: Option<f64>,
    /// Fine-level displacement aggregates.
    pub fine_aggregation: Option<Aggregation>,
}

pub fn solve_problem(
    cfg: &ExperimentConfig,
    problem: ContactProblem,
    system: SaddleSystem,
) -> Result<SolveOutcome> {
    let start = Instant::now();
    let prec = Preconditioner::build(cfg, &problem, &system)?;
    let setup_seconds = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let (x, mut report) = gmres(&system.op, &prec, &system.rhs.to_merged(), &cfg.gmres)?;
    report.solve_seconds = start.elapsed().as_secs_f64();
    report.setup_seconds = setup_seconds;

    let h = prec.hierarchy();
    Ok(SolveOutcome {
        solution: BlockVector::from_merged(&x, system.op.n_u()),
        levels: h.map(Hierarchy::stats).unwrap_or_default(),
        complexity: h.map(|h| h.complexity),
        fine_aggregation: h.and_then(|h| h.levels[0].u_aggregation.clone()),
        problem,
        system,
        report,
    })
}

pub fn solve(cfg: &ExperimentConfig) -> Result<SolveOutcome> {
    let (problem, system) = assemble_contact_system(&cfg.mesh)?;
    solve_problem(cfg, problem, system)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RotationRow {
    pub angle: f64,
    pub iterations: usize,
    pub converged: bool,
    pub final_relative_residual: f64,
    pub complexity: Option<f64>,
}

pub fn rotation_sweep(cfg: &ExperimentConfig) -> Result<Vec<RotationRow>> {
    ROTATION_ANGLES
        .iter()
        .map(|&angle| {
            let mut c = cfg.clone();
            c.mesh.angle = angle;
            let out = solve(&c)?;
            Ok(RotationRow {
                angle,
                iterations: out.report.iterations,
                converged: out.report.converged,
                final_relative_residual: out.report.final_relative_residual,
                complexity: out.complexity,
            })
        })
        .collect()
}

/// `max / min` of the iteration counts.
pub fn spread(rows: &[RotationRow]) -> f64 {
    let its = rows.iter().map(|r| r.iterations.max(1) as f64);
    let max = its.clone().fold(f64::MIN, f64::max);
    let min = its.fold(f64::MAX, f64::min);
    max / min
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineRow {
    pub factor: usize,
    pub elems_per_block: (usize, usize),
    pub n_u: usize,
    pub n_lam: usize,
    pub levels: usize,
    pub iterations: usize,
    pub converged: bool,
    pub complexity: Option<f64>,
    pub setup_seconds: f64,
    pub solve_seconds: f64,
}

fn refined(mesh: &MeshSpec, factor: usize) -> MeshSpec {
    let scale = |(x, y): (usize, usize)| (factor * x, factor * y);
    MeshSpec {
        slave_elems: scale(mesh.slave_elems),
        master_elems: scale(mesh.master_elems),
        ..mesh.clone()
    }
}

pub fn refine_sweep(cfg: &ExperimentConfig) -> Result<Vec<RefineRow>> {
    REFINE_FACTORS
        .iter()
        .map(|&factor| {
            let mut c = cfg.clone();
            c.mesh = refined(&cfg.mesh, factor);
            let out = solve(&c)?;
            Ok(RefineRow {
                factor,
                elems_per_block: c.mesh.slave_elems,
                n_u: out.system.op.n_u(),
                n_lam: out.system.op.n_lam(),
                levels: out.levels.len().max(1),
                iterations: out.report.iterations,
                converged: out.report.converged,
                complexity: out.complexity,
                setup_seconds: out.report.setup_seconds,
                solve_seconds: out.report.solve_seconds,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_solve_converges() {
        let out = solve(&ExperimentConfig::default()).unwrap();
        assert!(out.report.converged);
        assert!(out.report.final_relative_residual <= 2e-8);
        assert!(out.complexity.unwrap() >= 1.0);
    }

    #[test]
    fn nested_solve_converges() {
        let mut cfg = ExperimentConfig {
            preconditioner: PreconditionerKind::Nested,
            ..ExperimentConfig::default()
        };
        cfg.hierarchy.smoother = contact_amg::smoothers::BlockSmootherConfig::cheap_simple();
        let out = solve(&cfg).unwrap();
        assert!(out.report.converged);
        assert!(out.levels.is_empty());
    }

    #[test]
    fn refinement_scales_element_counts() {
        let m = refined(&MeshSpec::square_blocks(3), 4);
        assert_eq!(m.slave_elems, (12, 12));
        assert_eq!(m.master_elems, (12, 12));
    }

    #[test]
    fn spread_of_constant_counts_is_one() {
        let row = |iterations| RotationRow {
            angle: 0.0,
            iterations,
            converged: true,
            final_relative_residual: 0.0,
            complexity: None,
        };
        assert_eq!(spread(&[row(7), row(7)]), 1.0);
        assert_eq!(spread(&[row(10), row(15)]), 1.5);
    }
}
