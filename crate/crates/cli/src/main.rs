use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use contact_amg_cli::experiments::{self, spread};
use contact_amg_cli::report;
use contact_amg_cli::ExperimentConfig;

/// Fully coupled AMG for two-body mortar contact saddle-point systems.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble the contact problem, build the preconditioner and run GMRES.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Also write K.mtx, B1.mtx, B2.mtx, Cz.mtx, rhs_u.vec and rhs_lam.vec.
        #[arg(long)]
        export_system: bool,
    },
    /// Solve at the angles 0, pi/8, pi/4, 3pi/8 and pi/2.
    RotationSweep {
        #[command(flatten)]
        common: Common,
    },
    /// Solve on the configured mesh refined by 1, 2 and 4.
    RefineSweep {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Flat key=value configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let cfg = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)?,
            None => ExperimentConfig::default(),
        };
        fs::create_dir_all(&self.out)
            .with_context(|| format!("cannot create {}", self.out.display()))?;
        Ok(cfg)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

/// Exit status 2 signals that at least one solve did not converge.
fn status(converged: bool) -> ExitCode {
    if converged {
        ExitCode::SUCCESS
    } else {
        eprintln!("warning: GMRES did not reach the requested tolerance");
        ExitCode::from(2)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve {
            common,
            export_system,
        } => {
            let cfg = common.load()?;
            let out = experiments::solve(&cfg)?;
            report::write_history(create(&common.out.join("report.csv"))?, &out.report)?;
            let summary = report::setup_summary(&cfg, &out);
            fs::write(common.out.join("setup.txt"), &summary)?;
            if let Some(aggs) = &out.fine_aggregation {
                report::write_aggregates(
                    create(&common.out.join("aggregates.txt"))?,
                    &out.problem,
                    aggs,
                )?;
            }
            if export_system {
                report::export_system(&common.out, &out.system)?;
            }
            print!("{summary}");
            Ok(status(out.report.converged))
        }
        Command::RotationSweep { common } => {
            let cfg = common.load()?;
            let rows = experiments::rotation_sweep(&cfg)?;
            report::write_rotation(create(&common.out.join("rotation.csv"))?, &rows)?;
            for r in &rows {
                println!(
                    "angle {:.6}  iterations {:4}  converged {}",
                    r.angle, r.iterations, r.converged
                );
            }
            println!("spread max/min {:.3}", spread(&rows));
            Ok(status(rows.iter().all(|r| r.converged)))
        }
        Command::RefineSweep { common } => {
            let cfg = common.load()?;
            let rows = experiments::refine_sweep(&cfg)?;
            report::write_refine(create(&common.out.join("refine.csv"))?, &rows)?;
            for r in &rows {
                println!(
                    "{:>4}x{:<4} n_u {:7}  levels {}  iterations {:4}  complexity {}",
                    r.elems_per_block.0,
                    r.elems_per_block.1,
                    r.n_u,
                    r.levels,
                    r.iterations,
                    r.complexity.map_or("-".into(), |c| format!("{c:.3}"))
                );
            }
            Ok(status(rows.iter().all(|r| r.converged)))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
