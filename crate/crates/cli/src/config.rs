//! Flat `key = value` experiment configuration.
//!
//! One key per line, `#` starts a comment, nested settings use dotted keys
//! such as `smoother.predictor.kind = sgs`. `mesh.m` and `smoother.preset`
//! are applied before every other key regardless of their position.

use std::path::Path;
use std::str::FromStr;

use contact_amg::hierarchy::{CoarseSolverKind, HierarchyConfig, ScalarAmgConfig};
use contact_amg::krylov::GmresConfig;
use contact_amg::problem::{FarFaceSupport, MeshSpec};
use contact_amg::smoothers::{
    AHatMode, BlockSmootherConfig, BlockSmootherKind, PointSmootherConfig, PointSmootherKind,
};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key '{key}' given twice (first on line {first})")]
    DuplicateKey {
        line: usize,
        key: String,
        first: usize,
    },
    #[error("line {line}: invalid value '{value}' for '{key}', expected {expected}")]
    InvalidValue {
        line: usize,
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("invalid configuration: {0}")]
    Invalid(#[from] contact_amg::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PreconditionerKind {
    /// Monolithic AMG V-cycle on the whole saddle system.
    #[default]
    FullyCoupled,
    /// SIMPLE-type block smoother whose predictor is a scalar AMG V-cycle.
    Nested,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mesh: MeshSpec,
    pub hierarchy: HierarchyConfig,
    pub gmres: GmresConfig,
    pub preconditioner: PreconditionerKind,
    /// Inner AMG of the nested preconditioner.
    pub nested: ScalarAmgConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mesh: MeshSpec::square_blocks(20),
            hierarchy: HierarchyConfig::default(),
            gmres: GmresConfig::default(),
            preconditioner: PreconditionerKind::default(),
            nested: ScalarAmgConfig::default(),
        }
    }
}

struct Entry {
    line: usize,
    key: String,
    value: String,
}

impl Entry {
    fn parse<T: FromStr>(&self, expected: &'static str) -> Result<T, ConfigError> {
        self.value.parse().map_err(|_| self.invalid(expected))
    }

    fn invalid(&self, expected: &'static str) -> ConfigError {
        ConfigError::InvalidValue {
            line: self.line,
            key: self.key.clone(),
            value: self.value.clone(),
            expected,
        }
    }

    fn count(&self) -> Result<usize, ConfigError> {
        self.parse("a non-negative integer")
    }

    fn real(&self) -> Result<f64, ConfigError> {
        let v: f64 = self.parse("a real number")?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.invalid("a finite real number"))
        }
    }

    fn flag(&self) -> Result<bool, ConfigError> {
        match self.value.as_str() {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            _ => Err(self.invalid("true or false")),
        }
    }

    fn choice<T: Copy>(
        &self,
        options: &[(&str, T)],
        expected: &'static str,
    ) -> Result<T, ConfigError> {
        options
            .iter()
            .find(|(name, _)| *name == self.value)
            .map(|(_, v)| *v)
            .ok_or_else(|| self.invalid(expected))
    }
}

fn tokenize(text: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut entries: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Syntax {
                line,
                msg: format!("expected 'key = value', found '{content}'"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        let valid_key = !key.is_empty()
            && key.split('.').all(|part| {
                !part.is_empty() && part.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            });
        if !valid_key {
            return Err(ConfigError::Syntax {
                line,
                msg: format!("malformed key '{key}'"),
            });
        }
        if value.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                msg: format!("missing value for '{key}'"),
            });
        }
        if let Some(first) = entries.iter().find(|e| e.key == key) {
            return Err(ConfigError::DuplicateKey {
                line,
                key: key.to_string(),
                first: first.line,
            });
        }
        entries.push(Entry {
            line,
            key: key.to_string(),
            value: value.to_string(),
        });
    }
    Ok(entries)
}

const POINT_KINDS: [(&str, PointSmootherKind); 4] = [
    ("jacobi", PointSmootherKind::Jacobi),
    ("sgs", PointSmootherKind::Sgs),
    ("ilu0", PointSmootherKind::Ilu0),
    ("direct", PointSmootherKind::Direct),
];

fn set_point(p: &mut PointSmootherConfig, field: &str, e: &Entry) -> Result<bool, ConfigError> {
    match field {
        "kind" => p.kind = e.choice(&POINT_KINDS, "jacobi, sgs, ilu0 or direct")?,
        "sweeps" => p.sweeps = e.count()?,
        "damping" => p.damping = e.real()?,
        _ => return Ok(false),
    }
    Ok(true)
}

fn preset(e: &Entry) -> Result<BlockSmootherConfig, ConfigError> {
    e.choice(
        &[
            ("cheap_uzawa", BlockSmootherConfig::cheap_uzawa()),
            (
                "cheap_braess_sarazin",
                BlockSmootherConfig::cheap_braess_sarazin(),
            ),
            ("cheap_simple", BlockSmootherConfig::cheap_simple()),
            ("cheap_simplec", BlockSmootherConfig::cheap_simplec()),
        ],
        "cheap_uzawa, cheap_braess_sarazin, cheap_simple or cheap_simplec",
    )
}

fn apply(cfg: &mut ExperimentConfig, e: &Entry) -> Result<(), ConfigError> {
    let mesh = &mut cfg.mesh;
    let h = &mut cfg.hierarchy;
    let s = &mut h.smoother;
    match e.key.as_str() {
        "mesh.m" | "smoother.preset" => {}
        "mesh.nx" => {
            let n = e.count()?;
            mesh.slave_elems.0 = n;
            mesh.master_elems.0 = n;
        }
        "mesh.slave_ny" => mesh.slave_elems.1 = e.count()?,
        "mesh.master_ny" => mesh.master_elems.1 = e.count()?,
        "mesh.width" => {
            let w = e.real()?;
            mesh.slave_dims.0 = w;
            mesh.master_dims.0 = w;
        }
        "mesh.slave_height" => mesh.slave_dims.1 = e.real()?,
        "mesh.master_height" => mesh.master_dims.1 = e.real()?,
        "mesh.gap0" => mesh.gap0 = e.real()?,
        "mesh.angle" => mesh.angle = e.real()?,
        "mesh.youngs_modulus" => mesh.youngs_modulus = e.real()?,
        "mesh.poisson_ratio" => mesh.poisson_ratio = e.real()?,
        "mesh.lumped_mortar" => mesh.lumped_mortar = e.flag()?,
        "mesh.support" => {
            mesh.support = e.choice(
                &[
                    ("clamped", FarFaceSupport::Clamped),
                    ("roller", FarFaceSupport::Roller),
                ],
                "clamped or roller",
            )?
        }
        "amg.max_levels" => h.max_levels = e.count()?,
        "amg.max_coarse_size" => h.max_coarse_size = e.count()?,
        "amg.coarse_solver" => {
            h.coarse_solver = e.choice(
                &[
                    ("merged_lu", CoarseSolverKind::MergedLu),
                    ("block_smoother", CoarseSolverKind::BlockSmoother),
                ],
                "merged_lu or block_smoother",
            )?
        }
        "amg.coarse_sweeps" => h.coarse_sweeps = e.count()?,
        "amg.min_agg_size" => h.min_agg_size = e.count()?,
        "amg.smooth_transfers" => h.smooth_displacement_transfers = e.flag()?,
        "amg.omega" => h.omega = e.real()?,
        "amg.drop_tol" => h.drop_tol = e.real()?,
        "amg.pre_sweeps" => h.pre_sweeps = e.count()?,
        "amg.post_sweeps" => h.post_sweeps = e.count()?,
        "smoother.kind" => {
            s.kind = e.choice(
                &[
                    ("uzawa", BlockSmootherKind::Uzawa),
                    ("braess_sarazin", BlockSmootherKind::BraessSarazin),
                    ("simple", BlockSmootherKind::Simple),
                    ("simplec", BlockSmootherKind::Simplec),
                ],
                "uzawa, braess_sarazin, simple or simplec",
            )?
        }
        "smoother.alpha" => s.alpha = e.real()?,
        "smoother.outer_sweeps" => s.outer_sweeps = e.count()?,
        "smoother.a_hat" => {
            s.a_hat_mode = e.choice(
                &[
                    ("plain_diag", AHatMode::PlainDiag),
                    ("abs_rowsum", AHatMode::AbsRowSum),
                    ("exact", AHatMode::Exact),
                ],
                "plain_diag, abs_rowsum or exact",
            )?
        }
        "gmres.rel_tol" => cfg.gmres.rel_tol = e.real()?,
        "gmres.max_iters" => cfg.gmres.max_iters = e.count()?,
        "gmres.restart" => cfg.gmres.restart = e.count()?,
        "preconditioner" => {
            cfg.preconditioner = e.choice(
                &[
                    ("fully_coupled", PreconditionerKind::FullyCoupled),
                    ("nested", PreconditionerKind::Nested),
                ],
                "fully_coupled or nested",
            )?
        }
        "nested.max_levels" => cfg.nested.max_levels = e.count()?,
        "nested.max_coarse_size" => cfg.nested.max_coarse_size = e.count()?,
        "nested.min_agg_size" => cfg.nested.min_agg_size = e.count()?,
        "nested.smooth_transfers" => cfg.nested.smooth_transfers = e.flag()?,
        "nested.omega" => cfg.nested.omega = e.real()?,
        key => {
            let handled = if let Some(f) = key.strip_prefix("smoother.predictor.") {
                set_point(&mut s.predictor, f, e)?
            } else if let Some(f) = key.strip_prefix("smoother.corrector.") {
                set_point(&mut s.corrector, f, e)?
            } else if let Some(f) = key.strip_prefix("nested.smoother.") {
                set_point(&mut cfg.nested.smoother, f, e)?
            } else {
                false
            };
            if !handled {
                return Err(ConfigError::UnknownKey {
                    line: e.line,
                    key: key.to_string(),
                });
            }
        }
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let entries = tokenize(text)?;
        let mut cfg = Self::default();
        for e in &entries {
            match e.key.as_str() {
                "mesh.m" => {
                    let m = e.count()?;
                    cfg.mesh = MeshSpec {
                        angle: cfg.mesh.angle,
                        ..MeshSpec::square_blocks(m)
                    };
                }
                "smoother.preset" => cfg.hierarchy.smoother = preset(e)?,
                _ => {}
            }
        }
        for e in &entries {
            apply(&mut cfg, e)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.mesh.validate()?;
        self.hierarchy.validate()?;
        self.gmres.validate()?;
        Ok(())
    }
}
