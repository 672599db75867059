//! Experiment runner behind the `wpa` binary: configuration, dispatch,
//! CSV/SVG artifacts and JSON run manifests.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod config;
mod experiments;
pub mod svg;

pub use config::{parse_complex, Experiment, ExperimentConfig};
pub use svg::{emit_svg, render_svg, Layer};

/// Environment variable naming the Fekete-sequence cache directory.
pub const CACHE_DIR_ENV: &str = "WPA_CACHE_DIR";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Numerical(_) => "numerical",
            CliError::Io(_) => "io",
        }
    }

    /// One-line JSON error record.
    pub fn record(&self, experiment: Option<Experiment>) -> String {
        serde_json::json!({
            "status": "error",
            "kind": self.kind(),
            "experiment": experiment.map(|e| e.name()),
            "message": self.to_string(),
        })
        .to_string()
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    #[serde(flatten)]
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub tool: String,
    pub version: String,
    pub wall_time_s: f64,
    /// Artifact file names, relative to the output directory.
    pub outputs: Vec<String>,
    pub summary: serde_json::Value,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read manifest {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid manifest {}: {e}", path.display())))
    }
}

/// Where a run writes its files.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub out_dir: PathBuf,
    pub cache_dir: Option<PathBuf>,
    pub svg: bool,
}

impl RunContext {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self {
            out_dir: out_dir.into(),
            cache_dir: std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from),
            svg: true,
        }
    }
}

/// Runs one experiment and writes `<experiment>.manifest.json` next to its artifacts.
pub fn run(config: &ExperimentConfig, ctx: &RunContext) -> Result<RunManifest, CliError> {
    std::fs::create_dir_all(&ctx.out_dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", ctx.out_dir.display())))?;
    let start = Instant::now();
    let (outputs, summary) = experiments::dispatch(config, ctx)?;
    let manifest = RunManifest {
        config: config.clone(),
        config_hash: config.hash(),
        tool: "wpa".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        wall_time_s: start.elapsed().as_secs_f64(),
        outputs,
        summary,
    };
    let path = ctx.out_dir.join(format!("{}.manifest.json", config.experiment));
    std::fs::write(&path, serde_json::to_string_pretty(&manifest).expect("manifest serializes"))
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(manifest)
}
