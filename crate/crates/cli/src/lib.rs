//! Experiment runner behind the `ddmet` binary.

pub mod config;
pub mod scenario;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

pub use config::{Diagnostic, RunConfig, Scenario};
pub use scenario::{run_scenario, Artifact};

pub const MANIFEST_SCHEMA: &str = "manifest_v1";
pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid configuration:\n{}", .0.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n"))]
    Config(Vec<Diagnostic>),
    #[error("numerical failure: {0}")]
    Numerical(#[from] ddmet_core::Error),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(_) => 3,
            RunError::Io { .. } => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputEntry {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub schema: &'static str,
    pub version: &'static str,
    pub status: &'static str,
    pub error: Option<String>,
    pub config: RunConfig,
    /// Model time per config time unit.
    pub time_scale: f64,
    pub threads: usize,
    pub wall_time_s: f64,
    pub outputs: Vec<OutputEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    std::fs::write(path, bytes).map_err(|source| RunError::Io { path: path.to_path_buf(), source })
}

/// Runs the scenario on a pool of `threads` workers (0 = rayon default) and
/// writes its artifacts plus `manifest.json` into `cfg.output_dir`.
///
/// On a numerical failure no artifacts are written, but the manifest is, with
/// `status = "failed"`.
pub fn execute(cfg: &RunConfig, threads: usize) -> Result<Manifest, RunError> {
    let start = Instant::now();
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(|source| RunError::Io { path: dir.clone(), source })?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool");
    let result = pool.install(|| run_scenario(cfg));

    let mut manifest = Manifest {
        schema: MANIFEST_SCHEMA,
        version: env!("CARGO_PKG_VERSION"),
        status: "ok",
        error: None,
        config: cfg.clone(),
        time_scale: cfg.time_scale(),
        threads: pool.current_num_threads(),
        wall_time_s: 0.0,
        outputs: Vec::new(),
    };
    let outcome = match result {
        Ok(artifacts) => {
            for a in &artifacts {
                write(&dir.join(&a.name), &a.bytes)?;
                manifest.outputs.push(OutputEntry { path: a.name.clone(), bytes: a.bytes.len(), sha256: sha256_hex(&a.bytes) });
            }
            Ok(())
        }
        Err(e) => {
            manifest.status = "failed";
            manifest.error = Some(e.to_string());
            Err(RunError::Numerical(e))
        }
    };
    manifest.wall_time_s = start.elapsed().as_secs_f64();
    let mut json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    json.push(b'\n');
    write(&dir.join(MANIFEST_NAME), &json)?;
    outcome.map(|()| manifest)
}
