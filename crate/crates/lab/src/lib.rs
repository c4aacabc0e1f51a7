//! Experiment runner around `xxz-core`: parameter sweeps over disorder
//! ensembles, a decomposition cache, and CSV/JSON/plot-data output.

pub mod cache;
pub mod config;
pub mod jobs;
pub mod output;
pub mod plots;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::cache::DecompositionCache;
use crate::config::{ConfigError, ExperimentConfig};
use crate::jobs::{Job, JobOutput, Status};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const REPORTS_JSON: &str = "reports.json";
pub const REPORTS_CSV: &str = "reports.csv";
pub const DECAY_CSV: &str = "ct_decay.csv";
pub const ENTROPY_CSV: &str = "entropy.csv";

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Domain(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn io_at(path: &Path) -> impl FnOnce(std::io::Error) -> LabError + '_ {
    move |source| LabError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub id: String,
    pub kind: String,
    pub seed: Option<u64>,
    pub status: Status,
    pub detail: String,
    pub reports: usize,
    pub failed_reports: usize,
    pub cache_hits: usize,
    pub cache_misses: usize,
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// SHA-256 of the configuration text.
    pub config_hash: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub jobs: Vec<JobRecord>,
    /// Output name to file name, relative to the manifest.
    pub outputs: BTreeMap<String, String>,
    pub all_passed: bool,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = fs::read_to_string(path).map_err(io_at(path))?;
        serde_json::from_str(&text).map_err(|e| LabError::Domain(format!("{}: {e}", path.display())))
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub jobs: usize,
    pub cache_dir: Option<PathBuf>,
    pub out: PathBuf,
}

pub fn load_config(path: &Path) -> Result<(String, ExperimentConfig), LabError> {
    let text = fs::read_to_string(path).map_err(io_at(path))?;
    let cfg = ExperimentConfig::parse(&text)?;
    Ok((text, cfg))
}

/// Executes every job of the configuration at `config_path` and writes the
/// outputs plus `manifest.json` into `opts.out`. Nothing is written if the
/// configuration is rejected.
pub fn run(config_path: &Path, opts: &RunOptions) -> Result<RunManifest, LabError> {
    let (text, cfg) = load_config(config_path)?;
    fs::create_dir_all(&opts.out).map_err(io_at(&opts.out))?;
    let cache_dir = opts.cache_dir.clone().unwrap_or_else(|| opts.out.join("cache"));
    let cache = DecompositionCache::new(&cache_dir).map_err(io_at(&cache_dir))?;

    let plan = jobs::plan(&cfg);
    let started = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.max(1))
        .build()
        .map_err(|e| LabError::Domain(e.to_string()))?;
    let results: Vec<JobOutput> = pool.install(|| {
        plan.par_iter()
            .map(|job| jobs::execute(&cfg, job, &cache, started))
            .collect()
    });
    write_outputs(&text, cfg, &plan, results, &opts.out)
}

fn write_outputs(
    text: &str,
    cfg: ExperimentConfig,
    plan: &[Job],
    results: Vec<JobOutput>,
    out: &Path,
) -> Result<RunManifest, LabError> {
    let mut reports = Vec::new();
    let mut decay = Vec::new();
    let mut entropy = Vec::new();
    let mut records = Vec::new();
    for (job, res) in plan.iter().zip(results) {
        records.push(JobRecord {
            id: job.id.clone(),
            kind: job.kind.as_str().to_string(),
            seed: job.seed,
            status: res.status,
            detail: res.detail,
            reports: res.reports.len(),
            failed_reports: res.reports.iter().filter(|r| !r.pass).count(),
            cache_hits: res.cache_hits,
            cache_misses: res.cache_misses,
            wall_seconds: res.seconds,
        });
        reports.extend(res.reports.into_iter().map(|r| (job.id.clone(), r)));
        decay.extend(res.decay);
        entropy.extend(res.entropy);
    }

    let mut outputs = BTreeMap::new();
    let mut emit = |name: &str, file: &str| {
        outputs.insert(name.to_string(), file.to_string());
        out.join(file)
    };
    let p = emit("reports_json", REPORTS_JSON);
    output::write_reports_json(&p, &reports).map_err(io_at(&p))?;
    let p = emit("reports_csv", REPORTS_CSV);
    output::write_reports_csv(&p, &reports).map_err(io_at(&p))?;
    let kinds = cfg.kinds();
    if kinds.contains(&config::Kind::CtDecay) {
        let p = emit("ct_decay_csv", DECAY_CSV);
        output::write_decay(&p, &decay).map_err(io_at(&p))?;
    }
    if kinds.contains(&config::Kind::EntropyBounds) {
        let p = emit("entropy_csv", ENTROPY_CSV);
        output::write_entropy(&p, &entropy).map_err(io_at(&p))?;
    }

    let all_passed = records
        .iter()
        .all(|r| matches!(r.status, Status::Passed | Status::Skipped));
    let manifest = RunManifest {
        config_hash: format!("{:x}", Sha256::digest(text.as_bytes())),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg,
        jobs: records,
        outputs,
        all_passed,
    };
    let p = out.join(MANIFEST_FILE);
    let body = output::sorted_json(&manifest).map_err(|e| LabError::Domain(e.to_string()))?;
    fs::write(&p, body).map_err(io_at(&p))?;
    Ok(manifest)
}
