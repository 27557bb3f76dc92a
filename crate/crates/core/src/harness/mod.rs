//! Offline simulation harness: configuration, synthetic corpora, multi-round
//! runs, the cluster-count sweep, reports and the run audit.
//!
//! A run directory holds:
//!
//! | file | content |
//! |------|---------|
//! | `manifest.json` | resolved config, its hash, seeds, stage counters |
//! | `rounds.csv` | one metrics row per (user, round) |
//! | `rounds.jsonl` | the artifacts each row was computed from |
//! | `summary.json` | means and standard deviations, overall and per user |
//! | `memory/<user>.json` | final rejection memory per user |

mod audit;
mod config;
mod report;
mod run;
mod sweep;
pub mod synthetic;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::StageCounters;
use crate::corpus::CorpusError;

pub use audit::{audit, AuditReport};
pub use config::{
    EmbeddingSection, InaSection, OpaSection, Population, SimulationConfig, UaSection, UserSpec, SEED_ENV,
};
pub use report::{report, Report, REPORT_FILE, SCATTER_FILE};
pub use run::{
    initial_preference, load_corpus, run_with_base, simulate, write_run, RoundRecord, RoundRow, RunResult,
    RunSummary, CSV_FILE, MANIFEST_FILE, RECORDS_FILE, SUMMARY_FILE,
};
pub use sweep::{
    sweep_clusters, sweep_with_base, write_sweep_csv, SweepOutcome, SweepParameter, SweepRow, SweepSpec, SWEEP_FILE,
};
pub use synthetic::{generate_synthetic_corpus, SentimentMix, SyntheticSpec, SyntheticTopic};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("bad sentiment mix: {0}")]
    BadMix(String),
    #[error("no manifest in {0}")]
    MissingManifest(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Runtime(String),
}

impl HarnessError {
    /// Process exit code: 2 for configuration problems, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::BadMix(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub embedding: u64,
    pub cluster: u64,
    pub acceptance: u64,
    pub users: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusInfo {
    pub messages: usize,
    pub topics: Vec<String>,
    pub dim: usize,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: SimulationConfig,
    pub config_hash: String,
    pub seeds: Seeds,
    pub users: Vec<UserSpec>,
    pub corpus: CorpusInfo,
    /// How often clustering, DCIA, YYNC and searching ran across the run.
    pub counters: StageCounters,
    pub files: Vec<String>,
}
