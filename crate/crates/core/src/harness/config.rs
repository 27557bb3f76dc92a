//! Simulation configuration (TOML).
//!
//! ```toml
//! corpus_path = "corpus.jsonl"   # JSONL/CSV file or a saved base directory
//! rounds = 20
//! mode = "abin"                  # or "opa_only"
//! output_dir = "runs/abin"
//! user_seed = 1
//! single_threaded = false
//!
//! [embedding]
//! dim = 256
//! seed = 7
//!
//! [opa]
//! k_recommend = 10
//!
//! [ina]
//! alpha = 0.5
//! k_clusters = 2
//! tol = 0.05
//! eps_search = 0.02
//! threshold_R = 3
//!
//! [ua]
//! eta = 0.3
//! acceptance_seed = 42
//!
//! [[users]]
//! id = "alice"
//! topic = "economy"
//! sentiment = 0.9
//!
//! [population]                   # optional: generated users u000, u001, …
//! count = 20
//! topics = ["economy", "sports"] # cycled; empty means every corpus topic
//! sentiment = 0.85
//! ```
//!
//! Relative paths resolve against the config file's directory. The
//! `ABIN_SEED` environment variable, or `--seed` on the command line,
//! replaces every seed.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::agents::{InaConfig, Mode, RoundConfig};
use crate::dcia::DEFAULT_THRESHOLD_R;
use crate::seed;

pub const SEED_ENV: &str = "ABIN_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingSection {
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_embedding_seed")]
    pub seed: u64,
}

fn default_dim() -> usize {
    256
}
fn default_embedding_seed() -> u64 {
    7
}

impl Default for EmbeddingSection {
    fn default() -> Self {
        Self {
            dim: default_dim(),
            seed: default_embedding_seed(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpaSection {
    #[serde(default = "default_k_recommend")]
    pub k_recommend: usize,
}

fn default_k_recommend() -> usize {
    10
}

impl Default for OpaSection {
    fn default() -> Self {
        Self {
            k_recommend: default_k_recommend(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InaSection {
    pub alpha: f64,
    pub k_clusters: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub eps_search: f64,
    #[serde(rename = "threshold_R")]
    pub threshold_r: u32,
    pub cluster_seed: u64,
}

impl Default for InaSection {
    fn default() -> Self {
        let ina = InaConfig::default();
        Self {
            alpha: ina.alpha,
            k_clusters: ina.k_clusters,
            max_iters: ina.max_iters,
            tol: ina.tol,
            eps_search: ina.eps_search,
            threshold_r: DEFAULT_THRESHOLD_R,
            cluster_seed: ina.cluster_seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UaSection {
    pub eta: f64,
    pub acceptance_seed: u64,
}

impl Default for UaSection {
    fn default() -> Self {
        Self {
            eta: 0.3,
            acceptance_seed: 42,
        }
    }
}

/// One simulated user; the initial preference is the embedding of a message
/// drawn near the given topic and sentiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserSpec {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentiment: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Population {
    pub count: usize,
    #[serde(default)]
    pub topics: Vec<String>,
    #[serde(default)]
    pub sentiment: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub corpus_path: PathBuf,
    #[serde(default)]
    pub embedding: EmbeddingSection,
    #[serde(default)]
    pub opa: OpaSection,
    #[serde(default)]
    pub ina: InaSection,
    #[serde(default)]
    pub ua: UaSection,
    pub rounds: u32,
    #[serde(default)]
    pub users: Vec<UserSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub population: Option<Population>,
    pub mode: Mode,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_user_seed")]
    pub user_seed: u64,
    #[serde(default)]
    pub single_threaded: bool,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("abin-run")
}
fn default_user_seed() -> u64 {
    1
}

fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

impl SimulationConfig {
    /// A config with every default, for `corpus_path`.
    pub fn with_corpus(corpus_path: impl Into<PathBuf>, mode: Mode) -> Self {
        Self {
            corpus_path: corpus_path.into(),
            embedding: EmbeddingSection::default(),
            opa: OpaSection::default(),
            ina: InaSection::default(),
            ua: UaSection::default(),
            rounds: 20,
            users: Vec::new(),
            population: None,
            mode,
            output_dir: default_output_dir(),
            user_seed: default_user_seed(),
            single_threaded: false,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    /// Reads a TOML config, or the `config` of a run manifest (`.json`).
    /// Relative paths are resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("reading {}: {e}", path.display())))?;
        let mut cfg = if path.extension().is_some_and(|e| e == "json") {
            let manifest: super::Manifest =
                serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
            manifest.config
        } else {
            Self::from_toml_str(&text)?
        };
        let dir = path.parent().unwrap_or(Path::new("."));
        if cfg.corpus_path.is_relative() {
            cfg.corpus_path = dir.join(&cfg.corpus_path);
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = dir.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    /// Replaces every seed with one derived from `seed`.
    pub fn override_seeds(&mut self, base: u64) {
        let pick = |name: &str| seed::derive(base, &[name.as_bytes()]);
        self.embedding.seed = pick("embedding");
        self.ina.cluster_seed = pick("kmeans");
        self.ua.acceptance_seed = pick("acceptance");
        self.user_seed = pick("users");
    }

    /// Applies `ABIN_SEED` when set.
    pub fn apply_env_seed(&mut self) -> Result<(), HarnessError> {
        match std::env::var(SEED_ENV) {
            Ok(v) => {
                let s = v
                    .trim()
                    .parse::<u64>()
                    .map_err(|_| config_err(format!("{SEED_ENV}={v:?} is not an unsigned integer")))?;
                self.override_seeds(s);
                Ok(())
            }
            Err(_) => Ok(()),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if !(0.0..=1.0).contains(&self.ina.alpha) {
            return Err(config_err(format!("ina.alpha = {} is outside [0, 1]", self.ina.alpha)));
        }
        if self.ina.k_clusters == 0 {
            return Err(config_err("ina.k_clusters must be at least 1"));
        }
        if !(self.ina.tol > 0.0 && self.ina.tol <= 1.0) {
            return Err(config_err(format!("ina.tol = {} is outside (0, 1]", self.ina.tol)));
        }
        if self.ina.eps_search.is_nan() || self.ina.eps_search < 0.0 {
            return Err(config_err("ina.eps_search must be non-negative"));
        }
        if self.rounds == 0 {
            return Err(config_err("rounds must be at least 1"));
        }
        if self.opa.k_recommend == 0 {
            return Err(config_err("opa.k_recommend must be at least 1"));
        }
        if self.embedding.dim < 2 {
            return Err(config_err("embedding.dim must be at least 2"));
        }
        if !(self.ua.eta.is_finite() && self.ua.eta >= 0.0) {
            return Err(config_err("ua.eta must be a non-negative number"));
        }
        let users = self.resolved_users_unchecked(&[]);
        if users.is_empty() {
            return Err(config_err("no users configured"));
        }
        let mut seen = HashSet::new();
        for u in &users {
            if !seen.insert(u.id.as_str()) {
                return Err(config_err(format!("duplicate user id {:?}", u.id)));
            }
            if let Some(s) = u.sentiment {
                if !(0.0..=1.0).contains(&s) {
                    return Err(config_err(format!("user {:?} sentiment {s} is outside [0, 1]", u.id)));
                }
            }
        }
        Ok(())
    }

    fn resolved_users_unchecked(&self, corpus_topics: &[String]) -> Vec<UserSpec> {
        let mut users = self.users.clone();
        if let Some(pop) = &self.population {
            let topics = if pop.topics.is_empty() { corpus_topics } else { &pop.topics[..] };
            for i in 0..pop.count {
                users.push(UserSpec {
                    id: format!("u{i:03}"),
                    topic: if topics.is_empty() {
                        None
                    } else {
                        Some(topics[i % topics.len()].clone())
                    },
                    sentiment: pop.sentiment,
                });
            }
        }
        users
    }

    /// Explicit users followed by the generated population.
    pub fn resolved_users(&self, corpus_topics: &[String]) -> Vec<UserSpec> {
        self.resolved_users_unchecked(corpus_topics)
    }

    pub fn round_config(&self) -> RoundConfig {
        RoundConfig {
            mode: self.mode,
            k_recommend: self.opa.k_recommend,
            ina: InaConfig {
                alpha: self.ina.alpha,
                k_clusters: self.ina.k_clusters,
                max_iters: self.ina.max_iters,
                tol: self.ina.tol,
                eps_search: self.ina.eps_search,
                cluster_seed: self.ina.cluster_seed,
            },
            eta: self.ua.eta,
            acceptance_seed: self.ua.acceptance_seed,
        }
    }

    /// SHA-256 of the config's canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}
