use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CorpusInfo, HarnessError, Manifest, Result, Seeds, SimulationConfig, UserSpec};
use crate::agents::{
    run_round, ComplementQuery, Decision, Injection, Mode, RoundConfig, SearchMiss, SimilarityRecommender,
    StageCounters, UserState,
};
use crate::corpus::{CorpusFormat, HashEmbedder, MessageBase};
use crate::dcia::{ClusterScore, MemoryState};
use crate::metrics::{self, RoundMetrics, Summary};
use crate::seed;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CSV_FILE: &str = "rounds.csv";
pub const RECORDS_FILE: &str = "rounds.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";

/// One line of `rounds.csv`. Metric columns are empty on skipped rounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRow {
    pub user: String,
    pub round: u32,
    pub mode: Mode,
    pub status: String,
    pub opa_len: usize,
    pub injected: usize,
    pub final_len: usize,
    pub accepted: usize,
    pub coverage: Option<f64>,
    pub rr: Option<f64>,
    pub pre: Option<f64>,
    pub hit: Option<u8>,
    pub best_diff_mean: Option<f64>,
    pub target_cluster: Option<usize>,
    pub memory_reset: bool,
    /// `topic=value` pairs joined by `;`.
    pub best_diff_topics: String,
}

impl RoundRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn metrics(&self) -> Option<RoundMetrics> {
        if !self.is_ok() {
            return None;
        }
        let best_diff_per_topic = self
            .best_diff_topics
            .split(';')
            .filter(|s| !s.is_empty())
            .filter_map(|kv| {
                let (k, v) = kv.rsplit_once('=')?;
                Some((k.to_string(), v.parse().ok()?))
            })
            .collect();
        Some(RoundMetrics {
            coverage: self.coverage?,
            rr: self.rr?,
            pre: self.pre?,
            hit: self.hit?,
            best_diff_per_topic,
            best_diff_mean: self.best_diff_mean?,
        })
    }
}

pub(crate) fn format_topics(per_topic: &BTreeMap<String, f64>) -> String {
    per_topic
        .iter()
        .map(|(t, v)| format!("{t}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

/// One line of `rounds.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub user: String,
    pub round: u32,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub opa_ids: Vec<String>,
    pub injected_ids: Vec<String>,
    pub final_ids: Vec<String>,
    pub decisions: Vec<Decision>,
    pub target_cluster: Option<usize>,
    pub cluster_scores: Vec<ClusterScore>,
    pub complement_queries: Vec<ComplementQuery>,
    pub injections: Vec<Injection>,
    pub search_misses: Vec<SearchMiss>,
    pub memory_reset: bool,
    pub exhausted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub mode: Mode,
    pub users: usize,
    pub rounds: u32,
    pub rows: usize,
    pub skipped_rows: usize,
    pub memory_resets: usize,
    pub overall: Option<Summary>,
    pub per_user: BTreeMap<String, Summary>,
    pub counters: StageCounters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub manifest: Manifest,
    pub rows: Vec<RoundRow>,
    pub records: Vec<RoundRecord>,
    pub memories: Vec<MemoryState>,
    pub summary: RunSummary,
}

/// Ingests the configured corpus, or loads it if the path is a saved base.
pub fn load_corpus(cfg: &SimulationConfig) -> Result<MessageBase> {
    let path = &cfg.corpus_path;
    if path.is_dir() {
        let base = MessageBase::load_dir(path)?;
        if base.dim() != cfg.embedding.dim {
            log::warn!(
                "saved base has dimension {}, config says {}; using the saved embeddings",
                base.dim(),
                cfg.embedding.dim
            );
        }
        return Ok(base);
    }
    if !path.exists() {
        return Err(HarnessError::Config(format!("corpus {} does not exist", path.display())));
    }
    let embedder = HashEmbedder::new(cfg.embedding.dim, cfg.embedding.seed)?;
    Ok(MessageBase::ingest(path, CorpusFormat::from_path(path), &embedder)?)
}

/// Embedding of a message near the user's configured topic and sentiment.
pub fn initial_preference(base: &MessageBase, spec: &UserSpec, user_seed: u64) -> Result<Vec<f64>> {
    let mut candidates: Vec<_> = match &spec.topic {
        Some(t) => {
            if !base.has_topic(t) {
                return Err(HarnessError::Config(format!("user {:?}: unknown topic {t:?}", spec.id)));
            }
            base.topic_messages(t).collect()
        }
        None => base.messages().iter().collect(),
    };
    if candidates.is_empty() {
        return Err(HarnessError::Config("corpus is empty".into()));
    }
    if let Some(target) = spec.sentiment {
        candidates.sort_by(|a, b| {
            (a.sentiment - target)
                .abs()
                .total_cmp(&(b.sentiment - target).abs())
                .then_with(|| a.id.cmp(&b.id))
        });
        candidates.truncate(5);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(user_seed, &[spec.id.as_bytes()]));
    Ok(candidates.choose(&mut rng).unwrap().embedding.clone())
}

struct UserRun {
    rows: Vec<RoundRow>,
    records: Vec<RoundRecord>,
    memory: MemoryState,
    counters: StageCounters,
}

fn simulate_user(spec: &UserSpec, base: &MessageBase, cfg: &SimulationConfig, rc: &RoundConfig) -> Result<UserRun> {
    let pref = initial_preference(base, spec, cfg.user_seed)?;
    let mut user = UserState::new(spec.id.clone(), pref, cfg.ina.threshold_r);
    let mut recommender = SimilarityRecommender;
    let mut out = UserRun {
        rows: Vec::with_capacity(cfg.rounds as usize),
        records: Vec::with_capacity(cfg.rounds as usize),
        memory: user.memory.clone(),
        counters: StageCounters::default(),
    };
    for round in 1..=cfg.rounds {
        let outcome = run_round(&mut user, base, &mut recommender, rc, round).map_err(|e| e.to_string());
        let metrics = outcome.as_ref().map_err(Clone::clone).and_then(|o| {
            metrics::round_metrics(&o.round.final_list, &o.decisions, base).map_err(|e| e.to_string())
        });
        match (outcome, metrics) {
            (Ok(o), Ok(m)) => {
                out.counters += o.round.counters;
                let ids = |list: &[crate::corpus::Message]| list.iter().map(|m| m.id.clone()).collect::<Vec<_>>();
                out.rows.push(RoundRow {
                    user: user.id.clone(),
                    round,
                    mode: rc.mode,
                    status: "ok".into(),
                    opa_len: o.round.opa_list.len(),
                    injected: o.round.injected.len(),
                    final_len: o.round.final_list.len(),
                    accepted: o.decisions.iter().filter(|d| d.accepted).count(),
                    coverage: Some(m.coverage),
                    rr: Some(m.rr),
                    pre: Some(m.pre),
                    hit: Some(m.hit),
                    best_diff_mean: Some(m.best_diff_mean),
                    target_cluster: o.round.target_cluster,
                    memory_reset: o.memory_reset,
                    best_diff_topics: format_topics(&m.best_diff_per_topic),
                });
                out.records.push(RoundRecord {
                    user: user.id.clone(),
                    round,
                    status: "ok".into(),
                    error: None,
                    opa_ids: ids(&o.round.opa_list),
                    injected_ids: ids(&o.round.injected),
                    final_ids: ids(&o.round.final_list),
                    decisions: o.decisions,
                    target_cluster: o.round.target_cluster,
                    cluster_scores: o.round.cluster_scores,
                    complement_queries: o.round.complement_queries,
                    injections: o.round.injections,
                    search_misses: o.round.search_misses,
                    memory_reset: o.memory_reset,
                    exhausted: o.exhausted,
                });
            }
            (Err(e), _) | (_, Err(e)) => {
                log::warn!("user {} round {round} skipped: {e}", user.id);
                out.rows.push(RoundRow {
                    user: user.id.clone(),
                    round,
                    mode: rc.mode,
                    status: "skipped".into(),
                    opa_len: 0,
                    injected: 0,
                    final_len: 0,
                    accepted: 0,
                    coverage: None,
                    rr: None,
                    pre: None,
                    hit: None,
                    best_diff_mean: None,
                    target_cluster: None,
                    memory_reset: false,
                    best_diff_topics: String::new(),
                });
                out.records.push(RoundRecord {
                    user: user.id.clone(),
                    round,
                    status: "skipped".into(),
                    error: Some(e),
                    opa_ids: Vec::new(),
                    injected_ids: Vec::new(),
                    final_ids: Vec::new(),
                    decisions: Vec::new(),
                    target_cluster: None,
                    cluster_scores: Vec::new(),
                    complement_queries: Vec::new(),
                    injections: Vec::new(),
                    search_misses: Vec::new(),
                    memory_reset: false,
                    exhausted: false,
                });
            }
        }
    }
    out.memory = user.memory;
    Ok(out)
}

/// Runs every user against an already loaded base. Users run in parallel
/// unless `single_threaded` is set; output order is by user then round.
pub fn run_with_base(cfg: &SimulationConfig, base: &MessageBase) -> Result<RunResult> {
    cfg.validate()?;
    let topics: Vec<String> = base.topics().map(str::to_string).collect();
    let users = cfg.resolved_users(&topics);
    let rc = cfg.round_config();

    let runs: Vec<Result<UserRun>> = if cfg.single_threaded {
        users.iter().map(|u| simulate_user(u, base, cfg, &rc)).collect()
    } else {
        users.par_iter().map(|u| simulate_user(u, base, cfg, &rc)).collect()
    };
    let mut runs: Vec<(String, UserRun)> = users
        .iter()
        .map(|u| u.id.clone())
        .zip(runs)
        .map(|(id, r)| r.map(|r| (id, r)))
        .collect::<Result<_>>()?;
    runs.sort_by(|a, b| a.0.cmp(&b.0));

    let mut rows = Vec::new();
    let mut records = Vec::new();
    let mut memories = Vec::new();
    let mut counters = StageCounters::default();
    let mut per_user = BTreeMap::new();
    for (id, run) in runs {
        counters += run.counters;
        let ok: Vec<RoundMetrics> = run.rows.iter().filter_map(RoundRow::metrics).collect();
        if let Ok(s) = metrics::aggregate(&ok) {
            per_user.insert(id, s);
        }
        rows.extend(run.rows);
        records.extend(run.records);
        memories.push(run.memory);
    }
    let ok: Vec<RoundMetrics> = rows.iter().filter_map(RoundRow::metrics).collect();
    let summary = RunSummary {
        mode: cfg.mode,
        users: users.len(),
        rounds: cfg.rounds,
        rows: rows.len(),
        skipped_rows: rows.len() - ok.len(),
        memory_resets: rows.iter().filter(|r| r.memory_reset).count(),
        overall: metrics::aggregate(&ok).ok(),
        per_user,
        counters,
    };
    let manifest = Manifest {
        tool: "abin".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.clone(),
        config_hash: cfg.hash(),
        seeds: Seeds {
            embedding: cfg.embedding.seed,
            cluster: cfg.ina.cluster_seed,
            acceptance: cfg.ua.acceptance_seed,
            users: cfg.user_seed,
        },
        users,
        corpus: CorpusInfo {
            messages: base.len(),
            topics,
            dim: base.dim(),
        },
        counters,
        files: [MANIFEST_FILE, CSV_FILE, RECORDS_FILE, SUMMARY_FILE]
            .iter()
            .map(|s| s.to_string())
            .chain(memories.iter().map(|m| format!("memory/{}.json", m.user)))
            .collect(),
    };
    Ok(RunResult {
        manifest,
        rows,
        records,
        memories,
        summary,
    })
}

/// Writes every run artifact into `dir`.
pub fn write_run(result: &RunResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir.join("memory"))?;
    let mut w = csv::Writer::from_path(dir.join(CSV_FILE))?;
    for row in &result.rows {
        w.serialize(row)?;
    }
    w.flush()?;

    let mut lines = String::new();
    for rec in &result.records {
        lines.push_str(&serde_json::to_string(rec)?);
        lines.push('\n');
    }
    fs::write(dir.join(RECORDS_FILE), lines)?;
    fs::write(dir.join(SUMMARY_FILE), serde_json::to_string_pretty(&result.summary)? + "\n")?;
    for m in &result.memories {
        fs::write(
            dir.join("memory").join(format!("{}.json", m.user)),
            serde_json::to_string_pretty(m)? + "\n",
        )?;
    }
    fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&result.manifest)? + "\n")?;
    Ok(())
}

/// Loads the corpus, runs the simulation and writes it to `cfg.output_dir`.
pub fn simulate(cfg: &SimulationConfig) -> Result<RunResult> {
    cfg.validate()?;
    let base = load_corpus(cfg)?;
    let result = run_with_base(cfg, &base)?;
    write_run(&result, &cfg.output_dir)?;
    Ok(result)
}
