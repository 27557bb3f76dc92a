//! The three cooperating agents and the round loop that ties them together.
//!
//! * OPA: any [`Recommender`]; [`SimilarityRecommender`] is the built-in one.
//! * INA: [`ina_process`] clusters the OPA list, picks a target cluster,
//!   balances each of its topics and appends complementary messages.
//! * UA: [`ua_respond`] accepts or rejects every message with probability
//!   equal to its mapped cosine similarity, and [`ua_update_preference`]
//!   folds accepted messages into the preference vector.

mod adapter;
mod ina;
mod opa;
mod user;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clustering::ClusterError;
use crate::corpus::{Message, MessageBase};
use crate::dcia::DciaError;
use crate::yinyang::YinYangError;

pub use adapter::{AdapterRequest, AdapterResponse, NdjsonRecommender};
pub use ina::{
    ina_process, ComplementQuery, InaConfig, Injection, RecommendationRound, SearchMiss, StageCounters,
};
pub use opa::{opa_similarity_recommend, SimilarityRecommender};
pub use user::{
    acceptance_draw, mapped_similarity, ua_respond, ua_update_preference, Decision, HistoryEntry, UserState,
};

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("OPA returned an empty recommendation list")]
    EmptyOpaList,
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Dcia(#[from] DciaError),
    #[error(transparent)]
    YinYang(#[from] YinYangError),
    #[error("recommender adapter: {0}")]
    Adapter(String),
}

pub type Result<T, E = AgentError> = std::result::Result<T, E>;

/// Output of one OPA call.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Recommendation {
    pub messages: Vec<Message>,
    /// Fewer than `k` candidates were left.
    pub exhausted: bool,
}

/// Extension point for upstream recommenders.
///
/// Implementations must return at most `k` messages, all drawn from `base`
/// and none listed in `exclude`.
pub trait Recommender: Send {
    fn recommend(
        &mut self,
        user: &UserState,
        base: &MessageBase,
        k: usize,
        exclude: &HashSet<String>,
    ) -> Result<Recommendation>;

    fn notify_feedback(&mut self, _user: &UserState, _decisions: &[Decision]) {}
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// INA bypassed: the user sees OPA's list as is.
    OpaOnly,
    Abin,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::OpaOnly => "opa_only",
            Mode::Abin => "abin",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "opa_only" => Ok(Mode::OpaOnly),
            "abin" => Ok(Mode::Abin),
            other => Err(format!("unknown mode {other:?} (expected opa_only or abin)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundConfig {
    pub mode: Mode,
    pub k_recommend: usize,
    pub ina: InaConfig,
    /// Preference learning rate.
    pub eta: f64,
    pub acceptance_seed: u64,
}

impl Default for RoundConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Abin,
            k_recommend: 10,
            ina: InaConfig::default(),
            eta: 0.3,
            acceptance_seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    pub round: RecommendationRound,
    pub decisions: Vec<Decision>,
    /// OPA ran out of candidates this round.
    pub exhausted: bool,
    /// Memory was cleared because every cluster was blocked.
    pub memory_reset: bool,
}

/// One full interaction round for `user`, updating it in place.
pub fn run_round(
    user: &mut UserState,
    base: &MessageBase,
    recommender: &mut dyn Recommender,
    cfg: &RoundConfig,
    round_index: u32,
) -> Result<RoundOutcome> {
    let rec = recommender.recommend(user, base, cfg.k_recommend, &HashSet::new())?;
    if rec.messages.is_empty() {
        return Err(AgentError::EmptyOpaList);
    }

    let mut memory_reset = false;
    let round = match cfg.mode {
        Mode::OpaOnly => RecommendationRound::passthrough(round_index, rec.messages),
        Mode::Abin => match ina_process(&rec.messages, user, base, &cfg.ina, round_index) {
            Err(AgentError::Dcia(DciaError::AllClustersBlocked)) => {
                log::info!("user {}: all clusters blocked in round {round_index}; resetting memory", user.id);
                user.memory.reset();
                memory_reset = true;
                ina_process(&rec.messages, user, base, &cfg.ina, round_index)?
            }
            other => other?,
        },
    };

    let decisions = ua_respond(&round, user, cfg.acceptance_seed);
    let accepted: Vec<&Message> = round
        .final_list
        .iter()
        .zip(&decisions)
        .filter(|(_, d)| d.accepted)
        .map(|(m, _)| m)
        .collect();
    ua_update_preference(user, &accepted, cfg.eta);
    user.history.extend(decisions.iter().map(|d| HistoryEntry {
        round: round_index,
        message_id: d.message_id.clone(),
        accepted: d.accepted,
    }));

    if let Some(target) = round.target_cluster {
        let injected: HashSet<&str> = round.injected.iter().map(|m| m.id.as_str()).collect();
        let rejections = decisions
            .iter()
            .filter(|d| !d.accepted && injected.contains(d.message_id.as_str()))
            .count() as u32;
        user.memory.record_feedback(target, rejections);
    }
    recommender.notify_feedback(user, &decisions);

    Ok(RoundOutcome {
        round,
        decisions,
        exhausted: rec.exhausted,
        memory_reset,
    })
}
