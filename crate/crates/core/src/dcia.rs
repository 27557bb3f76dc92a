//! Dominant cluster identification.
//!
//! Clusters are ranked by the harmonic mean of their normalized size and
//! normalized sentiment entropy. A per-user rejection memory blocks a cluster
//! once the user has rejected more than `R` injected messages aimed at it, so
//! the next most important cluster becomes the target.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clustering::ClusterModel;
use crate::corpus::{Message, MessageBase};

pub const DEFAULT_THRESHOLD_R: u32 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DciaError {
    #[error("no member of the cluster carries topic {0:?}")]
    TopicAbsentInCluster(String),
    #[error("cluster is empty")]
    EmptyCluster,
    #[error("no clusters to score")]
    NoClusters,
    #[error("every cluster is blocked")]
    AllClustersBlocked,
    #[error("cluster member {0:?} is not in the message base")]
    UnknownMessage(String),
}

pub type Result<T, E = DciaError> = std::result::Result<T, E>;

/// Mean sentiment of the members tagged `topic`.
pub fn avg_sentiment(members: &[&Message], topic: &str) -> Result<f64> {
    let (sum, count) = members
        .iter()
        .filter(|m| m.topic == topic)
        .fold((0.0, 0usize), |(s, c), m| (s + m.sentiment, c + 1));
    if count == 0 {
        return Err(DciaError::TopicAbsentInCluster(topic.to_string()));
    }
    Ok(sum / count as f64)
}

/// `−Σ P'·log₂P'` over the topics present in the cluster, with `0·log 0 = 0`.
pub fn cluster_entropy(members: &[&Message]) -> Result<f64> {
    if members.is_empty() {
        return Err(DciaError::EmptyCluster);
    }
    let topics: BTreeSet<&str> = members.iter().map(|m| m.topic.as_str()).collect();
    let mut h = 0.0;
    for topic in topics {
        let p = avg_sentiment(members, topic)?;
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterScore {
    pub cluster: usize,
    pub size_norm: f64,
    pub entropy: f64,
    pub entropy_norm: f64,
    pub importance: f64,
}

/// Harmonic mean of normalized size and normalized entropy.
pub fn importance(size_norm: f64, entropy_norm: f64) -> f64 {
    let denom = size_norm + entropy_norm;
    if denom == 0.0 {
        0.0
    } else {
        2.0 * size_norm * entropy_norm / denom
    }
}

/// Scores clusters from their sizes and entropies.
pub fn score_from_parts(sizes: &[usize], entropies: &[f64]) -> Result<Vec<ClusterScore>> {
    let total: usize = sizes.iter().sum();
    if sizes.is_empty() || total == 0 {
        return Err(DciaError::NoClusters);
    }
    let max_h = entropies.iter().copied().fold(0.0, f64::max);
    Ok(sizes
        .iter()
        .zip(entropies)
        .enumerate()
        .map(|(cluster, (&s, &h))| {
            let size_norm = s as f64 / total as f64;
            let entropy_norm = if max_h > 0.0 { h / max_h } else { 0.0 };
            ClusterScore {
                cluster,
                size_norm,
                entropy: h,
                entropy_norm,
                importance: importance(size_norm, entropy_norm),
            }
        })
        .collect())
}

pub fn score_clusters(model: &ClusterModel, base: &MessageBase) -> Result<Vec<ClusterScore>> {
    let mut sizes = Vec::with_capacity(model.k);
    let mut entropies = Vec::with_capacity(model.k);
    for ids in &model.members {
        let members: Vec<&Message> = ids
            .iter()
            .map(|id| base.get(id).ok_or_else(|| DciaError::UnknownMessage(id.clone())))
            .collect::<Result<_>>()?;
        sizes.push(members.len());
        entropies.push(if members.is_empty() { 0.0 } else { cluster_entropy(&members)? });
    }
    score_from_parts(&sizes, &entropies)
}

/// Per-user rejection memory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryState {
    pub user: String,
    #[serde(rename = "threshold_R")]
    pub threshold_r: u32,
    pub counts: BTreeMap<usize, u32>,
    pub blocked: BTreeSet<usize>,
}

impl MemoryState {
    pub fn new(user: impl Into<String>, threshold_r: u32) -> Self {
        Self {
            user: user.into(),
            threshold_r,
            counts: BTreeMap::new(),
            blocked: BTreeSet::new(),
        }
    }

    pub fn is_blocked(&self, cluster: usize) -> bool {
        self.blocked.contains(&cluster)
    }

    pub fn reset(&mut self) {
        self.counts.clear();
        self.blocked.clear();
    }

    /// Adds rejections of injected messages aimed at `cluster`; the cluster
    /// is blocked once its count exceeds the threshold.
    pub fn record_feedback(&mut self, cluster: usize, injected_rejections: u32) {
        if injected_rejections == 0 {
            return;
        }
        let count = self.counts.entry(cluster).or_insert(0);
        *count += injected_rejections;
        if *count > self.threshold_r {
            self.blocked.insert(cluster);
        }
    }
}

/// Highest-importance cluster that is not blocked; ties go to the larger
/// cluster, then the lower index.
pub fn select_target(scores: &[ClusterScore], memory: &MemoryState) -> Result<usize> {
    scores
        .iter()
        .filter(|s| !memory.is_blocked(s.cluster))
        .min_by(|a, b| {
            b.importance
                .total_cmp(&a.importance)
                .then(b.size_norm.total_cmp(&a.size_norm))
                .then(a.cluster.cmp(&b.cluster))
        })
        .map(|s| s.cluster)
        .ok_or(DciaError::AllClustersBlocked)
}
