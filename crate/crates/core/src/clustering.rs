//! k-means over a recommendation list using a blend of textual and topical
//! cosine similarity.
//!
//! Each centroid carries a text part (mean of member embeddings) and a topic
//! part (mean of member topic embeddings), so the blended similarity can be
//! evaluated between a message and a centroid the same way it is evaluated
//! between two messages.

use std::collections::{BTreeMap, HashMap};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Message, TopicEmbedding};
use crate::vector;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClusterError {
    #[error("cosine is undefined for a zero vector")]
    ZeroVector,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("unknown topic {0:?}")]
    UnknownTopic(String),
    #[error("nothing to cluster")]
    NoMessages,
    #[error("k must be at least 1")]
    ZeroK,
    #[error("alpha {0} is outside [0, 1]")]
    BadAlpha(f64),
}

pub type Result<T, E = ClusterError> = std::result::Result<T, E>;

pub fn textual_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(ClusterError::DimensionMismatch(a.len(), b.len()));
    }
    vector::cosine(a, b).ok_or(ClusterError::ZeroVector)
}

pub fn topic_similarity(a: &TopicEmbedding, b: &TopicEmbedding) -> Result<f64> {
    textual_similarity(&a.vector, &b.vector)
}

/// `alpha·text + (1 − alpha)·topic` similarity between two messages.
pub fn unified_similarity(
    a: &Message,
    b: &Message,
    alpha: f64,
    topic_embs: &BTreeMap<String, Vec<f64>>,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(ClusterError::BadAlpha(alpha));
    }
    let ta = topic_embs
        .get(&a.topic)
        .ok_or_else(|| ClusterError::UnknownTopic(a.topic.clone()))?;
    let tb = topic_embs
        .get(&b.topic)
        .ok_or_else(|| ClusterError::UnknownTopic(b.topic.clone()))?;
    let text = textual_similarity(&a.embedding, &b.embedding)?;
    let topic = textual_similarity(ta, tb)?;
    Ok(alpha * text + (1.0 - alpha) * topic)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusteringConfig {
    pub alpha: f64,
    pub k: usize,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            k: 2,
            max_iters: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Centroid {
    pub text: Vec<f64>,
    pub topic: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub k: usize,
    /// Cluster of each input message, in input order.
    pub assignments: Vec<usize>,
    pub ids: Vec<String>,
    pub centroids: Vec<Centroid>,
    /// Member ids per cluster, in input order.
    pub members: Vec<Vec<String>>,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the requested k exceeded the number of messages and was clamped.
    pub clamped_from: Option<usize>,
}

impl ClusterModel {
    pub fn cluster_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id).map(|i| self.assignments[i])
    }

    /// Input positions of each cluster's members.
    pub fn member_positions(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &c) in self.assignments.iter().enumerate() {
            out[c].push(i);
        }
        out
    }

    /// Renumbers clusters in order of first appearance in the input list.
    pub fn canonicalize(&mut self) {
        let mut remap = vec![usize::MAX; self.k];
        let mut next = 0;
        for &c in &self.assignments {
            if remap[c] == usize::MAX {
                remap[c] = next;
                next += 1;
            }
        }
        for r in remap.iter_mut() {
            if *r == usize::MAX {
                *r = next;
                next += 1;
            }
        }
        let mut centroids = vec![None; self.k];
        let mut members = vec![Vec::new(); self.k];
        for (old, &new) in remap.iter().enumerate() {
            centroids[new] = Some(self.centroids[old].clone());
            members[new] = std::mem::take(&mut self.members[old]);
        }
        self.centroids = centroids.into_iter().map(Option::unwrap).collect();
        self.members = members;
        for c in self.assignments.iter_mut() {
            *c = remap[*c];
        }
    }
}

/// Blended similarity between a point and a centroid. A zero-norm centroid
/// component contributes 0.
fn point_similarity(text: &[f64], topic: &[f64], c: &Centroid, alpha: f64) -> f64 {
    let t = vector::cosine(text, &c.text).unwrap_or(0.0);
    let p = vector::cosine(topic, &c.topic).unwrap_or(0.0);
    alpha * t + (1.0 - alpha) * p
}

fn argmax_cluster(text: &[f64], topic: &[f64], centroids: &[Centroid], alpha: f64) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let s = point_similarity(text, topic, c, alpha);
        if s > best.1 {
            best = (j, s);
        }
    }
    best
}

fn centroid_of(members: &[usize], texts: &[&[f64]], topics: &[&[f64]], dim: usize, tdim: usize) -> Centroid {
    Centroid {
        text: vector::mean(members.iter().map(|&i| texts[i]), dim),
        topic: vector::mean(members.iter().map(|&i| topics[i]), tdim),
    }
}

/// Partitions `messages` into `cfg.k` clusters, clamping k to the number of
/// messages. Deterministic in `(messages, cfg)`.
pub fn kmeans(
    messages: &[Message],
    cfg: &ClusteringConfig,
    topic_embs: &BTreeMap<String, Vec<f64>>,
) -> Result<ClusterModel> {
    if messages.is_empty() {
        return Err(ClusterError::NoMessages);
    }
    if cfg.k == 0 {
        return Err(ClusterError::ZeroK);
    }
    if !(0.0..=1.0).contains(&cfg.alpha) {
        return Err(ClusterError::BadAlpha(cfg.alpha));
    }
    let n = messages.len();
    let (k, clamped_from) = if cfg.k > n {
        log::warn!("k = {} exceeds {} messages; clamping", cfg.k, n);
        (n, Some(cfg.k))
    } else {
        (cfg.k, None)
    };

    let texts: Vec<&[f64]> = messages.iter().map(|m| m.embedding.as_slice()).collect();
    let topics: Vec<&[f64]> = messages
        .iter()
        .map(|m| {
            topic_embs
                .get(&m.topic)
                .map(Vec::as_slice)
                .ok_or_else(|| ClusterError::UnknownTopic(m.topic.clone()))
        })
        .collect::<Result<_>>()?;
    let dim = texts[0].len();
    let tdim = topics[0].len();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut seeds = sample(&mut rng, n, k).into_vec();
    seeds.sort_unstable();
    let mut centroids: Vec<Centroid> = seeds
        .iter()
        .map(|&i| Centroid {
            text: texts[i].to_vec(),
            topic: topics[i].to_vec(),
        })
        .collect();

    let mut assignments: Vec<usize> = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iters.max(1) {
        iterations += 1;
        let scored: Vec<(usize, f64)> = (0..n)
            .map(|i| argmax_cluster(texts[i], topics[i], &centroids, cfg.alpha))
            .collect();
        let mut next: Vec<usize> = scored.iter().map(|s| s.0).collect();
        repair_empty(&mut next, &scored, k);

        let stable = next == assignments;
        assignments = next;
        let mut groups = vec![Vec::new(); k];
        for (i, &c) in assignments.iter().enumerate() {
            groups[c].push(i);
        }
        centroids = groups
            .iter()
            .map(|g| centroid_of(g, &texts, &topics, dim, tdim))
            .collect();
        if stable {
            converged = true;
            break;
        }
    }

    let mut members = vec![Vec::new(); k];
    for (i, &c) in assignments.iter().enumerate() {
        members[c].push(messages[i].id.clone());
    }
    Ok(ClusterModel {
        k,
        assignments,
        ids: messages.iter().map(|m| m.id.clone()).collect(),
        centroids,
        members,
        iterations,
        converged,
        clamped_from,
    })
}

/// Gives every empty cluster the worst-fitting message of a cluster that can
/// spare one.
fn repair_empty(assign: &mut [usize], scored: &[(usize, f64)], k: usize) {
    let mut sizes = vec![0usize; k];
    for &c in assign.iter() {
        sizes[c] += 1;
    }
    let mut taken = vec![false; assign.len()];
    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        let donor = (0..assign.len())
            .filter(|&i| !taken[i] && sizes[assign[i]] > 1)
            .min_by(|&a, &b| scored[a].1.total_cmp(&scored[b].1).then(a.cmp(&b)));
        if let Some(i) = donor {
            sizes[assign[i]] -= 1;
            sizes[empty] += 1;
            assign[i] = empty;
            taken[i] = true;
        }
    }
}

/// Index of the centroid most similar to each message under `alpha`.
pub fn nearest_centroids(
    messages: &[Message],
    model: &ClusterModel,
    alpha: f64,
    topic_embs: &BTreeMap<String, Vec<f64>>,
) -> Result<Vec<usize>> {
    messages
        .iter()
        .map(|m| {
            let topic = topic_embs
                .get(&m.topic)
                .ok_or_else(|| ClusterError::UnknownTopic(m.topic.clone()))?;
            Ok(argmax_cluster(&m.embedding, topic, &model.centroids, alpha).0)
        })
        .collect()
}

/// Message id → cluster index.
pub fn assignment_map(model: &ClusterModel) -> HashMap<&str, usize> {
    model
        .ids
        .iter()
        .map(String::as_str)
        .zip(model.assignments.iter().copied())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn msg(id: &str, topic: &str, emb: Vec<f64>) -> Message {
        Message::new(id, id, topic, 0.5, emb)
    }

    fn topics(pairs: &[(&str, Vec<f64>)]) -> BTreeMap<String, Vec<f64>> {
        pairs.iter().map(|(t, v)| (t.to_string(), v.clone())).collect()
    }

    #[test]
    fn textual_similarity_examples() {
        let u = [0.3, 0.4];
        assert!((textual_similarity(&u, &u).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(textual_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let s = textual_similarity(&[1.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((s - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((s - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-5);
        assert_eq!(textual_similarity(&[0.0, 0.0], &[1.0, 0.0]), Err(ClusterError::ZeroVector));
        assert_eq!(
            textual_similarity(&[1.0], &[1.0, 0.0]),
            Err(ClusterError::DimensionMismatch(1, 2))
        );
    }

    #[test]
    fn topic_similarity_examples() {
        let a = TopicEmbedding { topic: "a".into(), vector: vec![1.0, 2.0] };
        let b = TopicEmbedding { topic: "b".into(), vector: vec![-2.0, 1.0] };
        let c = TopicEmbedding { topic: "c".into(), vector: vec![3.0, 4.0] };
        assert!((topic_similarity(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(topic_similarity(&a, &b).unwrap(), 0.0);
        // (3 + 8) / (sqrt5 · 5)
        let expected = 11.0 / (5.0f64.sqrt() * 5.0);
        assert!((topic_similarity(&a, &c).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn unified_similarity_weights() {
        let te = topics(&[("x", vec![1.0, 0.0]), ("y", vec![1.0, 1.0])]);
        let a = msg("a", "x", vec![1.0, 0.0]);
        let b = msg("b", "y", vec![0.6, 0.8]);
        let text = textual_similarity(&a.embedding, &b.embedding).unwrap();
        let topic = textual_similarity(&te["x"], &te["y"]).unwrap();
        assert!((unified_similarity(&a, &b, 1.0, &te).unwrap() - text).abs() < 1e-12);
        assert!((unified_similarity(&a, &b, 0.0, &te).unwrap() - topic).abs() < 1e-12);
        let half = unified_similarity(&a, &b, 0.5, &te).unwrap();
        assert!((half - 0.5 * (text + topic)).abs() < 1e-12);

        // textual 0.8 and topical 0.4 → 0.6
        let te = topics(&[("p", vec![1.0, 0.0]), ("q", vec![0.4, 0.84f64.sqrt()])]);
        let a = msg("a", "p", vec![1.0, 0.0]);
        let b = msg("b", "q", vec![0.8, 0.6]);
        assert!((unified_similarity(&a, &b, 0.5, &te).unwrap() - 0.6).abs() < 1e-6);

        let c = msg("c", "nope", vec![1.0, 0.0]);
        assert!(matches!(unified_similarity(&a, &c, 0.5, &te), Err(ClusterError::UnknownTopic(_))));
    }

    #[test]
    fn single_cluster_is_global_mean() {
        let te = topics(&[("t", vec![1.0, 1.0])]);
        let msgs = vec![
            msg("a", "t", vec![1.0, 0.0]),
            msg("b", "t", vec![0.0, 1.0]),
            msg("c", "t", vec![0.5, 0.5]),
        ];
        let cfg = ClusteringConfig { k: 1, ..Default::default() };
        let model = kmeans(&msgs, &cfg, &te).unwrap();
        assert_eq!(model.assignments, vec![0, 0, 0]);
        assert_eq!(model.centroids[0].text, vec![0.5, 0.5]);
    }

    #[test]
    fn saturated_k_gives_singletons() {
        let te = topics(&[("t", vec![1.0, 0.0, 0.0])]);
        let msgs = vec![
            msg("a", "t", vec![1.0, 0.0, 0.0]),
            msg("b", "t", vec![0.0, 1.0, 0.0]),
            msg("c", "t", vec![0.0, 0.0, 1.0]),
        ];
        let cfg = ClusteringConfig { k: 3, seed: 11, ..Default::default() };
        let model = kmeans(&msgs, &cfg, &te).unwrap();
        for (i, m) in msgs.iter().enumerate() {
            let c = model.assignments[i];
            assert_eq!(model.members[c], vec![m.id.clone()]);
            assert_eq!(model.centroids[c].text, m.embedding);
        }
    }

    #[test]
    fn k_larger_than_n_is_clamped() {
        let te = topics(&[("t", vec![1.0, 0.0])]);
        let msgs = vec![msg("a", "t", vec![1.0, 0.0]), msg("b", "t", vec![0.0, 1.0])];
        let cfg = ClusteringConfig { k: 5, ..Default::default() };
        let model = kmeans(&msgs, &cfg, &te).unwrap();
        assert_eq!(model.k, 2);
        assert_eq!(model.clamped_from, Some(5));
        assert!(model.members.iter().all(|m| m.len() == 1));
    }

    #[test]
    fn errors() {
        let te = topics(&[("t", vec![1.0, 0.0])]);
        assert_eq!(kmeans(&[], &ClusteringConfig::default(), &te), Err(ClusterError::NoMessages));
        let msgs = vec![msg("a", "t", vec![1.0, 0.0])];
        let cfg = ClusteringConfig { k: 0, ..Default::default() };
        assert_eq!(kmeans(&msgs, &cfg, &te), Err(ClusterError::ZeroK));
        let msgs = vec![msg("a", "u", vec![1.0, 0.0])];
        assert!(matches!(
            kmeans(&msgs, &ClusteringConfig::default(), &te),
            Err(ClusterError::UnknownTopic(_))
        ));
    }

    #[test]
    fn empty_cluster_is_repaired() {
        // Identical points force every message onto one centroid first.
        let te = topics(&[("t", vec![1.0, 0.0])]);
        let msgs: Vec<Message> = (0..4).map(|i| msg(&format!("m{i}"), "t", vec![1.0, 0.0])).collect();
        let cfg = ClusteringConfig { k: 3, ..Default::default() };
        let model = kmeans(&msgs, &cfg, &te).unwrap();
        assert!(model.members.iter().all(|m| !m.is_empty()));
    }

    #[test]
    fn canonicalize_orders_by_first_member() {
        let te = topics(&[("t", vec![1.0, 0.0])]);
        let msgs = vec![
            msg("a", "t", vec![1.0, 0.0]),
            msg("b", "t", vec![0.0, 1.0]),
            msg("c", "t", vec![1.0, 0.1]),
        ];
        for seed in 0..8 {
            let cfg = ClusteringConfig { k: 2, seed, ..Default::default() };
            let mut model = kmeans(&msgs, &cfg, &te).unwrap();
            let before = model.clone();
            model.canonicalize();
            assert_eq!(model.assignments[0], 0);
            for (i, id) in model.ids.iter().enumerate() {
                let c = model.assignments[i];
                assert!(model.members[c].contains(id));
                let old = before.assignments[i];
                assert_eq!(model.centroids[c], before.centroids[old]);
            }
        }
    }
}
