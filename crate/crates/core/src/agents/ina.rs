use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{Result, UserState};
use crate::clustering::{kmeans, ClusteringConfig};
use crate::corpus::{Message, MessageBase};
use crate::dcia::{score_clusters, select_target, ClusterScore};
use crate::seed;
use crate::vector;
use crate::yinyang::{find_match_scores, if_balance, max_widenings};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InaConfig {
    pub alpha: f64,
    pub k_clusters: usize,
    pub max_iters: usize,
    /// Window growth step for complement matching and searching.
    pub tol: f64,
    /// Half-width of the sentiment window used when searching the base.
    pub eps_search: f64,
    pub cluster_seed: u64,
}

impl Default for InaConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            k_clusters: 2,
            max_iters: 100,
            tol: 0.05,
            eps_search: 0.02,
            cluster_seed: 7,
        }
    }
}

/// A complement sentiment requested for one topic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplementQuery {
    pub topic: String,
    pub sentiment: f64,
    /// The unpaired score this complement answers.
    pub source: f64,
    pub match_widenings: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Injection {
    pub message_id: String,
    pub topic: String,
    pub query: f64,
    pub search_widenings: u32,
    /// Half-width of the window the message was found in.
    pub window: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchMiss {
    pub topic: String,
    pub sentiment: f64,
}

/// How often each INA stage ran.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounters {
    pub clustering: u64,
    pub dcia: u64,
    pub yync: u64,
    pub searching: u64,
}

impl std::ops::AddAssign for StageCounters {
    fn add_assign(&mut self, o: Self) {
        self.clustering += o.clustering;
        self.dcia += o.dcia;
        self.yync += o.yync;
        self.searching += o.searching;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecommendationRound {
    pub round: u32,
    pub opa_list: Vec<Message>,
    pub injected: Vec<Message>,
    pub final_list: Vec<Message>,
    pub target_cluster: Option<usize>,
    pub cluster_scores: Vec<ClusterScore>,
    pub complement_queries: Vec<ComplementQuery>,
    /// One entry per injected message, same order.
    pub injections: Vec<Injection>,
    pub search_misses: Vec<SearchMiss>,
    pub counters: StageCounters,
}

impl RecommendationRound {
    /// A round in which INA did nothing.
    pub fn passthrough(round: u32, opa_list: Vec<Message>) -> Self {
        Self {
            round,
            final_list: opa_list.clone(),
            opa_list,
            injected: Vec::new(),
            target_cluster: None,
            cluster_scores: Vec::new(),
            complement_queries: Vec::new(),
            injections: Vec::new(),
            search_misses: Vec::new(),
            counters: StageCounters::default(),
        }
    }
}

/// Seed for the round's k-means initialization.
pub(crate) fn cluster_seed(base: u64, user: &str, round: u32) -> u64 {
    seed::derive(base, &[b"kmeans", user.as_bytes(), &round.to_le_bytes()])
}

/// Cluster, pick the target, balance its topics and append complements.
pub fn ina_process(
    opa_list: &[Message],
    user: &UserState,
    base: &MessageBase,
    cfg: &InaConfig,
    round: u32,
) -> Result<RecommendationRound> {
    if opa_list.is_empty() {
        return Err(super::AgentError::EmptyOpaList);
    }
    let mut counters = StageCounters::default();

    let ccfg = ClusteringConfig {
        alpha: cfg.alpha,
        k: cfg.k_clusters,
        max_iters: cfg.max_iters,
        seed: cluster_seed(cfg.cluster_seed, &user.id, round),
    };
    let mut model = kmeans(opa_list, &ccfg, base.topic_embeddings())?;
    model.canonicalize();
    counters.clustering += 1;

    let scores = score_clusters(&model, base)?;
    let target = select_target(&scores, &user.memory)?;
    counters.dcia += 1;

    let mut by_topic: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for (m, &c) in opa_list.iter().zip(&model.assignments) {
        if c == target {
            by_topic.entry(m.topic.as_str()).or_default().push(m.sentiment);
        }
    }

    let mut queries = Vec::new();
    let mut misses = Vec::new();
    for (topic, scores_list) in &by_topic {
        let pairing = if_balance(scores_list)?;
        counters.yync += 1;
        if pairing.remain.is_empty() {
            continue;
        }
        let pool = base.sentiment_pool(topic);
        if pool.is_empty() {
            misses.extend(pairing.remain.iter().map(|&s| SearchMiss {
                topic: topic.to_string(),
                sentiment: s,
            }));
            continue;
        }
        let outcome = find_match_scores(&pairing.remain, &pool, cfg.tol)?;
        queries.extend(outcome.matches.iter().map(|m| ComplementQuery {
            topic: topic.to_string(),
            sentiment: m.value,
            source: m.source,
            match_widenings: m.widenings,
        }));
        misses.extend(outcome.unmatched.iter().map(|&s| SearchMiss {
            topic: topic.to_string(),
            sentiment: s,
        }));
    }

    let mut used: HashSet<&str> = opa_list.iter().map(|m| m.id.as_str()).collect();
    let mut injected: Vec<Message> = Vec::new();
    let mut injections = Vec::new();
    let steps = max_widenings(cfg.tol);
    for q in &queries {
        counters.searching += 1;
        let mut hit = None;
        for step in 0..=steps {
            let window = cfg.eps_search + step as f64 * cfg.tol;
            let best = base
                .find_candidates(&q.topic, q.sentiment, window)
                .into_iter()
                .filter(|m| !used.contains(m.id.as_str()))
                .map(|m| (vector::cosine(&user.preference, &m.embedding).unwrap_or(-1.0), m))
                .min_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.id.cmp(&b.1.id)));
            if let Some((_, m)) = best {
                hit = Some((m, step, window));
                break;
            }
        }
        match hit {
            Some((m, step, window)) => {
                used.insert(m.id.as_str());
                injections.push(Injection {
                    message_id: m.id.clone(),
                    topic: q.topic.clone(),
                    query: q.sentiment,
                    search_widenings: step,
                    window,
                });
                injected.push(m.clone());
            }
            None => misses.push(SearchMiss {
                topic: q.topic.clone(),
                sentiment: q.sentiment,
            }),
        }
    }

    let mut final_list = opa_list.to_vec();
    final_list.extend(injected.iter().cloned());
    Ok(RecommendationRound {
        round,
        opa_list: opa_list.to_vec(),
        injected,
        final_list,
        target_cluster: Some(target),
        cluster_scores: scores,
        complement_queries: queries,
        injections,
        search_misses: misses,
        counters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::yinyang::best_diff;

    fn m(id: &str, topic: &str, s: f64, emb: Vec<f64>) -> Message {
        Message::new(id, id, topic, s, emb)
    }

    fn single_cluster() -> InaConfig {
        InaConfig { k_clusters: 1, ..Default::default() }
    }

    #[test]
    fn balanced_list_is_a_fixed_point() {
        let base = MessageBase::from_messages(vec![
            m("a", "t", 0.2, vec![1.0, 0.0]),
            m("b", "t", 0.74, vec![0.9, 0.1]),
            m("c", "t", 0.1, vec![0.0, 1.0]),
        ])
        .unwrap();
        let opa = vec![base.get("a").unwrap().clone(), base.get("b").unwrap().clone()];
        let user = UserState::new("u", vec![1.0, 0.0], 3);
        let round = ina_process(&opa, &user, &base, &single_cluster(), 1).unwrap();
        assert!(round.injected.is_empty());
        assert_eq!(round.final_list, opa);
    }

    #[test]
    fn yang_heavy_list_gets_yin_complements() {
        let mut msgs = Vec::new();
        for i in 0..10 {
            let s = 0.8 + 0.02 * i as f64;
            msgs.push(m(&format!("y{i}"), "t", s, vec![1.0, 0.1 * i as f64]));
        }
        for i in 0..20 {
            let s = 0.1 + 0.02 * i as f64;
            msgs.push(m(&format!("n{i}"), "t", s, vec![0.2, 1.0]));
        }
        let base = MessageBase::from_messages(msgs).unwrap();
        let opa: Vec<Message> = (0..10).map(|i| base.get(&format!("y{i}")).unwrap().clone()).collect();
        let user = UserState::new("u", vec![1.0, 0.0], 3);
        let round = ina_process(&opa, &user, &base, &single_cluster(), 1).unwrap();
        assert!(!round.injected.is_empty());
        assert!(round.injected.iter().all(|m| m.sentiment < 0.5));
        let before: Vec<f64> = opa.iter().map(|m| m.sentiment).collect();
        let after: Vec<f64> = round.final_list.iter().map(|m| m.sentiment).collect();
        assert!(best_diff(&after).unwrap() < best_diff(&before).unwrap());
        assert_eq!(&round.final_list[..opa.len()], &opa[..]);
    }

    #[test]
    fn search_picks_candidate_closest_to_preference() {
        let base = MessageBase::from_messages(vec![
            m("lone", "t", 0.9, vec![1.0, 0.0]),
            m("far", "t", 0.035, vec![0.0, 1.0]),
            m("near", "t", 0.035, vec![0.8, 0.6]),
        ])
        .unwrap();
        let opa = vec![base.get("lone").unwrap().clone()];
        let user = UserState::new("u", vec![1.0, 0.0], 3);
        // the query for 0.9 lands on the pool value 0.035 after widening
        let round = ina_process(&opa, &user, &base, &single_cluster(), 1).unwrap();
        assert_eq!(round.complement_queries.len(), 1);
        assert_eq!(round.complement_queries[0].sentiment, 0.035);
        assert_eq!(round.injected.len(), 1);
        assert_eq!(round.injected[0].id, "near");
    }

    #[test]
    fn injections_are_not_duplicated() {
        let base = MessageBase::from_messages(vec![
            m("y1", "t", 0.9, vec![1.0, 0.0]),
            m("y2", "t", 0.9, vec![1.0, 0.1]),
            m("c", "t", 0.26, vec![0.5, 0.5]),
        ])
        .unwrap();
        let opa = vec![base.get("y1").unwrap().clone(), base.get("y2").unwrap().clone()];
        let user = UserState::new("u", vec![1.0, 0.0], 3);
        let round = ina_process(&opa, &user, &base, &single_cluster(), 1).unwrap();
        // two queries for 0.26 but only one such message exists
        assert_eq!(round.complement_queries.len(), 2);
        assert_eq!(round.injected.len(), 1);
        assert_eq!(round.search_misses.len(), 1);
    }

    #[test]
    fn injected_topics_belong_to_target_cluster() {
        let base = MessageBase::from_messages(vec![
            m("a1", "a", 0.9, vec![1.0, 0.0, 0.0]),
            m("a2", "a", 0.85, vec![1.0, 0.05, 0.0]),
            m("b1", "b", 0.95, vec![0.0, 0.0, 1.0]),
            m("ca", "a", 0.25, vec![0.9, 0.1, 0.0]),
            m("cb", "b", 0.25, vec![0.0, 0.1, 0.9]),
        ])
        .unwrap();
        let opa: Vec<Message> = ["a1", "a2", "b1"].iter().map(|id| base.get(id).unwrap().clone()).collect();
        let user = UserState::new("u", vec![1.0, 0.0, 0.0], 3);
        let cfg = InaConfig { k_clusters: 2, ..Default::default() };
        let round = ina_process(&opa, &user, &base, &cfg, 1).unwrap();
        let target = round.target_cluster.unwrap();
        let scores = &round.cluster_scores;
        assert!(scores.iter().all(|s| s.importance <= scores[target].importance));
        for inj in &round.injected {
            assert!(opa.iter().any(|o| o.topic == inj.topic));
        }
    }
}
