//! Per-round diversity, accuracy and neutralization metrics, and their
//! aggregation across a run.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::Decision;
use crate::corpus::{Message, MessageBase};
use crate::yinyang::{self, YinYangError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("no decisions to score")]
    EmptyDecisions,
    #[error("nothing to aggregate")]
    EmptyInput,
    #[error(transparent)]
    YinYang(#[from] YinYangError),
}

pub type Result<T, E = MetricsError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundMetrics {
    pub coverage: f64,
    pub rr: f64,
    pub pre: f64,
    pub hit: u8,
    pub best_diff_per_topic: BTreeMap<String, f64>,
    pub best_diff_mean: f64,
}

fn by_topic(list: &[Message]) -> BTreeMap<&str, Vec<f64>> {
    let mut out: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for m in list {
        out.entry(m.topic.as_str()).or_default().push(m.sentiment);
    }
    out
}

/// Mean over the list's topics of (listed sentiment mass / base sentiment
/// mass). Topics with zero base mass are skipped; an empty list scores 0.
pub fn coverage(list: &[Message], base: &MessageBase) -> f64 {
    let mut total = 0.0;
    let mut n = 0usize;
    for (topic, sentiments) in by_topic(list) {
        let Some(pool) = base.topic_sentiment_sum(topic) else {
            continue;
        };
        if pool == 0.0 {
            continue;
        }
        total += sentiments.iter().sum::<f64>() / pool;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        total / n as f64
    }
}

/// Mean over topics of `(count − distinct sentiments) / count`.
pub fn repetition_rate(list: &[Message]) -> f64 {
    let groups = by_topic(list);
    if groups.is_empty() {
        return 0.0;
    }
    let sum: f64 = groups
        .values()
        .map(|s| {
            let distinct: HashSet<u64> = s.iter().map(|x| x.to_bits()).collect();
            (s.len() - distinct.len()) as f64 / s.len() as f64
        })
        .sum();
    sum / groups.len() as f64
}

pub fn precision_and_hit(decisions: &[Decision]) -> Result<(f64, u8)> {
    if decisions.is_empty() {
        return Err(MetricsError::EmptyDecisions);
    }
    let accepted = decisions.iter().filter(|d| d.accepted).count();
    Ok((accepted as f64 / decisions.len() as f64, u8::from(accepted > 0)))
}

pub fn round_best_diff(list: &[Message]) -> Result<BTreeMap<String, f64>> {
    by_topic(list)
        .into_iter()
        .map(|(topic, s)| Ok((topic.to_string(), yinyang::best_diff(&s)?)))
        .collect()
}

pub fn round_metrics(final_list: &[Message], decisions: &[Decision], base: &MessageBase) -> Result<RoundMetrics> {
    let (pre, hit) = precision_and_hit(decisions)?;
    let per_topic = round_best_diff(final_list)?;
    let best_diff_mean = if per_topic.is_empty() {
        0.0
    } else {
        per_topic.values().sum::<f64>() / per_topic.len() as f64
    };
    Ok(RoundMetrics {
        coverage: coverage(final_list, base),
        rr: repetition_rate(final_list),
        pre,
        hit,
        best_diff_per_topic: per_topic,
        best_diff_mean,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self { mean, std: var.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rounds: usize,
    pub coverage: Stat,
    pub rr: Stat,
    pub pre: Stat,
    pub hit: Stat,
    pub best_diff: Stat,
}

pub fn aggregate(reports: &[RoundMetrics]) -> Result<Summary> {
    if reports.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let col = |f: fn(&RoundMetrics) -> f64| Stat::of(&reports.iter().map(f).collect::<Vec<_>>());
    Ok(Summary {
        rounds: reports.len(),
        coverage: col(|r| r.coverage),
        rr: col(|r| r.rr),
        pre: col(|r| r.pre),
        hit: col(|r| f64::from(r.hit)),
        best_diff: col(|r| r.best_diff_mean),
    })
}

/// `(new − old) / old · 100`, undefined when `old` is 0.
pub fn delta_percent(old: f64, new: f64) -> Option<f64> {
    if old == 0.0 {
        None
    } else {
        Some((new - old) / old * 100.0)
    }
}

/// Percentage change of each metric mean against a baseline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaBlock {
    pub coverage: Option<f64>,
    pub rr: Option<f64>,
    pub pre: Option<f64>,
    pub hit: Option<f64>,
    pub best_diff: Option<f64>,
}

pub fn compare(baseline: &Summary, new: &Summary) -> DeltaBlock {
    DeltaBlock {
        coverage: delta_percent(baseline.coverage.mean, new.coverage.mean),
        rr: delta_percent(baseline.rr.mean, new.rr.mean),
        pre: delta_percent(baseline.pre.mean, new.pre.mean),
        hit: delta_percent(baseline.hit.mean, new.hit.mean),
        best_diff: delta_percent(baseline.best_diff.mean, new.best_diff.mean),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(id: &str, topic: &str, s: f64) -> Message {
        Message::new(id, id, topic, s, vec![1.0, 0.0])
    }

    fn decisions(accepted: usize, total: usize) -> Vec<Decision> {
        (0..total)
            .map(|i| Decision {
                message_id: format!("m{i}"),
                accepted: i < accepted,
            })
            .collect()
    }

    #[test]
    fn coverage_examples() {
        let msgs = vec![m("a", "t", 0.2), m("b", "t", 0.8), m("c", "t", 1.0), m("d", "u", 0.4)];
        let base = MessageBase::from_messages(msgs.clone()).unwrap();
        assert!((coverage(&msgs, &base) - 1.0).abs() < 1e-12);
        assert!((coverage(&msgs[..1], &base) - 0.1).abs() < 1e-12);
        assert_eq!(coverage(&[], &base), 0.0);

        let zero = MessageBase::from_messages(vec![m("z", "z", 0.0), m("a", "t", 0.5)]).unwrap();
        assert_eq!(coverage(&[m("z", "z", 0.0), m("a", "t", 0.5)], &zero), 1.0);
    }

    #[test]
    fn repetition_examples() {
        assert_eq!(repetition_rate(&[m("a", "t", 0.1), m("b", "t", 0.2)]), 0.0);
        let triple = [m("a", "t", 0.7), m("b", "t", 0.7), m("c", "t", 0.7)];
        assert!((repetition_rate(&triple) - 2.0 / 3.0).abs() < 1e-15);
        let mixed = [m("a", "t", 0.1), m("b", "t", 0.2), m("c", "u", 0.3), m("d", "u", 0.3)];
        assert!((repetition_rate(&mixed) - 0.25).abs() < 1e-15);
        assert_eq!(repetition_rate(&[]), 0.0);
    }

    #[test]
    fn precision_examples() {
        assert_eq!(precision_and_hit(&decisions(5, 10)).unwrap(), (0.5, 1));
        assert_eq!(precision_and_hit(&decisions(0, 10)).unwrap(), (0.0, 0));
        assert_eq!(precision_and_hit(&decisions(10, 10)).unwrap(), (1.0, 1));
        assert_eq!(precision_and_hit(&[]), Err(MetricsError::EmptyDecisions));
    }

    #[test]
    fn best_diff_examples() {
        let bd = round_best_diff(&[m("a", "t", 0.2), m("b", "t", 0.74)]).unwrap();
        assert!(bd["t"] < 1e-12);
        let bd = round_best_diff(&[m("a", "t", 0.9)]).unwrap();
        assert_eq!(bd["t"], 0.9);
        assert!(!bd.contains_key("u"));
    }

    fn metrics(coverage: f64, pre: f64) -> RoundMetrics {
        RoundMetrics {
            coverage,
            rr: 0.1,
            pre,
            hit: 1,
            best_diff_per_topic: BTreeMap::new(),
            best_diff_mean: 0.3,
        }
    }

    #[test]
    fn aggregate_examples() {
        let s = aggregate(&[metrics(0.2, 0.5), metrics(0.2, 0.5)]).unwrap();
        assert_eq!(s.coverage.std, 0.0);
        assert_eq!(s.pre.std, 0.0);

        let s = aggregate(&[metrics(0.1, 0.4), metrics(0.1, 0.6)]).unwrap();
        assert!((s.pre.mean - 0.5).abs() < 1e-15);

        let one = metrics(0.25, 0.75);
        let s = aggregate(std::slice::from_ref(&one)).unwrap();
        assert_eq!((s.coverage.mean, s.pre.mean, s.rr.mean), (0.25, 0.75, 0.1));
        assert_eq!((s.hit.mean, s.best_diff.mean), (1.0, 0.3));

        assert_eq!(aggregate(&[]), Err(MetricsError::EmptyInput));
    }

    #[test]
    fn delta_examples() {
        let d = delta_percent(0.0009, 0.0012).unwrap();
        assert!((d - 33.333333333333336).abs() < 1e-9);
        assert_eq!(delta_percent(0.0, 1.0), None);
    }
}
