//! Yin-Yang neutralization geometry.
//!
//! The S-curve `f(o) = 1/2 + (1 − 2o)·sqrt(1/4 − (o − 1/2)²)` maps a sentiment
//! to its ideal complement. Around each point `(o, f(o))` a tolerance circle
//! is drawn whose radius is the shorter vertical distance to the outer circle
//! (center `(0.5, 0.5)`, radius `0.5`), giving `2·s·min(o, 1 − o)` with
//! `s = sqrt(1/4 − (o − 1/2)²)`. Extreme sentiments get narrow windows,
//! moderate ones wide windows.
//!
//! [`if_balance`] greedily pairs a topic's sentiments inside those windows and
//! [`find_match_scores`] looks up complements for whatever is left over.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const NEUTRAL: f64 = 0.5;
/// Scores within this distance of 0.5 classify as neutral.
pub const NEUTRAL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum YinYangError {
    #[error("sentiment {0} is outside [0, 1]")]
    Domain(f64),
    #[error("complement pool is empty")]
    EmptyPool,
    #[error("tolerance {0} is outside (0, 1]")]
    BadTolerance(f64),
}

pub type Result<T, E = YinYangError> = std::result::Result<T, E>;

fn check(o: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&o) {
        Ok(o)
    } else {
        Err(YinYangError::Domain(o))
    }
}

fn half_chord(o: f64) -> f64 {
    let d = o - 0.5;
    (0.25 - d * d).max(0.0).sqrt()
}

/// The perfect-neutralization curve.
pub fn curve(o: f64) -> Result<f64> {
    let o = check(o)?;
    Ok(0.5 + (1.0 - 2.0 * o) * half_chord(o))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Yin,
    Neutral,
    Yang,
}

pub fn classify(o: f64) -> Result<Polarity> {
    let o = check(o)?;
    Ok(if (o - NEUTRAL).abs() <= NEUTRAL_EPS {
        Polarity::Neutral
    } else if o < NEUTRAL {
        Polarity::Yin
    } else {
        Polarity::Yang
    })
}

/// Accepted complement band for one sentiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceInterval {
    pub center_x: f64,
    pub center_y: f64,
    pub radius: f64,
    pub lo: f64,
    pub hi: f64,
}

impl ToleranceInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// The band grown by `by` on both sides, clamped to `[0, 1]`.
    pub fn widened(&self, by: f64) -> (f64, f64) {
        ((self.lo - by).max(0.0), (self.hi + by).min(1.0))
    }
}

pub fn tolerance_interval(o: f64) -> Result<ToleranceInterval> {
    let center_y = curve(o)?;
    let radius = 2.0 * half_chord(o) * o.min(1.0 - o);
    Ok(ToleranceInterval {
        center_x: o,
        center_y,
        radius,
        lo: (center_y - radius).max(0.0),
        hi: (center_y + radius).min(1.0),
    })
}

/// Sentiment scores of the messages of one topic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentList {
    pub topic: String,
    pub scores: Vec<f64>,
}

impl SentimentList {
    pub fn new(topic: impl Into<String>, scores: Vec<f64>) -> Result<Self> {
        for &s in &scores {
            check(s)?;
        }
        Ok(Self {
            topic: topic.into(),
            scores,
        })
    }

    pub fn if_balance(&self) -> Result<PairingResult> {
        if_balance(&self.scores)
    }

    pub fn best_diff(&self) -> Result<f64> {
        best_diff(&self.scores)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PairingResult {
    pub pairs: Vec<(f64, f64)>,
    pub remain: Vec<f64>,
}

impl PairingResult {
    pub fn is_neutralized(&self) -> bool {
        self.remain.is_empty()
    }
}

/// Most extreme first; equal extremity puts the smaller value first.
fn extremity_order(a: f64, b: f64) -> Ordering {
    (b - NEUTRAL)
        .abs()
        .total_cmp(&(a - NEUTRAL).abs())
        .then_with(|| a.total_cmp(&b))
}

/// Closest to `center` wins, ties to the smaller value.
fn closer_to(center: f64, a: f64, b: f64) -> Ordering {
    (a - center)
        .abs()
        .total_cmp(&(b - center).abs())
        .then_with(|| a.total_cmp(&b))
}

/// Greedy extremity-first pairing of a topic's sentiments.
pub fn if_balance(scores: &[f64]) -> Result<PairingResult> {
    for &s in scores {
        check(s)?;
    }
    let mut pending: Vec<f64> = scores.to_vec();
    pending.sort_by(|a, b| extremity_order(*a, *b));

    let mut out = PairingResult::default();
    let mut consumed = vec![false; pending.len()];
    for i in 0..pending.len() {
        if consumed[i] {
            continue;
        }
        consumed[i] = true;
        let o = pending[i];
        let interval = tolerance_interval(o)?;
        let partner = (i + 1..pending.len())
            .filter(|&j| !consumed[j] && interval.contains(pending[j]))
            .min_by(|&a, &b| closer_to(interval.center_y, pending[a], pending[b]));
        match partner {
            Some(j) => {
                consumed[j] = true;
                out.pairs.push((o, pending[j]));
            }
            None => out.remain.push(o),
        }
    }
    Ok(out)
}

/// A complement found for one unpaired sentiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplementMatch {
    pub source: f64,
    pub value: f64,
    /// Number of `tol` steps the window was grown before a hit.
    pub widenings: u32,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MatchOutcome {
    pub matches: Vec<ComplementMatch>,
    /// Sources with no complement even in the full `[0, 1]` window.
    pub unmatched: Vec<f64>,
}

impl MatchOutcome {
    pub fn complements(&self) -> Vec<f64> {
        self.matches.iter().map(|m| m.value).collect()
    }
}

/// Upper bound on window growth steps for a given `tol`.
pub fn max_widenings(tol: f64) -> u32 {
    (1.0 / tol).ceil() as u32
}

/// Looks up a complement in `pool` for every unpaired score in `remain`.
///
/// The window starts at the tolerance interval and grows symmetrically by
/// `tol` per step (clamped to `[0, 1]`), at most `ceil(1/tol)` times. Pool
/// values may be reused.
pub fn find_match_scores(remain: &[f64], pool: &[f64], tol: f64) -> Result<MatchOutcome> {
    if !(tol > 0.0 && tol <= 1.0) {
        return Err(YinYangError::BadTolerance(tol));
    }
    if pool.is_empty() {
        return Err(YinYangError::EmptyPool);
    }
    for &p in pool {
        check(p)?;
    }
    let steps = max_widenings(tol);
    let mut out = MatchOutcome::default();
    for &r in remain {
        let interval = tolerance_interval(r)?;
        let mut found = None;
        for step in 0..=steps {
            let (lo, hi) = interval.widened(step as f64 * tol);
            let best = pool
                .iter()
                .copied()
                .filter(|&p| lo <= p && p <= hi)
                .min_by(|&a, &b| closer_to(interval.center_y, a, b));
            if let Some(value) = best {
                found = Some(ComplementMatch {
                    source: r,
                    value,
                    widenings: step,
                    lo,
                    hi,
                });
                break;
            }
        }
        match found {
            Some(m) => out.matches.push(m),
            None => out.unmatched.push(r),
        }
    }
    Ok(out)
}

/// `|Σ f(yin or neutral) − Σ yang|` over one topic's scores.
pub fn best_diff(scores: &[f64]) -> Result<f64> {
    let mut curve_side = 0.0;
    let mut yang_side = 0.0;
    for &o in scores {
        match classify(o)? {
            Polarity::Yin | Polarity::Neutral => curve_side += curve(o)?,
            Polarity::Yang => yang_side += o,
        }
    }
    Ok((curve_side - yang_side).abs())
}
