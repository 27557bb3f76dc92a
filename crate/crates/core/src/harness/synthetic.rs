//! Deterministic synthetic corpora.
//!
//! Every topic gets its own vocabulary so hash embeddings group by topic, and
//! a polarity vocabulary so Yin and Yang messages of a topic differ in text.
//! Polarity counts follow the mix exactly (largest-remainder allocation);
//! only which ids receive which polarity and the sentiment values within a
//! band are drawn from the seed.

use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::corpus::MessageRecord;
use crate::seed;
use crate::yinyang::Polarity;

const YANG_WORDS: &[&str] = &[
    "great", "hopeful", "win", "praise", "strong", "bright", "gain", "success", "thrive", "celebrate",
];
const YIN_WORDS: &[&str] = &[
    "crisis", "fear", "loss", "fail", "weak", "grim", "decline", "scandal", "collapse", "blame",
];
const NEUTRAL_WORDS: &[&str] = &["report", "update", "notes", "summary", "review"];
const TOPIC_VOCAB: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SentimentMix {
    pub yin: f64,
    pub neutral: f64,
    pub yang: f64,
}

impl Default for SentimentMix {
    fn default() -> Self {
        Self {
            yin: 0.5,
            neutral: 0.0,
            yang: 0.5,
        }
    }
}

impl SentimentMix {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let parts = [self.yin, self.neutral, self.yang];
        let sum: f64 = parts.iter().sum();
        if parts.iter().any(|p| p.is_nan() || *p < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(HarnessError::BadMix(format!(
                "yin {} + neutral {} + yang {} = {sum}, expected 1",
                self.yin, self.neutral, self.yang
            )));
        }
        Ok(())
    }

    /// Exact polarity counts for `n` messages: floors first, then the
    /// leftover units to the largest fractional parts (ties yin, neutral, yang).
    pub fn allocate(&self, n: usize) -> [usize; 3] {
        let shares = [self.yin, self.neutral, self.yang].map(|p| p * n as f64);
        let mut counts = shares.map(|s| s.floor() as usize);
        let mut left = n.saturating_sub(counts.iter().sum());
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| {
            let fa = shares[a] - shares[a].floor();
            let fb = shares[b] - shares[b].floor();
            fb.total_cmp(&fa).then(a.cmp(&b))
        });
        for &i in order.iter().cycle() {
            if left == 0 {
                break;
            }
            if shares[i] > 0.0 {
                counts[i] += 1;
                left -= 1;
            }
        }
        counts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticTopic {
    pub name: String,
    /// Overrides the corpus-wide mix for this topic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mix: Option<SentimentMix>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub topics: Vec<SyntheticTopic>,
    pub messages_per_topic: usize,
    #[serde(default)]
    pub sentiment_mix: SentimentMix,
    #[serde(default)]
    pub seed: u64,
}

impl SyntheticSpec {
    /// `n_topics` topics named `topic0..`, the first one `yang_bias` Yang and
    /// the rest evenly split.
    pub fn biased(n_topics: usize, messages_per_topic: usize, yang_bias: f64, seed: u64) -> Self {
        let topics = (0..n_topics)
            .map(|i| SyntheticTopic {
                name: format!("topic{i}"),
                mix: (i == 0).then_some(SentimentMix {
                    yin: 1.0 - yang_bias,
                    neutral: 0.0,
                    yang: yang_bias,
                }),
            })
            .collect();
        Self {
            topics,
            messages_per_topic,
            sentiment_mix: SentimentMix::default(),
            seed,
        }
    }
}

fn sentiment_for(polarity: Polarity, rng: &mut ChaCha8Rng) -> f64 {
    let hundredths: u32 = match polarity {
        Polarity::Yin => rng.gen_range(1..=49),
        Polarity::Neutral => 50,
        Polarity::Yang => rng.gen_range(51..=99),
    };
    f64::from(hundredths) / 100.0
}

fn text_for(topic: &str, polarity: Polarity, sentiment: f64, rng: &mut ChaCha8Rng) -> String {
    let slug: String = topic
        .chars()
        .filter(|c| c.is_alphanumeric())
        .collect::<String>()
        .to_lowercase();
    let slug = if slug.is_empty() { "topic".to_string() } else { slug };
    let mut words: Vec<String> = vec![slug.clone()];
    for _ in 0..4 {
        words.push(format!("{slug}w{}", rng.gen_range(0..TOPIC_VOCAB)));
    }
    let pool = match polarity {
        Polarity::Yin => YIN_WORDS,
        Polarity::Neutral => NEUTRAL_WORDS,
        Polarity::Yang => YANG_WORDS,
    };
    // more extreme messages carry more charged words
    let charged = 1 + ((sentiment - 0.5).abs() * 6.0).round() as usize;
    for _ in 0..charged {
        words.push(pool.choose(rng).unwrap().to_string());
    }
    words.shuffle(rng);
    words.join(" ")
}

pub fn generate(spec: &SyntheticSpec) -> Result<Vec<MessageRecord>, HarnessError> {
    if spec.messages_per_topic < 2 {
        return Err(HarnessError::Config("messages_per_topic must be at least 2".into()));
    }
    if spec.topics.is_empty() {
        return Err(HarnessError::Config("no topics".into()));
    }
    spec.sentiment_mix.validate()?;
    let mut out = Vec::with_capacity(spec.topics.len() * spec.messages_per_topic);
    for (ti, topic) in spec.topics.iter().enumerate() {
        let mix = topic.mix.unwrap_or(spec.sentiment_mix);
        mix.validate()?;
        let [yin, neutral, yang] = mix.allocate(spec.messages_per_topic);
        let mut polarities: Vec<Polarity> = std::iter::repeat_n(Polarity::Yin, yin)
            .chain(std::iter::repeat_n(Polarity::Neutral, neutral))
            .chain(std::iter::repeat_n(Polarity::Yang, yang))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(spec.seed, &[topic.name.as_bytes()]));
        polarities.shuffle(&mut rng);
        for (i, polarity) in polarities.into_iter().enumerate() {
            let sentiment = sentiment_for(polarity, &mut rng);
            out.push(MessageRecord {
                id: format!("t{ti}m{i:04}"),
                text: text_for(&topic.name, polarity, sentiment, &mut rng),
                topic: topic.name.clone(),
                sentiment,
            });
        }
    }
    Ok(out)
}

pub fn write_jsonl(records: &[MessageRecord], path: &Path) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Generates and writes a corpus to `path`.
pub fn generate_synthetic_corpus(spec: &SyntheticSpec, path: &Path) -> Result<usize, HarnessError> {
    let records = generate(spec)?;
    write_jsonl(&records, path)?;
    Ok(records.len())
}
