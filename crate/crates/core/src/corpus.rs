//! Message corpora: loading, deterministic embeddings and indexed lookups
//! over the information message base.
//!
//! A [`MessageBase`] is immutable once built. Besides the messages it keeps a
//! per-topic id index, a per-topic sentiment-sorted index used by complement
//! search, and the mean embedding of every topic.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed::{fnv1a64, mix64};
use crate::vector;

/// Magic bytes opening a serialized embedding matrix.
pub const EMBEDDINGS_MAGIC: &[u8; 8] = b"ABINEMB1";
pub const MESSAGES_FILE: &str = "messages.jsonl";
pub const EMBEDDINGS_FILE: &str = "embeddings.bin";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed record at line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("duplicate message id {0:?}")]
    DuplicateId(String),
    #[error("sentiment of message {0:?} is outside [0, 1]")]
    SentimentOutOfRange(String),
    #[error("text has no tokens")]
    EmptyText,
    #[error("embedding dimension must be at least 2, got {0}")]
    BadDimension(usize),
    #[error("unknown topic {0:?}")]
    UnknownTopic(String),
    #[error("message {id:?} has embedding of length {got}, expected {expected}")]
    DimensionMismatch { id: String, expected: usize, got: usize },
    #[error("bad embeddings file: {0}")]
    BadEmbeddingFile(String),
}

pub type Result<T, E = CorpusError> = std::result::Result<T, E>;

/// A recommendable item.
///
/// Embeddings are held as `f64` but rounded through `f32` on construction so
/// that the on-disk matrix (32-bit floats) reproduces them bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub id: String,
    pub text: String,
    pub topic: String,
    pub sentiment: f64,
    pub embedding: Vec<f64>,
}

impl Message {
    pub fn new(
        id: impl Into<String>,
        text: impl Into<String>,
        topic: impl Into<String>,
        sentiment: f64,
        embedding: Vec<f64>,
    ) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
            topic: topic.into(),
            sentiment,
            embedding: embedding.into_iter().map(|x| x as f32 as f64).collect(),
        }
    }
}

/// One line of a JSONL corpus, or one row of a CSV corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageRecord {
    pub id: String,
    pub text: String,
    pub topic: String,
    pub sentiment: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Jsonl,
    Csv,
}

impl CorpusFormat {
    /// Guesses the format from a file extension, defaulting to JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => CorpusFormat::Csv,
            _ => CorpusFormat::Jsonl,
        }
    }
}

impl std::str::FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "json" => Ok(CorpusFormat::Jsonl),
            "csv" => Ok(CorpusFormat::Csv),
            other => Err(format!("unknown corpus format {other:?}")),
        }
    }
}

/// Source of message embeddings.
pub trait EmbeddingProvider: Send + Sync {
    fn dim(&self) -> usize;
    fn embed(&self, text: &str, topic: &str) -> Result<Vec<f64>>;
}

/// Signed feature hashing of lowercased alphanumeric tokens, plus one
/// feature for the topic label, L2-normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashEmbedder {
    pub dim: usize,
    pub seed: u64,
}

impl HashEmbedder {
    pub fn new(dim: usize, seed: u64) -> Result<Self> {
        if dim < 2 {
            return Err(CorpusError::BadDimension(dim));
        }
        Ok(Self { dim, seed })
    }
}

impl EmbeddingProvider for HashEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str, topic: &str) -> Result<Vec<f64>> {
        embed(text, topic, self.dim, self.seed)
    }
}

pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

fn add_feature(v: &mut [f64], seed: u64, feature: &str) {
    let h = fnv1a64(seed, feature.as_bytes());
    let idx = (h % v.len() as u64) as usize;
    let sign = if mix64(h) >> 63 == 1 { -1.0 } else { 1.0 };
    v[idx] += sign;
}

/// Deterministic hash embedding of `text` under `topic`.
pub fn embed(text: &str, topic: &str, dim: usize, seed: u64) -> Result<Vec<f64>> {
    if dim < 2 {
        return Err(CorpusError::BadDimension(dim));
    }
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return Err(CorpusError::EmptyText);
    }
    let mut v = vec![0.0; dim];
    for token in &tokens {
        add_feature(&mut v, seed, token);
    }
    if !topic.is_empty() {
        add_feature(&mut v, seed, &format!("\u{1}topic:{}", topic.to_lowercase()));
    }
    if !vector::l2_normalize(&mut v) {
        // Every feature cancelled out; fall back to the unsigned histogram.
        v.iter_mut().for_each(|x| *x = 0.0);
        for token in &tokens {
            let h = fnv1a64(seed, token.as_bytes());
            v[(h % dim as u64) as usize] += 1.0;
        }
        vector::l2_normalize(&mut v);
    }
    Ok(v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicEmbedding {
    pub topic: String,
    pub vector: Vec<f64>,
}

/// The full pool of candidate messages.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageBase {
    dim: usize,
    messages: Vec<Message>,
    by_id: HashMap<String, usize>,
    topic_index: BTreeMap<String, Vec<usize>>,
    sentiment_index: BTreeMap<String, Vec<usize>>,
    topic_embeddings: BTreeMap<String, Vec<f64>>,
    topic_sentiment_sums: BTreeMap<String, f64>,
}

impl MessageBase {
    /// Builds all indexes over `messages`, which keep their given order.
    pub fn from_messages(messages: Vec<Message>) -> Result<Self> {
        let dim = messages.first().map_or(0, |m| m.embedding.len());
        let mut by_id = HashMap::with_capacity(messages.len());
        let mut topic_index: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, m) in messages.iter().enumerate() {
            if !(0.0..=1.0).contains(&m.sentiment) {
                return Err(CorpusError::SentimentOutOfRange(m.id.clone()));
            }
            if m.embedding.len() != dim {
                return Err(CorpusError::DimensionMismatch {
                    id: m.id.clone(),
                    expected: dim,
                    got: m.embedding.len(),
                });
            }
            if by_id.insert(m.id.clone(), i).is_some() {
                return Err(CorpusError::DuplicateId(m.id.clone()));
            }
            topic_index.entry(m.topic.clone()).or_default().push(i);
        }

        let mut sentiment_index = BTreeMap::new();
        let mut topic_embeddings = BTreeMap::new();
        let mut topic_sentiment_sums = BTreeMap::new();
        for (topic, idxs) in &topic_index {
            let mut sorted = idxs.clone();
            sorted.sort_by(|&a, &b| {
                messages[a]
                    .sentiment
                    .total_cmp(&messages[b].sentiment)
                    .then_with(|| messages[a].id.cmp(&messages[b].id))
            });
            sentiment_index.insert(topic.clone(), sorted);
            let centroid = vector::mean(idxs.iter().map(|&i| messages[i].embedding.as_slice()), dim);
            topic_embeddings.insert(topic.clone(), centroid);
            let sum: f64 = idxs.iter().map(|&i| messages[i].sentiment).sum();
            topic_sentiment_sums.insert(topic.clone(), sum);
        }

        Ok(Self {
            dim,
            messages,
            by_id,
            topic_index,
            sentiment_index,
            topic_embeddings,
            topic_sentiment_sums,
        })
    }

    /// Reads a JSONL or CSV corpus and embeds every record.
    pub fn ingest(path: &Path, format: CorpusFormat, embedder: &dyn EmbeddingProvider) -> Result<Self> {
        let file = File::open(path)?;
        Self::ingest_reader(BufReader::new(file), format, embedder)
    }

    pub fn ingest_reader<R: BufRead>(
        reader: R,
        format: CorpusFormat,
        embedder: &dyn EmbeddingProvider,
    ) -> Result<Self> {
        let records = match format {
            CorpusFormat::Jsonl => read_jsonl(reader)?,
            CorpusFormat::Csv => read_csv(reader)?,
        };
        let mut messages = Vec::with_capacity(records.len());
        for (line, rec) in records {
            if !(0.0..=1.0).contains(&rec.sentiment) {
                return Err(CorpusError::SentimentOutOfRange(rec.id));
            }
            let embedding = embedder.embed(&rec.text, &rec.topic).map_err(|e| match e {
                CorpusError::EmptyText => CorpusError::MalformedRecord {
                    line,
                    reason: format!("text of {:?} has no tokens", rec.id),
                },
                other => other,
            })?;
            messages.push(Message::new(rec.id, rec.text, rec.topic, rec.sentiment, embedding));
        }
        Self::from_messages(messages)
    }

    /// Writes `messages.jsonl` and `embeddings.bin` into `dir`.
    pub fn save_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut out = BufWriter::new(File::create(dir.join(MESSAGES_FILE))?);
        for m in &self.messages {
            let rec = MessageRecord {
                id: m.id.clone(),
                text: m.text.clone(),
                topic: m.topic.clone(),
                sentiment: m.sentiment,
            };
            serde_json::to_writer(&mut out, &rec).map_err(std::io::Error::from)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;

        let mut out = BufWriter::new(File::create(dir.join(EMBEDDINGS_FILE))?);
        out.write_all(EMBEDDINGS_MAGIC)?;
        out.write_all(&(self.messages.len() as u32).to_le_bytes())?;
        out.write_all(&(self.dim as u32).to_le_bytes())?;
        for m in &self.messages {
            for &x in &m.embedding {
                out.write_all(&(x as f32).to_le_bytes())?;
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Loads a base previously written by [`MessageBase::save_dir`].
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let records = read_jsonl(BufReader::new(File::open(dir.join(MESSAGES_FILE))?))?;
        let mut bytes = Vec::new();
        File::open(dir.join(EMBEDDINGS_FILE))?.read_to_end(&mut bytes)?;
        if bytes.len() < 16 || &bytes[..8] != EMBEDDINGS_MAGIC {
            return Err(CorpusError::BadEmbeddingFile("missing ABINEMB1 header".into()));
        }
        let count = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let dim = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
        if count != records.len() {
            return Err(CorpusError::BadEmbeddingFile(format!(
                "header count {count} but {} messages",
                records.len()
            )));
        }
        if bytes.len() != 16 + 4 * count * dim {
            return Err(CorpusError::BadEmbeddingFile(format!(
                "expected {} payload bytes, found {}",
                4 * count * dim,
                bytes.len() - 16
            )));
        }
        let floats: Vec<f64> = bytes[16..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect();
        let messages = records
            .into_iter()
            .zip(floats.chunks(dim.max(1)))
            .map(|((_, r), emb)| Message::new(r.id, r.text, r.topic, r.sentiment, emb.to_vec()))
            .collect();
        Self::from_messages(messages)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn get(&self, id: &str) -> Option<&Message> {
        self.by_id.get(id).map(|&i| &self.messages[i])
    }

    pub fn topics(&self) -> impl Iterator<Item = &str> {
        self.topic_index.keys().map(String::as_str)
    }

    pub fn has_topic(&self, topic: &str) -> bool {
        self.topic_index.contains_key(topic)
    }

    /// Messages tagged `topic`, in base order.
    pub fn topic_messages(&self, topic: &str) -> impl Iterator<Item = &Message> {
        self.topic_index
            .get(topic)
            .into_iter()
            .flatten()
            .map(|&i| &self.messages[i])
    }

    /// Messages tagged `topic`, sorted by sentiment then id.
    pub fn topic_by_sentiment(&self, topic: &str) -> impl Iterator<Item = &Message> {
        self.sentiment_index
            .get(topic)
            .into_iter()
            .flatten()
            .map(|&i| &self.messages[i])
    }

    /// Sorted sentiment values of one topic, duplicates kept.
    pub fn sentiment_pool(&self, topic: &str) -> Vec<f64> {
        self.topic_by_sentiment(topic).map(|m| m.sentiment).collect()
    }

    pub fn topic_sentiment_sum(&self, topic: &str) -> Option<f64> {
        self.topic_sentiment_sums.get(topic).copied()
    }

    pub fn topic_embedding(&self, topic: &str) -> Result<TopicEmbedding> {
        self.topic_embeddings
            .get(topic)
            .map(|v| TopicEmbedding {
                topic: topic.to_string(),
                vector: v.clone(),
            })
            .ok_or_else(|| CorpusError::UnknownTopic(topic.to_string()))
    }

    /// Topic label → mean embedding, for every topic in the base.
    pub fn topic_embeddings(&self) -> &BTreeMap<String, Vec<f64>> {
        &self.topic_embeddings
    }

    /// Messages of `topic` whose sentiment lies within `eps` of `target`,
    /// nearest first, ties by id.
    pub fn find_candidates(&self, topic: &str, target: f64, eps: f64) -> Vec<&Message> {
        let Some(sorted) = self.sentiment_index.get(topic) else {
            return Vec::new();
        };
        let lo = target - eps;
        let hi = target + eps;
        let start = sorted.partition_point(|&i| self.messages[i].sentiment < lo);
        let mut out: Vec<&Message> = sorted[start..]
            .iter()
            .map(|&i| &self.messages[i])
            .take_while(|m| m.sentiment <= hi)
            .filter(|m| (m.sentiment - target).abs() <= eps)
            .collect();
        out.sort_by(|a, b| {
            (a.sentiment - target)
                .abs()
                .total_cmp(&(b.sentiment - target).abs())
                .then_with(|| a.id.cmp(&b.id))
        });
        out
    }
}

fn read_jsonl<R: BufRead>(reader: R) -> Result<Vec<(usize, MessageRecord)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: MessageRecord = serde_json::from_str(&line).map_err(|e| CorpusError::MalformedRecord {
            line: i + 1,
            reason: e.to_string(),
        })?;
        out.push((i + 1, rec));
    }
    Ok(out)
}

fn read_csv<R: Read>(reader: R) -> Result<Vec<(usize, MessageRecord)>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize::<MessageRecord>() {
        match row {
            Ok(rec) => {
                // header is line 1
                out.push((out.len() + 2, rec));
            }
            Err(e) => {
                let line = e.position().map_or(out.len() + 2, |p| p.line() as usize);
                return Err(CorpusError::MalformedRecord {
                    line,
                    reason: e.to_string(),
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn embedder() -> HashEmbedder {
        HashEmbedder::new(16, 7).unwrap()
    }

    fn jsonl(lines: &[&str]) -> Cursor<Vec<u8>> {
        Cursor::new(lines.join("\n").into_bytes())
    }

    fn msg(id: &str, topic: &str, sentiment: f64, embedding: Vec<f64>) -> Message {
        Message::new(id, id, topic, sentiment, embedding)
    }

    #[test]
    fn ingest_three_jsonl_records() {
        let input = jsonl(&[
            r#"{"id":"a","text":"rain again","topic":"weather","sentiment":0.2}"#,
            r#"{"id":"b","text":"sunny day","topic":"weather","sentiment":0.5}"#,
            r#"{"id":"c","text":"rates cut","topic":"economy","sentiment":0.9}"#,
        ]);
        let base = MessageBase::ingest_reader(input, CorpusFormat::Jsonl, &embedder()).unwrap();
        assert_eq!(base.len(), 3);
        assert_eq!(base.topics().collect::<Vec<_>>(), vec!["economy", "weather"]);
        assert_eq!(base.topic_messages("weather").count(), 2);
        assert_eq!(base.topic_messages("economy").count(), 1);
        assert_eq!(base.get("b").unwrap().sentiment, 0.5);
    }

    #[test]
    fn ingest_rejects_out_of_range_sentiment() {
        let input = jsonl(&[r#"{"id":"x","text":"too happy","topic":"t","sentiment":1.3}"#]);
        let err = MessageBase::ingest_reader(input, CorpusFormat::Jsonl, &embedder()).unwrap_err();
        assert!(matches!(err, CorpusError::SentimentOutOfRange(id) if id == "x"));
    }

    #[test]
    fn ingest_rejects_duplicate_ids() {
        let input = jsonl(&[
            r#"{"id":"m1","text":"one","topic":"t","sentiment":0.1}"#,
            r#"{"id":"m1","text":"two","topic":"t","sentiment":0.2}"#,
        ]);
        let err = MessageBase::ingest_reader(input, CorpusFormat::Jsonl, &embedder()).unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateId(id) if id == "m1"));
    }

    #[test]
    fn ingest_reports_malformed_line() {
        let input = jsonl(&[
            r#"{"id":"a","text":"ok","topic":"t","sentiment":0.1}"#,
            r#"{"id":"b","text":"bad","topic":"t","sentiment":"high"}"#,
        ]);
        let err = MessageBase::ingest_reader(input, CorpusFormat::Jsonl, &embedder()).unwrap_err();
        assert!(matches!(err, CorpusError::MalformedRecord { line: 2, .. }), "{err}");
    }

    #[test]
    fn ingest_csv() {
        let input = Cursor::new(
            b"id,text,topic,sentiment\na,\"hello, world\",t,0.25\nb,bye,u,0.75\n".to_vec(),
        );
        let base = MessageBase::ingest_reader(input, CorpusFormat::Csv, &embedder()).unwrap();
        assert_eq!(base.len(), 2);
        assert_eq!(base.get("a").unwrap().text, "hello, world");

        let bad = Cursor::new(b"id,text,topic,sentiment\na,x,t,nope\n".to_vec());
        let err = MessageBase::ingest_reader(bad, CorpusFormat::Csv, &embedder()).unwrap_err();
        assert!(matches!(err, CorpusError::MalformedRecord { line: 2, .. }), "{err}");
    }

    #[test]
    fn embed_is_deterministic_and_unit_norm() {
        let a = embed("a a", "t", 8, 7).unwrap();
        let b = embed("a a", "t", 8, 7).unwrap();
        assert_eq!(a, b);
        for text in ["a a", "Hello, World!", "x y z w"] {
            let v = embed(text, "t", 8, 7).unwrap();
            assert!((vector::norm(&v) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn embed_errors() {
        assert!(matches!(embed("  ,, ", "t", 8, 7), Err(CorpusError::EmptyText)));
        assert!(matches!(embed("x", "t", 1, 7), Err(CorpusError::BadDimension(1))));
    }

    #[test]
    fn embed_lowercases_and_strips_punctuation() {
        assert_eq!(embed("Cats, PURR!", "t", 32, 1).unwrap(), embed("cats purr", "t", 32, 1).unwrap());
    }

    #[test]
    fn topic_embedding_means() {
        let base = MessageBase::from_messages(vec![msg("a", "solo", 0.1, vec![0.6, 0.8])]).unwrap();
        let te = base.topic_embedding("solo").unwrap();
        assert_eq!(te.vector, vec![0.6f32 as f64, 0.8f32 as f64]);

        let base = MessageBase::from_messages(vec![
            msg("a", "pm", 0.1, vec![0.5, -0.25]),
            msg("b", "pm", 0.2, vec![-0.5, 0.25]),
        ])
        .unwrap();
        assert_eq!(base.topic_embedding("pm").unwrap().vector, vec![0.0, 0.0]);

        // (1,0,2), (0,3,1), (2,0,0) → (1, 1, 1)
        let base = MessageBase::from_messages(vec![
            msg("a", "t", 0.1, vec![1.0, 0.0, 2.0]),
            msg("b", "t", 0.2, vec![0.0, 3.0, 1.0]),
            msg("c", "t", 0.3, vec![2.0, 0.0, 0.0]),
        ])
        .unwrap();
        assert_eq!(base.topic_embedding("t").unwrap().vector, vec![1.0, 1.0, 1.0]);

        assert!(matches!(base.topic_embedding("nope"), Err(CorpusError::UnknownTopic(_))));
    }

    fn pool_base(sentiments: &[f64]) -> MessageBase {
        let mut msgs: Vec<Message> = sentiments
            .iter()
            .enumerate()
            .map(|(i, &s)| msg(&format!("m{i}"), "t", s, vec![1.0, 0.0]))
            .collect();
        msgs.push(msg("other", "u", 0.035, vec![0.0, 1.0]));
        MessageBase::from_messages(msgs).unwrap()
    }

    #[test]
    fn find_candidates_exact_match() {
        let base = pool_base(&[0.035, 0.2, 0.035, 0.036]);
        let ids: Vec<_> = base.find_candidates("t", 0.035, 0.0).iter().map(|m| m.id.clone()).collect();
        assert_eq!(ids, vec!["m0", "m2"]);
    }

    #[test]
    fn find_candidates_windows() {
        let base = pool_base(&[0.30, 0.34, 0.40]);
        assert_eq!(base.find_candidates("t", 0.5, 1.0).len(), 3);
        let hits: Vec<f64> = base.find_candidates("t", 0.33, 0.02).iter().map(|m| m.sentiment).collect();
        assert_eq!(hits, vec![0.34]);
        assert!(base.find_candidates("missing", 0.3, 1.0).is_empty());
    }

    #[test]
    fn sentiment_index_is_sorted() {
        let base = pool_base(&[0.9, 0.1, 0.5, 0.1]);
        let pool = base.sentiment_pool("t");
        assert!(pool.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(pool.len(), 4);
    }

    #[test]
    fn from_messages_checks_dimensions() {
        let err = MessageBase::from_messages(vec![
            msg("a", "t", 0.1, vec![1.0, 0.0]),
            msg("b", "t", 0.1, vec![1.0]),
        ])
        .unwrap_err();
        assert!(matches!(err, CorpusError::DimensionMismatch { .. }));
    }

    #[test]
    fn load_dir_rejects_bad_header() {
        let dir = tempfile::tempdir().unwrap();
        let base = pool_base(&[0.1]);
        base.save_dir(dir.path()).unwrap();
        fs::write(dir.path().join(EMBEDDINGS_FILE), b"NOTMAGIC\0\0\0\0\0\0\0\0").unwrap();
        assert!(matches!(
            MessageBase::load_dir(dir.path()),
            Err(CorpusError::BadEmbeddingFile(_))
        ));
    }
}
