//! Newline-delimited JSON bridge to an out-of-process recommender.
//!
//! Each call writes one request line and reads one response line:
//!
//! ```text
//! → {"user_id":"u1","k":10,"exclude":["m3","m9"]}
//! ← {"message_ids":["m4","m1"]}
//! ```
//!
//! Feedback is forwarded as a line `{"user_id":..,"decisions":[..]}` that
//! expects no reply.

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use serde::{Deserialize, Serialize};

use super::{AgentError, Decision, Recommendation, Recommender, Result, UserState};
use crate::corpus::MessageBase;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdapterRequest {
    pub user_id: String,
    pub k: usize,
    pub exclude: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdapterResponse {
    pub message_ids: Vec<String>,
}

#[derive(Serialize)]
struct FeedbackLine<'a> {
    user_id: &'a str,
    decisions: &'a [Decision],
}

pub struct NdjsonRecommender<R, W> {
    reader: R,
    writer: W,
    send_feedback: bool,
    child: Option<Child>,
}

impl<R: BufRead, W: Write> NdjsonRecommender<R, W> {
    pub fn new(reader: R, writer: W) -> Self {
        Self {
            reader,
            writer,
            send_feedback: false,
            child: None,
        }
    }

    /// Also forward UA decisions after every round.
    pub fn with_feedback(mut self, on: bool) -> Self {
        self.send_feedback = on;
        self
    }

    fn send<T: Serialize>(&mut self, value: &T) -> Result<()> {
        let line = serde_json::to_string(value).map_err(|e| AgentError::Adapter(e.to_string()))?;
        writeln!(self.writer, "{line}")
            .and_then(|_| self.writer.flush())
            .map_err(|e| AgentError::Adapter(e.to_string()))
    }
}

impl NdjsonRecommender<BufReader<ChildStdout>, ChildStdin> {
    /// Spawns `program` and talks to it over its stdin and stdout.
    pub fn spawn(program: &str, args: &[String]) -> Result<Self> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| AgentError::Adapter(format!("spawning {program}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let mut this = Self::new(BufReader::new(stdout), stdin);
        this.child = Some(child);
        Ok(this)
    }
}

impl<R, W> Drop for NdjsonRecommender<R, W> {
    fn drop(&mut self) {
        if let Some(child) = self.child.as_mut() {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

impl<R: BufRead + Send, W: Write + Send> Recommender for NdjsonRecommender<R, W> {
    fn recommend(
        &mut self,
        user: &UserState,
        base: &MessageBase,
        k: usize,
        exclude: &HashSet<String>,
    ) -> Result<Recommendation> {
        let mut excluded: Vec<String> = exclude.iter().cloned().collect();
        excluded.sort();
        self.send(&AdapterRequest {
            user_id: user.id.clone(),
            k,
            exclude: excluded,
        })?;
        let mut line = String::new();
        let n = self
            .reader
            .read_line(&mut line)
            .map_err(|e| AgentError::Adapter(e.to_string()))?;
        if n == 0 {
            return Err(AgentError::Adapter("recommender closed its output".into()));
        }
        let resp: AdapterResponse =
            serde_json::from_str(line.trim_end()).map_err(|e| AgentError::Adapter(format!("bad response: {e}")))?;

        let mut seen = HashSet::new();
        let mut messages = Vec::new();
        for id in resp.message_ids {
            if exclude.contains(&id) || !seen.insert(id.clone()) {
                continue;
            }
            let m = base
                .get(&id)
                .ok_or_else(|| AgentError::Adapter(format!("unknown message id {id:?}")))?;
            messages.push(m.clone());
            if messages.len() == k {
                break;
            }
        }
        Ok(Recommendation {
            exhausted: messages.len() < k,
            messages,
        })
    }

    fn notify_feedback(&mut self, user: &UserState, decisions: &[Decision]) {
        if !self.send_feedback {
            return;
        }
        if let Err(e) = self.send(&FeedbackLine {
            user_id: &user.id,
            decisions,
        }) {
            log::warn!("dropping feedback for {}: {e}", user.id);
        }
    }
}
