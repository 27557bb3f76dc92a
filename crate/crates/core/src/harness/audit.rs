use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::report::{read_manifest, read_rows};
use super::run::{format_topics, load_corpus, RoundRecord, RoundRow, RECORDS_FILE};
use super::{HarnessError, Result};
use crate::agents::{Mode, StageCounters};
use crate::corpus::{Message, MessageBase};
use crate::metrics;

/// Outcome of re-deriving a run from its logged artifacts.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub rows_checked: usize,
    pub abin_rounds: usize,
    pub prefix_violations: usize,
    pub metric_mismatches: usize,
    pub counter_violation: bool,
    pub problems: Vec<String>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.problems.is_empty()
    }
}

fn same(a: Option<f64>, b: f64) -> bool {
    a.is_some_and(|a| a.to_bits() == b.to_bits())
}

fn resolve(base: &MessageBase, ids: &[String], problems: &mut Vec<String>) -> Option<Vec<Message>> {
    let mut out = Vec::with_capacity(ids.len());
    for id in ids {
        match base.get(id) {
            Some(m) => out.push(m.clone()),
            None => {
                problems.push(format!("unknown message id {id:?}"));
                return None;
            }
        }
    }
    Some(out)
}

fn check_row(row: &RoundRow, rec: &RoundRecord, base: &MessageBase, mode: Mode, report: &mut AuditReport) {
    let tag = format!("{} round {}", row.user, row.round);
    if row.user != rec.user || row.round != rec.round || row.status != rec.status {
        report.problems.push(format!("{tag}: csv row and record disagree"));
        return;
    }
    if !row.is_ok() {
        return;
    }
    if mode == Mode::Abin {
        report.abin_rounds += 1;
    }
    let n = rec.opa_ids.len();
    let prefix_ok = rec.final_ids.len() >= n
        && rec.final_ids[..n] == rec.opa_ids[..]
        && rec.final_ids[n..] == rec.injected_ids[..];
    if !prefix_ok {
        report.prefix_violations += 1;
        report.problems.push(format!("{tag}: OPA list is not a prefix of the final list"));
    }
    if mode == Mode::OpaOnly && !rec.injected_ids.is_empty() {
        report.problems.push(format!("{tag}: injection in opa_only mode"));
    }
    let decided: Vec<&str> = rec.decisions.iter().map(|d| d.message_id.as_str()).collect();
    let listed: Vec<&str> = rec.final_ids.iter().map(String::as_str).collect();
    if decided != listed {
        report.problems.push(format!("{tag}: decisions do not cover the final list"));
    }
    let Some(final_list) = resolve(base, &rec.final_ids, &mut report.problems) else {
        return;
    };
    let m = match metrics::round_metrics(&final_list, &rec.decisions, base) {
        Ok(m) => m,
        Err(e) => {
            report.problems.push(format!("{tag}: {e}"));
            return;
        }
    };
    let consistent = same(row.coverage, m.coverage)
        && same(row.rr, m.rr)
        && same(row.pre, m.pre)
        && row.hit == Some(m.hit)
        && same(row.best_diff_mean, m.best_diff_mean)
        && row.best_diff_topics == format_topics(&m.best_diff_per_topic)
        && row.final_len == final_list.len()
        && row.opa_len == n
        && row.injected == rec.injected_ids.len()
        && row.accepted == rec.decisions.iter().filter(|d| d.accepted).count();
    if !consistent {
        report.metric_mismatches += 1;
        report.problems.push(format!("{tag}: metrics do not re-derive from the record"));
    }
}

/// Re-derives every CSV row of a run from `rounds.jsonl` and the corpus, and
/// checks the OPA-prefix contract and the stage counters. The corpus comes
/// from the manifest unless `corpus` is given.
pub fn audit(run_dir: &Path, corpus: Option<&Path>) -> Result<AuditReport> {
    let manifest = read_manifest(run_dir)?;
    let rows = read_rows(run_dir)?;
    let records: Vec<RoundRecord> = fs::read_to_string(run_dir.join(RECORDS_FILE))?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect::<Result<_, _>>()?;
    let mut cfg = manifest.config.clone();
    if let Some(p) = corpus {
        cfg.corpus_path = p.to_path_buf();
    }
    let base = load_corpus(&cfg)?;
    let mode = cfg.mode;

    let mut report = AuditReport::default();
    let expected = manifest.users.len() * cfg.rounds as usize;
    if rows.len() != expected || records.len() != rows.len() {
        report.problems.push(format!(
            "expected {expected} rows, found {} csv rows and {} records",
            rows.len(),
            records.len()
        ));
    }
    for (row, rec) in rows.iter().zip(&records) {
        report.rows_checked += 1;
        check_row(row, rec, &base, mode, &mut report);
    }
    if mode == Mode::OpaOnly && manifest.counters != StageCounters::default() {
        report.counter_violation = true;
        report.problems.push(format!("opa_only run has non-zero stage counters {:?}", manifest.counters));
    }
    if report.rows_checked == 0 {
        return Err(HarnessError::Runtime("run has no rows".into()));
    }
    Ok(report)
}
