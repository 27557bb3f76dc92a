use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::run::{RoundRow, CSV_FILE, MANIFEST_FILE};
use super::{HarnessError, Manifest, Result};
use crate::metrics::{self, DeltaBlock, RoundMetrics, Summary};

pub const REPORT_FILE: &str = "report.txt";
pub const SCATTER_FILE: &str = "scatter.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub text: String,
    pub summary: Option<Summary>,
    pub delta: Option<DeltaBlock>,
    pub scatter_rows: usize,
}

pub(crate) fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    if !path.is_file() {
        return Err(HarnessError::MissingManifest(dir.display().to_string()));
    }
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub(crate) fn read_rows(dir: &Path) -> Result<Vec<RoundRow>> {
    let mut r = csv::Reader::from_path(dir.join(CSV_FILE))?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

fn summarize(rows: &[RoundRow]) -> Option<Summary> {
    let ok: Vec<RoundMetrics> = rows.iter().filter_map(RoundRow::metrics).collect();
    metrics::aggregate(&ok).ok()
}

fn fmt_stat_line(out: &mut String, name: &str, s: &metrics::Stat) {
    let _ = writeln!(out, "  {name:<10} {:>12.6} ± {:.6}", s.mean, s.std);
}

fn fmt_delta(d: Option<f64>) -> String {
    d.map_or_else(|| "n/a".to_string(), |v| format!("{v:+.2}%"))
}

/// Summarizes a run directory and writes `report.txt` and `scatter.csv`
/// (user index, user, round, best_diff) into `out`.
pub fn report(run_dir: &Path, baseline: Option<&Path>, out: &Path) -> Result<Report> {
    let manifest = read_manifest(run_dir)?;
    let rows = read_rows(run_dir)?;
    let summary = summarize(&rows);

    let user_index: BTreeMap<&str, usize> = manifest
        .users
        .iter()
        .enumerate()
        .map(|(i, u)| (u.id.as_str(), i))
        .collect();
    fs::create_dir_all(out)?;
    let mut w = csv::Writer::from_path(out.join(SCATTER_FILE))?;
    w.write_record(["user_index", "user", "round", "best_diff"])?;
    for r in &rows {
        let idx = user_index.get(r.user.as_str()).map_or(String::new(), |i| i.to_string());
        let bd = r.best_diff_mean.map_or(String::new(), |v| v.to_string());
        w.write_record([idx, r.user.clone(), r.round.to_string(), bd])?;
    }
    w.flush()?;

    let mut text = String::new();
    let _ = writeln!(text, "run: {}", run_dir.display());
    let _ = writeln!(text, "mode: {}", manifest.config.mode);
    let _ = writeln!(text, "config hash: {}", manifest.config_hash);
    let _ = writeln!(
        text,
        "users: {}  rounds: {}  rows: {}  skipped: {}",
        manifest.users.len(),
        manifest.config.rounds,
        rows.len(),
        rows.iter().filter(|r| !r.is_ok()).count()
    );
    let c = manifest.counters;
    let _ = writeln!(
        text,
        "stages: clustering {}  dcia {}  yync {}  searching {}",
        c.clustering, c.dcia, c.yync, c.searching
    );
    match &summary {
        Some(s) => {
            let _ = writeln!(text, "metrics (mean ± std over {} rounds):", s.rounds);
            fmt_stat_line(&mut text, "coverage", &s.coverage);
            fmt_stat_line(&mut text, "rr", &s.rr);
            fmt_stat_line(&mut text, "pre", &s.pre);
            fmt_stat_line(&mut text, "hit", &s.hit);
            fmt_stat_line(&mut text, "best_diff", &s.best_diff);
        }
        None => text.push_str("metrics: no completed rounds\n"),
    }

    let mut delta = None;
    if let Some(bdir) = baseline {
        read_manifest(bdir)?;
        let brows = read_rows(bdir)?;
        if let (Some(b), Some(s)) = (summarize(&brows), &summary) {
            let d = metrics::compare(&b, s);
            let _ = writeln!(text, "change against {}:", bdir.display());
            let _ = writeln!(text, "  {:<10} {:>12} {:>12} {:>10}", "metric", "baseline", "run", "delta");
            for (name, old, new, dv) in [
                ("coverage", b.coverage.mean, s.coverage.mean, d.coverage),
                ("rr", b.rr.mean, s.rr.mean, d.rr),
                ("pre", b.pre.mean, s.pre.mean, d.pre),
                ("hit", b.hit.mean, s.hit.mean, d.hit),
                ("best_diff", b.best_diff.mean, s.best_diff.mean, d.best_diff),
            ] {
                let _ = writeln!(text, "  {name:<10} {old:>12.6} {new:>12.6} {:>10}", fmt_delta(dv));
            }
            delta = Some(d);
        } else {
            text.push_str("change against baseline: no completed rounds to compare\n");
        }
    }
    fs::write(out.join(REPORT_FILE), &text)?;
    Ok(Report {
        text,
        summary,
        delta,
        scatter_rows: rows.len(),
    })
}
