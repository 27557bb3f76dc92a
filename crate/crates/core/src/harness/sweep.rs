use std::collections::HashSet;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::run::{load_corpus, run_with_base, write_run, RunResult};
use super::{HarnessError, Result, SimulationConfig};
use crate::agents::Mode;
use crate::corpus::MessageBase;
use crate::seed;

pub const SWEEP_FILE: &str = "sweep.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    KClusters,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<usize>,
    pub repetitions: usize,
}

impl SweepSpec {
    pub fn k_clusters(values: impl IntoIterator<Item = usize>) -> Self {
        Self {
            parameter: SweepParameter::KClusters,
            values: values.into_iter().collect(),
            repetitions: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(HarnessError::Config("sweep values are empty".into()));
        }
        if self.values.contains(&0) {
            return Err(HarnessError::Config("sweep values must be positive".into()));
        }
        let distinct: HashSet<_> = self.values.iter().collect();
        if distinct.len() != self.values.len() {
            return Err(HarnessError::Config("sweep values must be distinct".into()));
        }
        if self.repetitions == 0 {
            return Err(HarnessError::Config("sweep repetitions must be at least 1".into()));
        }
        Ok(())
    }
}

/// One line of the comparison table. Best-diff columns are means over
/// repetitions of each run's mean per-round best_diff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub cluster: usize,
    /// Seconds for the whole cell (both modes, every repetition).
    pub wall_time: f64,
    pub baseline_best_diff: f64,
    pub abin_best_diff: f64,
    pub improve_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// Every run of the sweep, labelled `k{k}/rep{r}/{mode}`.
    pub runs: Vec<(String, RunResult)>,
}

fn best_diff_mean(r: &RunResult) -> Result<f64> {
    r.summary
        .overall
        .as_ref()
        .map(|s| s.best_diff.mean)
        .ok_or_else(|| HarnessError::Runtime("every round was skipped".into()))
}

fn repetition_config(cfg: &SimulationConfig, rep: usize) -> SimulationConfig {
    let mut c = cfg.clone();
    if rep > 0 {
        let r = (rep as u64).to_le_bytes();
        c.ina.cluster_seed = seed::derive(cfg.ina.cluster_seed, &[b"rep", &r]);
        c.ua.acceptance_seed = seed::derive(cfg.ua.acceptance_seed, &[b"rep", &r]);
        c.user_seed = seed::derive(cfg.user_seed, &[b"rep", &r]);
    }
    c
}

/// Paired opa_only and abin runs for every value of the sweep.
pub fn sweep_with_base(cfg: &SimulationConfig, base: &MessageBase, spec: &SweepSpec) -> Result<SweepOutcome> {
    spec.validate()?;
    cfg.validate()?;
    let mut rows = Vec::with_capacity(spec.values.len());
    let mut runs = Vec::new();
    for &k in &spec.values {
        let start = Instant::now();
        let mut baseline = 0.0;
        let mut abin = 0.0;
        for rep in 0..spec.repetitions {
            let mut c = repetition_config(cfg, rep);
            c.ina.k_clusters = k;
            c.mode = Mode::OpaOnly;
            let b = run_with_base(&c, base)?;
            c.mode = Mode::Abin;
            let a = run_with_base(&c, base)?;
            baseline += best_diff_mean(&b)?;
            abin += best_diff_mean(&a)?;
            runs.push((format!("k{k}/rep{rep}/opa_only"), b));
            runs.push((format!("k{k}/rep{rep}/abin"), a));
        }
        let n = spec.repetitions as f64;
        let (baseline, abin) = (baseline / n, abin / n);
        rows.push(SweepRow {
            cluster: k,
            wall_time: start.elapsed().as_secs_f64(),
            baseline_best_diff: baseline,
            abin_best_diff: abin,
            improve_pct: (baseline != 0.0).then(|| (baseline - abin) / baseline * 100.0),
        });
        log::info!("sweep k={k} done");
    }
    Ok(SweepOutcome { rows, runs })
}

pub fn write_sweep_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the sweep and writes `sweep.csv` plus every run under
/// `cfg.output_dir`.
pub fn sweep_clusters(cfg: &SimulationConfig, spec: &SweepSpec) -> Result<SweepOutcome> {
    spec.validate()?;
    cfg.validate()?;
    let base = load_corpus(cfg)?;
    let outcome = sweep_with_base(cfg, &base, spec)?;
    for (label, run) in &outcome.runs {
        write_run(run, &cfg.output_dir.join(label))?;
    }
    write_sweep_csv(&outcome.rows, &cfg.output_dir.join(SWEEP_FILE))?;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(SweepSpec::k_clusters(1..=8).validate().is_ok());
        assert!(SweepSpec::k_clusters([]).validate().is_err());
        assert!(SweepSpec::k_clusters([2, 2]).validate().is_err());
        assert!(SweepSpec::k_clusters([0, 1]).validate().is_err());
    }

    #[test]
    fn first_repetition_keeps_seeds() {
        let cfg = SimulationConfig::with_corpus("c.jsonl", Mode::Abin);
        assert_eq!(repetition_config(&cfg, 0), cfg);
        assert_ne!(repetition_config(&cfg, 1).ua.acceptance_seed, cfg.ua.acceptance_seed);
    }
}
