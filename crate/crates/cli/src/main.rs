use std::path::PathBuf;
use std::process::ExitCode;

use abin::corpus::{CorpusFormat, HashEmbedder, MessageBase};
use abin::harness::{
    self, audit, generate_synthetic_corpus, report, sweep_clusters, HarnessError, SimulationConfig, SweepSpec,
    SyntheticSpec,
};
use abin::Mode;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "abin", version, about = "Sentiment-neutralizing recommendation wrapper and simulation harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Config file (TOML, or a run's manifest.json).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Replaces every seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Embed a JSONL/CSV corpus and save it as a message base directory.
    Ingest {
        #[command(flatten)]
        common: Common,
        /// Corpus file; defaults to the config's corpus_path.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        format: Option<CorpusFormat>,
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Write a deterministic synthetic corpus to <out>/corpus.jsonl.
    GenCorpus {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4)]
        topics: usize,
        #[arg(long, default_value_t = 200)]
        per_topic: usize,
        /// Yang share of the first topic; the others are split evenly.
        #[arg(long, default_value_t = 0.8)]
        yang_bias: f64,
    },
    /// Run a multi-round simulation.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        mode: Option<Mode>,
        #[arg(long)]
        single_threaded: bool,
    },
    /// Paired opa_only/abin runs over a range of cluster counts.
    SweepClusters {
        #[command(flatten)]
        common: Common,
        /// Comma-separated values or a range such as 1..8 (inclusive).
        #[arg(long, default_value = "1..8")]
        values: String,
        #[arg(long, default_value_t = 1)]
        repetitions: usize,
    },
    /// Summarize a run directory; with --baseline, add the change block.
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        baseline: Option<PathBuf>,
    },
    /// Re-derive a run's metrics from its logged artifacts.
    Audit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        run: PathBuf,
        /// Corpus to use instead of the one named in the manifest.
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
}

fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

fn load_config(common: &Common) -> Result<SimulationConfig, HarnessError> {
    let path = common.config.as_deref().ok_or_else(|| config_err("--config is required"))?;
    let mut cfg = SimulationConfig::load(path)?;
    cfg.apply_env_seed()?;
    if let Some(s) = common.seed {
        cfg.override_seeds(s);
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn parse_values(s: &str) -> Result<Vec<usize>, HarnessError> {
    let bad = || config_err(format!("bad --values {s:?}"));
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect()
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Ingest {
            common,
            input,
            format,
            dim,
        } => {
            let (path, mut dim_v, mut seed) = match (&input, &common.config) {
                (Some(p), _) => (p.clone(), 256, 7),
                (None, Some(_)) => {
                    let cfg = load_config(&Common { out: None, ..common.clone() })?;
                    (cfg.corpus_path, cfg.embedding.dim, cfg.embedding.seed)
                }
                (None, None) => return Err(config_err("ingest needs --input or --config")),
            };
            if let Some(d) = dim {
                dim_v = d;
            }
            if input.is_some() {
                if let Some(s) = common.seed {
                    seed = s;
                }
            }
            let out = common.out.ok_or_else(|| config_err("ingest needs --out"))?;
            let embedder = HashEmbedder::new(dim_v, seed)?;
            let fmt = format.unwrap_or_else(|| CorpusFormat::from_path(&path));
            let base = MessageBase::ingest(&path, fmt, &embedder)?;
            base.save_dir(&out)?;
            println!("ingested {} messages ({} topics, dim {}) into {}", base.len(), base.topics().count(), base.dim(), out.display());
        }
        Command::GenCorpus {
            common,
            topics,
            per_topic,
            yang_bias,
        } => {
            let spec = match &common.config {
                Some(p) => {
                    let text = std::fs::read_to_string(p).map_err(|e| config_err(format!("{}: {e}", p.display())))?;
                    let mut spec: SyntheticSpec = toml::from_str(&text).map_err(|e| config_err(e.to_string()))?;
                    if let Some(s) = common.seed {
                        spec.seed = s;
                    }
                    spec
                }
                None => SyntheticSpec::biased(topics, per_topic, yang_bias, common.seed.unwrap_or(0)),
            };
            let out = common.out.unwrap_or_else(|| PathBuf::from("."));
            let path = out.join("corpus.jsonl");
            let n = generate_synthetic_corpus(&spec, &path)?;
            println!("wrote {n} messages to {}", path.display());
        }
        Command::Simulate {
            common,
            mode,
            single_threaded,
        } => {
            let mut cfg = load_config(&common)?;
            if let Some(m) = mode {
                cfg.mode = m;
            }
            cfg.single_threaded |= single_threaded;
            let result = harness::simulate(&cfg)?;
            println!(
                "{} rows ({} skipped) written to {}",
                result.summary.rows,
                result.summary.skipped_rows,
                cfg.output_dir.display()
            );
            if let Some(s) = &result.summary.overall {
                println!(
                    "coverage {:.6}  rr {:.6}  pre {:.6}  hit {:.6}  best_diff {:.6}",
                    s.coverage.mean, s.rr.mean, s.pre.mean, s.hit.mean, s.best_diff.mean
                );
            }
        }
        Command::SweepClusters {
            common,
            values,
            repetitions,
        } => {
            let cfg = load_config(&common)?;
            let spec = SweepSpec {
                repetitions,
                ..SweepSpec::k_clusters(parse_values(&values)?)
            };
            let outcome = sweep_clusters(&cfg, &spec)?;
            println!("{:>7} {:>10} {:>12} {:>12} {:>9}", "cluster", "time(s)", "baseline", "abin", "improve%");
            for r in &outcome.rows {
                println!(
                    "{:>7} {:>10.2} {:>12.6} {:>12.6} {:>9}",
                    r.cluster,
                    r.wall_time,
                    r.baseline_best_diff,
                    r.abin_best_diff,
                    r.improve_pct.map_or("n/a".into(), |p| format!("{p:.2}"))
                );
            }
        }
        Command::Report { common, run, baseline } => {
            let out = common.out.unwrap_or_else(|| run.clone());
            let r = report(&run, baseline.as_deref(), &out)?;
            print!("{}", r.text);
        }
        Command::Audit { common, run, corpus } => {
            let rep = audit(&run, corpus.as_deref())?;
            let json = serde_json::to_string_pretty(&rep)?;
            if let Some(out) = &common.out {
                std::fs::create_dir_all(out)?;
                std::fs::write(out.join("audit.json"), &json)?;
            }
            println!("{json}");
            if !rep.passed() {
                return Err(HarnessError::Runtime(format!("audit found {} problems", rep.problems.len())));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
