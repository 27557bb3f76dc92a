use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn abin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abin"))
        .args(args)
        .env_remove("ABIN_SEED")
        .output()
        .unwrap()
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn write_config(dir: &Path, mode: &str, out: &str) -> String {
    let path = dir.join(format!("{out}.toml"));
    fs::write(
        &path,
        format!(
            r#"
corpus_path = "corpus.jsonl"
rounds = 20
mode = "{mode}"
output_dir = "{out}"

[embedding]
dim = 64

[[users]]
id = "alice"
topic = "topic0"
sentiment = 0.8

[[users]]
id = "bob"
topic = "topic1"

[[users]]
id = "carol"
"#
        ),
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    ok(&abin(&["gen-corpus", "--out", d, "--topics", "3", "--per-topic", "40", "--seed", "5"]));
    dir
}

#[test]
fn simulate_report_and_audit() {
    let dir = setup();
    let d = dir.path();
    ok(&abin(&["simulate", "--config", &write_config(d, "opa_only", "base")]));
    ok(&abin(&["simulate", "--config", &write_config(d, "abin", "run")]));

    let csv = fs::read_to_string(d.join("run/rounds.csv")).unwrap();
    assert_eq!(csv.lines().count(), 61);
    for f in ["manifest.json", "summary.json", "rounds.jsonl", "memory/alice.json"] {
        assert!(d.join("run").join(f).is_file(), "{f}");
    }

    let run = d.join("run");
    let base = d.join("base");
    let out = abin(&["report", "--run", run.to_str().unwrap(), "--baseline", base.to_str().unwrap()]);
    ok(&out);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("coverage") && text.contains("change against"));
    let scatter = fs::read_to_string(run.join("scatter.csv")).unwrap();
    assert_eq!(scatter.lines().count(), 61);

    for r in [&run, &base] {
        ok(&abin(&["audit", "--run", r.to_str().unwrap()]));
    }
}

#[test]
fn rerun_from_manifest_is_byte_identical() {
    let dir = setup();
    let d = dir.path();
    ok(&abin(&["simulate", "--config", &write_config(d, "abin", "first")]));
    let manifest = d.join("first/manifest.json");
    let again = d.join("again");
    ok(&abin(&["simulate", "--config", manifest.to_str().unwrap(), "--out", again.to_str().unwrap()]));
    assert_eq!(
        fs::read(d.join("first/rounds.csv")).unwrap(),
        fs::read(again.join("rounds.csv")).unwrap()
    );
}

#[test]
fn seed_flag_and_env_override_seeds() {
    let dir = setup();
    let d = dir.path();
    let cfg = write_config(d, "abin", "seeded");
    ok(&abin(&["simulate", "--config", &cfg, "--seed", "9", "--out", d.join("a").to_str().unwrap()]));
    let out = Command::new(env!("CARGO_BIN_EXE_abin"))
        .args(["simulate", "--config", &cfg, "--out", d.join("b").to_str().unwrap()])
        .env("ABIN_SEED", "9")
        .output()
        .unwrap();
    ok(&out);
    let a: serde_json::Value = serde_json::from_slice(&fs::read(d.join("a/manifest.json")).unwrap()).unwrap();
    let b: serde_json::Value = serde_json::from_slice(&fs::read(d.join("b/manifest.json")).unwrap()).unwrap();
    assert_eq!(a["seeds"], b["seeds"]);
    assert_ne!(a["seeds"]["acceptance"], 42);
}

#[test]
fn sweep_writes_a_row_per_value() {
    let dir = setup();
    let d = dir.path();
    let cfg = write_config(d, "abin", "sweep");
    ok(&abin(&["sweep-clusters", "--config", &cfg, "--values", "1,2,3"]));
    let table = fs::read_to_string(d.join("sweep/sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 4);
    assert!(table.starts_with("cluster,wall_time,baseline_best_diff,abin_best_diff,improve_pct"));
}

#[test]
fn ingest_saves_a_loadable_base() {
    let dir = setup();
    let d = dir.path();
    let corpus = d.join("corpus.jsonl");
    let out = d.join("base");
    ok(&abin(&["ingest", "--input", corpus.to_str().unwrap(), "--out", out.to_str().unwrap(), "--dim", "32"]));
    assert!(out.join("embeddings.bin").is_file());
}

#[test]
fn exit_codes() {
    let dir = setup();
    let d = dir.path();
    let bad = d.join("bad.toml");
    fs::write(&bad, "corpus_path = \"corpus.jsonl\"\nrounds = 0\nmode = \"abin\"\n[[users]]\nid = \"a\"\n").unwrap();
    assert_eq!(abin(&["simulate", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    fs::write(&bad, "corpus_path = \"corpus.jsonl\"\nrounds = 2\nmode = \"abin\"\nsurprise = 1\n").unwrap();
    assert_eq!(abin(&["simulate", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    let empty = d.join("empty");
    fs::create_dir(&empty).unwrap();
    assert_eq!(abin(&["report", "--run", empty.to_str().unwrap()]).status.code(), Some(3));
    let broken = d.join("broken.jsonl");
    fs::write(&broken, "{\"id\": \"a\"}\n").unwrap();
    let out = d.join("x");
    assert_eq!(
        abin(&["ingest", "--input", broken.to_str().unwrap(), "--out", out.to_str().unwrap()]).status.code(),
        Some(3)
    );
}
