//! The full ingest, score, analyze, structure run against the built-in mock
//! scorer, driven by a config file in a scratch directory.

use rqscore::pipeline::{cmd_all, RunConfig, ANALYSIS_FILES};
use rqscore::synthetic::SyntheticCorpus;

fn main() {
    let dir = tempfile::tempdir().unwrap();
    SyntheticCorpus {
        per_uoa: 60,
        seed: 2,
        ..Default::default()
    }
    .write_inputs(dir.path())
    .unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        r#"
seed = 2024
output_dir = "out"
mock_endpoint = true

[corpus]
path = "corpus.csv"
proxy_scores = "proxy.csv"

[model]
repetitions = 3
parallelism = 4

[bootstrap]
samples = 500
"#,
    )
    .unwrap();

    let cfg = RunConfig::load(&config).unwrap();
    let report = cmd_all(&cfg).unwrap_or_else(|e| {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    });
    for c in &report.analysis.curves {
        println!("panel {} curve: {:?}", c.panel, c.points);
    }
    for name in ANALYSIS_FILES {
        let n = std::fs::read_to_string(cfg.output(name)).unwrap().lines().count();
        println!("{name}: {n} lines");
    }
}
