//! Score a handful of synthetic articles against a real chat-completion
//! endpoint.
//!
//! ```text
//! RQSCORE_ENDPOINT=http://127.0.0.1:8080/v1/chat/completions \
//! RQSCORE_MODEL=gemma-3-27b-it cargo run --example score_endpoint
//! ```
//!
//! Set `RQSCORE_API_KEY` if the endpoint wants a bearer token.

use rqscore::client::{run_batch, HttpBackend, ModelConfig, ReportStore};
use rqscore::extractor::extract_batch;
use rqscore::protocol::TemplateSet;
use rqscore::synthetic::SyntheticCorpus;

fn main() {
    let Ok(endpoint) = std::env::var("RQSCORE_ENDPOINT") else {
        eprintln!("set RQSCORE_ENDPOINT to a chat-completions URL to run this example");
        return;
    };
    let cfg = ModelConfig {
        endpoint_url: endpoint,
        model_name: std::env::var("RQSCORE_MODEL").unwrap_or_else(|_| "gemma-3-27b-it".into()),
        api_key_env: Some("RQSCORE_API_KEY".into()),
        repetitions: 2,
        parallelism: 2,
        ..Default::default()
    };
    let corpus = SyntheticCorpus {
        uoas: vec![30],
        per_uoa: 3,
        ..Default::default()
    }
    .corpus()
    .unwrap();
    let mut store = ReportStore::in_memory();
    let backend = HttpBackend::new(&cfg);
    let summary = run_batch(&corpus, &TemplateSet::bundled(), &cfg, &backend, &mut store).unwrap();
    println!("{summary}");
    for f in &summary.failures {
        println!("  {} rep {}: {}", f.article_id, f.rep_index, f.reason);
    }
    print!("{}", extract_batch(store.reports()).scores_csv());
}
