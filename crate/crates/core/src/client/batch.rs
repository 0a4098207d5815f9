use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use thiserror::Error;

use super::{score_article, ChatBackend, ModelConfig, RawReport, ReportStore, ScoreError, StoreError};
use crate::corpus::{Article, Corpus};
use crate::protocol::{build_prompt, PromptPair, TemplateSet};

#[derive(Debug, Error)]
pub enum BatchError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("invalid model config: {0}")]
    Config(String),
}

/// A (article, repetition) pair that could not be scored.
#[derive(Debug, Clone, PartialEq)]
pub struct PairFailure {
    pub article_id: String,
    pub rep_index: u32,
    pub attempts: u32,
    pub reason: String,
    /// True when the endpoint could not be reached or kept failing.
    pub transport: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BatchSummary {
    pub issued: usize,
    pub succeeded: usize,
    pub cached: usize,
    pub failures: Vec<PairFailure>,
}

impl BatchSummary {
    pub fn failed(&self) -> usize {
        self.failures.len()
    }
}

impl fmt::Display for BatchSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} requests issued, {} succeeded, {} failed, {} cached",
            self.issued,
            self.succeeded,
            self.failed(),
            self.cached
        )
    }
}

/// Score every article `cfg.repetitions` times in repetition-major passes:
/// pass `k` finishes repetition `k` for all articles before any article is
/// sent repetition `k + 1`. Pairs already in `store` are skipped. Up to
/// `cfg.parallelism` requests are in flight; only the calling thread writes
/// to the store, in corpus order within each pass.
pub fn run_batch(
    corpus: &Corpus,
    templates: &TemplateSet,
    cfg: &ModelConfig,
    backend: &dyn ChatBackend,
    store: &mut ReportStore,
) -> Result<BatchSummary, BatchError> {
    if cfg.repetitions == 0 || cfg.parallelism == 0 {
        return Err(BatchError::Config(
            "repetitions and parallelism must be at least 1".into(),
        ));
    }
    let model_id = backend.model_id().to_string();
    let mut summary = BatchSummary::default();

    let mut prompts: Vec<(&Article, PromptPair)> = Vec::with_capacity(corpus.len());
    let mut unpromptable = Vec::new();
    for a in corpus.articles() {
        match build_prompt(a, templates) {
            Ok(p) => prompts.push((a, p)),
            Err(e) => unpromptable.push((a, e.to_string())),
        }
    }

    for rep in 0..cfg.repetitions {
        for (a, reason) in &unpromptable {
            if store.contains(&a.id, rep, &model_id) {
                summary.cached += 1;
            } else {
                summary.failures.push(PairFailure {
                    article_id: a.id.clone(),
                    rep_index: rep,
                    attempts: 0,
                    reason: reason.clone(),
                    transport: false,
                });
            }
        }
        let pending: Vec<&(&Article, PromptPair)> = prompts
            .iter()
            .filter(|(a, _)| !store.contains(&a.id, rep, &model_id))
            .collect();
        summary.cached += prompts.len() - pending.len();
        if pending.is_empty() {
            continue;
        }

        let mut store_error = None;
        let next = AtomicUsize::new(0);
        std::thread::scope(|scope| {
            let (tx, rx) = mpsc::channel::<(usize, Result<RawReport, ScoreError>)>();
            for _ in 0..cfg.parallelism.min(pending.len()) {
                let tx = tx.clone();
                let next = &next;
                let pending = &pending;
                scope.spawn(move || loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some((article, prompt)) = pending.get(i) else {
                        break;
                    };
                    let result = score_article(backend, article, prompt, cfg, rep);
                    if tx.send((i, result)).is_err() {
                        break;
                    }
                });
            }
            drop(tx);
            // Results are committed in corpus order so the store file does
            // not depend on thread timing.
            let mut waiting = BTreeMap::new();
            let mut next_commit = 0;
            for (i, result) in rx {
                summary.issued += 1;
                waiting.insert(i, result);
                while let Some(result) = waiting.remove(&next_commit) {
                    let i = next_commit;
                    next_commit += 1;
                    match result {
                        Ok(report) => {
                            if store_error.is_some() {
                                continue;
                            }
                            match store.append(report) {
                                Ok(()) => summary.succeeded += 1,
                                Err(e) => store_error = Some(e),
                            }
                        }
                        Err(e) => summary.failures.push(PairFailure {
                            article_id: pending[i].0.id.clone(),
                            rep_index: rep,
                            attempts: e.attempts,
                            reason: e.cause.to_string(),
                            transport: e.cause.is_transport(),
                        }),
                    }
                }
            }
        });
        if let Some(e) = store_error {
            return Err(e.into());
        }
    }
    Ok(summary)
}
