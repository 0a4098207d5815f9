//! Research-quality scoring of journal articles through chat-completion
//! language models, and statistical validation of the resulting scores.
//!
//! The crate is organised by pipeline stage:
//!
//! * [`corpus`]: article ingestion, proxy-score linking, short-abstract filter;
//! * [`protocol`]: main-panel mapping and prompt construction;
//! * [`client`]: endpoint calls, report store, batch scheduler, mock scorer;
//! * [`extractor`]: star-score extraction from report text;
//! * [`stats`]: aggregation, Spearman correlation, bootstrap intervals;
//! * [`structure`]: paragraph and heading frequency tables;
//! * [`pipeline`]: config-driven, resumable stages behind the `rqscore` binary;
//! * [`synthetic`]: seeded toy corpora with proxy scores.

pub mod client;
pub mod corpus;
pub mod extractor;
pub mod pipeline;
pub mod protocol;
pub mod stats;
pub mod structure;
pub mod synthetic;
