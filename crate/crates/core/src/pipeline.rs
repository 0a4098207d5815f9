//! Config-driven pipeline stages: `ingest`, `score`, `analyze`, `structure`.
//!
//! Every stage reads only the artifacts written by earlier stages plus the
//! run config, and writes into the configured output directory:
//!
//! | stage     | writes |
//! |-----------|--------|
//! | ingest    | `corpus.jsonl`, `ingest_report.csv`, `ingest_rejected.csv`, `corpus_provenance.json` |
//! | score     | `reports.jsonl` (appended), `score_failures.csv` |
//! | analyze   | `extraction.csv`, `extraction_failures.csv`, `descriptive.csv`, `correlations.csv`, `correlations_skipped.csv`, `iteration_curves.csv`, `summary.csv`, `figure_correlations.csv`, `figure_iterations.csv` |
//! | structure | `structure_paragraphs.csv`, `structure_headings.csv` |

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::{self, OpenOptions};
use std::path::{Path, PathBuf};
use std::sync::LazyLock;

use regex::Regex;
use serde::Deserialize;
use thiserror::Error;

use crate::client::{
    run_batch, BatchError, ChatBackend, HttpBackend, MockBackend, MockProfile, ModelConfig,
    RawReport, ReportStore, StoreError,
};
use crate::corpus::{
    descriptive_stats, filter_short_abstracts, load_corpus, load_proxy_scores, Corpus,
    CorpusError, CorpusFormat, DEFAULT_FILTER_FRACTION,
};
use crate::extractor::{extract_batch, ExtractionTable};
use crate::protocol::{main_panel, MainPanel, ProtocolError, TemplateManifest, TemplateSet};
use crate::stats::{
    aggregate, correlate_by_uoa, correlations_csv, curves_csv, identical_fraction,
    iteration_curve, weighted_mean_rho, BootstrapConfig, IterationCurve, RepScoreTable, Take,
    UoaCorrelations,
};
use crate::structure::{
    default_specs, heading_frequency_table, heading_table_csv, load_pattern_specs,
    paragraph_pattern_table, paragraph_tables_csv, StructureError,
};

pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const REPORTS_FILE: &str = "reports.jsonl";
pub const LOCK_FILE: &str = ".rqscore.lock";

/// Files written by `analyze`, in the order they are written.
pub const ANALYSIS_FILES: [&str; 9] = [
    "extraction.csv",
    "extraction_failures.csv",
    "descriptive.csv",
    "correlations.csv",
    "correlations_skipped.csv",
    "iteration_curves.csv",
    "summary.csv",
    "figure_correlations.csv",
    "figure_iterations.csv",
];

pub const STRUCTURE_FILES: [&str; 2] = ["structure_paragraphs.csv", "structure_headings.csv"];

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("scoring incomplete: {0}")]
    Transport(String),
    #[error("analysis threshold breached: {0}")]
    AnalysisThreshold(String),
}

impl PipelineError {
    /// 0 success, 1 validation, 2 transport, 3 analysis-threshold breach.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Transport(_) => 2,
            PipelineError::AnalysisThreshold(_) => 3,
            _ => 1,
        }
    }
}

impl From<BatchError> for PipelineError {
    fn from(e: BatchError) -> Self {
        match e {
            BatchError::Store(s) => PipelineError::Store(s),
            BatchError::Config(m) => PipelineError::Validation(m),
        }
    }
}

type Result<T, E = PipelineError> = std::result::Result<T, E>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(io_err(path))
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSection {
    pub path: PathBuf,
    #[serde(default)]
    pub format: Option<String>,
    #[serde(default)]
    pub proxy_scores: Option<PathBuf>,
}

fn default_samples() -> usize {
    1000
}
fn default_alpha() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BootstrapSection {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

impl Default for BootstrapSection {
    fn default() -> Self {
        Self {
            samples: default_samples(),
            alpha: default_alpha(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureSection {
    #[serde(default)]
    pub spec_file: Option<PathBuf>,
    /// Restrict the analysis to one main panel.
    #[serde(default)]
    pub panel: Option<String>,
}

fn default_fraction() -> f64 {
    DEFAULT_FILTER_FRACTION
}
fn default_failure_rate() -> f64 {
    0.01
}

/// Everything a run needs, read from one TOML file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default = "default_fraction")]
    pub filter_fraction: f64,
    /// Largest tolerated share of reports without an extractable score.
    #[serde(default = "default_failure_rate")]
    pub max_extraction_failure_rate: f64,
    /// Use the built-in deterministic scorer instead of the endpoint.
    #[serde(default)]
    pub mock_endpoint: bool,
    pub corpus: CorpusSection,
    #[serde(default)]
    pub templates: Option<TemplateManifest>,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub bootstrap: BootstrapSection,
    #[serde(default)]
    pub mock: MockProfile,
    #[serde(default)]
    pub structure: StructureSection,
    #[serde(skip)]
    base_dir: PathBuf,
}

static ENV_REF: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\$\{([A-Za-z_][A-Za-z0-9_]*)\}").unwrap());

/// Replace `${NAME}` with the value of environment variable `NAME`.
pub fn interpolate_env(raw: &str) -> Result<String> {
    let mut missing = Vec::new();
    let out = ENV_REF.replace_all(raw, |cap: &regex::Captures<'_>| {
        std::env::var(&cap[1]).unwrap_or_else(|_| {
            missing.push(cap[1].to_string());
            String::new()
        })
    });
    if !missing.is_empty() {
        return Err(PipelineError::Validation(format!(
            "unset environment variable(s): {}",
            missing.join(", ")
        )));
    }
    Ok(out.into_owned())
}

impl RunConfig {
    /// Parse a config, interpolating environment variables. Relative paths
    /// are resolved against `base_dir`.
    pub fn from_toml_str(raw: &str, base_dir: &Path) -> Result<Self> {
        let text = interpolate_env(raw)?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| PipelineError::Validation(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path).map_err(|e| {
            PipelineError::Validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml_str(&raw, base)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    pub fn output(&self, name: &str) -> PathBuf {
        self.output_dir().join(name)
    }

    pub fn bootstrap_config(&self) -> BootstrapConfig {
        BootstrapConfig {
            samples: self.bootstrap.samples,
            alpha: self.bootstrap.alpha,
            seed: self.seed,
        }
    }

    pub fn mock_profile(&self) -> MockProfile {
        MockProfile {
            repetitions: self.model.repetitions,
            ..self.mock.clone()
        }
    }

    /// Check parameters and that every referenced input file exists.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(PipelineError::Validation(m));
        if !(0.0..1.0).contains(&self.filter_fraction) {
            return fail(format!("filter_fraction {} outside [0, 1)", self.filter_fraction));
        }
        if !(0.0..=1.0).contains(&self.max_extraction_failure_rate) {
            return fail(format!(
                "max_extraction_failure_rate {} outside [0, 1]",
                self.max_extraction_failure_rate
            ));
        }
        if self.bootstrap.samples < 100 {
            return fail(format!("bootstrap samples {} < 100", self.bootstrap.samples));
        }
        if !(self.bootstrap.alpha > 0.0 && self.bootstrap.alpha < 1.0) {
            return fail(format!("bootstrap alpha {} outside (0, 1)", self.bootstrap.alpha));
        }
        if !(0.0..=1.0).contains(&self.mock.agreement) {
            return fail(format!("mock agreement {} outside [0, 1]", self.mock.agreement));
        }
        self.model.validate().map_err(PipelineError::Validation)?;
        if let Some(fmt) = &self.corpus.format {
            CorpusFormat::parse(fmt)?;
        }
        if let Some(p) = &self.structure.panel {
            if MainPanel::from_letter(p).is_none() {
                return fail(format!("structure panel {p:?} is not one of A, B, C, D"));
            }
        }
        let mut required = vec![("corpus file", self.resolve(&self.corpus.path))];
        if let Some(p) = &self.corpus.proxy_scores {
            required.push(("proxy score file", self.resolve(p)));
        }
        if let Some(p) = &self.structure.spec_file {
            required.push(("structure spec file", self.resolve(p)));
        }
        if let Some(m) = &self.templates {
            for (panel, p) in [("A", &m.a), ("B", &m.b), ("C", &m.c), ("D", &m.d)] {
                match p {
                    Some(p) => required.push(("template file", self.resolve(p))),
                    None => return fail(format!("template manifest has no entry for panel {panel}")),
                }
            }
        }
        for (what, path) in required {
            if !path.is_file() {
                return fail(format!("{what} not found: {}", path.display()));
            }
        }
        Ok(())
    }

    pub fn templates(&self) -> Result<TemplateSet> {
        match &self.templates {
            Some(m) => Ok(m.load(&self.base_dir)?),
            None => Ok(TemplateSet::bundled()),
        }
    }

    fn corpus_format(&self) -> Result<CorpusFormat> {
        Ok(match &self.corpus.format {
            Some(f) => CorpusFormat::parse(f)?,
            None => CorpusFormat::from_path(&self.corpus.path)?,
        })
    }

    /// Model id that reports in the store are filed under for this run.
    pub fn model_id(&self) -> &str {
        if self.mock_endpoint {
            crate::client::mock::MOCK_MODEL_ID
        } else {
            &self.model.model_name
        }
    }
}

/// Exclusive claim on an output directory, released on drop.
#[derive(Debug)]
pub struct OutputLock {
    path: PathBuf,
}

impl OutputLock {
    pub fn acquire(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let path = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(Self { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(PipelineError::Validation(format!(
                    "output directory {} is in use by another run (remove {} if stale)",
                    dir.display(),
                    path.display()
                )))
            }
            Err(e) => Err(io_err(&path)(e)),
        }
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UoaIngestCount {
    pub uoa: u8,
    pub before: usize,
    pub after: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestReport {
    pub per_uoa: Vec<UoaIngestCount>,
    pub rejected: usize,
    pub with_proxy: usize,
}

impl fmt::Display for IngestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.per_uoa {
            writeln!(
                f,
                "UoA {}: {} ingested, removed {}, {} kept",
                c.uoa,
                c.before,
                c.before - c.after,
                c.after
            )?;
        }
        let kept: usize = self.per_uoa.iter().map(|c| c.after).sum();
        write!(
            f,
            "{kept} articles kept, {} with proxy scores, {} records rejected",
            self.with_proxy, self.rejected
        )
    }
}

fn ingest(cfg: &RunConfig) -> Result<IngestReport> {
    let outcome = load_corpus(&cfg.resolve(&cfg.corpus.path), cfg.corpus_format()?)?;
    let mut corpus = outcome.corpus;
    // keep the bundle independent of where the run directory lives
    corpus.provenance.source = Some(cfg.corpus.path.clone());
    if let Some(p) = &cfg.corpus.proxy_scores {
        let table = load_proxy_scores(&cfg.resolve(p))?;
        corpus.attach_proxy_scores(&table);
    }
    let before = corpus.uoa_counts();
    let filtered = filter_short_abstracts(&corpus, cfg.filter_fraction)?;
    let after = filtered.uoa_counts();

    let out_dir = cfg.output_dir();
    filtered.write_jsonl(&out_dir.join(CORPUS_FILE))?;
    let per_uoa: Vec<UoaIngestCount> = before
        .iter()
        .map(|(&uoa, &b)| UoaIngestCount {
            uoa,
            before: b,
            after: after.get(&uoa).copied().unwrap_or(0),
        })
        .collect();
    let mut report = String::from("uoa,before,after,removed\n");
    for c in &per_uoa {
        report.push_str(&format!("{},{},{},{}\n", c.uoa, c.before, c.after, c.before - c.after));
    }
    write_file(&out_dir.join("ingest_report.csv"), &report)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["record", "id", "reason"]).unwrap();
    for d in &outcome.rejected {
        w.write_record([
            d.record.to_string(),
            d.id.clone().unwrap_or_default(),
            d.reason.clone(),
        ])
        .unwrap();
    }
    write_file(
        &out_dir.join("ingest_rejected.csv"),
        &String::from_utf8(w.into_inner().unwrap()).unwrap(),
    )?;
    let provenance = serde_json::to_string_pretty(&filtered.provenance).expect("serializes");
    write_file(&out_dir.join("corpus_provenance.json"), &(provenance + "\n"))?;

    Ok(IngestReport {
        per_uoa,
        rejected: outcome.rejected.len(),
        with_proxy: filtered
            .articles()
            .iter()
            .filter(|a| a.proxy_score.is_some())
            .count(),
    })
}

/// Load the corpus, attach proxy scores, drop short abstracts and persist
/// the result with per-UoA counts.
pub fn cmd_ingest(cfg: &RunConfig) -> Result<IngestReport> {
    cfg.validate()?;
    let _lock = OutputLock::acquire(&cfg.output_dir())?;
    ingest(cfg)
}

fn load_ingested(cfg: &RunConfig) -> Result<Corpus> {
    let path = cfg.output(CORPUS_FILE);
    if !path.is_file() {
        return Err(PipelineError::Validation(format!(
            "no ingested corpus at {}; run `ingest` first",
            path.display()
        )));
    }
    Ok(Corpus::read_jsonl(&path)?)
}

fn score(cfg: &RunConfig) -> Result<crate::client::BatchSummary> {
    let corpus = load_ingested(cfg)?;
    let templates = cfg.templates()?;
    let mut store = ReportStore::open(&cfg.output(REPORTS_FILE))?;
    let backend: Box<dyn ChatBackend> = if cfg.mock_endpoint {
        Box::new(MockBackend {
            seed: cfg.seed,
            profile: cfg.mock_profile(),
        })
    } else {
        Box::new(HttpBackend::new(&cfg.model))
    };
    let summary = run_batch(&corpus, &templates, &cfg.model, backend.as_ref(), &mut store)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["article_id", "rep_index", "attempts", "reason"])
        .unwrap();
    for f in &summary.failures {
        w.write_record([
            f.article_id.clone(),
            f.rep_index.to_string(),
            f.attempts.to_string(),
            f.reason.clone(),
        ])
        .unwrap();
    }
    write_file(
        &cfg.output("score_failures.csv"),
        &String::from_utf8(w.into_inner().unwrap()).unwrap(),
    )?;
    Ok(summary)
}

/// Score every ingested article `model.repetitions` times, resuming from
/// the existing report store. Any unscored pair makes this fail with a
/// transport error after the store has been saved.
pub fn cmd_score(cfg: &RunConfig) -> Result<crate::client::BatchSummary> {
    cfg.validate()?;
    let _lock = OutputLock::acquire(&cfg.output_dir())?;
    score_checked(cfg)
}

fn score_checked(cfg: &RunConfig) -> Result<crate::client::BatchSummary> {
    let summary = score(cfg)?;
    println!("{summary}");
    if let Some(first) = summary.failures.first() {
        return Err(PipelineError::Transport(format!(
            "{} pair(s) failed, e.g. article {} rep {}: {}",
            summary.failed(),
            first.article_id,
            first.rep_index,
            first.reason
        )));
    }
    Ok(summary)
}

fn run_reports(cfg: &RunConfig, corpus: &Corpus) -> Result<Vec<RawReport>> {
    let path = cfg.output(REPORTS_FILE);
    if !path.is_file() {
        return Err(PipelineError::Validation(format!(
            "no report store at {}; run `score` first",
            path.display()
        )));
    }
    let store = ReportStore::open(&path)?;
    let ids: HashSet<&str> = corpus.articles().iter().map(|a| a.id.as_str()).collect();
    let model = cfg.model_id();
    Ok(store
        .for_model(model)
        .filter(|r| ids.contains(r.article_id.as_str()) && r.rep_index < cfg.model.repetitions)
        .cloned()
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport {
    pub extraction: ExtractionTable,
    pub correlations: UoaCorrelations,
    pub curves: Vec<IterationCurve>,
    pub identical_fraction: Option<f64>,
    pub weighted_mean_rho: Option<f64>,
}

impl fmt::Display for AnalysisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} scores extracted, {} failures",
            self.extraction.scores.len(),
            self.extraction.failures.len()
        )?;
        for r in &self.correlations.results {
            writeln!(
                f,
                "UoA {}: rho {:.4} [{:.4}, {:.4}] n={}",
                r.uoa, r.rho, r.ci_low, r.ci_high, r.n
            )?;
        }
        for s in &self.correlations.skipped {
            writeln!(f, "UoA {}: skipped ({})", s.uoa, s.reason)?;
        }
        if let Some(x) = self.identical_fraction {
            writeln!(f, "identical repetition fraction {x:.4}")?;
        }
        match self.weighted_mean_rho {
            Some(x) => write!(f, "weighted mean rho {x:.4}"),
            None => write!(f, "weighted mean rho n/a"),
        }
    }
}

fn fmt4(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.4}")).unwrap_or_default()
}

fn analyze(cfg: &RunConfig) -> Result<AnalysisReport> {
    let corpus = load_ingested(cfg)?;
    let reports = run_reports(cfg, &corpus)?;
    let extraction = extract_batch(&reports);
    write_file(&cfg.output(ANALYSIS_FILES[0]), &extraction.scores_csv())?;
    write_file(&cfg.output(ANALYSIS_FILES[1]), &extraction.failures_csv())?;

    let rate = extraction.failure_rate();
    if rate > cfg.max_extraction_failure_rate {
        let cited: Vec<String> = extraction
            .failures
            .iter()
            .take(5)
            .map(|f| format!("article {} rep {} ({})", f.article_id, f.rep_index, f.reason))
            .collect();
        return Err(PipelineError::AnalysisThreshold(format!(
            "extraction failure rate {rate:.4} exceeds {}: {}",
            cfg.max_extraction_failure_rate,
            cited.join("; ")
        )));
    }
    let table = RepScoreTable::from_extraction(&extraction);
    let unscored: Vec<&str> = corpus
        .articles()
        .iter()
        .filter(|a| table.scores(&a.id).is_none())
        .map(|a| a.id.as_str())
        .collect();
    if !unscored.is_empty() {
        return Err(PipelineError::AnalysisThreshold(format!(
            "{} article(s) have no parsed score, e.g. {}",
            unscored.len(),
            unscored[..unscored.len().min(5)].join(", ")
        )));
    }

    let sets = aggregate(&table, Take::All).map_err(|e| PipelineError::AnalysisThreshold(e.to_string()))?;
    let means: HashMap<String, f64> = sets.iter().map(|s| (s.article_id.clone(), s.mean)).collect();
    let descriptive = descriptive_stats(&corpus, &means)?;
    write_file(&cfg.output(ANALYSIS_FILES[2]), &descriptive.to_csv())?;

    let correlations = correlate_by_uoa(&sets, &corpus, &cfg.bootstrap_config());
    write_file(&cfg.output(ANALYSIS_FILES[3]), &correlations_csv(&correlations.results))?;
    let mut skipped = String::from("uoa,n,reason\n");
    for s in &correlations.skipped {
        skipped.push_str(&format!("{},{},\"{}\"\n", s.uoa, s.n, s.reason.replace('"', "\"\"")));
    }
    write_file(&cfg.output(ANALYSIS_FILES[4]), &skipped)?;

    let k = cfg.model.repetitions as usize;
    let complete = table.with_at_least(k);
    let panels: BTreeMap<MainPanel, ()> = corpus
        .articles()
        .iter()
        .filter_map(|a| main_panel(i64::from(a.uoa)).ok())
        .map(|p| (p, ()))
        .collect();
    let curves: Vec<IterationCurve> = panels
        .keys()
        .filter_map(|&p| iteration_curve(&complete, &corpus, p, k).ok())
        .collect();
    write_file(&cfg.output(ANALYSIS_FILES[5]), &curves_csv(&curves))?;

    let identical = identical_fraction(&complete).ok();
    let weighted = weighted_mean_rho(&correlations.results).ok();
    let final_mean = (!sets.is_empty())
        .then(|| sets.iter().map(|s| s.mean).sum::<f64>() / sets.len() as f64);
    let summary = format!(
        "metric,value\n\
         articles,{}\n\
         reports,{}\n\
         extraction_failures,{}\n\
         articles_with_all_repetitions,{}\n\
         identical_fraction,{}\n\
         weighted_mean_rho,{}\n\
         mean_score,{}\n\
         uoas_correlated,{}\n\
         uoas_skipped,{}\n",
        corpus.len(),
        reports.len(),
        extraction.failures.len(),
        complete.len(),
        fmt4(identical),
        fmt4(weighted),
        fmt4(final_mean),
        correlations.results.len(),
        correlations.skipped.len(),
    );
    write_file(&cfg.output(ANALYSIS_FILES[6]), &summary)?;

    let mut fig1 = String::from("x,y,ci_low,ci_high,n\n");
    for r in &correlations.results {
        fig1.push_str(&format!(
            "{},{:.4},{:.4},{:.4},{}\n",
            r.uoa, r.rho, r.ci_low, r.ci_high, r.n
        ));
    }
    write_file(&cfg.output(ANALYSIS_FILES[7]), &fig1)?;
    let mut fig2 = String::from("series,x,y\n");
    for c in &curves {
        for (k, rho) in &c.points {
            fig2.push_str(&format!("Main Panel {},{k},{rho:.4}\n", c.panel));
        }
    }
    write_file(&cfg.output(ANALYSIS_FILES[8]), &fig2)?;

    Ok(AnalysisReport {
        extraction,
        correlations,
        curves,
        identical_fraction: identical,
        weighted_mean_rho: weighted,
    })
}

/// Extract scores from the report store and compute every statistic.
pub fn cmd_analyze(cfg: &RunConfig) -> Result<AnalysisReport> {
    cfg.validate()?;
    let _lock = OutputLock::acquire(&cfg.output_dir())?;
    analyze(cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructureReport {
    pub first_set_reports: usize,
    pub all_reports: usize,
}

impl fmt::Display for StructureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "paragraph table over {} first-repetition reports, heading table over {} reports",
            self.first_set_reports, self.all_reports
        )
    }
}

fn structure(cfg: &RunConfig, spec_override: Option<&Path>) -> Result<StructureReport> {
    let specs = match spec_override
        .map(Path::to_path_buf)
        .or_else(|| cfg.structure.spec_file.as_ref().map(|p| cfg.resolve(p)))
    {
        Some(path) => {
            if !path.is_file() {
                return Err(PipelineError::Validation(format!(
                    "structure spec file not found: {}",
                    path.display()
                )));
            }
            load_pattern_specs(&path)?
        }
        None => default_specs(),
    };
    let corpus = load_ingested(cfg)?;
    let panel = cfg
        .structure
        .panel
        .as_deref()
        .and_then(MainPanel::from_letter);
    let in_panel: HashSet<&str> = corpus
        .articles()
        .iter()
        .filter(|a| panel.is_none() || main_panel(i64::from(a.uoa)).ok() == panel)
        .map(|a| a.id.as_str())
        .collect();
    let mut reports: Vec<RawReport> = run_reports(cfg, &corpus)?
        .into_iter()
        .filter(|r| in_panel.contains(r.article_id.as_str()))
        .collect();
    reports.sort_by(|a, b| (&a.article_id, a.rep_index).cmp(&(&b.article_id, b.rep_index)));
    let first: Vec<&str> = reports
        .iter()
        .filter(|r| r.rep_index == 0)
        .map(|r| r.text.as_str())
        .collect();
    let all: Vec<&str> = reports.iter().map(|r| r.text.as_str()).collect();

    let has_paragraph_specs = specs.iter().any(|s| s.paragraph_index.is_some());
    let has_heading_specs = specs.iter().any(|s| s.paragraph_index.is_none());
    let paragraphs = if has_paragraph_specs {
        paragraph_tables_csv(&paragraph_pattern_table(&first, &specs)?)
    } else {
        paragraph_tables_csv(&[])
    };
    write_file(&cfg.output(STRUCTURE_FILES[0]), &paragraphs)?;
    let headings = if has_heading_specs {
        heading_table_csv(&heading_frequency_table(&all, &specs)?)
    } else {
        heading_table_csv(&crate::structure::StructureTable {
            rows: Vec::new(),
            corpus_size: all.len(),
        })
    };
    write_file(&cfg.output(STRUCTURE_FILES[1]), &headings)?;
    Ok(StructureReport {
        first_set_reports: first.len(),
        all_reports: all.len(),
    })
}

/// Paragraph-pattern and heading tables over the stored reports. Paragraph
/// tables use the first repetition of each article, headings use all.
pub fn cmd_structure(cfg: &RunConfig, spec_file: Option<&Path>) -> Result<StructureReport> {
    cfg.validate()?;
    let _lock = OutputLock::acquire(&cfg.output_dir())?;
    structure(cfg, spec_file)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub ingest: IngestReport,
    pub score: crate::client::BatchSummary,
    pub analysis: AnalysisReport,
    pub structure: StructureReport,
}

/// All four stages under one lock.
pub fn cmd_all(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    let _lock = OutputLock::acquire(&cfg.output_dir())?;
    let ingest = ingest(cfg)?;
    println!("{ingest}");
    let score = score_checked(cfg)?;
    let analysis = analyze(cfg)?;
    println!("{analysis}");
    let structure = structure(cfg, None)?;
    println!("{structure}");
    Ok(RunReport {
        ingest,
        score,
        analysis,
        structure,
    })
}
