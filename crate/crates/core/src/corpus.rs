//! Article corpus ingestion, proxy-score linking, the per-UoA short-abstract
//! filter and per-UoA descriptive statistics.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::protocol::UOA_COUNT;

/// Fraction of each UoA removed by [`filter_short_abstracts`] unless configured otherwise.
pub const DEFAULT_FILTER_FRACTION: f64 = 0.10;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown corpus format {0:?} (expected csv or jsonl)")]
    UnknownFormat(String),
    #[error("malformed csv in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("duplicate article id {0:?}")]
    DuplicateId(String),
    #[error("filter fraction {0} outside [0, 1)")]
    FractionOutOfRange(f64),
    #[error("article {0:?} has no score")]
    MissingScore(String),
    #[error("proxy score file {path}, line {line}: {reason}")]
    ProxyRecord {
        path: PathBuf,
        line: usize,
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Csv,
    Jsonl,
}

impl CorpusFormat {
    pub fn parse(s: &str) -> Result<Self, CorpusError> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "jsonl" | "ndjson" => Ok(Self::Jsonl),
            other => Err(CorpusError::UnknownFormat(other.to_string())),
        }
    }

    /// Guess the format from a file extension.
    pub fn from_path(path: &Path) -> Result<Self, CorpusError> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .unwrap_or_default();
        Self::parse(ext)
    }
}

/// One scored unit: a journal article represented by its title and abstract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub uoa: u8,
    #[serde(default)]
    pub institution: String,
    #[serde(default)]
    pub proxy_score: Option<f64>,
    /// Position in the source file; used for deterministic tie-breaking.
    pub ordinal: usize,
}

impl Article {
    /// Abstract length in characters after collapsing whitespace runs.
    pub fn abstract_len(&self) -> usize {
        normalized_len(&self.abstract_text)
    }
}

fn normalized_len(text: &str) -> usize {
    let mut n = 0;
    for (i, word) in text.split_whitespace().enumerate() {
        if i > 0 {
            n += 1;
        }
        n += word.chars().count();
    }
    n
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub source: Option<PathBuf>,
    pub filters: Vec<String>,
}

/// An ordered, duplicate-free collection of articles.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Corpus {
    articles: Vec<Article>,
    pub provenance: Provenance,
}

impl Corpus {
    /// Build a corpus, rejecting duplicate ids.
    pub fn new(articles: Vec<Article>, provenance: Provenance) -> Result<Self, CorpusError> {
        let mut seen = HashSet::new();
        for a in &articles {
            if !seen.insert(a.id.as_str()) {
                return Err(CorpusError::DuplicateId(a.id.clone()));
            }
        }
        Ok(Self {
            articles,
            provenance,
        })
    }

    pub fn articles(&self) -> &[Article] {
        &self.articles
    }

    pub fn len(&self) -> usize {
        self.articles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.articles.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Article> {
        self.articles.iter().find(|a| a.id == id)
    }

    /// Article counts keyed by UoA.
    pub fn uoa_counts(&self) -> BTreeMap<u8, usize> {
        let mut counts = BTreeMap::new();
        for a in &self.articles {
            *counts.entry(a.uoa).or_insert(0) += 1;
        }
        counts
    }

    /// Attach departmental proxy scores by (institution, UoA). Articles without
    /// a match keep whatever proxy score they already had. Returns the number
    /// of articles that have a proxy score afterwards.
    pub fn attach_proxy_scores(&mut self, table: &ProxyTable) -> usize {
        for a in &mut self.articles {
            if let Some(score) = table.get(&a.institution, a.uoa) {
                a.proxy_score = Some(score);
            }
        }
        self.articles
            .iter()
            .filter(|a| a.proxy_score.is_some())
            .count()
    }

    /// Persist as JSONL, one article per line.
    pub fn write_jsonl(&self, path: &Path) -> Result<(), CorpusError> {
        let io_err = |source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut out = std::io::BufWriter::new(File::create(path).map_err(io_err)?);
        for a in &self.articles {
            let line = serde_json::to_string(a).expect("article serializes");
            writeln!(out, "{line}").map_err(io_err)?;
        }
        out.flush().map_err(io_err)
    }

    /// Read a corpus previously written with [`Corpus::write_jsonl`].
    pub fn read_jsonl(path: &Path) -> Result<Self, CorpusError> {
        let io_err = |source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        };
        let reader = BufReader::new(File::open(path).map_err(io_err)?);
        let mut articles = Vec::new();
        for line in reader.lines() {
            let line = line.map_err(io_err)?;
            if line.trim().is_empty() {
                continue;
            }
            let a: Article = serde_json::from_str(&line).map_err(|e| {
                io_err(std::io::Error::new(std::io::ErrorKind::InvalidData, e))
            })?;
            articles.push(a);
        }
        Corpus::new(
            articles,
            Provenance {
                source: Some(path.to_path_buf()),
                filters: Vec::new(),
            },
        )
    }
}

/// A record that was rejected during ingestion.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordDiagnostic {
    /// 1-based record number in the source file (header excluded).
    pub record: usize,
    pub id: Option<String>,
    pub reason: String,
}

impl std::fmt::Display for RecordDiagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.id {
            Some(id) => write!(f, "record {} (id {id}): {}", self.record, self.reason),
            None => write!(f, "record {}: {}", self.record, self.reason),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadOutcome {
    pub corpus: Corpus,
    pub rejected: Vec<RecordDiagnostic>,
}

#[derive(Debug, Default, Deserialize)]
struct RawRecord {
    id: Option<String>,
    title: Option<String>,
    #[serde(rename = "abstract")]
    abstract_text: Option<String>,
    uoa: Option<serde_json::Value>,
    institution: Option<String>,
    proxy_score: Option<serde_json::Value>,
}

fn value_as_f64(v: &serde_json::Value) -> Option<f64> {
    match v {
        serde_json::Value::Number(n) => n.as_f64(),
        serde_json::Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

impl RawRecord {
    fn validate(self, record: usize, ordinal: usize) -> Result<Article, RecordDiagnostic> {
        let id = self
            .id
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty());
        let fail = |reason: String| RecordDiagnostic {
            record,
            id: id.clone(),
            reason,
        };
        let Some(article_id) = id.clone() else {
            return Err(fail("missing id".into()));
        };
        let title = self.title.unwrap_or_default().trim().to_string();
        if title.is_empty() {
            return Err(fail("missing title".into()));
        }
        let abstract_text = self.abstract_text.unwrap_or_default().trim().to_string();
        if abstract_text.is_empty() {
            return Err(fail("missing abstract".into()));
        }
        let uoa = match &self.uoa {
            None => return Err(fail("missing uoa".into())),
            Some(serde_json::Value::String(s)) if s.trim().is_empty() => {
                return Err(fail("missing uoa".into()))
            }
            Some(v) => value_as_f64(v)
                .filter(|x| x.fract() == 0.0)
                .ok_or_else(|| fail(format!("uoa {v} is not an integer")))?,
        };
        if !(1.0..=f64::from(UOA_COUNT)).contains(&uoa) {
            return Err(fail(format!("uoa {uoa} outside 1..={UOA_COUNT}")));
        }
        let proxy_score = match &self.proxy_score {
            None | Some(serde_json::Value::Null) => None,
            Some(serde_json::Value::String(s)) if s.trim().is_empty() => None,
            Some(v) => {
                let p = value_as_f64(v)
                    .ok_or_else(|| fail(format!("proxy_score {v} is not a number")))?;
                if !(1.0..=4.0).contains(&p) {
                    return Err(fail(format!("proxy_score {p} outside [1, 4]")));
                }
                Some(p)
            }
        };
        Ok(Article {
            id: article_id,
            title,
            abstract_text,
            uoa: uoa as u8,
            institution: self.institution.unwrap_or_default().trim().to_string(),
            proxy_score,
            ordinal,
        })
    }
}

/// Load a corpus from CSV or JSONL. Malformed records are rejected with a
/// diagnostic; a duplicate id aborts the load.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<LoadOutcome, CorpusError> {
    let io_err = |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::open(path).map_err(io_err)?;
    let raw: Vec<Result<RawRecord, String>> = match format {
        CorpusFormat::Csv => {
            let mut reader = csv::ReaderBuilder::new()
                .flexible(true)
                .from_reader(BufReader::new(file));
            let headers = match reader.headers() {
                Ok(h) => h.clone(),
                // a zero-byte file has no header row
                Err(e) if matches!(e.kind(), csv::ErrorKind::Io(_)) => {
                    return Err(CorpusError::Csv {
                        path: path.to_path_buf(),
                        source: e,
                    })
                }
                Err(_) => csv::StringRecord::new(),
            };
            let mut out = Vec::new();
            for row in reader.records() {
                let row = row.map_err(|source| CorpusError::Csv {
                    path: path.to_path_buf(),
                    source,
                })?;
                out.push(csv_record(&headers, &row));
            }
            out
        }
        CorpusFormat::Jsonl => {
            let mut out = Vec::new();
            for line in BufReader::new(file).lines() {
                let line = line.map_err(io_err)?;
                if line.trim().is_empty() {
                    continue;
                }
                out.push(serde_json::from_str::<RawRecord>(&line).map_err(|e| e.to_string()));
            }
            out
        }
    };

    let mut articles = Vec::new();
    let mut rejected = Vec::new();
    let mut seen = HashSet::new();
    for (i, rec) in raw.into_iter().enumerate() {
        let record = i + 1;
        let rec = match rec {
            Ok(r) => r,
            Err(reason) => {
                rejected.push(RecordDiagnostic {
                    record,
                    id: None,
                    reason,
                });
                continue;
            }
        };
        match rec.validate(record, articles.len()) {
            Ok(a) => {
                if !seen.insert(a.id.clone()) {
                    return Err(CorpusError::DuplicateId(a.id));
                }
                articles.push(a);
            }
            Err(d) => rejected.push(d),
        }
    }
    let corpus = Corpus::new(
        articles,
        Provenance {
            source: Some(path.to_path_buf()),
            filters: Vec::new(),
        },
    )?;
    Ok(LoadOutcome { corpus, rejected })
}

fn csv_record(headers: &csv::StringRecord, row: &csv::StringRecord) -> Result<RawRecord, String> {
    let mut rec = RawRecord::default();
    for (h, v) in headers.iter().zip(row.iter()) {
        let v = v.to_string();
        match h.trim() {
            "id" => rec.id = Some(v),
            "title" => rec.title = Some(v),
            "abstract" => rec.abstract_text = Some(v),
            "uoa" => rec.uoa = Some(serde_json::Value::String(v)),
            "institution" => rec.institution = Some(v),
            "proxy_score" => rec.proxy_score = Some(serde_json::Value::String(v)),
            _ => {}
        }
    }
    Ok(rec)
}

/// Departmental average scores keyed by (institution, UoA).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProxyTable {
    scores: HashMap<(String, u8), f64>,
}

impl ProxyTable {
    pub fn insert(&mut self, institution: &str, uoa: u8, score: f64) {
        self.scores.insert((institution.to_string(), uoa), score);
    }

    pub fn get(&self, institution: &str, uoa: u8) -> Option<f64> {
        self.scores.get(&(institution.to_string(), uoa)).copied()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// Read a proxy-score CSV with header `institution,uoa,proxy_score`.
pub fn load_proxy_scores(path: &Path) -> Result<ProxyTable, CorpusError> {
    #[derive(Deserialize)]
    struct Row {
        institution: String,
        uoa: u8,
        proxy_score: f64,
    }
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::Reader::from_reader(BufReader::new(file));
    let mut table = ProxyTable::default();
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        let bad = |reason: String| CorpusError::ProxyRecord {
            path: path.to_path_buf(),
            line: i + 2,
            reason,
        };
        let row = row.map_err(|e| bad(e.to_string()))?;
        if !(1..=UOA_COUNT).contains(&row.uoa) {
            return Err(bad(format!("uoa {} outside 1..={UOA_COUNT}", row.uoa)));
        }
        if !(1.0..=4.0).contains(&row.proxy_score) {
            return Err(bad(format!("proxy_score {} outside [1, 4]", row.proxy_score)));
        }
        table.insert(row.institution.trim(), row.uoa, row.proxy_score);
    }
    Ok(table)
}

/// Remove the `floor(fraction * n)` shortest abstracts within each UoA.
/// Equal lengths are resolved by ingestion order: the later article goes first.
pub fn filter_short_abstracts(corpus: &Corpus, fraction: f64) -> Result<Corpus, CorpusError> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(CorpusError::FractionOutOfRange(fraction));
    }
    let mut by_uoa: BTreeMap<u8, Vec<&Article>> = BTreeMap::new();
    for a in corpus.articles() {
        by_uoa.entry(a.uoa).or_default().push(a);
    }
    let mut removed: HashSet<&str> = HashSet::new();
    for group in by_uoa.values() {
        let n_remove = (fraction * group.len() as f64).floor() as usize;
        let mut ranked: Vec<(usize, usize, &str)> = group
            .iter()
            .map(|a| (a.abstract_len(), a.ordinal, a.id.as_str()))
            .collect();
        // shortest first; among equal lengths the latest-ingested is removed first
        ranked.sort_by(|x, y| x.0.cmp(&y.0).then(y.1.cmp(&x.1)));
        removed.extend(ranked.iter().take(n_remove).map(|r| r.2));
    }
    let kept = corpus
        .articles()
        .iter()
        .filter(|a| !removed.contains(a.id.as_str()))
        .cloned()
        .collect();
    let mut provenance = corpus.provenance.clone();
    provenance
        .filters
        .push(format!("short_abstracts(fraction={fraction})"));
    Ok(Corpus {
        articles: kept,
        provenance,
    })
}

/// One Table-1-style row.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptiveRow {
    pub uoa: u8,
    pub n_articles: usize,
    /// Mean proxy score over articles that have one.
    pub proxy_mean: Option<f64>,
    pub score_min: f64,
    pub score_max: f64,
    pub score_mean: f64,
}

/// Totals row: article count is summed, means are unweighted over UoAs.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptiveFooter {
    pub n_articles: usize,
    pub proxy_mean: Option<f64>,
    pub score_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DescriptiveTable {
    pub rows: Vec<DescriptiveRow>,
    pub footer: Option<DescriptiveFooter>,
}

pub fn descriptive_stats(
    corpus: &Corpus,
    scores: &HashMap<String, f64>,
) -> Result<DescriptiveTable, CorpusError> {
    let mut by_uoa: BTreeMap<u8, Vec<(&Article, f64)>> = BTreeMap::new();
    for a in corpus.articles() {
        let s = *scores
            .get(&a.id)
            .ok_or_else(|| CorpusError::MissingScore(a.id.clone()))?;
        by_uoa.entry(a.uoa).or_default().push((a, s));
    }
    let rows: Vec<DescriptiveRow> = by_uoa
        .into_iter()
        .map(|(uoa, group)| {
            let n = group.len();
            let proxies: Vec<f64> = group.iter().filter_map(|(a, _)| a.proxy_score).collect();
            let proxy_mean =
                (!proxies.is_empty()).then(|| proxies.iter().sum::<f64>() / proxies.len() as f64);
            let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
            for &(_, s) in &group {
                lo = lo.min(s);
                hi = hi.max(s);
                sum += s;
            }
            DescriptiveRow {
                uoa,
                n_articles: n,
                proxy_mean,
                score_min: lo,
                score_max: hi,
                score_mean: sum / n as f64,
            }
        })
        .collect();
    let footer = (!rows.is_empty()).then(|| {
        let proxies: Vec<f64> = rows.iter().filter_map(|r| r.proxy_mean).collect();
        DescriptiveFooter {
            n_articles: rows.iter().map(|r| r.n_articles).sum(),
            proxy_mean: (!proxies.is_empty())
                .then(|| proxies.iter().sum::<f64>() / proxies.len() as f64),
            score_mean: rows.iter().map(|r| r.score_mean).sum::<f64>() / rows.len() as f64,
        }
    });
    Ok(DescriptiveTable { rows, footer })
}

impl DescriptiveTable {
    /// CSV, one row per UoA plus a footer; the footer's min/max are rendered as `-`.
    pub fn to_csv(&self) -> String {
        let fmt = |x: Option<f64>| x.map(|v| format!("{v:.4}")).unwrap_or_default();
        let mut out = String::from("uoa,articles,proxy_mean,score_min,score_max,score_mean\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{:.4},{:.4},{:.4}\n",
                r.uoa,
                r.n_articles,
                fmt(r.proxy_mean),
                r.score_min,
                r.score_max,
                r.score_mean
            ));
        }
        if let Some(f) = &self.footer {
            out.push_str(&format!(
                "Total/Average,{},{},-,-,{:.4}\n",
                f.n_articles,
                fmt(f.proxy_mean),
                f.score_mean
            ));
        }
        out
    }
}
