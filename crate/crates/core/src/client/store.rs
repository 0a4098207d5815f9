use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::RawReport;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("report store {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("report store {path}, line {line}: {reason}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("duplicate report for article {article_id:?} rep {rep_index} model {model_id:?}")]
    Duplicate {
        article_id: String,
        rep_index: u32,
        model_id: String,
    },
}

type Key = (String, u32, String);

/// Append-only collection of reports, optionally mirrored to a JSONL file.
#[derive(Debug, Default)]
pub struct ReportStore {
    reports: Vec<RawReport>,
    index: HashMap<Key, usize>,
    sink: Option<(PathBuf, File)>,
}

impl ReportStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Open (or create) a JSONL store. A torn final line left by an
    /// interrupted write is truncated away before appending resumes.
    pub fn open(path: &Path) -> Result<Self, StoreError> {
        let io_err = |source| StoreError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(path)
            .map_err(io_err)?;
        let mut raw = String::new();
        file.read_to_string(&mut raw).map_err(io_err)?;
        let complete = match raw.rfind('\n') {
            Some(i) => i + 1,
            None => 0,
        };
        if complete < raw.len() {
            file.set_len(complete as u64).map_err(io_err)?;
            file.seek(SeekFrom::End(0)).map_err(io_err)?;
        }
        let mut store = Self::default();
        for (i, line) in BufReader::new(&raw.as_bytes()[..complete]).lines().enumerate() {
            let line = line.map_err(io_err)?;
            if line.trim().is_empty() {
                continue;
            }
            let report: RawReport =
                serde_json::from_str(&line).map_err(|e| StoreError::Corrupt {
                    path: path.to_path_buf(),
                    line: i + 1,
                    reason: e.to_string(),
                })?;
            store.insert(report)?;
        }
        store.sink = Some((path.to_path_buf(), file));
        Ok(store)
    }

    fn insert(&mut self, report: RawReport) -> Result<(), StoreError> {
        let key = (
            report.article_id.clone(),
            report.rep_index,
            report.model_id.clone(),
        );
        if self.index.contains_key(&key) {
            return Err(StoreError::Duplicate {
                article_id: key.0,
                rep_index: key.1,
                model_id: key.2,
            });
        }
        self.index.insert(key, self.reports.len());
        self.reports.push(report);
        Ok(())
    }

    /// Append one report; rejects a second report for the same key.
    pub fn append(&mut self, report: RawReport) -> Result<(), StoreError> {
        if self.contains(&report.article_id, report.rep_index, &report.model_id) {
            return Err(StoreError::Duplicate {
                article_id: report.article_id,
                rep_index: report.rep_index,
                model_id: report.model_id,
            });
        }
        if let Some((path, file)) = &mut self.sink {
            let mut line = serde_json::to_string(&report).expect("report serializes");
            line.push('\n');
            file.write_all(line.as_bytes())
                .and_then(|_| file.flush())
                .map_err(|source| StoreError::Io {
                    path: path.clone(),
                    source,
                })?;
        }
        self.insert(report)
    }

    pub fn contains(&self, article_id: &str, rep_index: u32, model_id: &str) -> bool {
        self.get(article_id, rep_index, model_id).is_some()
    }

    pub fn get(&self, article_id: &str, rep_index: u32, model_id: &str) -> Option<&RawReport> {
        self.index
            .get(&(article_id.to_string(), rep_index, model_id.to_string()))
            .map(|&i| &self.reports[i])
    }

    /// Reports in append order.
    pub fn reports(&self) -> &[RawReport] {
        &self.reports
    }

    pub fn for_model<'a>(&'a self, model_id: &'a str) -> impl Iterator<Item = &'a RawReport> + 'a {
        self.reports.iter().filter(move |r| r.model_id == model_id)
    }

    pub fn len(&self) -> usize {
        self.reports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reports.is_empty()
    }

    pub fn path(&self) -> Option<&Path> {
        self.sink.as_ref().map(|(p, _)| p.as_path())
    }
}
