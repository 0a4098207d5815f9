//! Structural analysis of report corpora: which patterns open the first
//! paragraphs, and which headings or emphasised paragraph starts occur.
//!
//! Matching is literal and case-sensitive; markdown emphasis characters are
//! part of the pattern.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const OTHER_LABEL: &str = "other";

#[derive(Debug, Error)]
pub enum StructureError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad pattern spec in {path}, record {record}: {reason}")]
    BadSpec {
        path: PathBuf,
        record: usize,
        reason: String,
    },
    #[error("pattern spec set is empty")]
    EmptySpecs,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchMode {
    /// The paragraph starts with one of the patterns.
    #[default]
    Prefix,
    /// The whole paragraph equals one of the patterns.
    Exact,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternSpec {
    pub label: String,
    pub patterns: Vec<String>,
    pub mode: MatchMode,
    /// 1-based paragraph position, or `None` for "any paragraph".
    pub paragraph_index: Option<usize>,
}

impl PatternSpec {
    pub fn prefix(label: &str, patterns: &[&str], paragraph_index: Option<usize>) -> Self {
        Self {
            label: label.to_string(),
            patterns: patterns.iter().map(|p| p.to_string()).collect(),
            mode: MatchMode::Prefix,
            paragraph_index,
        }
    }

    pub fn exact(label: &str, patterns: &[&str], paragraph_index: Option<usize>) -> Self {
        Self {
            mode: MatchMode::Exact,
            ..Self::prefix(label, patterns, paragraph_index)
        }
    }

    pub fn matches(&self, paragraph: &str) -> bool {
        self.patterns.iter().any(|p| match self.mode {
            MatchMode::Prefix => paragraph.starts_with(p.as_str()),
            MatchMode::Exact => paragraph == p,
        })
    }
}

/// Paragraphs separated by blank lines, with `\r\n` and `\r` normalised,
/// each trimmed, empty ones dropped.
pub fn split_paragraphs(text: &str) -> Vec<String> {
    let normalized = text.replace("\r\n", "\n").replace('\r', "\n");
    let mut out = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    for line in normalized.split('\n') {
        if line.trim().is_empty() {
            if !current.is_empty() {
                out.push(current.join("\n").trim().to_string());
                current.clear();
            }
        } else {
            current.push(line);
        }
    }
    if !current.is_empty() {
        out.push(current.join("\n").trim().to_string());
    }
    out
}

/// `100 * count / total` rounded half-up to one decimal, e.g. `"84.0%"`.
/// Computed in integers so the rendering is exact.
pub fn format_percentage(count: usize, total: usize) -> String {
    if total == 0 {
        return "0.0%".into();
    }
    let (c, t) = (count as u128, total as u128);
    let tenths = (2000 * c + t) / (2 * t);
    format!("{}.{}%", tenths / 10, tenths % 10)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructureRow {
    pub label: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructureTable {
    pub rows: Vec<StructureRow>,
    pub corpus_size: usize,
}

impl StructureTable {
    pub fn count(&self, label: &str) -> Option<usize> {
        self.rows.iter().find(|r| r.label == label).map(|r| r.count)
    }

    pub fn percentage(&self, label: &str) -> Option<String> {
        self.count(label)
            .map(|c| format_percentage(c, self.corpus_size))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParagraphTable {
    pub paragraph_index: usize,
    pub table: StructureTable,
}

/// For each paragraph position named by `specs`, count which pattern the
/// report's paragraph at that position matches. The first matching spec in
/// order claims the report, and reports matching none fall into
/// [`OTHER_LABEL`], so each table's counts sum to the number of reports.
pub fn paragraph_pattern_table<S: AsRef<str>>(
    reports: &[S],
    specs: &[PatternSpec],
) -> Result<Vec<ParagraphTable>, StructureError> {
    if specs.is_empty() {
        return Err(StructureError::EmptySpecs);
    }
    let mut indices: Vec<usize> = specs.iter().filter_map(|s| s.paragraph_index).collect();
    indices.sort_unstable();
    indices.dedup();
    let paragraphs: Vec<Vec<String>> = reports.iter().map(|r| split_paragraphs(r.as_ref())).collect();

    Ok(indices
        .into_iter()
        .map(|index| {
            let at_index: Vec<&PatternSpec> = specs
                .iter()
                .filter(|s| s.paragraph_index == Some(index))
                .collect();
            let mut counts = vec![0usize; at_index.len()];
            let mut other = 0;
            for paras in &paragraphs {
                let hit = paras
                    .get(index - 1)
                    .and_then(|p| at_index.iter().position(|s| s.matches(p)));
                match hit {
                    Some(i) => counts[i] += 1,
                    None => other += 1,
                }
            }
            let mut rows: Vec<StructureRow> = at_index
                .iter()
                .zip(counts)
                .map(|(s, count)| StructureRow {
                    label: s.label.clone(),
                    count,
                })
                .collect();
            rows.push(StructureRow {
                label: OTHER_LABEL.into(),
                count: other,
            });
            ParagraphTable {
                paragraph_index: index,
                table: StructureTable {
                    rows,
                    corpus_size: reports.len(),
                },
            }
        })
        .collect())
}

/// Count reports with at least one paragraph starting with each spec's
/// pattern. Uses the specs without a paragraph index; rows are ordered by
/// descending count, ties in spec order.
pub fn heading_frequency_table<S: AsRef<str>>(
    reports: &[S],
    specs: &[PatternSpec],
) -> Result<StructureTable, StructureError> {
    let heading_specs: Vec<&PatternSpec> =
        specs.iter().filter(|s| s.paragraph_index.is_none()).collect();
    if heading_specs.is_empty() {
        return Err(StructureError::EmptySpecs);
    }
    let mut counts = vec![0usize; heading_specs.len()];
    for r in reports {
        let paras = split_paragraphs(r.as_ref());
        for (i, spec) in heading_specs.iter().enumerate() {
            if paras.iter().any(|p| spec.matches(p)) {
                counts[i] += 1;
            }
        }
    }
    let mut rows: Vec<(usize, StructureRow)> = heading_specs
        .iter()
        .zip(counts)
        .enumerate()
        .map(|(i, (s, count))| {
            (
                i,
                StructureRow {
                    label: s.label.clone(),
                    count,
                },
            )
        })
        .collect();
    rows.sort_by(|a, b| b.1.count.cmp(&a.1.count).then(a.0.cmp(&b.0)));
    Ok(StructureTable {
        rows: rows.into_iter().map(|(_, r)| r).collect(),
        corpus_size: reports.len(),
    })
}

/// Patterns for the opening paragraphs and the common headings of
/// structured evaluation reports.
pub fn default_specs() -> Vec<PatternSpec> {
    let overall = [
        "**Overall Score",
        "Overall Score",
        "**Overall score",
        "Overall score",
        "## Overall Score",
        "### Overall Score",
    ];
    vec![
        PatternSpec::prefix(
            "\"## Assessment of:\", followed by title",
            &["## Assessment of:"],
            Some(1),
        ),
        PatternSpec::prefix(
            "\"## Evaluation of:\", followed by title",
            &["## Evaluation of:"],
            Some(1),
        ),
        PatternSpec::prefix("Overall score, with or without a descriptor", &overall, Some(2)),
        PatternSpec::prefix(
            "Explanation that an assessment of the article abstract follows",
            &[
                "Here's an assessment of the article abstract",
                "Here is an assessment of the article abstract",
                "Okay, here's an assessment of the article abstract",
            ],
            Some(2),
        ),
        PatternSpec::prefix(
            "Explanation that an assessment of the article follows",
            &[
                "Here's an assessment of the article",
                "Here is an assessment of the article",
                "Okay, here's an assessment of the article",
            ],
            Some(2),
        ),
        PatternSpec::prefix(
            "The phrase \"Detailed assessment\"",
            &["**Detailed Assessment", "## Detailed Assessment", "Detailed Assessment"],
            Some(3),
        ),
        PatternSpec::exact(
            "The phrase \"Justification\"",
            &["**Justification:**", "**Justification**", "## Justification", "Justification:"],
            Some(3),
        ),
        PatternSpec::prefix(
            "The phrase \"Justification\", followed by a justification",
            &["**Justification", "Justification"],
            Some(3),
        ),
        PatternSpec::prefix(
            "An originality score",
            &["**1. Originality", "***1. Originality", "1. Originality", "**Originality"],
            Some(3),
        ),
        PatternSpec::prefix("Overall score, with or without a descriptor", &overall, Some(3)),
        PatternSpec::prefix(
            "Evaluative summary of the paper",
            &["This article", "This paper", "This study", "This research"],
            Some(3),
        ),
        PatternSpec::prefix(
            "The phrase \"Rationale\", followed by a justification",
            &["**Rationale", "Rationale"],
            Some(3),
        ),
        PatternSpec::exact(
            "Here's a detailed breakdown of the assessment based on the provided criteria:",
            &["Here's a detailed breakdown of the assessment based on the provided criteria:"],
            Some(3),
        ),
        PatternSpec::prefix("**3. Rigour...", &["**3. Rigour"], None),
        PatternSpec::prefix("**1. Originality...", &["**1. Originality"], None),
        PatternSpec::prefix("**2. Significance...", &["**2. Significance"], None),
        PatternSpec::prefix("**Overall Score...", &["**Overall Score"], None),
        PatternSpec::prefix("**Justification...", &["**Justification"], None),
        PatternSpec::prefix("**In conclusion...", &["**In conclusion"], None),
        PatternSpec::prefix("## Assessment of ...", &["## Assessment of"], None),
        PatternSpec::prefix("**Detailed Breakdown...", &["**Detailed Breakdown"], None),
        PatternSpec::prefix("Here's an assessment of ...", &["Here's an assessment of"], None),
    ]
}

#[derive(Debug, Deserialize)]
struct SpecRecord {
    label: String,
    prefix: String,
    #[serde(default)]
    paragraph_index: Option<String>,
    #[serde(default, rename = "match")]
    mode: Option<MatchMode>,
}

/// Read pattern specs from CSV (`label,prefix,paragraph_index[,match]`) or
/// JSONL with the same keys. Rows sharing a label and paragraph index are
/// merged into one spec with alternative patterns.
pub fn load_pattern_specs(path: &Path) -> Result<Vec<PatternSpec>, StructureError> {
    let io_err = |source| StructureError::Io {
        path: path.to_path_buf(),
        source,
    };
    let bad = |record: usize, reason: String| StructureError::BadSpec {
        path: path.to_path_buf(),
        record,
        reason,
    };
    let file = File::open(path).map_err(io_err)?;
    let is_jsonl = matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("jsonl" | "ndjson")
    );
    let mut records = Vec::new();
    if is_jsonl {
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(io_err)?;
            if line.trim().is_empty() {
                continue;
            }
            let mut value: serde_json::Value =
                serde_json::from_str(&line).map_err(|e| bad(i + 1, e.to_string()))?;
            // accept a numeric paragraph_index
            if let Some(v) = value.get_mut("paragraph_index") {
                if v.is_number() {
                    *v = serde_json::Value::String(v.to_string());
                }
            }
            let rec: SpecRecord =
                serde_json::from_value(value).map_err(|e| bad(i + 1, e.to_string()))?;
            records.push(rec);
        }
    } else {
        let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(file);
        for (i, rec) in reader.deserialize::<SpecRecord>().enumerate() {
            records.push(rec.map_err(|e| bad(i + 1, e.to_string()))?);
        }
    }

    let mut specs: Vec<PatternSpec> = Vec::new();
    for (i, rec) in records.into_iter().enumerate() {
        let index = match rec.paragraph_index.as_deref().map(str::trim) {
            None | Some("") | Some("any") => None,
            Some(s) => match s.parse::<usize>() {
                Ok(n) if n >= 1 => Some(n),
                _ => return Err(bad(i + 1, format!("paragraph_index {s:?} is not a positive integer"))),
            },
        };
        if rec.prefix.is_empty() {
            return Err(bad(i + 1, "empty prefix".into()));
        }
        let mode = rec.mode.unwrap_or_default();
        match specs
            .iter_mut()
            .find(|s| s.label == rec.label && s.paragraph_index == index)
        {
            Some(existing) if existing.mode == mode => existing.patterns.push(rec.prefix),
            Some(_) => {
                return Err(bad(i + 1, format!("label {:?} mixes match modes", rec.label)))
            }
            None => specs.push(PatternSpec {
                label: rec.label,
                patterns: vec![rec.prefix],
                mode,
                paragraph_index: index,
            }),
        }
    }
    if specs.is_empty() {
        return Err(StructureError::EmptySpecs);
    }
    Ok(specs)
}

pub fn paragraph_tables_csv(tables: &[ParagraphTable]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["paragraph", "frequency", "percentage", "content"])
        .unwrap();
    for t in tables {
        for row in &t.table.rows {
            w.write_record([
                t.paragraph_index.to_string(),
                row.count.to_string(),
                format_percentage(row.count, t.table.corpus_size),
                row.label.clone(),
            ])
            .unwrap();
        }
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

pub fn heading_table_csv(table: &StructureTable) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["heading", "frequency", "percentage"]).unwrap();
    for row in &table.rows {
        w.write_record([
            row.label.clone(),
            row.count.to_string(),
            format_percentage(row.count, table.corpus_size),
        ])
        .unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

/// Labels must be unique per paragraph position.
pub fn check_unique_labels(specs: &[PatternSpec]) -> Result<(), String> {
    let mut seen = HashSet::new();
    for s in specs {
        if !seen.insert((s.label.as_str(), s.paragraph_index)) {
            return Err(format!("duplicate label {:?}", s.label));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_examples() {
        assert_eq!(split_paragraphs("a\n\nb"), ["a", "b"]);
        assert_eq!(split_paragraphs("a\r\n\r\nb"), ["a", "b"]);
        assert!(split_paragraphs("").is_empty());
        assert_eq!(split_paragraphs("  x\ny  \n \t \n\n\nz\n"), ["x\ny", "z"]);
    }

    #[test]
    fn percentages_are_exact() {
        assert_eq!(format_percentage(24827, 24830), "100.0%");
        assert_eq!(format_percentage(20848, 24830), "84.0%");
        assert_eq!(format_percentage(24784, 24830), "99.8%");
        assert_eq!(format_percentage(7319, 24830), "29.5%");
        assert_eq!(format_percentage(0, 24830), "0.0%");
        assert_eq!(format_percentage(0, 0), "0.0%");
        // exact half rounds up
        assert_eq!(format_percentage(1, 2000), "0.1%");
        assert_eq!(format_percentage(1, 3), "33.3%");
    }

    #[test]
    fn first_paragraph_counts() {
        let reports = ["## Assessment of: X\n\nbody", "## Assessment of: \"Y\"\n\nbody"];
        let specs = [PatternSpec::prefix("assessment", &["## Assessment of:"], Some(1))];
        let tables = paragraph_pattern_table(&reports, &specs).unwrap();
        assert_eq!(tables.len(), 1);
        assert_eq!(tables[0].table.count("assessment"), Some(2));
        assert_eq!(tables[0].table.percentage("assessment").unwrap(), "100.0%");
        assert_eq!(tables[0].table.count(OTHER_LABEL), Some(0));
    }

    #[test]
    fn unmatched_goes_to_other() {
        let reports = ["Something else\n\nbody", ""];
        let specs = [PatternSpec::prefix("assessment", &["## Assessment of:"], Some(1))];
        let t = &paragraph_pattern_table(&reports, &specs).unwrap()[0].table;
        assert_eq!(t.count("assessment"), Some(0));
        assert_eq!(t.count(OTHER_LABEL), Some(2));
    }

    #[test]
    fn first_matching_spec_claims_report() {
        let reports = [
            "T\n\n**Justification:**\n\nx",
            "T\n\n**Justification:** because\n\nx",
        ];
        let specs = default_specs();
        let tables = paragraph_pattern_table(&reports, &specs).unwrap();
        let third = tables.iter().find(|t| t.paragraph_index == 3).unwrap();
        // third paragraph is "x" for both
        assert_eq!(third.table.count(OTHER_LABEL), Some(2));
        let second = tables.iter().find(|t| t.paragraph_index == 2).unwrap();
        assert_eq!(second.table.count(OTHER_LABEL), Some(2));
        let reports = ["T\n\nS\n\n**Justification:**", "T\n\nS\n\n**Justification:** because"];
        let third = paragraph_pattern_table(&reports, &specs).unwrap()[2].table.clone();
        assert_eq!(third.count("The phrase \"Justification\""), Some(1));
        assert_eq!(
            third.count("The phrase \"Justification\", followed by a justification"),
            Some(1)
        );
        let total: usize = third.rows.iter().map(|r| r.count).sum();
        assert_eq!(total, 2);
    }

    #[test]
    fn headings_count_once_per_report() {
        let reports = [
            "**3. Rigour (3*):** a\n\n**3. Rigour** again",
            "nothing here\n**3. Rigour** not at paragraph start",
        ];
        let specs = [
            PatternSpec::prefix("**3. Rigour...", &["**3. Rigour"], None),
            PatternSpec::prefix("**Zzz...", &["**Zzz"], None),
        ];
        let t = heading_frequency_table(&reports, &specs).unwrap();
        assert_eq!(t.count("**3. Rigour..."), Some(1));
        assert_eq!(t.count("**Zzz..."), Some(0));
        assert_eq!(t.percentage("**Zzz...").unwrap(), "0.0%");
    }

    #[test]
    fn matching_is_case_sensitive() {
        let s = PatternSpec::prefix("j", &["**Justification"], None);
        assert!(s.matches("**Justification:** x"));
        assert!(!s.matches("**justification:** x"));
    }

    #[test]
    fn spec_file_loading() {
        let dir = tempfile::tempdir().unwrap();
        let csv_path = dir.path().join("specs.csv");
        std::fs::write(
            &csv_path,
            "label,prefix,paragraph_index\n\
             first,## Assessment of:,1\n\
             first,## Evaluation of:,1\n\
             rigour,**3. Rigour,\n",
        )
        .unwrap();
        let specs = load_pattern_specs(&csv_path).unwrap();
        assert_eq!(specs.len(), 2);
        assert_eq!(specs[0].patterns.len(), 2);
        assert_eq!(specs[1].paragraph_index, None);

        let jsonl_path = dir.path().join("specs.jsonl");
        std::fs::write(
            &jsonl_path,
            "{\"label\":\"j\",\"prefix\":\"**Justification:**\",\"paragraph_index\":3,\"match\":\"exact\"}\n",
        )
        .unwrap();
        let specs = load_pattern_specs(&jsonl_path).unwrap();
        assert_eq!(specs[0].mode, MatchMode::Exact);
        assert_eq!(specs[0].paragraph_index, Some(3));

        let empty = dir.path().join("empty.csv");
        std::fs::write(&empty, "label,prefix,paragraph_index\n").unwrap();
        assert!(matches!(load_pattern_specs(&empty), Err(StructureError::EmptySpecs)));
    }

    #[test]
    fn default_specs_have_unique_labels() {
        check_unique_labels(&default_specs()).unwrap();
    }
}
