//! Star-score extraction from free-text evaluation reports.
//!
//! Only pattern-grammar matches count. The recognised overall-score forms are
//!
//! * `Overall Score: N*` with any markdown emphasis around the label or value
//!   (`**Overall Score: 4***`, `****Overall Score: 4*****`, `**Overall Score:** 3*`);
//! * the same followed by a descriptor (`Overall Score: 3* (Internationally Excellent)`);
//! * a descriptor followed by the score in parentheses
//!   (`Overall Score: World leading (4*)`);
//! * fractional scores with a rounded companion in the same statement
//!   (`Overall Score: 2.5* (Rounded to 3*)`, `Overall score: 2.67, which rounds to 3*`),
//!   where the unrounded value is returned.
//!
//! When several statements appear the last one is taken.

use std::sync::LazyLock;

use regex::Regex;
use serde::Serialize;
use thiserror::Error;

use crate::client::RawReport;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExtractError {
    #[error("no overall score found")]
    NoScoreFound,
    #[error("score {0} outside [1, 4]")]
    ScoreOutOfRange(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractedScore {
    pub value: f64,
    /// Character offsets `[start, end)` of the matched statement.
    pub source_span: (usize, usize),
    pub was_fractional: bool,
    pub rounded_companion: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct CriterionScores {
    pub originality: Option<f64>,
    pub significance: Option<f64>,
    pub rigour: Option<f64>,
}

const NUM: &str = r"\d+(?:\.\d+)?";

static OVERALL_VALUE_FIRST: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(
        r"(?i)overall(?:[ \t]+quality)?[ \t]+score[ \t*_:\-–—]*(?P<value>{NUM})(?P<star>[ \t]*\*)?"
    ))
    .unwrap()
});

static OVERALL_DESCRIPTOR_FIRST: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(
        r"(?i)overall(?:[ \t]+quality)?[ \t]+score[ \t*_:\-–—]*[a-z][a-z \-]{{0,40}}?[ \t]*\([ \t]*(?P<value>{NUM})[ \t]*\*[ \t]*\)"
    ))
    .unwrap()
});

// Applied to the remainder of the statement's line.
static ROUNDED_COMPANION: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?i)^[^\n]*?\b(?:rounded|rounds|rounding)[ \t]+(?:up[ \t]+|down[ \t]+)?to[ \t]+[*_]*(?P<rounded>\d(?:\.0+)?)[ \t]*\*",
    )
    .unwrap()
});

fn criterion_regex(name: &str) -> Regex {
    Regex::new(&format!(
        r"(?im)^[ \t#>*_\-]*(?:\d+\.[ \t]*)?(?:score[ \t]+for[ \t]+)?{name}(?:[ \t]+score)?[ \t*_]*(?:\([ \t]*(?P<paren>{NUM})[ \t]*\*[ \t]*\)|[:\-–][ \t*_]*(?P<colon>{NUM})[ \t]*\*)"
    ))
    .unwrap()
}

static ORIGINALITY: LazyLock<Regex> = LazyLock::new(|| criterion_regex("originality"));
static SIGNIFICANCE: LazyLock<Regex> = LazyLock::new(|| criterion_regex("significance"));
static RIGOUR: LazyLock<Regex> = LazyLock::new(|| criterion_regex("rigou?r"));

fn char_offset(text: &str, byte: usize) -> usize {
    text[..byte].chars().count()
}

fn in_star_range(v: f64) -> bool {
    (1.0..=4.0).contains(&v)
}

/// Extract the recommended overall star score from a report.
pub fn extract_overall_score(text: &str) -> Result<ExtractedScore, ExtractError> {
    // (start, end, value) in bytes for every statement found
    let mut found: Vec<(usize, usize, &str)> = Vec::new();
    for re in [&*OVERALL_VALUE_FIRST, &*OVERALL_DESCRIPTOR_FIRST] {
        for cap in re.captures_iter(text) {
            let whole = cap.get(0).unwrap();
            found.push((whole.start(), whole.end(), cap.name("value").unwrap().as_str()));
        }
    }
    let &(start, mut end, raw) = found
        .iter()
        .max_by_key(|(start, _, _)| *start)
        .ok_or(ExtractError::NoScoreFound)?;
    let value: f64 = raw.parse().map_err(|_| ExtractError::NoScoreFound)?;
    if !in_star_range(value) {
        return Err(ExtractError::ScoreOutOfRange(value));
    }
    let was_fractional = value.fract() != 0.0;
    let mut rounded_companion = None;
    if was_fractional {
        if let Some(cap) = ROUNDED_COMPANION.captures(&text[end..]) {
            let r: f64 = cap["rounded"].parse().unwrap_or(f64::NAN);
            if in_star_range(r) && r.fract() == 0.0 {
                rounded_companion = Some(r);
                end += cap.get(0).unwrap().end();
            }
        }
    }
    Ok(ExtractedScore {
        value,
        source_span: (char_offset(text, start), char_offset(text, end)),
        was_fractional,
        rounded_companion,
    })
}

fn last_criterion(re: &Regex, text: &str) -> Option<f64> {
    re.captures_iter(text)
        .filter_map(|cap| {
            cap.name("paren")
                .or_else(|| cap.name("colon"))
                .and_then(|m| m.as_str().parse::<f64>().ok())
        })
        .filter(|v| in_star_range(*v))
        .last()
}

/// Per-criterion scores from headings such as `**1. Originality (4*):**` or
/// `Rigour: 3*`. Criteria without a heading score stay absent.
pub fn extract_criterion_scores(text: &str) -> CriterionScores {
    CriterionScores {
        originality: last_criterion(&ORIGINALITY, text),
        significance: last_criterion(&SIGNIFICANCE, text),
        rigour: last_criterion(&RIGOUR, text),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreRow {
    pub article_id: String,
    pub rep_index: u32,
    pub score: ExtractedScore,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractionFailure {
    pub article_id: String,
    pub rep_index: u32,
    pub reason: String,
}

/// Extraction results for a report store, both lists sorted by (article, rep).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExtractionTable {
    pub scores: Vec<ScoreRow>,
    pub failures: Vec<ExtractionFailure>,
}

impl ExtractionTable {
    pub fn failure_rate(&self) -> f64 {
        let total = self.scores.len() + self.failures.len();
        if total == 0 {
            0.0
        } else {
            self.failures.len() as f64 / total as f64
        }
    }

    pub fn scores_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["article_id", "rep_index", "score", "was_fractional", "rounded_companion"])
            .unwrap();
        for row in &self.scores {
            w.write_record([
                row.article_id.clone(),
                row.rep_index.to_string(),
                format!("{:.4}", row.score.value),
                row.score.was_fractional.to_string(),
                row.score
                    .rounded_companion
                    .map(|r| format!("{r:.4}"))
                    .unwrap_or_default(),
            ])
            .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }

    pub fn failures_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["article_id", "rep_index", "reason"]).unwrap();
        for f in &self.failures {
            w.write_record([f.article_id.as_str(), &f.rep_index.to_string(), &f.reason])
                .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

/// Run [`extract_overall_score`] over every report. Never drops a report:
/// each one ends up either in `scores` or in `failures`.
pub fn extract_batch<'a>(reports: impl IntoIterator<Item = &'a RawReport>) -> ExtractionTable {
    let mut table = ExtractionTable::default();
    for r in reports {
        match extract_overall_score(&r.text) {
            Ok(score) => table.scores.push(ScoreRow {
                article_id: r.article_id.clone(),
                rep_index: r.rep_index,
                score,
            }),
            Err(e) => table.failures.push(ExtractionFailure {
                article_id: r.article_id.clone(),
                rep_index: r.rep_index,
                reason: e.to_string(),
            }),
        }
    }
    table
        .scores
        .sort_by(|a, b| (&a.article_id, a.rep_index).cmp(&(&b.article_id, b.rep_index)));
    table
        .failures
        .sort_by(|a, b| (&a.article_id, a.rep_index).cmp(&(&b.article_id, b.rep_index)));
    table
}
