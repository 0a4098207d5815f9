//! Repetition aggregation, Spearman correlation with percentile-bootstrap
//! confidence intervals, and the summary statistics built on them.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Article, Corpus};
use crate::extractor::ExtractionTable;
use crate::protocol::{main_panel, MainPanel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("too many degenerate bootstrap resamples ({redraws} redraws for {samples} samples)")]
    TooManyDegenerateResamples { redraws: usize, samples: usize },
    #[error("article {article_id:?} has {have} repetition score(s), {need} needed")]
    InsufficientReps {
        article_id: String,
        have: usize,
        need: usize,
    },
    #[error("articles have differing repetition counts ({0} and {1})")]
    RaggedReps(usize, usize),
    #[error("empty input")]
    EmptyInput,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Per-(article, repetition) scores.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RepScoreTable {
    by_article: BTreeMap<String, BTreeMap<u32, f64>>,
}

impl RepScoreTable {
    pub fn insert(&mut self, article_id: &str, rep_index: u32, score: f64) {
        self.by_article
            .entry(article_id.to_string())
            .or_default()
            .insert(rep_index, score);
    }

    pub fn from_extraction(table: &ExtractionTable) -> Self {
        let mut out = Self::default();
        for row in &table.scores {
            out.insert(&row.article_id, row.rep_index, row.score.value);
        }
        out
    }

    /// Scores for one article in repetition order.
    pub fn scores(&self, article_id: &str) -> Option<Vec<f64>> {
        self.by_article
            .get(article_id)
            .map(|m| m.values().copied().collect())
    }

    pub fn article_ids(&self) -> impl Iterator<Item = &str> {
        self.by_article.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.by_article.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_article.is_empty()
    }

    /// Keep only articles with at least `k` scores.
    pub fn with_at_least(&self, k: usize) -> Self {
        Self {
            by_article: self
                .by_article
                .iter()
                .filter(|(_, m)| m.len() >= k)
                .map(|(id, m)| (id.clone(), m.clone()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreSet {
    pub article_id: String,
    pub rep_scores: Vec<f64>,
    pub mean: f64,
}

/// How many repetitions to average.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Take {
    First(usize),
    All,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Mean of the first `k` repetition scores (by rep index) of every article.
pub fn aggregate(table: &RepScoreTable, take: Take) -> Result<Vec<ScoreSet>, StatsError> {
    if let Take::First(0) = take {
        return Err(StatsError::InvalidParameter("k must be at least 1".into()));
    }
    table
        .by_article
        .iter()
        .map(|(id, reps)| {
            let all: Vec<f64> = reps.values().copied().collect();
            let k = match take {
                Take::First(k) => k,
                Take::All => all.len(),
            };
            if all.len() < k || k == 0 {
                return Err(StatsError::InsufficientReps {
                    article_id: id.clone(),
                    have: all.len(),
                    need: k.max(1),
                });
            }
            let rep_scores = all[..k].to_vec();
            Ok(ScoreSet {
                article_id: id.clone(),
                mean: mean(&rep_scores),
                rep_scores,
            })
        })
        .collect()
}

/// 1-based ranks with tied values sharing the mean of their rank range.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j share ranks i+1..=j
        let r = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = r;
        }
        i = j;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

fn check_pairs(pairs: &[(f64, f64)]) -> Result<(), StatsError> {
    if pairs.len() < 3 {
        return Err(StatsError::DegenerateInput(format!(
            "need at least 3 pairs, got {}",
            pairs.len()
        )));
    }
    if pairs.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(StatsError::DegenerateInput("non-finite value".into()));
    }
    if pairs.iter().all(|p| p.0 == pairs[0].0) {
        return Err(StatsError::DegenerateInput("x is constant".into()));
    }
    if pairs.iter().all(|p| p.1 == pairs[0].1) {
        return Err(StatsError::DegenerateInput("y is constant".into()));
    }
    Ok(())
}

/// Spearman's rho: Pearson correlation of average ranks.
pub fn spearman(pairs: &[(f64, f64)]) -> Result<f64, StatsError> {
    check_pairs(pairs)?;
    let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    Ok(pearson(&average_ranks(&x), &average_ranks(&y)))
}

fn default_samples() -> usize {
    1000
}
fn default_alpha() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BootstrapConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            samples: default_samples(),
            alpha: default_alpha(),
            seed: 0,
        }
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Percentile-bootstrap confidence interval for Spearman's rho.
///
/// Replicate `b` draws from its own ChaCha stream `(seed, b)`, so results do
/// not depend on evaluation order. A resample whose x or y is constant is
/// redrawn; more than `samples` redraws in total is an error.
pub fn bootstrap_ci(pairs: &[(f64, f64)], cfg: &BootstrapConfig) -> Result<(f64, f64), StatsError> {
    check_pairs(pairs)?;
    if cfg.samples < 100 {
        return Err(StatsError::InvalidParameter(format!(
            "bootstrap samples {} < 100",
            cfg.samples
        )));
    }
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(StatsError::InvalidParameter(format!("alpha {} outside (0, 1)", cfg.alpha)));
    }
    let n = pairs.len();
    let mut rhos = Vec::with_capacity(cfg.samples);
    let mut redraws = 0;
    let mut resample = Vec::with_capacity(n);
    for b in 0..cfg.samples {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(b as u64);
        loop {
            resample.clear();
            resample.extend((0..n).map(|_| pairs[rng.gen_range(0..n)]));
            match spearman(&resample) {
                Ok(r) => {
                    rhos.push(r);
                    break;
                }
                Err(_) => {
                    redraws += 1;
                    if redraws > cfg.samples {
                        return Err(StatsError::TooManyDegenerateResamples {
                            redraws,
                            samples: cfg.samples,
                        });
                    }
                }
            }
        }
    }
    rhos.sort_by(f64::total_cmp);
    Ok((
        quantile_sorted(&rhos, cfg.alpha / 2.0),
        quantile_sorted(&rhos, 1.0 - cfg.alpha / 2.0),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub uoa: u8,
    pub n: usize,
    pub rho: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub bootstrap_samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedUoa {
    pub uoa: u8,
    pub n: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct UoaCorrelations {
    pub results: Vec<CorrelationResult>,
    pub skipped: Vec<SkippedUoa>,
}

fn proxy_pairs<'a>(
    articles: impl Iterator<Item = &'a Article>,
    value: impl Fn(&Article) -> Option<f64>,
) -> Vec<(f64, f64)> {
    articles
        .filter_map(|a| Some((value(a)?, a.proxy_score?)))
        .collect()
}

/// Spearman correlation and bootstrap CI between article mean scores and
/// proxy scores, separately for each UoA. Articles lacking either value are
/// left out; UoAs that cannot be correlated are reported as skipped.
pub fn correlate_by_uoa(
    score_sets: &[ScoreSet],
    corpus: &Corpus,
    cfg: &BootstrapConfig,
) -> UoaCorrelations {
    let means: HashMap<&str, f64> = score_sets
        .iter()
        .map(|s| (s.article_id.as_str(), s.mean))
        .collect();
    let mut by_uoa: BTreeMap<u8, Vec<&Article>> = BTreeMap::new();
    for a in corpus.articles() {
        by_uoa.entry(a.uoa).or_default().push(a);
    }
    let mut out = UoaCorrelations::default();
    for (uoa, articles) in by_uoa {
        let pairs = proxy_pairs(articles.into_iter(), |a| means.get(a.id.as_str()).copied());
        let n = pairs.len();
        let skip = |reason: String| SkippedUoa { uoa, n, reason };
        if n < 3 {
            out.skipped
                .push(skip(format!("{n} article(s) with scores and proxy scores, 3 needed")));
            continue;
        }
        let computed = spearman(&pairs).and_then(|rho| Ok((rho, bootstrap_ci(&pairs, cfg)?)));
        match computed {
            Ok((rho, (ci_low, ci_high))) => out.results.push(CorrelationResult {
                uoa,
                n,
                rho,
                ci_low,
                ci_high,
                bootstrap_samples: cfg.samples,
                seed: cfg.seed,
            }),
            Err(e) => out.skipped.push(skip(e.to_string())),
        }
    }
    out
}

/// Share of articles whose repetition scores are all equal.
pub fn identical_fraction(table: &RepScoreTable) -> Result<f64, StatsError> {
    let mut reps = None;
    let mut identical = 0usize;
    for scores in table.by_article.values() {
        match reps {
            None => reps = Some(scores.len()),
            Some(r) if r != scores.len() => return Err(StatsError::RaggedReps(r, scores.len())),
            _ => {}
        }
        let mut it = scores.values();
        let first = it.next();
        if it.all(|s| Some(s) == first) {
            identical += 1;
        }
    }
    if table.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    Ok(identical as f64 / table.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationCurve {
    pub panel: MainPanel,
    /// Articles pooled into the curve.
    pub n: usize,
    /// `(k, rho)` for k = 1..=K.
    pub points: Vec<(usize, f64)>,
}

impl IterationCurve {
    pub fn rho(&self, k: usize) -> Option<f64> {
        self.points.iter().find(|p| p.0 == k).map(|p| p.1)
    }

    /// `rho(K) / rho(1) - 1`.
    pub fn relative_gain(&self) -> Option<f64> {
        let first = self.points.first()?.1;
        let last = self.points.last()?.1;
        Some(last / first - 1.0)
    }
}

/// Correlation with proxy scores as a function of how many repetitions are
/// averaged, pooling all articles of `panel` that have a proxy score and a
/// repetition table entry. The `k = 1` point is the mean of the `K`
/// single-repetition correlations.
pub fn iteration_curve(
    table: &RepScoreTable,
    corpus: &Corpus,
    panel: MainPanel,
    max_k: usize,
) -> Result<IterationCurve, StatsError> {
    if max_k == 0 {
        return Err(StatsError::InvalidParameter("K must be at least 1".into()));
    }
    let mut members: Vec<(Vec<f64>, f64)> = Vec::new();
    for a in corpus.articles() {
        if main_panel(i64::from(a.uoa)).ok() != Some(panel) {
            continue;
        }
        let (Some(proxy), Some(scores)) = (a.proxy_score, table.scores(&a.id)) else {
            continue;
        };
        if scores.len() < max_k {
            return Err(StatsError::InsufficientReps {
                article_id: a.id.clone(),
                have: scores.len(),
                need: max_k,
            });
        }
        members.push((scores, proxy));
    }
    let single: Vec<f64> = (0..max_k)
        .map(|r| {
            let pairs: Vec<(f64, f64)> = members.iter().map(|(s, p)| (s[r], *p)).collect();
            spearman(&pairs)
        })
        .collect::<Result<_, _>>()?;
    let mut points = vec![(1, mean(&single))];
    for k in 2..=max_k {
        let pairs: Vec<(f64, f64)> = members.iter().map(|(s, p)| (mean(&s[..k]), *p)).collect();
        points.push((k, spearman(&pairs)?));
    }
    Ok(IterationCurve {
        panel,
        n: members.len(),
        points,
    })
}

/// Sample-size weighted mean of correlations.
pub fn weighted_mean_rho(results: &[CorrelationResult]) -> Result<f64, StatsError> {
    if results.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    if let Some(r) = results.iter().find(|r| r.n == 0) {
        return Err(StatsError::InvalidParameter(format!("uoa {} has n = 0", r.uoa)));
    }
    let total: usize = results.iter().map(|r| r.n).sum();
    Ok(results.iter().map(|r| r.n as f64 * r.rho).sum::<f64>() / total as f64)
}

/// `100 * rho_a / rho_b`, the strength of one correlation relative to another.
pub fn strength_ratio(rho_a: f64, rho_b: f64) -> Result<f64, StatsError> {
    if rho_b == 0.0 {
        return Err(StatsError::DegenerateInput("zero denominator".into()));
    }
    Ok(100.0 * rho_a / rho_b)
}

/// One-decimal percentage, e.g. `83.9%`.
pub fn render_percent(value: f64) -> String {
    format!("{value:.1}%")
}

pub fn correlations_csv(results: &[CorrelationResult]) -> String {
    let mut out = String::from("uoa,n,rho,ci_low,ci_high,B,seed\n");
    for r in results {
        out.push_str(&format!(
            "{},{},{:.4},{:.4},{:.4},{},{}\n",
            r.uoa, r.n, r.rho, r.ci_low, r.ci_high, r.bootstrap_samples, r.seed
        ));
    }
    out
}

pub fn curves_csv(curves: &[IterationCurve]) -> String {
    let mut out = String::from("panel,k,rho\n");
    for c in curves {
        for (k, rho) in &c.points {
            out.push_str(&format!("{},{k},{rho:.4}\n", c.panel));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Provenance;

    fn table(rows: &[(&str, &[f64])]) -> RepScoreTable {
        let mut t = RepScoreTable::default();
        for (id, scores) in rows {
            for (i, s) in scores.iter().enumerate() {
                t.insert(id, i as u32, *s);
            }
        }
        t
    }

    #[test]
    fn aggregate_examples() {
        let t = table(&[("a", &[3.0; 5]), ("b", &[2.0, 3.0, 3.0, 3.0, 3.0])]);
        let sets = aggregate(&t, Take::All).unwrap();
        assert_eq!(sets[0].mean, 3.0);
        assert!((sets[1].mean - 2.8).abs() < 1e-12);
        let t = table(&[("c", &[2.0, 4.0, 4.0])]);
        assert_eq!(aggregate(&t, Take::First(1)).unwrap()[0].mean, 2.0);
        assert!(matches!(
            aggregate(&t, Take::First(4)),
            Err(StatsError::InsufficientReps { have: 3, need: 4, .. })
        ));
    }

    #[test]
    fn spearman_perfect() {
        assert_eq!(spearman(&[(1.0, 10.0), (2.0, 20.0), (3.0, 30.0)]).unwrap(), 1.0);
        assert_eq!(spearman(&[(1.0, 30.0), (2.0, 20.0), (3.0, 10.0)]).unwrap(), -1.0);
    }

    #[test]
    fn spearman_with_ties_matches_hand_computation() {
        // x ranks 1, 2.5, 2.5, 4; y ranks 1, 3, 2, 4
        let rho = spearman(&[(1.0, 1.0), (2.0, 3.0), (2.0, 2.0), (3.0, 4.0)]).unwrap();
        // centred x: -1.5, 0, 0, 1.5; centred y: -1.5, .5, -.5, 1.5
        // sxy = 4.5, sxx = 4.5, syy = 5
        let expected = 4.5 / (4.5f64 * 5.0).sqrt();
        assert!((rho - expected).abs() < 1e-15);
    }

    #[test]
    fn spearman_degenerate() {
        assert!(matches!(
            spearman(&[(1.0, 1.0), (2.0, 1.0), (3.0, 1.0)]),
            Err(StatsError::DegenerateInput(_))
        ));
        assert!(spearman(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
        assert!(spearman(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)]).is_err());
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), [3.5, 1.0, 3.5, 2.0]);
        assert_eq!(average_ranks(&[]), Vec::<f64>::new());
    }

    #[test]
    fn bootstrap_seeded_and_ordered() {
        let pairs: Vec<(f64, f64)> = (0..40)
            .map(|i| (i as f64, ((i * 7) % 11) as f64 + i as f64 / 5.0))
            .collect();
        let cfg = BootstrapConfig {
            seed: 7,
            ..Default::default()
        };
        let a = bootstrap_ci(&pairs, &cfg).unwrap();
        let b = bootstrap_ci(&pairs, &cfg).unwrap();
        assert_eq!(a.0.to_bits(), b.0.to_bits());
        assert_eq!(a.1.to_bits(), b.1.to_bits());
        assert!(a.0 <= a.1 && a.0 >= -1.0 && a.1 <= 1.0);
        let other = bootstrap_ci(&pairs, &BootstrapConfig { seed: 8, ..cfg }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn bootstrap_rejects_bad_input() {
        let constant_y = [(1.0, 2.0), (2.0, 2.0), (3.0, 2.0), (4.0, 2.0)];
        assert!(matches!(
            bootstrap_ci(&constant_y, &BootstrapConfig::default()),
            Err(StatsError::DegenerateInput(_))
        ));
        let ok = [(1.0, 2.0), (2.0, 3.0), (3.0, 1.0), (4.0, 5.0)];
        let small = BootstrapConfig {
            samples: 99,
            ..Default::default()
        };
        assert!(matches!(bootstrap_ci(&ok, &small), Err(StatsError::InvalidParameter(_))));
    }

    #[test]
    fn bootstrap_gives_up_on_mostly_degenerate_data() {
        // x and y each have a single odd value, at different positions
        let mut pairs: Vec<(f64, f64)> = vec![(0.0, 1.0); 60];
        pairs[0].1 = 2.0;
        pairs[1].0 = 1.0;
        assert!(matches!(
            bootstrap_ci(&pairs, &BootstrapConfig::default()),
            Err(StatsError::TooManyDegenerateResamples { .. })
        ));
    }

    fn corpus_with_proxy(rows: &[(&str, u8, Option<f64>)]) -> Corpus {
        let arts = rows
            .iter()
            .enumerate()
            .map(|(i, (id, uoa, p))| Article {
                id: id.to_string(),
                title: "T".into(),
                abstract_text: "A".into(),
                uoa: *uoa,
                institution: String::new(),
                proxy_score: *p,
                ordinal: i,
            })
            .collect();
        Corpus::new(arts, Provenance::default()).unwrap()
    }

    #[test]
    fn correlate_perfect_and_skipped() {
        let c = corpus_with_proxy(&[
            ("a", 1, Some(2.0)),
            ("b", 1, Some(3.0)),
            ("c", 1, Some(3.5)),
            ("d", 1, Some(2.5)),
            ("e", 2, Some(3.0)),
            ("f", 2, Some(3.1)),
            ("g", 2, None),
        ]);
        let t = table(&[
            ("a", &[2.0]),
            ("b", &[3.0]),
            ("c", &[3.5]),
            ("d", &[2.5]),
            ("e", &[3.0]),
            ("f", &[2.0]),
            ("g", &[2.0]),
        ]);
        let sets = aggregate(&t, Take::All).unwrap();
        let out = correlate_by_uoa(&sets, &c, &BootstrapConfig::default());
        assert_eq!(out.results.len(), 1);
        assert_eq!(out.results[0].rho, 1.0);
        assert_eq!(out.results[0].n, 4);
        assert_eq!(out.skipped.len(), 1);
        assert_eq!((out.skipped[0].uoa, out.skipped[0].n), (2, 2));
    }

    #[test]
    fn identical_fraction_examples() {
        let t = table(&[("a", &[3.0; 5]), ("b", &[2.0, 3.0, 3.0, 3.0, 3.0])]);
        assert_eq!(identical_fraction(&t).unwrap(), 0.5);
        let t = table(&[("a", &[3.0]), ("b", &[2.0])]);
        assert_eq!(identical_fraction(&t).unwrap(), 1.0);
        let t = table(&[("a", &[3.0, 3.0]), ("b", &[2.0])]);
        assert!(matches!(identical_fraction(&t), Err(StatsError::RaggedReps(2, 1))));
    }

    #[test]
    fn flat_curve_when_reps_agree() {
        let rows: Vec<(String, u8, Option<f64>)> = (0..12)
            .map(|i| (format!("a{i}"), 26, Some(2.0 + (i % 5) as f64 * 0.3)))
            .collect();
        let c = corpus_with_proxy(
            &rows
                .iter()
                .map(|(id, u, p)| (id.as_str(), *u, *p))
                .collect::<Vec<_>>(),
        );
        let mut t = RepScoreTable::default();
        for i in 0..12 {
            for r in 0..5 {
                t.insert(&format!("a{i}"), r, 1.0 + (i % 4) as f64);
            }
        }
        let curve = iteration_curve(&t, &c, MainPanel::D, 5).unwrap();
        assert_eq!(curve.points.len(), 5);
        for (_, rho) in &curve.points {
            assert!((rho - curve.points[0].1).abs() < 1e-12);
        }
        assert_eq!(curve.n, 12);
        assert!(iteration_curve(&t, &c, MainPanel::D, 6).is_err());
    }

    #[test]
    fn weighted_mean_examples() {
        let r = |rho: f64, n: usize| CorrelationResult {
            uoa: 1,
            n,
            rho,
            ci_low: rho,
            ci_high: rho,
            bootstrap_samples: 1000,
            seed: 0,
        };
        assert!((weighted_mean_rho(&[r(0.1, 5), r(0.3, 5)]).unwrap() - 0.2).abs() < 1e-12);
        assert!((weighted_mean_rho(&[r(0.1, 1), r(0.3, 3)]).unwrap() - 0.25).abs() < 1e-12);
        assert_eq!(weighted_mean_rho(&[]), Err(StatsError::EmptyInput));
    }

    #[test]
    fn strength_ratio_examples() {
        assert_eq!(render_percent(strength_ratio(0.239, 0.285).unwrap()), "83.9%");
        assert_eq!(render_percent(strength_ratio(0.239, 0.252).unwrap()), "94.8%");
        assert_eq!(render_percent(strength_ratio(0.4, 0.4).unwrap()), "100.0%");
        assert!(strength_ratio(0.2, 0.0).is_err());
    }

    #[test]
    fn csv_rendering() {
        let r = CorrelationResult {
            uoa: 3,
            n: 10,
            rho: 0.123456,
            ci_low: -0.05,
            ci_high: 0.3,
            bootstrap_samples: 1000,
            seed: 42,
        };
        assert_eq!(
            correlations_csv(&[r]),
            "uoa,n,rho,ci_low,ci_high,B,seed\n3,10,0.1235,-0.0500,0.3000,1000,42\n"
        );
    }
}
