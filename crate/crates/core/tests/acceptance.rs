//! Acceptance criteria, one line each. Runs as a plain binary so the
//! verdict lines are always visible in `cargo test` output.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::panic;
use std::path::Path;
use std::process::Command;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use rqscore::client::mock::mock_generate;
use rqscore::client::{
    run_batch, BackendError, ChatBackend, ChatRequest, MockProfile, ModelConfig, ReportStore,
};
use rqscore::corpus::{filter_short_abstracts, Article, Corpus, Provenance};
use rqscore::extractor::{extract_criterion_scores, extract_overall_score};
use rqscore::protocol::{MainPanel, TemplateSet};
use rqscore::stats::{
    bootstrap_ci, identical_fraction, iteration_curve, spearman, strength_ratio, BootstrapConfig,
    RepScoreTable,
};
use rqscore::structure::format_percentage;
use rqscore::synthetic::SyntheticCorpus;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, started: Instant) -> Result<(), String> {
    let took = started.elapsed();
    ensure(took < limit, || format!("took {took:.2?}, limit {limit:?}"))
}

// ---------------------------------------------------------------- 1

fn oracle_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|a| {
            let below = v.iter().filter(|b| *b < a).count() as f64;
            let tied = v.iter().filter(|b| *b == a).count() as f64;
            below + (tied + 1.0) / 2.0
        })
        .collect()
}

fn oracle_spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 3 {
        return None;
    }
    let (rx, ry) = (oracle_ranks(x), oracle_ranks(y));
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..x.len() {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx).powi(2);
        syy += (ry[i] - my).powi(2);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

fn spearman_oracle() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut degenerate = 0;
    for case in 0..1000 {
        let n = rng.gen_range(2..=20);
        let x: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(1..=5u8))).collect();
        let y: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(1..=5u8))).collect();
        let pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
        match (oracle_spearman(&x, &y), spearman(&pairs)) {
            (Some(want), Ok(got)) => {
                worst = worst.max((want - got).abs());
                ensure((want - got).abs() <= 1e-12, || {
                    format!("case {case}: oracle {want}, got {got}")
                })?;
            }
            (None, Err(_)) => degenerate += 1,
            (want, got) => return Err(format!("case {case}: oracle {want:?}, got {got:?}")),
        }
    }
    within(Duration::from_secs(5), started)?;
    Ok(format!("max |diff| {worst:.1e}, {degenerate} degenerate cases agreed"))
}

// ---------------------------------------------------------------- 2

fn bootstrap_coverage() -> Outcome {
    let started = Instant::now();
    let r: f64 = 0.5;
    // population Spearman of a bivariate normal with Pearson r
    let true_rho = 6.0 / std::f64::consts::PI * (r / 2.0).asin();
    let z = Normal::new(0.0, 1.0).unwrap();
    let dataset = |seed: u64| -> Vec<(f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..200)
            .map(|_| {
                let a: f64 = z.sample(&mut rng);
                let b: f64 = z.sample(&mut rng);
                (a, r * a + (1.0 - r * r).sqrt() * b)
            })
            .collect()
    };
    let cfg = |seed| BootstrapConfig {
        samples: 1000,
        alpha: 0.05,
        seed,
    };

    let first = dataset(1000);
    let a = bootstrap_ci(&first, &cfg(7)).map_err(|e| e.to_string())?;
    let b = bootstrap_ci(&first, &cfg(7)).map_err(|e| e.to_string())?;
    ensure(a.0.to_bits() == b.0.to_bits() && a.1.to_bits() == b.1.to_bits(), || {
        format!("same seed gave {a:?} then {b:?}")
    })?;

    let mut covered = 0;
    for d in 0..200u64 {
        let (lo, hi) = bootstrap_ci(&dataset(d), &cfg(d)).map_err(|e| e.to_string())?;
        if lo <= true_rho && true_rho <= hi {
            covered += 1;
        }
    }
    let coverage = covered as f64 / 200.0;
    ensure(coverage >= 0.88, || format!("coverage {coverage:.3} < 0.88"))?;
    within(Duration::from_secs(120), started)?;
    Ok(format!("bit-exact rerun, coverage {coverage:.3} of true rho {true_rho:.4}"))
}

// ---------------------------------------------------------------- 3

fn descriptor(s: u8) -> &'static str {
    ["Nationally Recognised", "Internationally Recognised", "Internationally Excellent", "World-Leading"]
        [usize::from(s) - 1]
}

/// Reports in every documented layout with the planted overall score `s`.
/// Criterion scores are deliberately different from `s`.
fn layouts(s: u8) -> Vec<String> {
    let d = descriptor(s);
    let c = 5 - s;
    let other = if s == 1 { 2 } else { s - 1 };
    let criteria = format!(
        "**1. Originality ({c}*):** Novel framing.\n\n\
         **2. Significance ({c}*):** Useful to the field.\n\n\
         **3. Rigour ({c}*):** Sound methods."
    );
    vec![
        // long-form layout with heavy emphasis
        format!(
            "Assessment of: \u{201c}A Study\u{201d}\n\n****Overall Score: {s}*****\n\n\
             ****Justification:**** This article represents {d} research.\n\n\
             ****1. Originality ({c}*):****\n\nOriginal.\n\n\
             ****2. Significance ({c}*):****\n\nSignificant.\n\n\
             ****3. Rigour ({c}*):****\n\nRigorous.\n\n\
             ****Concluding Remarks:****\n\nThis article is a strong piece of research."
        ),
        format!(
            "## Assessment of: \"A Study\"\n\n**Overall Score: {s}*** ({d})\n\n\
             **Justification:**\n\n{criteria}\n\n**In conclusion**, a {d} paper."
        ),
        format!("## Evaluation of: 'A Study'\n\n**Overall Score: {s}*** - {d}\n\n{criteria}"),
        format!(
            "## Assessment of: A Study\n\n\
             Here's an assessment of the article abstract, based on the provided criteria:\n\n\
             **Detailed Breakdown:**\n\n{criteria}\n\n**Overall Score: {s}***"
        ),
        format!(
            "## Assessment of: \"A Study\"\n\n\
             Here's an assessment of the article, considering originality, significance and rigour.\n\n\
             **Detailed Assessment**\n\n{criteria}\n\n**Overall Score:** {s}*"
        ),
        format!("## Assessment of: \"A Study\"\n\n**Overall Score: {d} ({s}*)**\n\n{criteria}"),
        format!("Overall score: {s}*\n\nThe paper is clearly written."),
        format!(
            "## Assessment of: \"A Study\"\n\n### Overall Score: {s}* ({d})\n\n\
             **Rationale:** The study is well described.\n\n{criteria}"
        ),
        format!(
            "## Assessment of: \"A Study\"\n\n\
             This article makes a contribution at the {d} level.\n\n\
             {criteria}\n\nOverall Score: {s} *"
        ),
        format!(
            "## Assessment of: \"A Study\"\n\n**Overall Score: {other}***\n\n\
             {criteria}\n\nOn reflection the rigour is stronger than first assessed.\n\n\
             **Overall Score: {s}*** ({d})"
        ),
        format!(
            "## Assessment of: \"A Study\"\n\n\
             Here's a detailed breakdown of the assessment based on the provided criteria:\n\n\
             {criteria}\n\n**Overall Score: {s}*** ({d})"
        ),
        format!(
            "## Evaluation of: A Study\n\n**Justification:** Careful work.\n\n\
             __Overall Score: {s}*__\n\n**In conclusion**, {d}."
        ),
    ]
}

fn extraction_corpus() -> Outcome {
    let mut reference: Vec<(String, f64, Option<f64>)> = Vec::new();
    for s in 1..=4u8 {
        for text in layouts(s) {
            reference.push((text, f64::from(s), None));
        }
    }
    for (text, value, rounded) in [
        ("## Assessment of: \"A Study\"\n\n**Overall Score: 2.5* (Rounded to 3*)**\n\n**Justification:** Mixed.", 2.5, Some(3.0)),
        ("Overall score: 2.67, which rounds to 3*", 2.67, Some(3.0)),
        ("**Overall Score: 3.5*** (Rounded to 4*)\n\n**3. Rigour (3*):** Fine.", 3.5, Some(4.0)),
        ("**Overall Score: 1.5* (Rounding up to 2*)**", 1.5, Some(2.0)),
        ("## Assessment of: X\n\n**Overall Score:** 2.75* (Internationally Recognised to Excellent)", 2.75, None),
    ] {
        reference.push((text.to_string(), value, rounded));
    }
    ensure(reference.len() >= 40, || format!("only {} reports", reference.len()))?;

    for (i, (text, value, rounded)) in reference.iter().enumerate() {
        let got = extract_overall_score(text).map_err(|e| format!("report {i}: {e}\n{text}"))?;
        ensure(got.value == *value && got.rounded_companion == *rounded, || {
            format!("report {i}: want {value} / {rounded:?}, got {got:?}\n{text}")
        })?;
        ensure(got.was_fractional == (value.fract() != 0.0), || {
            format!("report {i}: was_fractional {}", got.was_fractional)
        })?;
    }
    let fractional = extract_overall_score("**Overall Score: 2.5* (Rounded to 3*)**").unwrap();
    ensure(fractional.value == 2.5, || format!("fractional case gave {}", fractional.value))?;
    let c = extract_criterion_scores(&layouts(1)[0]);
    ensure(
        (c.originality, c.significance, c.rigour) == (Some(4.0), Some(4.0), Some(4.0)),
        || format!("sample report criteria {c:?}"),
    )?;
    Ok(format!("{} reports, all exact, 2.5* (Rounded to 3*) -> 2.5", reference.len()))
}

// ---------------------------------------------------------------- 4

fn percentage_rendering() -> Outcome {
    let total = 24830;
    let table = [
        (24827, "100.0%"),
        (24824, "100.0%"),
        (24822, "100.0%"),
        (24784, "99.8%"),
        (20848, "84.0%"),
        (19529, "78.7%"),
        (12556, "50.6%"),
        (8327, "33.5%"),
        (7319, "29.5%"),
    ];
    for (count, want) in table {
        let got = format_percentage(count, total);
        ensure(got == want, || format!("{count}/{total}: want {want}, got {got}"))?;
    }
    Ok("24827/24830 -> 100.0%, 20848/24830 -> 84.0%, all heading rows exact".into())
}

// ---------------------------------------------------------------- 5

fn strength_ratios() -> Outcome {
    let a = strength_ratio(0.239, 0.285).map_err(|e| e.to_string())?;
    let b = strength_ratio(0.239, 0.252).map_err(|e| e.to_string())?;
    ensure((a - 83.8).abs() <= 0.2, || format!("{a:.3} vs 83.8"))?;
    ensure((b - 94.7).abs() <= 0.2, || format!("{b:.3} vs 94.7"))?;
    Ok(format!("{a:.2}% vs 83.8%, {b:.2}% vs 94.7%"))
}

// ---------------------------------------------------------------- 6

fn mock_table(corpus: &Corpus, profile: &MockProfile, seed: u64) -> Result<RepScoreTable, String> {
    let mut table = RepScoreTable::default();
    for a in corpus.articles() {
        for rep in 0..profile.repetitions {
            let report = mock_generate(a, rep, seed, profile);
            let s = extract_overall_score(&report.text)
                .map_err(|e| format!("{} rep {rep}: {e}", a.id))?;
            table.insert(&a.id, rep, s.value);
        }
    }
    Ok(table)
}

fn repetition_averaging() -> Outcome {
    let started = Instant::now();
    let corpus = SyntheticCorpus {
        uoas: vec![30],
        per_uoa: 10_000,
        institutions: 400,
        seed: 6,
    }
    .corpus()
    .map_err(|e| e.to_string())?;
    let gain = |q: f64| -> Result<(f64, f64), String> {
        let profile = MockProfile {
            agreement: q,
            ..MockProfile::default()
        };
        let table = mock_table(&corpus, &profile, 66)?;
        let identical = identical_fraction(&table).map_err(|e| e.to_string())?;
        let curve =
            iteration_curve(&table, &corpus, MainPanel::D, 5).map_err(|e| e.to_string())?;
        Ok((identical, curve.relative_gain().ok_or("no curve")?))
    };
    let (identical, gain_high) = gain(0.957)?;
    ensure((identical - 0.957).abs() <= 0.01, || {
        format!("identical fraction {identical:.4}")
    })?;
    ensure(gain_high <= 0.03, || format!("gain {gain_high:.4} > 0.03 at q=0.957"))?;
    let (_, gain_low) = gain(0.45)?;
    ensure(gain_low > gain_high, || {
        format!("gain at q=0.45 ({gain_low:.4}) not above q=0.957 ({gain_high:.4})")
    })?;
    within(Duration::from_secs(120), started)?;
    Ok(format!(
        "identical {identical:.4}, gain {:.2}% at q=0.957, {:.2}% at q=0.45",
        100.0 * gain_high,
        100.0 * gain_low
    ))
}

// ---------------------------------------------------------------- 7

fn run_cli(dir: &Path, parallelism: usize) -> Result<BTreeMap<String, Vec<u8>>, String> {
    SyntheticCorpus {
        uoas: vec![1, 7, 13, 25],
        per_uoa: 125,
        institutions: 25,
        seed: 77,
    }
    .write_inputs(dir)
    .map_err(|e| e.to_string())?;
    let config = dir.join("run.toml");
    fs::write(
        &config,
        format!(
            "seed = 4242\noutput_dir = \"out\"\n\n[corpus]\npath = \"corpus.csv\"\n\
             proxy_scores = \"proxy.csv\"\n\n[model]\nparallelism = {parallelism}\n"
        ),
    )
    .map_err(|e| e.to_string())?;
    let out = Command::new(env!("CARGO_BIN_EXE_rqscore"))
        .args(["--mock", "--config"])
        .arg(&config)
        .arg("all")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!(
            "exit {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        )
    })?;
    let mut bundle = BTreeMap::new();
    for entry in fs::read_dir(dir.join("out")).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        bundle.insert(name, fs::read(&path).map_err(|e| e.to_string())?);
    }
    Ok(bundle)
}

fn end_to_end_mock() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let one = run_cli(a.path(), 1)?;
    let eight = run_cli(b.path(), 8)?;

    let corr = String::from_utf8(one["correlations.csv"].clone()).unwrap();
    let mut uoas = Vec::new();
    for line in corr.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let rho: f64 = f[2].parse().unwrap();
        let lo: f64 = f[3].parse().unwrap();
        ensure(rho > 0.0 && lo > 0.0, || format!("UoA {}: rho {rho}, ci_low {lo}", f[0]))?;
        uoas.push(f[0].to_string());
    }
    ensure(uoas == ["1", "7", "13", "25"], || format!("correlated UoAs {uoas:?}"))?;

    let names: Vec<&String> = one.keys().collect();
    ensure(names == eight.keys().collect::<Vec<_>>(), || "file sets differ".into())?;
    for (name, bytes) in &one {
        ensure(eight[name] == *bytes, || format!("{name} differs between parallelism 1 and 8"))?;
    }
    let n_articles = String::from_utf8_lossy(&one["corpus.jsonl"]).lines().count();
    Ok(format!(
        "{n_articles} articles after filtering, all 4 UoAs rho > 0 with ci_low > 0, \
         {} files byte-identical at parallelism 1 and 8",
        one.len()
    ))
}

// ---------------------------------------------------------------- 8

fn normalized_len(s: &str) -> usize {
    s.split_whitespace().collect::<Vec<_>>().join(" ").chars().count()
}

fn filter_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut removed_total = 0;
    for case in 0..100 {
        let n_uoas = rng.gen_range(1..=5);
        let uoas: Vec<u8> = (0..n_uoas).map(|_| rng.gen_range(1..=34)).collect();
        let n = rng.gen_range(0..200);
        let articles: Vec<Article> = (0..n)
            .map(|i| {
                let words = rng.gen_range(1..5);
                let text: Vec<String> = (0..words)
                    .map(|_| "x".repeat(rng.gen_range(1..4)))
                    .collect();
                let sep = if rng.gen_bool(0.3) { "  \n " } else { " " };
                Article {
                    id: format!("c{case}-{i}"),
                    title: "T".into(),
                    abstract_text: text.join(sep),
                    uoa: uoas[rng.gen_range(0..uoas.len())],
                    institution: String::new(),
                    proxy_score: None,
                    ordinal: i,
                }
            })
            .collect();
        let corpus = Corpus::new(articles.clone(), Provenance::default()).unwrap();
        let kept: HashSet<String> = filter_short_abstracts(&corpus, 0.10)
            .map_err(|e| e.to_string())?
            .articles()
            .iter()
            .map(|a| a.id.clone())
            .collect();

        let mut groups: BTreeMap<u8, Vec<&Article>> = BTreeMap::new();
        for a in &articles {
            groups.entry(a.uoa).or_default().push(a);
        }
        for (uoa, mut group) in groups {
            let quota = group.len() / 10;
            // repeatedly take the shortest, latest-ingested article
            let mut removed = Vec::new();
            for _ in 0..quota {
                let pick = (0..group.len())
                    .min_by(|&i, &j| {
                        normalized_len(&group[i].abstract_text)
                            .cmp(&normalized_len(&group[j].abstract_text))
                            .then(group[j].ordinal.cmp(&group[i].ordinal))
                    })
                    .unwrap();
                removed.push(group.remove(pick));
            }
            for r in &removed {
                ensure(!kept.contains(&r.id), || format!("case {case} UoA {uoa}: {} kept", r.id))?;
            }
            for k in &group {
                ensure(kept.contains(&k.id), || format!("case {case} UoA {uoa}: {} removed", k.id))?;
                for r in &removed {
                    let (lr, lk) = (normalized_len(&r.abstract_text), normalized_len(&k.abstract_text));
                    ensure(lr < lk || (lr == lk && r.ordinal > k.ordinal), || {
                        format!("case {case}: removed {} ({lr}) vs kept {} ({lk})", r.id, k.id)
                    })?;
                }
            }
            removed_total += removed.len();
        }
    }
    Ok(format!("100 corpora, {removed_total} removals all match the oracle"))
}

// ---------------------------------------------------------------- 9

struct Instrumented {
    events: Mutex<Vec<(bool, String, u32)>>,
}

impl ChatBackend for Instrumented {
    fn model_id(&self) -> &str {
        "instrumented"
    }

    fn complete(&self, req: &ChatRequest<'_>) -> Result<String, BackendError> {
        let id = req.article.id.clone();
        self.events.lock().unwrap().push((true, id.clone(), req.rep_index));
        let jitter = id.bytes().map(u64::from).sum::<u64>() % 7;
        std::thread::sleep(Duration::from_micros(50 * jitter));
        self.events.lock().unwrap().push((false, id, req.rep_index));
        Ok(format!("**Overall Score: {}***", 1 + req.rep_index % 4))
    }
}

fn scheduler_order() -> Outcome {
    let corpus = SyntheticCorpus {
        uoas: vec![3, 12, 20, 31],
        per_uoa: 15,
        institutions: 3,
        seed: 9,
    }
    .corpus()
    .map_err(|e| e.to_string())?;
    let n = corpus.len();
    let reps = 4;
    for parallelism in [1, 8] {
        let backend = Instrumented {
            events: Mutex::default(),
        };
        let cfg = ModelConfig {
            repetitions: reps,
            parallelism,
            ..Default::default()
        };
        let mut store = ReportStore::in_memory();
        let summary = run_batch(&corpus, &TemplateSet::bundled(), &cfg, &backend, &mut store)
            .map_err(|e| e.to_string())?;
        ensure(summary.succeeded == n * reps as usize, || summary.to_string())?;
        let events = backend.events.into_inner().unwrap();
        let mut done = vec![0usize; reps as usize];
        for (start, id, k) in &events {
            if *start {
                if *k > 0 {
                    ensure(done[*k as usize - 1] == n, || {
                        format!(
                            "parallelism {parallelism}: {id} got rep {k} after only {} of {n} finished rep {}",
                            done[*k as usize - 1],
                            k - 1
                        )
                    })?;
                }
            } else {
                done[*k as usize] += 1;
            }
        }
    }
    Ok(format!("{n} articles x {reps} reps, no early repetition at parallelism 1 and 8"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("spearman matches brute-force oracle", spearman_oracle),
        ("bootstrap determinism and coverage", bootstrap_coverage),
        ("extraction corpus", extraction_corpus),
        ("percentage rendering", percentage_rendering),
        ("strength ratio arithmetic", strength_ratios),
        ("repetition averaging simulation", repetition_averaging),
        ("end-to-end mock pipeline", end_to_end_mock),
        ("corpus filter exactness", filter_exactness),
        ("scheduler non-consecutiveness", scheduler_order),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = panic::catch_unwind(check).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name} ({detail}; {secs:.2}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name} ({detail}; {secs:.2}s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
