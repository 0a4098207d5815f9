//! Deterministic offline scorer that writes synthetic evaluation reports.
//!
//! Each article gets a latent quality (optionally tied to its proxy score).
//! With probability `agreement` every repetition reports the same star level;
//! otherwise each repetition is the latent plus fresh noise, rounded, and at
//! least one repetition is forced to differ so the article is never
//! accidentally unanimous.

use chrono::{DateTime, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{BackendError, ChatBackend, ChatRequest, RawReport};
use crate::corpus::Article;

pub const MOCK_MODEL_ID: &str = "mock";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QualityModel {
    /// Every article has the same latent quality.
    Constant { score: f64 },
    /// `center + slope * (proxy - center) + N(0, article_noise)`; articles
    /// without a proxy score use `center`.
    Latent {
        center: f64,
        slope: f64,
        article_noise: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MockProfile {
    pub quality: QualityModel,
    /// Probability that all repetitions of an article agree.
    pub agreement: f64,
    /// Per-repetition noise for non-agreeing articles.
    pub rep_noise: f64,
    pub repetitions: u32,
}

impl Default for MockProfile {
    fn default() -> Self {
        Self {
            quality: QualityModel::Latent {
                center: 2.75,
                slope: 1.0,
                article_noise: 0.35,
            },
            agreement: 0.957,
            rep_noise: 0.5,
            repetitions: 5,
        }
    }
}

impl MockProfile {
    pub fn constant(score: f64) -> Self {
        Self {
            quality: QualityModel::Constant { score },
            agreement: 1.0,
            ..Default::default()
        }
    }
}

fn stream_seed(seed: u64, parts: &[&[u8]]) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

fn to_star(x: f64) -> u8 {
    x.round().clamp(1.0, 4.0) as u8
}

/// Star levels for every repetition of one article.
pub fn mock_rep_scores(article: &Article, seed: u64, profile: &MockProfile, reps: u32) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, &[b"scores", article.id.as_bytes()]));
    let std_normal = Normal::new(0.0, 1.0).unwrap();
    let latent = match &profile.quality {
        QualityModel::Constant { score } => *score,
        QualityModel::Latent {
            center,
            slope,
            article_noise,
        } => {
            let proxy = article.proxy_score.unwrap_or(*center);
            center + slope * (proxy - center) + article_noise * std_normal.sample(&mut rng)
        }
    };
    let base = to_star(latent);
    let agrees = rng.gen::<f64>() < profile.agreement;
    let noise: Vec<f64> = (0..reps).map(|_| std_normal.sample(&mut rng)).collect();
    let forced = rng.gen_range(0..reps.max(1)) as usize;
    if agrees || reps < 2 {
        return vec![base; reps as usize];
    }
    let mut scores: Vec<u8> = noise
        .iter()
        .map(|z| to_star(latent + profile.rep_noise * z))
        .collect();
    if scores.iter().all(|&s| s == scores[0]) {
        let s = scores[0];
        let up = if latent >= f64::from(s) { s + 1 } else { s.saturating_sub(1) };
        scores[forced] = if (1..=4).contains(&up) {
            up
        } else if up > 4 {
            s - 1
        } else {
            s + 1
        };
    }
    scores
}

fn descriptor(star: u8) -> &'static str {
    match star {
        4 => "World-Leading",
        3 => "Internationally Excellent",
        2 => "Internationally Recognised",
        _ => "Nationally Recognised",
    }
}

fn render(article: &Article, star: u8, variant: u32) -> String {
    let t = &article.title;
    let d = descriptor(star);
    let criteria = format!(
        "**1. Originality ({star}*):** The work offers a {d} level of novelty in its framing and approach.\n\n\
         **2. Significance ({star}*):** The findings are likely to matter to researchers in the field.\n\n\
         **3. Rigour ({star}*):** The design and analysis appear appropriate for the questions asked."
    );
    match variant {
        0 => format!(
            "## Assessment of: \"{t}\"\n\n\
             **Overall Score: {star}*** ({d})\n\n\
             **Justification:**\n\n\
             {criteria}\n\n\
             **In conclusion**, this is a solid piece of work at the {star}* level."
        ),
        1 => format!(
            "Here's an assessment of the article abstract, based on the provided criteria:\n\n\
             **Overall Score: {star}***\n\n\
             **Detailed Breakdown:**\n\n\
             {criteria}\n\n\
             **In conclusion**, the abstract suggests {d} research."
        ),
        2 => format!(
            "## Assessment of: '{t}'\n\n\
             Here's an assessment of the article, considering originality, significance and rigour.\n\n\
             **Justification:** The abstract describes a coherent study.\n\n\
             {criteria}\n\n\
             **Overall Score: {star}***"
        ),
        _ => format!(
            "## Evaluation of: {t}\n\n\
             **Overall Score: {star}*** - {d}\n\n\
             **Rationale:** The study is clearly described.\n\n\
             {criteria}"
        ),
    }
}

/// A synthetic report for one (article, repetition). Identical inputs give
/// byte-identical output.
pub fn mock_generate(article: &Article, rep_index: u32, seed: u64, profile: &MockProfile) -> RawReport {
    let reps = profile.repetitions.max(rep_index + 1);
    let star = mock_rep_scores(article, seed, profile, reps)[rep_index as usize];
    let pick = stream_seed(
        seed,
        &[b"variant", article.id.as_bytes(), &rep_index.to_le_bytes()],
    );
    // roughly 50% / 30% / 15% / 5%
    let variant = match pick % 20 {
        0..=9 => 0,
        10..=15 => 1,
        16..=18 => 2,
        _ => 3,
    };
    RawReport {
        article_id: article.id.clone(),
        rep_index,
        model_id: MOCK_MODEL_ID.to_string(),
        text: render(article, star, variant),
        created_at: DateTime::UNIX_EPOCH,
        attempt_count: 1,
    }
}

/// [`ChatBackend`] wrapper around [`mock_generate`].
#[derive(Debug, Clone)]
pub struct MockBackend {
    pub seed: u64,
    pub profile: MockProfile,
}

impl ChatBackend for MockBackend {
    fn model_id(&self) -> &str {
        MOCK_MODEL_ID
    }

    fn complete(&self, request: &ChatRequest<'_>) -> Result<String, BackendError> {
        Ok(mock_generate(request.article, request.rep_index, self.seed, &self.profile).text)
    }

    fn timestamp(&self) -> DateTime<Utc> {
        DateTime::UNIX_EPOCH
    }
}
