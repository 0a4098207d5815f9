//! Seeded synthetic corpora for demos and tests: articles with varied
//! abstract lengths spread over institutions, and one proxy score per
//! (institution, UoA).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::corpus::{Article, Corpus, CorpusError, Provenance, ProxyTable};

const WORDS: &[&str] = &[
    "we", "study", "the", "effect", "of", "policy", "on", "outcomes", "using", "data",
    "from", "a", "national", "survey", "results", "show", "significant", "variation",
    "across", "regions", "model", "analysis", "evidence", "suggests", "that", "new",
    "methods", "improve", "measurement", "and", "theory", "practice", "framework",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub uoas: Vec<u8>,
    pub per_uoa: usize,
    pub institutions: usize,
    pub seed: u64,
}

impl Default for SyntheticCorpus {
    fn default() -> Self {
        Self {
            uoas: vec![1, 7, 13, 25],
            per_uoa: 125,
            institutions: 20,
            seed: 0,
        }
    }
}

impl SyntheticCorpus {
    /// Articles (without proxy scores) and the proxy table.
    pub fn build(&self) -> (Vec<Article>, ProxyTable) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let proxy_dist = Normal::new(3.0, 0.4).unwrap();
        let mut proxies = ProxyTable::default();
        for &uoa in &self.uoas {
            for i in 0..self.institutions {
                let p: f64 = proxy_dist.sample(&mut rng);
                proxies.insert(&institution(i), uoa, (p.clamp(1.0, 4.0) * 1000.0).round() / 1000.0);
            }
        }
        let mut articles = Vec::with_capacity(self.uoas.len() * self.per_uoa);
        for &uoa in &self.uoas {
            for j in 0..self.per_uoa {
                let n_words = rng.gen_range(15..250);
                let mut text = String::new();
                for w in 0..n_words {
                    if w > 0 {
                        text.push(' ');
                    }
                    text.push_str(WORDS[rng.gen_range(0..WORDS.len())]);
                }
                let ordinal = articles.len();
                articles.push(Article {
                    id: format!("u{uoa:02}-{j:05}"),
                    title: format!("Article {j} in unit {uoa}"),
                    abstract_text: text,
                    uoa,
                    institution: institution(rng.gen_range(0..self.institutions.max(1))),
                    proxy_score: None,
                    ordinal,
                });
            }
        }
        (articles, proxies)
    }

    /// The corpus with proxy scores attached.
    pub fn corpus(&self) -> Result<Corpus, CorpusError> {
        let (articles, proxies) = self.build();
        let mut corpus = Corpus::new(articles, Provenance::default())?;
        corpus.attach_proxy_scores(&proxies);
        Ok(corpus)
    }

    /// Write `corpus.csv` and `proxy.csv` into `dir`.
    pub fn write_inputs(&self, dir: &Path) -> std::io::Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir)?;
        let (articles, proxies) = self.build();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["id", "title", "abstract", "uoa", "institution"])?;
        for a in &articles {
            w.write_record([
                a.id.as_str(),
                a.title.as_str(),
                a.abstract_text.as_str(),
                &a.uoa.to_string(),
                a.institution.as_str(),
            ])?;
        }
        let corpus_path = dir.join("corpus.csv");
        fs::write(&corpus_path, w.into_inner().map_err(|e| e.into_error())?)?;

        let mut proxy = String::from("institution,uoa,proxy_score\n");
        for &uoa in &self.uoas {
            for i in 0..self.institutions {
                let name = institution(i);
                if let Some(p) = proxies.get(&name, uoa) {
                    writeln!(proxy, "{name},{uoa},{p}").unwrap();
                }
            }
        }
        let proxy_path = dir.join("proxy.csv");
        fs::write(&proxy_path, proxy)?;
        Ok((corpus_path, proxy_path))
    }
}

fn institution(i: usize) -> String {
    format!("Institution {i:03}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_and_complete() {
        let s = SyntheticCorpus {
            per_uoa: 10,
            ..Default::default()
        };
        let a = s.corpus().unwrap();
        assert_eq!(a.len(), 40);
        assert!(a.articles().iter().all(|x| x.proxy_score.is_some()));
        assert_eq!(a.articles(), s.corpus().unwrap().articles());
    }
}
