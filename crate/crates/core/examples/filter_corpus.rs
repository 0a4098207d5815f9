//! Drop the shortest tenth of abstracts in each UoA and summarise what remains.

use std::collections::HashMap;

use rqscore::corpus::{descriptive_stats, filter_short_abstracts, DEFAULT_FILTER_FRACTION};
use rqscore::synthetic::SyntheticCorpus;

fn main() {
    let corpus = SyntheticCorpus {
        per_uoa: 40,
        seed: 11,
        ..Default::default()
    }
    .corpus()
    .unwrap();
    let filtered = filter_short_abstracts(&corpus, DEFAULT_FILTER_FRACTION).unwrap();

    let before = corpus.uoa_counts();
    for (uoa, n) in filtered.uoa_counts() {
        println!("UoA {uoa}: {} -> {n}", before[&uoa]);
    }
    let shortest_kept = filtered.articles().iter().map(|a| a.abstract_len()).min().unwrap();
    println!("shortest kept abstract: {shortest_kept} chars");

    // pretend every article was scored at its proxy rounded to a star level
    let scores: HashMap<String, f64> = filtered
        .articles()
        .iter()
        .map(|a| (a.id.clone(), a.proxy_score.unwrap().round()))
        .collect();
    print!("{}", descriptive_stats(&filtered, &scores).unwrap().to_csv());
}
