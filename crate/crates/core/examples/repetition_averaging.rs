//! Average repeated mock scores and watch the correlation rise with the
//! number of repetitions.

use rqscore::client::mock::mock_rep_scores;
use rqscore::client::MockProfile;
use rqscore::protocol::MainPanel;
use rqscore::stats::{identical_fraction, iteration_curve, RepScoreTable};
use rqscore::synthetic::SyntheticCorpus;

fn main() {
    let corpus = SyntheticCorpus {
        uoas: vec![25, 30],
        per_uoa: 300,
        seed: 3,
        ..Default::default()
    }
    .corpus()
    .unwrap();
    let profile = MockProfile {
        agreement: 0.3,
        rep_noise: 0.8,
        ..Default::default()
    };
    let reps = 5;
    let mut table = RepScoreTable::default();
    for a in corpus.articles() {
        for (k, s) in mock_rep_scores(a, 1, &profile, reps).into_iter().enumerate() {
            table.insert(&a.id, k as u32, f64::from(s));
        }
    }
    println!("identical across all repetitions: {:.3}", identical_fraction(&table).unwrap());
    let curve = iteration_curve(&table, &corpus, MainPanel::D, reps as usize).unwrap();
    for (k, rho) in &curve.points {
        println!("k = {k}: rho = {rho:.4}");
    }
    println!("gain from averaging: {:.1}%", 100.0 * curve.relative_gain().unwrap());
}
