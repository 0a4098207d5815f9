//! Tabulate how reports open and which headings they use.

use rqscore::client::mock::mock_generate;
use rqscore::client::MockProfile;
use rqscore::structure::{
    default_specs, heading_frequency_table, heading_table_csv, paragraph_pattern_table,
    paragraph_tables_csv,
};
use rqscore::synthetic::SyntheticCorpus;

fn main() {
    let corpus = SyntheticCorpus {
        uoas: vec![30],
        per_uoa: 200,
        ..Default::default()
    }
    .corpus()
    .unwrap();
    let profile = MockProfile::default();
    let first: Vec<String> = corpus
        .articles()
        .iter()
        .map(|a| mock_generate(a, 0, 9, &profile).text)
        .collect();
    let all: Vec<String> = corpus
        .articles()
        .iter()
        .flat_map(|a| (0..5).map(|k| mock_generate(a, k, 9, &profile).text))
        .collect();

    let specs = default_specs();
    println!("{}", paragraph_tables_csv(&paragraph_pattern_table(&first, &specs).unwrap()));
    println!("{}", heading_table_csv(&heading_frequency_table(&all, &specs).unwrap()));
}
