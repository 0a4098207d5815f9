//! Pull the overall star score out of free-text reports.

use rqscore::extractor::{extract_criterion_scores, extract_overall_score};

const REPORTS: &[&str] = &[
    "## Assessment of: \"A title\"\n\n**Overall Score: 3*** (Internationally Excellent)\n\n\
     **1. Originality (3*):** Solid.\n\n**2. Significance (2*):** Narrow.\n\n**3. Rigour (4*):** Careful.",
    "**Overall Score: 2.5* (Rounded to 3*)**",
    "Overall score: 2*.\n\nOn reflection, the rigour is stronger.\n\n**Overall Score: 3***",
    "**Overall Score:** 2.75* (Internationally Recognised to Excellent)",
    "The abstract is too short to judge. I would give it a 3*.",
    "Overall Score: 5*",
];

fn main() {
    for (i, text) in REPORTS.iter().enumerate() {
        match extract_overall_score(text) {
            Ok(s) => {
                let (a, b) = s.source_span;
                let matched: String = text.chars().skip(a).take(b - a).collect();
                println!(
                    "report {i}: {} (fractional: {}, companion: {:?}) from {matched:?}",
                    s.value, s.was_fractional, s.rounded_companion
                );
            }
            Err(e) => println!("report {i}: {e}"),
        }
    }
    let c = extract_criterion_scores(REPORTS[0]);
    println!(
        "criteria of report 0: originality {:?}, significance {:?}, rigour {:?}",
        c.originality, c.significance, c.rigour
    );
}
