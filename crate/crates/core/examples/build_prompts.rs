//! Build the system and user prompts for one article from each main panel.

use rqscore::corpus::Article;
use rqscore::protocol::{build_prompt, main_panel, TemplateSet};

fn main() {
    let templates = TemplateSet::bundled();
    for (i, uoa) in [3u8, 10, 17, 30].into_iter().enumerate() {
        let article = Article {
            id: format!("demo-{i}"),
            title: "Rethinking   measurement\nin applied work".into(),
            abstract_text: "We propose a new index.\n\nIt is validated on three datasets.".into(),
            uoa,
            institution: "Example University".into(),
            proxy_score: None,
            ordinal: i,
        };
        let prompt = build_prompt(&article, &templates).expect("valid article");
        let panel = main_panel(i64::from(uoa)).unwrap();
        let first_line = prompt.system_text.lines().next().unwrap_or_default();
        println!("UoA {uoa} -> Main Panel {panel}");
        println!("  system: {first_line} ... ({} chars)", prompt.system_text.len());
        println!("  user:\n{}\n", indent(&prompt.user_text));
    }
    match main_panel(35) {
        Ok(_) => unreachable!(),
        Err(e) => println!("UoA 35: {e}"),
    }
}

fn indent(s: &str) -> String {
    s.lines().map(|l| format!("    {l}")).collect::<Vec<_>>().join("\n")
}
