//! Expand a seed keyword into a noise keyword set using the bundled graph.
//!
//! cargo run --example keyword_expansion -- opera 6

use metapriv::bot::{expand_keywords, KeywordGraph};

fn main() {
    let mut args = std::env::args().skip(1);
    let seed = args.next().unwrap_or_else(|| "opera".to_string());
    let count = args.next().and_then(|c| c.parse().ok()).unwrap_or(6);

    let graph = KeywordGraph::bundled();
    println!("bundled graph: {} keywords", graph.len());
    match expand_keywords(&graph, &seed, count) {
        Ok(keywords) => {
            for (i, k) in keywords.iter().enumerate() {
                let w = if i == 0 {
                    String::from("seed")
                } else {
                    let best = keywords[..i]
                        .iter()
                        .filter_map(|p| graph.weight(p, k))
                        .fold(0.0, f64::max);
                    format!("{best:.2}")
                };
                println!("{:>2}. {k:<20} {w}", i + 1);
            }
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    }
}
