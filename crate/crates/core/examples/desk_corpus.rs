//! Writes a synthetic parallel corpus and its pivot lexicon.
//!
//! ```console
//! $ cargo run --release --example desk_corpus -- out/ 2000 0.1 7
//! ```
//! produces `out/corpus.jsonl` (2000 pairs, 10% deliberately noisy) and
//! `out/lexicon.tsv` for the `encoder.lexicon` setting.

use std::path::PathBuf;

use otut_core::desk::{generate, DeskConfig};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(dir) = args.first().map(PathBuf::from) else {
        eprintln!("usage: desk_corpus OUT_DIR [PAIRS] [NOISY_FRACTION] [SEED]");
        std::process::exit(2);
    };
    let num = |i: usize| args.get(i).map(|s| s.parse::<f64>().expect("numeric argument"));
    let cfg = DeskConfig {
        pairs: num(1).map_or(1000, |v| v as usize),
        noisy_fraction: num(2).unwrap_or(0.0),
        seed: num(3).map_or(0, |v| v as u64),
        ..DeskConfig::default()
    };
    let corpus = generate(&cfg);
    std::fs::create_dir_all(&dir).expect("create output directory");
    std::fs::write(dir.join("corpus.jsonl"), corpus.to_jsonl()).expect("write corpus");
    std::fs::write(dir.join("lexicon.tsv"), corpus.lexicon.to_tsv()).expect("write lexicon");
    println!(
        "{} pairs ({} noisy), {} lexicon entries",
        corpus.pairs.len(),
        corpus.noisy_ids.len(),
        corpus.lexicon.len()
    );
}
