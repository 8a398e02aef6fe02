#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use nameguess_core::abbrev::Dictionaries;
use nameguess_core::segment::{is_logical_name, FrequencyLexicon, Vocabulary};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nameguess"))
}

pub fn run(args: &[&str], cwd: &Path) -> Output {
    bin().args(args).current_dir(cwd).env("RUST_LOG", "warn").output().expect("spawn nameguess")
}

pub fn run_ok(args: &[&str], cwd: &Path) -> Output {
    let out = run(args, cwd);
    assert!(
        out.status.success(),
        "nameguess {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
}

/// Single lowercase dictionary words that pass the curation check.
pub fn curated_words() -> Vec<String> {
    let dicts = Dictionaries::embedded();
    let vocab = Vocabulary::embedded();
    let lexicon = FrequencyLexicon::embedded();
    let mut words: Vec<String> = dicts
        .lookup
        .iter()
        .map(|(k, _)| k.to_string())
        .filter(|k| k.len() > 2 && k.chars().all(|c| c.is_ascii_lowercase()))
        .filter(|k| is_logical_name(k, &vocab, &lexicon))
        .collect();
    words.sort();
    words
}

/// Well-curated multi-word headers with an occasional trailing year.
pub fn headers(rng: &mut ChaCha8Rng, words: &[String], n: usize, max_words: usize) -> Vec<String> {
    (0..n)
        .map(|_| {
            let len = rng.random_range(1..=max_words);
            let mut parts: Vec<String> =
                (0..len).map(|_| capitalize(words.choose(rng).unwrap())).collect();
            if max_words > 1 && rng.random_bool(0.1) {
                parts.push(rng.random_range(1990..2024).to_string());
            }
            parts.join(" ")
        })
        .collect()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Writes `n_tables` CSV files of `cols` columns and 12 rows into `dir`.
pub fn write_corpus(dir: &Path, n_tables: usize, cols: usize, max_words: usize, seed: u64) {
    std::fs::create_dir_all(dir).unwrap();
    let words = curated_words();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in 0..n_tables {
        let hdrs = headers(&mut rng, &words, cols, max_words);
        let mut text = hdrs.iter().map(|h| csv_field(h)).collect::<Vec<_>>().join(",");
        text.push('\n');
        for _ in 0..12 {
            let row: Vec<String> = (0..cols)
                .map(|_| {
                    if rng.random_bool(0.05) {
                        String::new()
                    } else {
                        format!("v{}", rng.random_range(0..40))
                    }
                })
                .collect();
            text.push_str(&row.join(","));
            text.push('\n');
        }
        std::fs::write(dir.join(format!("table{t:04}.csv")), text).unwrap();
    }
}
