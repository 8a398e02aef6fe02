//! Acceptance suite. Prints one `[PASS]`/`[FAIL]` line per criterion.
//!
//! Run with `cargo test -p nameguess-cli --test acceptance`.

mod common;

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use common::{curated_words, headers, run, run_ok, write_corpus};
use nameguess_core::abbrev::{
    abbreviate_header, rule3_random_drop, CaseStyle, Dictionaries, FabricationConfig, Fabricator,
    Method, NamePair, Rule, TableCache,
};
use nameguess_core::corpus::{ingest_csv, Table};
use nameguess_core::difficulty::{classify, normalize_for_distance, DifficultyThresholds};
use nameguess_core::metrics::{exact_match, token_f1, EvalReport, Prediction};
use nameguess_core::promptkit::{
    build_bundles, extract_answers, PromptMode, PromptOptions, DEMONSTRATION,
};
use nameguess_core::segment::{split_surface, FrequencyLexicon, Vocabulary};
use nameguess_core::DifficultyLevel;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const C1_MAX_RUNTIME: Duration = Duration::from_secs(1);
const C2_CASES: usize = 10_000;
const C3_HEADERS: usize = 100_000;
const C3_METHOD_TOL: f64 = 0.015;
const C3_RULE_TOL: f64 = 0.02;
const C3_CASE_TOL: f64 = 0.02;
const C3_MAX_RUNTIME: Duration = Duration::from_secs(120);
const C5_PAIRS: usize = 1_000;
const C5_TOL: f64 = 1e-9;
const C7_IDENTITY_TOL_PT: f64 = 0.1;
const C8_TRIALS: usize = 1_000;
const C8_MIN_PAIRS: usize = 10_000;
const C8_SHARE_TOL: f64 = 0.01;
const PUBLISHED_SPLIT: [f64; 4] = [0.11, 0.39, 0.40, 0.10];

/// Criteria whose failure is analysed and expected; they print FAIL without
/// failing the test binary.
const KNOWN_UNATTAINABLE: &[&str] = &["C8c"];

struct Suite {
    results: Vec<(String, bool)>,
}

impl Suite {
    fn check(&mut self, id: &str, pass: bool, detail: String) {
        let tag = if pass { "PASS" } else { "FAIL" };
        let note = if !pass && KNOWN_UNATTAINABLE.contains(&id) { " (known unattainable)" } else { "" };
        println!("[{tag}] {id} {detail}{note}");
        self.results.push((id.to_string(), pass));
    }
}

fn work_dir() -> tempfile::TempDir {
    tempfile::tempdir().expect("temp dir")
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Vec<T> {
    nameguess_core::jsonl::read(std::fs::read(path).unwrap().as_slice()).unwrap()
}

// ---- C1

/// `always` lists the step probabilities forced to 1; the others are 0.
fn forced_config(method: &str, rule: &str, k: usize, style: &str, always: &[&str]) -> FabricationConfig {
    let one = |names: &[&str], chosen: &str| {
        names.iter().map(|n| format!("{n} = {}", u8::from(*n == chosen))).collect::<Vec<_>>().join("\n")
    };
    let steps: String = ["p_acronym", "p_year_shorten", "p_word_removal", "p_reorder_year_front"]
        .iter()
        .map(|st| format!("{st} = {}.0\n", u8::from(always.contains(st))))
        .collect();
    let text = format!(
        "k_range = [{k}, {k}]\n{steps}\
         [p_method]\n{}\n[p_rule]\n{}\n[p_case]\n{}\n[p_snake_casing]\nupper = 1\nlower = 0\nas_produced = 0\n",
        one(&["keep", "lookup", "rule"], method),
        one(&["prefix", "vowel_drop", "random_drop"], rule),
        one(&["camel", "pascal", "snake", "simple"], style),
    );
    toml::from_str(&text).unwrap_or_else(|e| panic!("config {text}: {e}"))
}

fn c1(s: &mut Suite) {
    let cases: [(&str, &str, FabricationConfig); 11] = [
        ("abbreviation", "abbr", forced_config("rule", "prefix", 4, "simple", &[])),
        ("abbreviation", "abbrvtn", forced_config("rule", "vowel_drop", 5, "simple", &[])),
        ("doodle", "doodl", forced_config("rule", "vowel_drop", 5, "simple", &[])),
        ("Current Balance", "CUR_BAL", forced_config("rule", "prefix", 3, "snake", &[])),
        ("Fiscal Year 2021", "FY_2021", forced_config("keep", "prefix", 3, "snake", &["p_acronym"])),
        ("Zip Code", "Zip", forced_config("keep", "prefix", 3, "pascal", &["p_word_removal"])),
        (
            "Birth Rate 2018",
            "2018_BR",
            forced_config("keep", "prefix", 3, "snake", &["p_acronym", "p_reorder_year_front"]),
        ),
        ("Employee Date of Birth", "EMP_DOB", forced_config("rule", "prefix", 3, "snake", &["p_acronym"])),
        ("Event Name", "Evnt", forced_config("rule", "vowel_drop", 4, "pascal", &["p_word_removal"])),
        (
            "Mailing Address District 2013",
            "2013MailAddrDist",
            forced_config("rule", "prefix", 4, "pascal", &["p_reorder_year_front"]),
        ),
        ("2020", "20", forced_config("keep", "prefix", 3, "simple", &["p_year_shorten"])),
    ];
    let start = Instant::now();
    let dicts = Dictionaries::embedded();
    let lexicon = FrequencyLexicon::embedded();
    let mut wrong = Vec::new();
    for (header, expected, cfg) in &cases {
        cfg.validate().unwrap();
        let tokens = split_surface(header, &lexicon);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let (q, _) = abbreviate_header(&tokens, cfg, &dicts, &mut TableCache::new(), &mut rng).unwrap();
        if q != *expected {
            wrong.push(format!("{header} -> {q} (want {expected})"));
        }
    }
    let took = start.elapsed();
    s.check(
        "C1",
        wrong.is_empty() && took < C1_MAX_RUNTIME,
        format!(
            "golden abbreviation examples: {}/{} exact in {:.1} ms (limit {} ms){}",
            cases.len() - wrong.len(),
            cases.len(),
            took.as_secs_f64() * 1e3,
            C1_MAX_RUNTIME.as_millis(),
            if wrong.is_empty() { String::new() } else { format!("; {}", wrong.join(", ")) }
        ),
    );
}

// ---- C2

fn collapse_runs(word: &str) -> Vec<char> {
    let mut out: Vec<char> = Vec::new();
    for c in word.chars() {
        if out.last().map(|p| p.to_ascii_lowercase()) != Some(c.to_ascii_lowercase()) {
            out.push(c);
        }
    }
    out
}

fn is_subsequence(needle: &[char], hay: &[char]) -> bool {
    let mut i = 0;
    for &h in hay {
        if i < needle.len() && needle[i] == h {
            i += 1;
        }
    }
    i == needle.len()
}

fn c2(s: &mut Suite) {
    let mut gen = ChaCha8Rng::seed_from_u64(2);
    let letters: Vec<char> = ('a'..='z').chain('A'..='Z').collect();
    let (mut violations, mut reduced, mut untouched) = (Vec::new(), 0, 0);
    for _ in 0..C2_CASES {
        let len = gen.random_range(1..=16);
        let mut word = String::new();
        for _ in 0..len {
            match word.chars().last() {
                Some(prev) if gen.random_bool(0.25) => word.push(prev),
                _ => word.push(*letters.choose(&mut gen).unwrap()),
            }
        }
        let k = gen.random_range(1..=8);
        let seed: u64 = gen.random();
        let out = rule3_random_drop(&word, k, &mut ChaCha8Rng::seed_from_u64(seed));
        let out_chars: Vec<char> = out.chars().collect();
        let src: Vec<char> = word.chars().collect();
        let first_ok = out_chars.first() == src.first();
        // the loop body only runs while the word is longer than k
        let (subseq_ok, exit_ok) = if src.len() > k {
            reduced += 1;
            (is_subsequence(&out_chars, &collapse_runs(&word)), out_chars.len() <= k || out_chars.len() == 1)
        } else {
            untouched += 1;
            (out == word, true)
        };
        if !(first_ok && subseq_ok && exit_ok) {
            violations.push(format!("({word}, {k}, {seed}) -> {out}"));
        }
    }
    s.check(
        "C2",
        violations.is_empty(),
        format!(
            "rule 3 properties over {C2_CASES} cases ({reduced} reduced: leading char kept, subsequence \
             of collapsed source, loop exit; {untouched} with len <= k returned unchanged): {} violations{}",
            violations.len(),
            violations.first().map(|v| format!(", e.g. {v}")).unwrap_or_default()
        ),
    );
}

// ---- C3

fn c3(s: &mut Suite) {
    let start = Instant::now();
    let dicts = Dictionaries::embedded();
    let vocab = Vocabulary::embedded();
    let lexicon = FrequencyLexicon::embedded();
    let words = curated_words();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cols = 100;
    let tables: Vec<Table> = (0..C3_HEADERS / cols)
        .map(|t| {
            let hdrs = headers(&mut rng, &words, cols, 1);
            Table::new(format!("t{t:05}"), hdrs, vec![vec![Some("x".to_string()); cols]]).unwrap()
        })
        .collect();
    let cfg = FabricationConfig { seed: 3, ..Default::default() };
    let fab = Fabricator { config: &cfg, dicts: &dicts, vocab: &vocab, lexicon: &lexicon };
    let pairs = fab.fabricate_corpus(&tables).unwrap();
    let took = start.elapsed();
    let n = pairs.len() as f64;
    let mut method = HashMap::new();
    let mut rule = HashMap::new();
    let mut case = HashMap::new();
    for p in &pairs {
        let t = p.trace.as_ref().unwrap();
        *method.entry(t.method).or_insert(0.0) += 1.0 / n;
        *rule.entry(t.rule).or_insert(0.0) += 1.0 / n;
        *case.entry(t.case_style).or_insert(0.0) += 1.0 / n;
    }
    let mut worst = [0.0f64; 3];
    for (m, w) in [(Method::Keep, 0.3), (Method::Lookup, 0.6), (Method::Rule, 0.1)] {
        worst[0] = worst[0].max((method.get(&m).copied().unwrap_or(0.0) - w).abs());
    }
    for (r, w) in [(Rule::Prefix, 0.2), (Rule::VowelDrop, 0.4), (Rule::RandomDrop, 0.4)] {
        worst[1] = worst[1].max((rule.get(&r).copied().unwrap_or(0.0) - w).abs());
    }
    for c in [CaseStyle::Camel, CaseStyle::Pascal, CaseStyle::Snake, CaseStyle::Simple] {
        worst[2] = worst[2].max((case.get(&c).copied().unwrap_or(0.0) - 0.25).abs());
    }
    let pass = pairs.len() == C3_HEADERS
        && worst[0] <= C3_METHOD_TOL
        && worst[1] <= C3_RULE_TOL
        && worst[2] <= C3_CASE_TOL
        && took < C3_MAX_RUNTIME;
    s.check(
        "C3",
        pass,
        format!(
            "draw frequencies over {} headers: max |dev| method {:.4} (tol {C3_METHOD_TOL}), rule {:.4} \
             (tol {C3_RULE_TOL}), case {:.4} (tol {C3_CASE_TOL}); {:.1} s (limit {} s)",
            pairs.len(),
            worst[0],
            worst[1],
            worst[2],
            took.as_secs_f64(),
            C3_MAX_RUNTIME.as_secs()
        ),
    );
}

// ---- C4

fn c4(s: &mut Suite) {
    let dir = work_dir();
    let p = dir.path();
    write_corpus(&p.join("tables"), 40, 15, 4, 4);
    let fab = |out: &str, threads: Option<&str>| {
        let mut args = vec!["fabricate", "--tables", "tables", "--seed", "7", "--out", out];
        if let Some(t) = threads {
            args.extend(["--threads", t]);
        }
        run_ok(&args, p);
        std::fs::read(p.join(out)).unwrap()
    };
    let a = fab("a.jsonl", None);
    let b = fab("b.jsonl", None);
    let serial = fab("serial.jsonl", Some("1"));
    let parallel = fab("parallel.jsonl", Some("8"));
    s.check(
        "C4",
        !a.is_empty() && a == b && serial == parallel && a == serial,
        format!(
            "fabricate determinism: repeat run identical {}, 8 threads vs 1 identical {} ({} bytes)",
            a == b,
            serial == parallel,
            a.len()
        ),
    );
}

// ---- C5

/// Brute-force normalization written directly from the definition.
fn brute_normalize(s: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut cur = String::new();
    for ch in s.chars().flat_map(char::to_lowercase) {
        if ch.is_alphanumeric() {
            cur.push(ch);
        } else if !cur.is_empty() {
            tokens.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        tokens.push(cur);
    }
    tokens.retain(|t| t != "a" && t != "an" && t != "the");
    tokens
}

fn brute_em(pred: &str, gold: &str) -> f64 {
    f64::from(u8::from(brute_normalize(pred) == brute_normalize(gold)))
}

fn brute_f1(pred: &str, gold: &str) -> f64 {
    let p = brute_normalize(pred);
    let g = brute_normalize(gold);
    if p.is_empty() && g.is_empty() {
        return 1.0;
    }
    let mut used = vec![false; g.len()];
    let mut common = 0usize;
    for t in &p {
        if let Some(j) = (0..g.len()).find(|&j| !used[j] && g[j] == *t) {
            used[j] = true;
            common += 1;
        }
    }
    if common == 0 {
        return 0.0;
    }
    let precision = common as f64 / p.len() as f64;
    let recall = common as f64 / g.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

fn c5(s: &mut Suite) {
    let vocab = [
        "customer", "Customer", "name", "NAME", "full", "the", "The", "a", "An", "date", "of", "birth",
        "id", "no.", "Zip-Code", "code", "e_mail", "2021", "(x)", "Ünïcode", "name,", "rate%",
    ];
    let seps = [" ", "  ", "\t", "-", " | "];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let phrase = |rng: &mut ChaCha8Rng| {
        let n = rng.random_range(0..6);
        let mut out = String::new();
        for i in 0..n {
            if i > 0 {
                out.push_str(seps.choose(rng).unwrap());
            }
            out.push_str(vocab.choose(rng).unwrap());
        }
        out
    };
    let mut worst: f64 = 0.0;
    for _ in 0..C5_PAIRS {
        let pred = phrase(&mut rng);
        let gold = if rng.random_bool(0.2) { pred.to_uppercase() } else { phrase(&mut rng) };
        worst = worst
            .max((exact_match(&pred, &gold) - brute_em(&pred, &gold)).abs())
            .max((token_f1(&pred, &gold) - brute_f1(&pred, &gold)).abs());
    }
    let worked = token_f1("customer name", "customer full name");
    s.check(
        "C5",
        worst <= C5_TOL && worked == 0.8,
        format!(
            "metrics vs brute-force scorer on {C5_PAIRS} pairs: max |diff| {worst:e} (tol {C5_TOL:e}); \
             F1(\"customer name\", \"customer full name\") = {worked}"
        ),
    );
}

// ---- C6

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden")
}

fn c6(s: &mut Suite) {
    let read = |name: &str| std::fs::read_to_string(golden_dir().join(name)).unwrap();
    let table = ingest_csv(read("fixture.csv").as_bytes(), "fixture").unwrap();
    let pairs: Vec<NamePair> = [("c_name", "Customer Name"), ("pCd", "Product Code"), ("dt", "Date")]
        .iter()
        .enumerate()
        .map(|(i, (q, g))| NamePair {
            table_id: "fixture".into(),
            column_index: i,
            query_name: q.to_string(),
            logical_name: g.to_string(),
            trace: None,
            difficulty: None,
        })
        .collect();
    let refs: Vec<&NamePair> = pairs.iter().collect();
    let prompt = |mode, demo| {
        let opts = PromptOptions { k: 10, n: 3, mode, demo, ..Default::default() };
        build_bundles(&table, &refs, &opts).unwrap().remove(0).prompt
    };
    let infer = prompt(PromptMode::Infer, false) == read("infer_prompt.txt");
    let demo = prompt(PromptMode::Infer, true) == read("infer_prompt_demo.txt");
    let train = prompt(PromptMode::Train, false) == read("train_prompt.txt");
    let verbatim = DEMONSTRATION
        == "As abbreviations of column names from a table, c_name | pCd | dt stand for Customer Name | Product Code | Date.";
    let tail = DEMONSTRATION.split(" stand for").nth(1).unwrap_or("");
    let extracted = extract_answers(tail, 3);
    let extract_ok = extracted.as_deref() == Ok(&["Customer Name", "Product Code", "Date"].map(String::from)[..]);
    s.check(
        "C6",
        infer && demo && train && verbatim && extract_ok,
        format!(
            "prompt bytes vs golden files: q {infer}, demo+q {demo}, t'+q training {train}; \
             demonstration verbatim {verbatim}; demo tail extraction with K=3 {extracted:?}"
        ),
    );
}

// ---- C7 / C9 share a pipeline run

struct Pipeline {
    dir: tempfile::TempDir,
    pairs: Vec<NamePair>,
}

fn pipeline() -> Pipeline {
    let dir = work_dir();
    let p = dir.path();
    write_corpus(&p.join("tables"), 60, 12, 3, 7);
    run_ok(&["fabricate", "--tables", "tables", "--seed", "11", "--out", "pairs.jsonl"], p);
    run_ok(&["classify-difficulty", "--pairs", "pairs.jsonl"], p);
    run_ok(&["prompts", "--pairs", "pairs.jsonl", "--tables", "tables", "--out", "q.jsonl", "--n", "0"], p);
    run_ok(&["prompts", "--pairs", "pairs.jsonl", "--tables", "tables", "--out", "tq.jsonl"], p);
    for (stub, bundles, out) in [
        ("oracle", "tq.jsonl", "oracle.jsonl"),
        ("identity", "q.jsonl", "identity.jsonl"),
    ] {
        run_ok(
            &["infer", "--bundles", bundles, "--stub", stub, "--pairs", "pairs.jsonl", "--out", out],
            p,
        );
    }
    let pairs = read_jsonl(&p.join("pairs.jsonl"));
    Pipeline { dir, pairs }
}

fn scored(pl: &Pipeline, preds: &str) -> EvalReport {
    let p = pl.dir.path();
    let out = format!("{preds}.report.json");
    run_ok(&["score", "--pairs", "pairs.jsonl", "--preds", preds, "--out", &out], p);
    serde_json::from_slice(&std::fs::read(p.join(out)).unwrap()).unwrap()
}

fn c7(s: &mut Suite, pl: &Pipeline) {
    let oracle = scored(pl, "oracle.jsonl");
    let identity = scored(pl, "identity.jsonl");
    let preds: Vec<Prediction> = read_jsonl(&pl.dir.path().join("identity.jsonl"));
    let expected = pl
        .pairs
        .iter()
        .filter(|p| brute_normalize(&p.query_name) == brute_normalize(&p.logical_name))
        .count() as f64
        / pl.pairs.len() as f64
        * 100.0;
    let (oem, of1, iem) = (oracle.overall.em * 100.0, oracle.overall.f1 * 100.0, identity.overall.em * 100.0);
    let pass = oem == 100.0
        && of1 == 100.0
        && (iem - expected).abs() <= C7_IDENTITY_TOL_PT
        && preds.len() == pl.pairs.len();
    s.check(
        "C7",
        pass,
        format!(
            "offline eval on {} pairs: oracle EM {oem:.1} F1 {of1:.1}; identity EM {iem:.2} vs \
             independent {expected:.2} (tol {C7_IDENTITY_TOL_PT} pt)",
            pl.pairs.len()
        ),
    );
}

fn table_rows(section: &str) -> Vec<Vec<String>> {
    section
        .lines()
        .filter(|l| l.starts_with('|') && !l.starts_with("|-"))
        .map(|l| l.trim_matches('|').split('|').map(|c| c.trim().to_string()).collect())
        .collect()
}

fn c9(s: &mut Suite, pl: &Pipeline) {
    let p = pl.dir.path();
    let out = run_ok(
        &["report", "--q", "identity.jsonl", "--tq", "oracle.jsonl", "--pairs", "pairs.jsonl", "--model", "stub"],
        p,
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let sections: Vec<&str> = text.split("\n\n").collect();
    let overall = sections.first().map(|x| table_rows(x)).unwrap_or_default();
    let levels = sections.get(1).map(|x| table_rows(x)).unwrap_or_default();
    let numeric = |r: &[String]| r.iter().skip(1).all(|c| c.parse::<f64>().is_ok());
    let overall_ok = overall.len() == 2
        && overall[0] == ["Model", "EM q", "EM t'+q", "F1 q", "F1 t'+q"]
        && numeric(&overall[1]);
    let level_labels: Vec<&str> = DifficultyLevel::ALL.iter().map(|l| l.label()).collect();
    let levels_ok = levels.len() == 5
        && levels[0][0] == "Model"
        && levels[0][1..] == level_labels[..]
        && ["EM q", "EM t'+q", "F1 q", "F1 t'+q"]
            .iter()
            .zip(&levels[1..])
            .all(|(label, row)| row[0] == format!("stub {label}") && row.len() == 5 && numeric(row));
    s.check(
        "C9",
        overall_ok && levels_ok,
        format!(
            "report structure: overall EM/F1 x (q, t'+q) {overall_ok}; four levels x EM/F1 x (q, t'+q) {levels_ok}"
        ),
    );
}

// ---- C8

fn absent_letter(gold: &str, rng: &mut ChaCha8Rng) -> char {
    let pool: Vec<char> = ('a'..='z').chain(['ø', 'þ', 'æ']).filter(|c| !gold.contains(*c)).collect();
    *pool.choose(rng).unwrap()
}

fn c8(s: &mut Suite) {
    let dir = work_dir();
    let p = dir.path();
    write_corpus(&p.join("tables"), 520, 25, 4, 8);
    run_ok(&["fabricate", "--tables", "tables", "--seed", "8", "--out", "pairs.jsonl"], p);
    let pairs: Vec<NamePair> = read_jsonl(&p.join("pairs.jsonl"));
    let t = DifficultyThresholds::default();

    let mut identity_bad = 0;
    for x in pairs.iter().flat_map(|p| [&p.logical_name, &p.query_name]) {
        if normalize_for_distance(x).is_empty() {
            continue;
        }
        if classify(x, x, &t) != Ok(DifficultyLevel::Easy) {
            identity_bad += 1;
        }
    }
    s.check(
        "C8a",
        identity_bad == 0,
        format!("classify(x, x) = Easy over {} pairs: {identity_bad} violations", pairs.len()),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut lowered = Vec::new();
    for _ in 0..C8_TRIALS {
        let pair = pairs.choose(&mut rng).unwrap();
        let gold = normalize_for_distance(&pair.logical_name);
        let mut query = normalize_for_distance(&pair.query_name);
        let mut level = classify(&query, &pair.logical_name, &t).unwrap();
        for _ in 0..rng.random_range(1..=6) {
            query.push(absent_letter(&gold, &mut rng));
            let next = classify(&query, &pair.logical_name, &t).unwrap();
            if next < level {
                lowered.push(format!("{query} vs {}", pair.logical_name));
            }
            level = next;
        }
    }
    s.check(
        "C8b",
        lowered.is_empty(),
        format!(
            "monotone under appended edits over {C8_TRIALS} trials: {} level decreases",
            lowered.len()
        ),
    );

    let distances: Vec<f64> = pairs
        .iter()
        .map(|p| {
            let g = normalize_for_distance(&p.logical_name);
            levenshtein(&normalize_for_distance(&p.query_name), &g) as f64 / g.chars().count() as f64
        })
        .collect();
    let zero = distances.iter().filter(|d| **d == 0.0).count() as f64 / distances.len() as f64;
    let reachable = reachable_cumulative(&distances);

    let calibrate = |target: &str| -> [f64; 4] {
        let out = format!("cal_{}.jsonl", target.replace(',', "_"));
        run_ok(&["classify-difficulty", "--pairs", "pairs.jsonl", "--calibrate", target, "--out", &out], p);
        let labelled: Vec<NamePair> = read_jsonl(&p.join(&out));
        let mut shares = [0.0; 4];
        for x in &labelled {
            shares[x.difficulty.unwrap() as usize] += 1.0 / labelled.len() as f64;
        }
        shares
    };
    let mut targets: Vec<[f64; 4]> = vec![
        PUBLISHED_SPLIT,
        [0.25, 0.25, 0.25, 0.25],
        [0.30, 0.30, 0.30, 0.10],
        [0.40, 0.30, 0.20, 0.10],
        [0.30, 0.20, 0.20, 0.30],
    ];
    let mut trng = ChaCha8Rng::seed_from_u64(808);
    while targets.len() < 25 {
        let w: [f64; 4] = std::array::from_fn(|_| trng.random_range(0.05..1.0));
        let total: f64 = w.iter().sum();
        let mut t = w.map(|x| (x / total * 100.0).round() / 100.0);
        t[3] = ((1.0 - t[0] - t[1] - t[2]) * 100.0).round() / 100.0;
        if t[3] >= 0.0 {
            targets.push(t);
        }
    }
    let fmt = |sh: &[f64; 4]| sh.map(|x| format!("{:.1}", x * 100.0)).join("/");
    let (mut met, mut feasible, mut feasible_met) = (0, 0, 0);
    let mut misses = Vec::new();
    let mut published = [0.0; 4];
    for (idx, t) in targets.iter().enumerate() {
        let spec = t.map(|x| format!("{x:.2}")).join(",");
        let got = calibrate(&spec);
        if idx == 0 {
            published = got;
        }
        let ok = got.iter().zip(t).all(|(g, w)| (g - w).abs() <= C8_SHARE_TOL + 1e-12);
        let can = split_feasible(&reachable, t, C8_SHARE_TOL);
        met += usize::from(ok);
        feasible += usize::from(can);
        feasible_met += usize::from(can && ok);
        if !ok {
            misses.push(format!("{} -> {}{}", fmt(t), fmt(&got), if can { "" } else { " (infeasible)" }));
        }
    }
    s.check(
        "C8c",
        distances.len() >= C8_MIN_PAIRS && met == targets.len(),
        format!(
            "calibration hits any target split within {} pt on {} pairs: {met}/{} targets met; split \
             11/39/40/10 -> {}; {:.1}% of pairs have distance 0 and tied distances share a level; misses: {}",
            C8_SHARE_TOL * 100.0,
            distances.len(),
            targets.len(),
            fmt(&published),
            zero * 100.0,
            misses.join("; ")
        ),
    );
    s.check(
        "C8d",
        distances.len() >= C8_MIN_PAIRS && feasible_met == feasible && feasible > 0,
        format!(
            "calibration meets every target that the tie structure permits (brute-force oracle): {feasible_met}/{feasible}"
        ),
    );
}

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut table = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in table.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in table[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = table[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            table[i][j] = sub.min(table[i - 1][j] + 1).min(table[i][j - 1] + 1);
        }
    }
    table[a.len()][b.len()]
}

/// Shares reachable as "at or below some cutpoint" for cutpoints in [0, 1].
fn reachable_cumulative(distances: &[f64]) -> Vec<f64> {
    let n = distances.len() as f64;
    let mut points: Vec<f64> = distances.iter().copied().chain([0.0]).collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    points
        .iter()
        .map(|&v| distances.iter().filter(|d| **d <= v).count() as f64 / n)
        .collect()
}

/// Whether some cut triple puts every level within `tol` of its target.
fn split_feasible(reachable: &[f64], target: &[f64; 4], tol: f64) -> bool {
    let tol = tol + 1e-12;
    let near = |want: f64| reachable.iter().copied().filter(move |c| (c - want).abs() <= tol);
    near(target[0]).any(|c1| {
        near(c1 + target[1]).filter(|c2| *c2 >= c1).any(|c2| {
            near(c2 + target[2])
                .filter(|c3| *c3 >= c2)
                .any(|c3| (1.0 - c3 - target[3]).abs() <= tol)
        })
    })
}

fn main() {
    let mut s = Suite { results: Vec::new() };
    c1(&mut s);
    c2(&mut s);
    c3(&mut s);
    c4(&mut s);
    c5(&mut s);
    c6(&mut s);
    let pl = pipeline();
    c7(&mut s, &pl);
    c8(&mut s);
    c9(&mut s, &pl);

    let unexpected: Vec<&str> = s
        .results
        .iter()
        .filter(|(id, pass)| !pass && !KNOWN_UNATTAINABLE.contains(&id.as_str()))
        .map(|(id, _)| id.as_str())
        .collect();
    let passed = s.results.iter().filter(|r| r.1).count();
    println!("acceptance: {passed}/{} passed", s.results.len());
    if !unexpected.is_empty() {
        println!("unexpected failures: {}", unexpected.join(", "));
        std::process::exit(1);
    }
    let _ = run;
}
