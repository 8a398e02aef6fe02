//! Normalized exact match and token F1, aggregated overall and per
//! difficulty level.
//!
//! Aggregates are reported two ways: over records whose completion yielded
//! an answer (`*_extracted`), and over all records with failures scored 0.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::difficulty::DifficultyLevel;

const ARTICLES: [&str; 3] = ["a", "an", "the"];

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("no records to aggregate")]
    Empty,
}

/// Lowercases, turns punctuation into spaces, drops articles and collapses
/// whitespace.
pub fn normalize_answer(s: &str) -> String {
    let cleaned: String = s
        .to_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() || c.is_whitespace() { c } else { ' ' })
        .collect();
    cleaned
        .split_whitespace()
        .filter(|t| !ARTICLES.contains(t))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn exact_match(pred: &str, gold: &str) -> f64 {
    if normalize_answer(pred) == normalize_answer(gold) {
        1.0
    } else {
        0.0
    }
}

/// Harmonic mean of token precision and recall, counting shared tokens with
/// multiplicity. Two empty answers score 1 so that exact matches always do.
pub fn token_f1(pred: &str, gold: &str) -> f64 {
    let p = normalize_answer(pred);
    let g = normalize_answer(gold);
    let p: Vec<&str> = p.split_whitespace().collect();
    let g: Vec<&str> = g.split_whitespace().collect();
    if p.is_empty() && g.is_empty() {
        return 1.0;
    }
    if p.is_empty() || g.is_empty() {
        return 0.0;
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for t in &g {
        *counts.entry(t).or_default() += 1;
    }
    let mut shared = 0usize;
    for t in &p {
        if let Some(c) = counts.get_mut(t) {
            if *c > 0 {
                *c -= 1;
                shared += 1;
            }
        }
    }
    if shared == 0 {
        return 0.0;
    }
    let precision = shared as f64 / p.len() as f64;
    let recall = shared as f64 / g.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

/// A per-answer score in [0, 1]. Embedding-based scorers plug in here.
pub trait AnswerMetric {
    fn name(&self) -> &str;
    fn score(&self, pred: &str, gold: &str) -> f64;
}

pub struct ExactMatch;
pub struct TokenF1;

impl AnswerMetric for ExactMatch {
    fn name(&self) -> &str {
        "em"
    }
    fn score(&self, pred: &str, gold: &str) -> f64 {
        exact_match(pred, gold)
    }
}

impl AnswerMetric for TokenF1 {
    fn name(&self) -> &str {
        "f1"
    }
    fn score(&self, pred: &str, gold: &str) -> f64 {
        token_f1(pred, gold)
    }
}

/// One line of a predictions file. `prediction` is null when no answer
/// could be extracted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub table_id: String,
    pub column_index: usize,
    pub prediction: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bundle_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub table_id: String,
    pub column_index: usize,
    pub prediction: Option<String>,
    pub gold: String,
    pub difficulty: DifficultyLevel,
    pub em: f64,
    pub f1: f64,
}

impl EvalRecord {
    pub fn score(
        table_id: impl Into<String>,
        column_index: usize,
        prediction: Option<String>,
        gold: impl Into<String>,
        difficulty: DifficultyLevel,
    ) -> Self {
        let gold = gold.into();
        let (em, f1) = match &prediction {
            Some(p) => (exact_match(p, &gold), token_f1(p, &gold)),
            None => (0.0, 0.0),
        };
        Self { table_id: table_id.into(), column_index, prediction, gold, difficulty, em, f1 }
    }

    pub fn extracted(&self) -> bool {
        self.prediction.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub n: usize,
    pub extracted: usize,
    pub extraction_rate: f64,
    /// Means over all records, failures as 0.
    pub em: f64,
    pub f1: f64,
    /// Means over extracted records; absent when none were extracted.
    pub em_extracted: Option<f64>,
    pub f1_extracted: Option<f64>,
}

impl Scores {
    fn from_records<'a>(records: impl Iterator<Item = &'a EvalRecord>) -> Self {
        let (mut n, mut extracted) = (0usize, 0usize);
        let (mut em, mut f1) = (0.0, 0.0);
        for r in records {
            n += 1;
            if r.extracted() {
                extracted += 1;
                em += r.em;
                f1 += r.f1;
            }
        }
        let mean = |sum: f64, d: usize| if d == 0 { 0.0 } else { sum / d as f64 };
        let ext = |sum: f64| (extracted > 0).then(|| sum / extracted as f64);
        Self {
            n,
            extracted,
            extraction_rate: mean(extracted as f64, n),
            em: mean(em, n),
            f1: mean(f1, n),
            em_extracted: ext(em),
            f1_extracted: ext(f1),
        }
    }

    pub fn get(&self, metric: Metric, convention: Convention) -> Option<f64> {
        match (metric, convention) {
            (Metric::Em, Convention::All) => (self.n > 0).then_some(self.em),
            (Metric::F1, Convention::All) => (self.n > 0).then_some(self.f1),
            (Metric::Em, Convention::Extracted) => self.em_extracted,
            (Metric::F1, Convention::Extracted) => self.f1_extracted,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub overall: Scores,
    pub per_level: BTreeMap<DifficultyLevel, Scores>,
}

/// Means overall and per level. Records are folded in (table_id,
/// column_index) order so the result does not depend on input order.
pub fn aggregate(records: &[EvalRecord]) -> Result<EvalReport, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut sorted: Vec<&EvalRecord> = records.iter().collect();
    sorted.sort_by(|a, b| {
        (a.table_id.as_str(), a.column_index).cmp(&(b.table_id.as_str(), b.column_index))
    });
    let overall = Scores::from_records(sorted.iter().copied());
    let per_level = DifficultyLevel::ALL
        .iter()
        .map(|&l| (l, Scores::from_records(sorted.iter().copied().filter(|r| r.difficulty == l))))
        .collect();
    Ok(EvalReport { overall, per_level })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Em,
    F1,
}

impl Metric {
    fn label(self) -> &'static str {
        match self {
            Metric::Em => "EM",
            Metric::F1 => "F1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Convention {
    /// Scores over predictions that were extracted.
    #[default]
    Extracted,
    All,
}

impl Convention {
    fn label(self) -> &'static str {
        match self {
            Convention::Extracted => "extracted predictions only",
            Convention::All => "all records, failures scored 0",
        }
    }
}

pub const VARIANT_Q: &str = "q";
pub const VARIANT_TQ: &str = "t'+q";

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{:.1}", x * 100.0))
}

/// Text tables of overall EM/F1 for q and t′+q side by side, then the four
/// difficulty levels. A missing variant shows as "-".
pub fn render_report(
    model: &str,
    q: Option<&EvalReport>,
    tq: Option<&EvalReport>,
    convention: Convention,
) -> String {
    let variants = [(VARIANT_Q, q), (VARIANT_TQ, tq)];
    let metrics = [Metric::Em, Metric::F1];
    let mut out = String::new();

    let _ = writeln!(out, "Overall scores (%), {}", convention.label());
    let mut header = vec!["Model".to_string()];
    let mut row = vec![model.to_string()];
    for m in metrics {
        for (name, rep) in variants {
            header.push(format!("{} {name}", m.label()));
            row.push(cell(rep.and_then(|r| r.overall.get(m, convention))));
        }
    }
    write_table(&mut out, &[header, row]);

    let _ = writeln!(out);
    let _ = writeln!(out, "Scores by difficulty (%), {}", convention.label());
    let mut rows = vec![std::iter::once("Model".to_string())
        .chain(DifficultyLevel::ALL.iter().map(|l| l.label().to_string()))
        .collect::<Vec<_>>()];
    for m in metrics {
        for (name, rep) in variants {
            let mut r = vec![format!("{model} {} {name}", m.label())];
            for l in DifficultyLevel::ALL {
                r.push(cell(rep.and_then(|x| x.per_level.get(&l)).and_then(|s| s.get(m, convention))));
            }
            rows.push(r);
        }
    }
    write_table(&mut out, &rows);

    let _ = writeln!(out);
    let _ = writeln!(out, "Extraction rate (%)");
    let mut header = vec!["Model".to_string()];
    let mut row = vec![model.to_string()];
    for (name, rep) in variants {
        header.push(name.to_string());
        row.push(cell(rep.map(|r| r.overall.extraction_rate)));
    }
    write_table(&mut out, &[header, row]);
    out
}

fn write_table(out: &mut String, rows: &[Vec<String>]) {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    for (i, r) in rows.iter().enumerate() {
        let line: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(c, s)| {
                if c == 0 {
                    format!("{s:<w$}", w = widths[c])
                } else {
                    format!("{s:>w$}", w = widths[c])
                }
            })
            .collect();
        let _ = writeln!(out, "| {} |", line.join(" | "));
        if i == 0 {
            let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
            let _ = writeln!(out, "|-{}-|", rule.join("-|-"));
        }
    }
}
