//! Table linearization, task prompts and completion parsing.
//!
//! A bundle covers up to K columns of one table. Its context lists the query
//! names followed by up to N rows of sampled cell values:
//!
//! ```text
//! Column names: c_name, pCd <SEP> row 1: Alice, 7 <SEP> row 2: Bob, 9
//! ```

use std::collections::HashSet;

use rand::seq::index;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abbrev::{table_rng, NamePair};
use crate::corpus::Table;

pub const MAX_CELL_CHARS: usize = 20;
pub const DEFAULT_K: usize = 10;
pub const DEFAULT_N: usize = 10;

pub const TASK_PREFIX: &str = "As abbreviations of column names from a table, ";
pub const DEMONSTRATION: &str = "As abbreviations of column names from a table, c_name | pCd | dt stand for Customer Name | Product Code | Date.";

#[derive(Debug, Error, PartialEq)]
pub enum PromptError {
    #[error("{queries} query names but {golds} gold names")]
    LengthMismatch { queries: usize, golds: usize },
    #[error("no query names")]
    Empty,
    #[error("column {0} out of range")]
    ColumnOutOfRange(usize),
    #[error("K must be at least 1")]
    ZeroK,
}

#[derive(Debug, Error, PartialEq)]
pub enum ExtractError {
    #[error("expected {expected} answers, found {found}")]
    PartCount { expected: usize, found: usize },
    #[error("answer {0} is empty")]
    EmptyPart(usize),
}

/// How sampled rows are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum SampleMode {
    /// First N distinct values in row order.
    #[default]
    First,
    /// N distinct values drawn uniformly, kept in row order.
    Random { seed: u64 },
}

fn truncate_cell(value: &str) -> String {
    value.chars().take(MAX_CELL_CHARS).collect()
}

fn distinct_values(table: &Table, column: usize) -> Vec<&str> {
    let mut seen = HashSet::new();
    table
        .column(column)
        .flatten()
        .filter(|v| seen.insert(*v))
        .collect()
}

/// Up to `n` distinct non-missing values of a column, each cut to 20
/// characters.
pub fn sample_cells(
    table: &Table,
    column: usize,
    n: usize,
    mode: SampleMode,
) -> Result<Vec<String>, PromptError> {
    if column >= table.n_cols() {
        return Err(PromptError::ColumnOutOfRange(column));
    }
    let values = distinct_values(table, column);
    let picked: Vec<&str> = match mode {
        SampleMode::First => values.into_iter().take(n).collect(),
        SampleMode::Random { seed } => {
            if values.len() <= n {
                values
            } else {
                let mut rng = table_rng(seed, &format!("{}\u{1f}{column}", table.id));
                let mut idx = index::sample(&mut rng, values.len(), n).into_vec();
                idx.sort_unstable();
                idx.into_iter().map(|i| values[i]).collect()
            }
        }
    };
    Ok(picked.into_iter().map(truncate_cell).collect())
}

/// Splits `0..n_cols` into consecutive groups of `k`.
pub fn chunk_columns(table: &Table, k: usize) -> Result<Vec<Vec<usize>>, PromptError> {
    let all: Vec<usize> = (0..table.n_cols()).collect();
    chunk_indices(&all, k)
}

pub fn chunk_indices(indices: &[usize], k: usize) -> Result<Vec<Vec<usize>>, PromptError> {
    if k == 0 {
        return Err(PromptError::ZeroK);
    }
    Ok(indices.chunks(k).map(<[usize]>::to_vec).collect())
}

/// Renders t′ for the given columns, labelled with `names` (normally the
/// query names). Rows run up to the longest sample, at most `n`; columns
/// with fewer values leave empty slots.
pub fn linearize_context<S: AsRef<str>>(
    table: &Table,
    group: &[usize],
    names: &[S],
    n: usize,
    mode: SampleMode,
) -> Result<String, PromptError> {
    if group.is_empty() {
        return Err(PromptError::Empty);
    }
    if names.len() != group.len() {
        return Err(PromptError::LengthMismatch { queries: names.len(), golds: group.len() });
    }
    let samples: Vec<Vec<String>> = group
        .iter()
        .map(|&c| sample_cells(table, c, n, mode))
        .collect::<Result<_, _>>()?;
    let rows = samples.iter().map(Vec::len).max().unwrap_or(0).min(n);

    let mut out = String::from("Column names: ");
    out.push_str(&names.iter().map(AsRef::as_ref).collect::<Vec<_>>().join(", "));
    for r in 0..rows {
        let cells: Vec<&str> = samples
            .iter()
            .map(|s| s.get(r).map(String::as_str).unwrap_or(""))
            .collect();
        out.push_str(&format!(" <SEP> row {}: {}", r + 1, cells.join(", ")));
    }
    Ok(out)
}

fn join_pipes<S: AsRef<str>>(items: &[S]) -> String {
    items.iter().map(AsRef::as_ref).collect::<Vec<_>>().join("|")
}

pub fn build_training_prompt<S: AsRef<str>, T: AsRef<str>>(
    context: &str,
    queries: &[S],
    golds: &[T],
) -> Result<String, PromptError> {
    if queries.is_empty() {
        return Err(PromptError::Empty);
    }
    if queries.len() != golds.len() {
        return Err(PromptError::LengthMismatch { queries: queries.len(), golds: golds.len() });
    }
    Ok(format!(
        "{context}\n{TASK_PREFIX}{} stand for {}.",
        join_pipes(queries),
        join_pipes(golds)
    ))
}

pub fn build_inference_prompt<S: AsRef<str>>(
    context: &str,
    queries: &[S],
    with_demo: bool,
) -> Result<String, PromptError> {
    if queries.is_empty() {
        return Err(PromptError::Empty);
    }
    let demo = if with_demo { format!("{DEMONSTRATION}\n") } else { String::new() };
    Ok(format!("{demo}{context}\n{TASK_PREFIX}{} stand for", join_pipes(queries)))
}

/// Byte offset of the first period that ends a sentence: one followed by end
/// of text, a line break, or a space and an uppercase letter.
fn sentence_end(text: &str) -> Option<usize> {
    let bytes = text.as_bytes();
    text.match_indices('.').map(|(i, _)| i).find(|&i| {
        let rest = &text[i + 1..];
        match bytes.get(i + 1) {
            None | Some(b'\n') | Some(b'\r') => true,
            Some(b' ') => rest[1..].chars().next().is_some_and(char::is_uppercase),
            _ => false,
        }
    })
}

/// Splits a completion into exactly `k` answers.
pub fn extract_answers(completion: &str, k: usize) -> Result<Vec<String>, ExtractError> {
    let body = match sentence_end(completion) {
        Some(i) => &completion[..i],
        None => completion,
    };
    let parts: Vec<String> = body.split('|').map(|p| p.trim().to_string()).collect();
    if parts.len() != k {
        return Err(ExtractError::PartCount { expected: k, found: parts.len() });
    }
    if let Some(i) = parts.iter().position(String::is_empty) {
        return Err(ExtractError::EmptyPart(i));
    }
    Ok(parts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptMode {
    Train,
    Infer,
}

/// One prompt over up to K columns of a table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub bundle_id: String,
    pub table_id: String,
    pub columns: Vec<usize>,
    pub queries: Vec<String>,
    pub context: String,
    pub prompt: String,
    pub golds: Option<Vec<String>>,
    pub demo_included: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PromptOptions {
    pub k: usize,
    pub n: usize,
    pub mode: PromptMode,
    pub demo: bool,
    pub sampling: SampleMode,
}

impl Default for PromptOptions {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            n: DEFAULT_N,
            mode: PromptMode::Infer,
            demo: false,
            sampling: SampleMode::First,
        }
    }
}

/// Bundles for one table's pairs, chunked by K in column order. Gold names
/// are attached in training mode only.
pub fn build_bundles(
    table: &Table,
    pairs: &[&NamePair],
    opts: &PromptOptions,
) -> Result<Vec<PromptBundle>, PromptError> {
    let mut sorted: Vec<&NamePair> = pairs.to_vec();
    sorted.sort_by_key(|p| p.column_index);
    if opts.k == 0 {
        return Err(PromptError::ZeroK);
    }
    sorted
        .chunks(opts.k)
        .enumerate()
        .map(|(chunk, group)| {
            let columns: Vec<usize> = group.iter().map(|p| p.column_index).collect();
            let queries: Vec<String> = group.iter().map(|p| p.query_name.clone()).collect();
            let golds: Vec<String> = group.iter().map(|p| p.logical_name.clone()).collect();
            let context = linearize_context(table, &columns, &queries, opts.n, opts.sampling)?;
            let (prompt, golds, demo_included) = match opts.mode {
                PromptMode::Train => {
                    (build_training_prompt(&context, &queries, &golds)?, Some(golds), false)
                }
                PromptMode::Infer => {
                    (build_inference_prompt(&context, &queries, opts.demo)?, None, opts.demo)
                }
            };
            Ok(PromptBundle {
                bundle_id: format!("{}#{chunk}", table.id),
                table_id: table.id.clone(),
                columns,
                queries,
                context,
                prompt,
                golds,
                demo_included,
            })
        })
        .collect()
}
