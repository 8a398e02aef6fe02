//! Identifier segmentation, lemmatization and the well-curated name check.
//!
//! Headers are split in two passes. The coarse pass cuts on any
//! non-alphanumeric character, on lower-to-upper case changes, before the
//! last capital of an acronym that runs into a capitalized word
//! (`HTTPServer` -> `HTTP`, `Server`), and between letters and digits. Each
//! alphabetic piece is then segmented against a frequency-ranked lexicon by
//! a minimum-cost dynamic program.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, BufReader, Read};

use thiserror::Error;

static DEFAULT_LEXICON: &str = include_str!("../data/lexicon.txt");
static DEFAULT_VOCABULARY: &str = include_str!("../data/vocabulary.txt");

/// Closed-class words accepted inside a well-curated name even though the
/// vocabulary only holds open-class words of at least `min_word_len` letters.
pub const DEFAULT_FUNCTION_WORDS: [&str; 16] = [
    "a", "an", "and", "as", "at", "by", "for", "from", "in", "of", "on", "or", "per", "the", "to",
    "with",
];

#[derive(Debug, Error)]
pub enum SegmentError {
    #[error("lexicon is empty")]
    EmptyLexicon,
    #[error("vocabulary is empty after filtering")]
    EmptyVocabulary,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Words ordered by descending corpus frequency.
#[derive(Debug, Clone)]
pub struct FrequencyLexicon {
    words: Vec<String>,
    rank: HashMap<String, usize>,
    max_len: usize,
    log_size: f64,
    skipped: usize,
}

impl FrequencyLexicon {
    /// Reads one word per line, most frequent first. Lines that are not
    /// purely alphabetic, and repeats, are skipped and counted.
    pub fn load<R: Read>(source: R) -> Result<Self, SegmentError> {
        let mut words = Vec::new();
        let mut rank = HashMap::new();
        let mut skipped = 0;
        for line in BufReader::new(source).lines() {
            let line = line?;
            let word = line.trim();
            if word.is_empty() {
                continue;
            }
            if !word.chars().all(char::is_alphabetic) {
                skipped += 1;
                continue;
            }
            let word = word.to_lowercase();
            if rank.contains_key(&word) {
                skipped += 1;
                continue;
            }
            rank.insert(word.clone(), words.len());
            words.push(word);
        }
        if words.is_empty() {
            return Err(SegmentError::EmptyLexicon);
        }
        if skipped > 0 {
            tracing::warn!(skipped, "lexicon lines skipped");
        }
        let max_len = words.iter().map(|w| w.chars().count()).max().unwrap_or(1);
        let log_size = (words.len().max(2) as f64).ln();
        Ok(Self {
            words,
            rank,
            max_len,
            log_size,
            skipped,
        })
    }

    /// The lexicon bundled with the crate.
    pub fn embedded() -> Self {
        Self::load(DEFAULT_LEXICON.as_bytes()).expect("bundled lexicon is valid")
    }

    pub fn rank(&self, word: &str) -> Option<usize> {
        self.rank.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.rank.contains_key(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn skipped(&self) -> usize {
        self.skipped
    }

    pub fn max_word_len(&self) -> usize {
        self.max_len
    }

    /// Zipf cost of a known word: `ln((rank + 1) * ln(N))`.
    pub fn word_cost(&self, word: &str) -> Option<f64> {
        self.rank(word)
            .map(|r| ((r + 1) as f64 * self.log_size).ln())
    }

    /// Cost of the least frequent word.
    pub fn max_word_cost(&self) -> f64 {
        (self.words.len() as f64 * self.log_size).ln()
    }

    /// Cost of a piece of `len` characters that is not in the lexicon. Grows
    /// per character and per piece, so one unknown run is cheaper than the
    /// same characters broken into several unknown pieces.
    pub fn unknown_cost(&self, len: usize) -> f64 {
        (len as f64 + 1.0) * (self.max_word_cost() + 1.0)
    }

    /// Cost of a lowercase piece under this lexicon.
    pub fn piece_cost(&self, piece: &str) -> f64 {
        self.word_cost(piece)
            .unwrap_or_else(|| self.unknown_cost(piece.chars().count()))
    }
}

/// Curation vocabulary of lowercase open-class words.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    entries: HashSet<String>,
    min_word_len: usize,
    function_words: HashSet<String>,
}

impl Vocabulary {
    /// Keeps lowercased, purely alphabetic lines of at least `min_word_len`
    /// characters.
    pub fn build<R: Read>(wordlist: R, min_word_len: usize) -> Result<Self, SegmentError> {
        let mut entries = HashSet::new();
        for line in BufReader::new(wordlist).lines() {
            let line = line?;
            let word = line.trim();
            if word.chars().count() < min_word_len || !word.chars().all(char::is_alphabetic) {
                continue;
            }
            entries.insert(word.to_lowercase());
        }
        if entries.is_empty() {
            return Err(SegmentError::EmptyVocabulary);
        }
        Ok(Self {
            entries,
            min_word_len,
            function_words: DEFAULT_FUNCTION_WORDS.iter().map(|w| w.to_string()).collect(),
        })
    }

    pub fn embedded() -> Self {
        Self::embedded_with_min_len(3)
    }

    /// The bundled word list with a different shortest-word cutoff.
    pub fn embedded_with_min_len(min_word_len: usize) -> Self {
        Self::build(DEFAULT_VOCABULARY.as_bytes(), min_word_len).expect("bundled vocabulary is valid")
    }

    pub fn with_function_words<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.function_words = words.into_iter().map(Into::into).collect();
        self
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains(word)
    }

    pub fn is_function_word(&self, word: &str) -> bool {
        self.function_words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn min_word_len(&self) -> usize {
        self.min_word_len
    }

    pub fn entries(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(String::as_str)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CharClass {
    Upper,
    Lower,
    Digit,
}

fn class_of(c: char) -> CharClass {
    if c.is_numeric() {
        CharClass::Digit
    } else if c.is_uppercase() {
        CharClass::Upper
    } else {
        CharClass::Lower
    }
}

/// Coarse pass: delimiters, case changes and letter/digit changes. Surface
/// casing is preserved.
pub fn coarse_split(name: &str) -> Vec<&str> {
    let mut pieces = Vec::new();
    for run in name.split(|c: char| !c.is_alphanumeric()) {
        if run.is_empty() {
            continue;
        }
        let chars: Vec<(usize, char)> = run.char_indices().collect();
        let mut start = 0;
        for i in 1..chars.len() {
            let prev = class_of(chars[i - 1].1);
            let cur = class_of(chars[i].1);
            let next = chars.get(i + 1).map(|&(_, c)| class_of(c));
            let cut = match (prev, cur) {
                (CharClass::Digit, CharClass::Upper | CharClass::Lower)
                | (CharClass::Upper | CharClass::Lower, CharClass::Digit) => true,
                (CharClass::Lower, CharClass::Upper) => true,
                (CharClass::Upper, CharClass::Upper) => next == Some(CharClass::Lower),
                _ => false,
            };
            if cut {
                pieces.push(&run[start..chars[i].0]);
                start = chars[i].0;
            }
        }
        pieces.push(&run[start..]);
    }
    pieces
}

/// Minimum-cost segmentation of one alphabetic run. Returns surface slices.
pub fn segment_run<'a>(run: &'a str, lexicon: &FrequencyLexicon) -> Vec<&'a str> {
    let offsets: Vec<usize> = run
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(run.len()))
        .collect();
    let n = offsets.len() - 1;
    if n <= 1 {
        return vec![run];
    }
    // lowercase with a per-char byte map, since lowercasing may change widths
    let mut lower = String::with_capacity(run.len());
    let mut lower_off = Vec::with_capacity(n + 1);
    for c in run.chars() {
        lower_off.push(lower.len());
        lower.extend(c.to_lowercase());
    }
    lower_off.push(lower.len());

    let mut best = vec![f64::INFINITY; n + 1];
    let mut back = vec![0usize; n + 1];
    best[0] = 0.0;
    for end in 1..=n {
        for start in 0..end {
            let len = end - start;
            let piece = &lower[lower_off[start]..lower_off[end]];
            let cost = if len <= lexicon.max_word_len() {
                lexicon.piece_cost(piece)
            } else {
                lexicon.unknown_cost(len)
            };
            let total = best[start] + cost;
            if total < best[end] {
                best[end] = total;
                back[end] = start;
            }
        }
    }

    let mut pieces = Vec::new();
    let mut end = n;
    while end > 0 {
        let start = back[end];
        pieces.push(&run[offsets[start]..offsets[end]]);
        end = start;
    }
    pieces.reverse();
    pieces
}

/// Full split keeping the header's surface casing.
pub fn split_surface<'a>(name: &'a str, lexicon: &FrequencyLexicon) -> Vec<&'a str> {
    let mut out = Vec::new();
    for piece in coarse_split(name) {
        if piece.chars().all(char::is_numeric) {
            out.push(piece);
        } else {
            out.extend(segment_run(piece, lexicon));
        }
    }
    out
}

/// Lowercased word and digit-run tokens of an identifier.
pub fn split_identifier(name: &str, lexicon: &FrequencyLexicon) -> Vec<String> {
    split_surface(name, lexicon)
        .into_iter()
        .map(str::to_lowercase)
        .collect()
}

pub fn is_digit_token(token: &str) -> bool {
    !token.is_empty() && token.chars().all(char::is_numeric)
}

const IRREGULAR: &[(&str, &str)] = &[
    ("alumni", "alumnus"),
    ("analyses", "analysis"),
    ("axes", "axis"),
    ("bases", "base"),
    ("caches", "cache"),
    ("calves", "calf"),
    ("children", "child"),
    ("crises", "crisis"),
    ("criteria", "criterion"),
    ("diagnoses", "diagnosis"),
    ("elves", "elf"),
    ("feet", "foot"),
    ("geese", "goose"),
    ("halves", "half"),
    ("hypotheses", "hypothesis"),
    ("indices", "index"),
    ("knives", "knife"),
    ("leaves", "leaf"),
    ("lives", "life"),
    ("loaves", "loaf"),
    ("matrices", "matrix"),
    ("men", "man"),
    ("mice", "mouse"),
    ("oxen", "ox"),
    ("people", "person"),
    ("phenomena", "phenomenon"),
    ("selves", "self"),
    ("shelves", "shelf"),
    ("teeth", "tooth"),
    ("theses", "thesis"),
    ("thieves", "thief"),
    ("vertices", "vertex"),
    ("wives", "wife"),
    ("wolves", "wolf"),
    ("women", "woman"),
];

/// Words ending in `s` that are already base forms.
const INVARIANT: &[&str] = &[
    "address", "alias", "always", "analysis", "atlas", "basis", "bias", "bonus", "bus", "campus",
    "canvas", "census", "chaos", "christmas", "class", "focus", "gas", "gross", "has", "his",
    "its", "lens", "less", "minus", "news", "perhaps", "plus", "process", "series", "species",
    "status", "this", "thus", "various", "versus", "virus", "was", "yes",
];

fn lemma_step(word: &str) -> String {
    if let Some(&(_, base)) = IRREGULAR.iter().find(|(form, _)| *form == word) {
        return base.to_string();
    }
    if INVARIANT.contains(&word) {
        return word.to_string();
    }
    let len = word.chars().count();
    if len > 4 && word.ends_with("ies") {
        return format!("{}y", &word[..word.len() - 3]);
    }
    if word.ends_with("sses")
        || word.ends_with("xes")
        || word.ends_with("ches")
        || word.ends_with("shes")
        || word.ends_with("zzes")
    {
        return word[..word.len() - 2].to_string();
    }
    if len > 3
        && word.ends_with('s')
        && !word.ends_with("ss")
        && !word.ends_with("us")
        && !word.ends_with("is")
    {
        return word[..word.len() - 1].to_string();
    }
    word.to_string()
}

/// Base form of a lowercase word from a small irregular-form table plus
/// plural suffix rules. Iterated to a fixed point, so it is idempotent.
pub fn lemmatize(token: &str) -> String {
    let mut cur = token.to_string();
    for _ in 0..8 {
        let next = lemma_step(&cur);
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

/// True when the whole name is a vocabulary word, or every token is a digit
/// run, a function word, or lemmatizes into the vocabulary.
pub fn is_logical_name(name: &str, vocab: &Vocabulary, lexicon: &FrequencyLexicon) -> bool {
    let trimmed = name.trim();
    if trimmed.is_empty() {
        return false;
    }
    if vocab.contains(&trimmed.to_lowercase()) {
        return true;
    }
    let tokens = split_identifier(trimmed, lexicon);
    if tokens.is_empty() {
        return false;
    }
    tokens.iter().all(|t| {
        is_digit_token(t) || vocab.is_function_word(t) || vocab.contains(&lemmatize(t))
    })
}
