use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::{
    select_case, select_method, select_rule, select_snake_casing, CaseStyle, FabricationConfig,
    Method, Rule, SnakeCasing,
};
use super::dict::{phrase_key, AcronymDict, Dictionaries};
use super::rules::{apply_rule, is_year, shorten_year};
use super::AbbrevError;
use crate::segment::is_digit_token;

/// Where a produced word came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Via {
    Keep,
    Lookup,
    Rule,
    /// Reused from an earlier column of the same table.
    Cache,
    Acronym,
    Year,
    /// Non-alphabetic token passed through.
    Literal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordMapping {
    pub source: String,
    pub output: String,
    pub via: Via,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcronymHit {
    pub phrase: String,
    pub acronym: String,
}

/// Every decision taken while abbreviating one header. `words` is in output
/// order, so `replay` rebuilds the query name without randomness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub method: Method,
    pub rule: Rule,
    pub k: usize,
    pub case_style: CaseStyle,
    pub snake_casing: SnakeCasing,
    pub acronym_hits: Vec<AcronymHit>,
    pub removed: Vec<String>,
    pub reordered: bool,
    pub words: Vec<WordMapping>,
}

impl Trace {
    pub fn replay(&self) -> String {
        let outputs: Vec<&str> = self.words.iter().map(|w| w.output.as_str()).collect();
        combine(&outputs, self.case_style, self.snake_casing)
    }
}

/// Per-table memory of abbreviated forms, keyed by lowercase word or phrase.
#[derive(Debug, Default, Clone)]
pub struct TableCache {
    forms: HashMap<String, String>,
}

impl TableCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.forms.get(key).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars.flat_map(char::to_lowercase)).collect(),
        None => String::new(),
    }
}

/// Re-applies the casing shape of `surface` (upper, capitalized or lower) to
/// a cached lowercase form.
fn match_case(form: &str, surface: &str) -> String {
    let letters: Vec<char> = surface.chars().filter(|c| c.is_alphabetic()).collect();
    if letters.len() > 1 && letters.iter().all(|c| c.is_uppercase()) {
        form.to_uppercase()
    } else if letters.first().is_some_and(|c| c.is_uppercase()) {
        capitalize(form)
    } else {
        form.to_lowercase()
    }
}

/// Joins abbreviated words in one of the four naming styles.
pub fn combine<S: AsRef<str>>(words: &[S], style: CaseStyle, casing: SnakeCasing) -> String {
    let words = words.iter().map(AsRef::as_ref);
    match style {
        CaseStyle::Camel => words
            .enumerate()
            .map(|(i, w)| if i == 0 { w.to_lowercase() } else { capitalize(w) })
            .collect(),
        CaseStyle::Pascal => words.map(capitalize).collect(),
        CaseStyle::Simple => words.map(str::to_lowercase).collect(),
        CaseStyle::Snake => {
            let joined = words.collect::<Vec<_>>().join("_");
            match casing {
                SnakeCasing::Upper => joined.to_uppercase(),
                SnakeCasing::Lower => joined.to_lowercase(),
                SnakeCasing::AsProduced => joined,
            }
        }
    }
}

/// A word of the header, or a phrase already replaced by its acronym.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Span {
    Word(String),
    Acronym { phrase: String, acronym: String },
}

/// Greedy longest-match replacement of dictionary phrases, applied to the
/// whole header with probability `p`. The coin is always drawn.
pub fn acronym_extract<R: Rng + ?Sized, S: AsRef<str>>(
    tokens: &[S],
    dict: &AcronymDict,
    rng: &mut R,
    p: f64,
) -> (Vec<Span>, Vec<AcronymHit>) {
    let fire = rng.random_bool(p);
    let mut spans = Vec::with_capacity(tokens.len());
    let mut hits = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        if fire {
            let longest = dict.max_words().min(tokens.len() - i);
            let found = (2..=longest).rev().find_map(|len| {
                let key = phrase_key(&tokens[i..i + len]);
                dict.get(&key).map(|a| (len, key, a.to_string()))
            });
            if let Some((len, phrase, acronym)) = found {
                hits.push(AcronymHit { phrase: phrase.clone(), acronym: acronym.clone() });
                spans.push(Span::Acronym { phrase, acronym });
                i += len;
                continue;
            }
        }
        spans.push(Span::Word(tokens[i].as_ref().to_string()));
        i += 1;
    }
    (spans, hits)
}

fn is_alpha_word(w: &str) -> bool {
    !w.is_empty() && w.chars().all(char::is_alphabetic)
}

/// Header-level draws, taken in a fixed order before any word is touched.
struct Draws {
    method: Method,
    rule: Rule,
    k: usize,
    case_style: CaseStyle,
    snake_casing: SnakeCasing,
    remove: bool,
    reorder: bool,
}

/// Abbreviates the surface tokens of one well-curated header.
pub fn abbreviate_header<R: Rng + ?Sized, S: AsRef<str>>(
    tokens: &[S],
    config: &FabricationConfig,
    dicts: &Dictionaries,
    cache: &mut TableCache,
    rng: &mut R,
) -> Result<(String, Trace), AbbrevError> {
    if tokens.is_empty() {
        return Err(AbbrevError::EmptyHeader);
    }
    let draws = Draws {
        method: select_method(rng, &config.p_method),
        rule: select_rule(rng, &config.p_rule),
        k: rng.random_range(config.k_range[0]..=config.k_range[1]),
        case_style: select_case(rng, &config.p_case),
        snake_casing: select_snake_casing(rng, &config.p_snake_casing),
        remove: rng.random_bool(config.p_word_removal),
        reorder: rng.random_bool(config.p_reorder_year_front),
    };
    let (mut spans, acronym_hits) =
        acronym_extract(tokens, &dicts.acronyms, rng, config.p_acronym);

    let mut removed = Vec::new();
    if draws.remove {
        let droppable = |s: &Span| match s {
            Span::Word(w) => config.drop_candidates.iter().any(|d| d.eq_ignore_ascii_case(w)),
            Span::Acronym { .. } => false,
        };
        if spans.iter().any(|s| !droppable(s)) {
            spans.retain(|s| {
                let drop = droppable(s);
                if let (true, Span::Word(w)) = (drop, s) {
                    removed.push(w.clone());
                }
                !drop
            });
        }
    }

    let mut reordered = false;
    if draws.reorder {
        let year_at = spans
            .iter()
            .position(|s| matches!(s, Span::Word(w) if is_year(w)));
        if let Some(i) = year_at.filter(|&i| i > 0) {
            let year = spans.remove(i);
            spans.insert(0, year);
            reordered = true;
        }
    }

    let mut words = Vec::with_capacity(spans.len());
    let mut i = 0;
    while i < spans.len() {
        match &spans[i] {
            Span::Acronym { phrase, acronym } => {
                words.push(WordMapping {
                    source: phrase.clone(),
                    output: acronym.clone(),
                    via: Via::Acronym,
                });
                i += 1;
            }
            Span::Word(w) if is_digit_token(w) => {
                let out = shorten_year(w, rng, config.p_year_shorten);
                let via = if is_year(w) { Via::Year } else { Via::Literal };
                words.push(WordMapping { source: w.clone(), output: out, via });
                i += 1;
            }
            Span::Word(w) if !is_alpha_word(w) => {
                words.push(WordMapping { source: w.clone(), output: w.clone(), via: Via::Literal });
                i += 1;
            }
            Span::Word(_) => {
                let (mapping, used) = abbreviate_word_at(&spans[i..], &draws, dicts, cache, rng);
                words.push(mapping);
                i += used;
            }
        }
    }

    let trace = Trace {
        method: draws.method,
        rule: draws.rule,
        k: draws.k,
        case_style: draws.case_style,
        snake_casing: draws.snake_casing,
        acronym_hits,
        removed,
        reordered,
        words,
    };
    let query = trace.replay();
    if query.is_empty() {
        return Err(AbbrevError::EmptyHeader);
    }
    Ok((query, trace))
}

/// Abbreviates the alphabetic word at the head of `spans`. Under the lookup
/// method a multi-word dictionary phrase starting there is preferred.
/// Returns the mapping and the number of spans consumed.
fn abbreviate_word_at<R: Rng + ?Sized>(
    spans: &[Span],
    draws: &Draws,
    dicts: &Dictionaries,
    cache: &mut TableCache,
    rng: &mut R,
) -> (WordMapping, usize) {
    let Span::Word(word) = &spans[0] else {
        unreachable!("caller passes a word span");
    };

    if draws.method == Method::Lookup {
        let run: Vec<&str> = spans
            .iter()
            .take(dicts.lookup.max_phrase_words())
            .map_while(|s| match s {
                Span::Word(w) if is_alpha_word(w) => Some(w.as_str()),
                _ => None,
            })
            .collect();
        for len in (2..=run.len()).rev() {
            let key = phrase_key(&run[..len]);
            let source = run[..len].join(" ");
            if let Some(form) = cache.get(&key) {
                let output = match_case(form, run[0]);
                return (WordMapping { source, output, via: Via::Cache }, len);
            }
            if let Some(candidates) = dicts.lookup.get(&key) {
                let output = candidates[rng.random_range(0..candidates.len())].clone();
                cache.forms.insert(key, output.to_lowercase());
                return (WordMapping { source, output, via: Via::Lookup }, len);
            }
        }
    }

    let key = word.to_lowercase();
    if let Some(form) = cache.get(&key) {
        let output = match_case(form, word);
        return (WordMapping { source: word.clone(), output, via: Via::Cache }, 1);
    }
    let (output, via) = match draws.method {
        Method::Keep => (word.clone(), Via::Keep),
        Method::Lookup => match dicts.lookup.get(&key) {
            Some(c) => (c[rng.random_range(0..c.len())].clone(), Via::Lookup),
            None => (apply_rule(draws.rule, word, draws.k, rng), Via::Rule),
        },
        Method::Rule => (apply_rule(draws.rule, word, draws.k, rng), Via::Rule),
    };
    cache.forms.insert(key, output.to_lowercase());
    (WordMapping { source: word.clone(), output, via }, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abbrev::config::{CaseWeights, MethodWeights, RuleWeights, SnakeCasingWeights};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn forced(method: Method, rule: Rule, k: usize, style: CaseStyle) -> FabricationConfig {
        FabricationConfig {
            p_method: MethodWeights::only(method),
            p_rule: RuleWeights::only(rule),
            k_range: [k, k],
            p_case: CaseWeights::only(style),
            p_snake_casing: SnakeCasingWeights::only(SnakeCasing::Upper),
            p_acronym: 0.0,
            p_year_shorten: 0.0,
            p_word_removal: 0.0,
            p_reorder_year_front: 0.0,
            ..Default::default()
        }
    }

    fn run(tokens: &[&str], cfg: &FabricationConfig) -> (String, Trace) {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let dicts = Dictionaries::embedded();
        abbreviate_header(tokens, cfg, &dicts, &mut TableCache::new(), &mut rng).unwrap()
    }

    #[test]
    fn combine_styles() {
        assert_eq!(combine(&["cur", "bal"], CaseStyle::Snake, SnakeCasing::Upper), "CUR_BAL");
        assert_eq!(combine(&["cur", "bal"], CaseStyle::Pascal, SnakeCasing::Upper), "CurBal");
        assert_eq!(combine(&["cur", "bal"], CaseStyle::Camel, SnakeCasing::Upper), "curBal");
        assert_eq!(combine(&["Cur", "BAL"], CaseStyle::Simple, SnakeCasing::Upper), "curbal");
        assert_eq!(
            combine(&["Cur", "bal"], CaseStyle::Snake, SnakeCasing::AsProduced),
            "Cur_bal"
        );
        assert_eq!(
            combine(&["2013", "mail", "addr", "dist"], CaseStyle::Pascal, SnakeCasing::Upper),
            "2013MailAddrDist"
        );
    }

    #[test]
    fn acronym_longest_match() {
        let dict = AcronymDict::embedded();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (spans, hits) =
            acronym_extract(&["Employee", "Date", "of", "Birth"], &dict, &mut rng, 1.0);
        assert_eq!(spans.len(), 2);
        assert_eq!(hits, [AcronymHit { phrase: "date of birth".into(), acronym: "dob".into() }]);
        let (spans, hits) = acronym_extract(&["Shoe", "Size"], &dict, &mut rng, 1.0);
        assert_eq!(spans.len(), 2);
        assert!(hits.is_empty());
        let (_, hits) = acronym_extract(&["Fiscal", "Year", "2021"], &dict, &mut rng, 0.0);
        assert!(hits.is_empty());
    }

    #[test]
    fn forced_rule_paths() {
        let (q, _) = run(&["Current", "Balance"], &forced(Method::Rule, Rule::Prefix, 3, CaseStyle::Snake));
        assert_eq!(q, "CUR_BAL");
        let (q, _) = run(&["abbreviation"], &forced(Method::Rule, Rule::VowelDrop, 5, CaseStyle::Simple));
        assert_eq!(q, "abbrvtn");
    }

    #[test]
    fn keep_with_as_produced_snake_is_underscore_join() {
        let mut cfg = forced(Method::Keep, Rule::Prefix, 3, CaseStyle::Snake);
        cfg.p_snake_casing = SnakeCasingWeights::only(SnakeCasing::AsProduced);
        let (q, trace) = run(&["Fiscal", "Year", "2021"], &cfg);
        assert_eq!(q, "Fiscal_Year_2021");
        assert_eq!(trace.replay(), q);
    }

    #[test]
    fn removal_never_empties_header() {
        let mut cfg = forced(Method::Keep, Rule::Prefix, 3, CaseStyle::Pascal);
        cfg.p_word_removal = 1.0;
        let (q, trace) = run(&["Name", "Code"], &cfg);
        assert_eq!(q, "NameCode");
        assert!(trace.removed.is_empty());
        let (q, trace) = run(&["Zip", "Code"], &cfg);
        assert_eq!(q, "Zip");
        assert_eq!(trace.removed, ["Code"]);
    }

    #[test]
    fn cache_reuses_forms_within_table() {
        let cfg = FabricationConfig { p_acronym: 0.0, ..Default::default() };
        let dicts = Dictionaries::embedded();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut cache = TableCache::new();
        let (_, first) =
            abbreviate_header(&["Current", "Balance"], &cfg, &dicts, &mut cache, &mut rng).unwrap();
        let (_, second) =
            abbreviate_header(&["balance", "due"], &cfg, &dicts, &mut cache, &mut rng).unwrap();
        let form = |t: &Trace, w: &str| {
            t.words
                .iter()
                .find(|m| m.source.eq_ignore_ascii_case(w))
                .map(|m| m.output.to_lowercase())
        };
        assert_eq!(form(&first, "balance"), form(&second, "balance"));
        assert_eq!(second.words[0].via, Via::Cache);
    }

    #[test]
    fn lookup_phrase_match() {
        let cfg = forced(Method::Lookup, Rule::Prefix, 3, CaseStyle::Simple);
        let (q, trace) = run(&["end", "to", "end", "latency"], &cfg);
        assert!(q.starts_with("end2end") || q.starts_with("e2e"), "{q}");
        assert_eq!(trace.words[0].source, "end to end");
    }

    #[test]
    fn empty_header_is_error() {
        let dicts = Dictionaries::embedded();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let empty: [&str; 0] = [];
        assert!(matches!(
            abbreviate_header(&empty, &FabricationConfig::default(), &dicts, &mut TableCache::new(), &mut rng),
            Err(AbbrevError::EmptyHeader)
        ));
    }
}
