//! Probabilistic abbreviation of well-curated column headers.
//!
//! For each header a method (keep / lookup / rule), a word rule, k and a
//! naming style are drawn once. Dictionary phrases may first collapse into
//! acronyms; optional word removal and year-to-front reordering follow; each
//! remaining word is then shortened and the results are combined. Forms
//! chosen for a word are remembered for the rest of the table.

mod config;
mod dict;
mod fabricate;
mod header;
mod rules;

use thiserror::Error;

pub use config::{
    select_case, select_method, select_rule, select_snake_casing, CaseStyle, CaseWeights,
    FabricationConfig, Method, MethodWeights, Rule, RuleWeights, SnakeCasing,
    SnakeCasingWeights,
};
pub use dict::{lookup_abbreviation, phrase_key, AcronymDict, Dictionaries, LookupDict};
pub use fabricate::{table_rng, table_seed, Fabricator, NamePair};
pub use header::{
    abbreviate_header, acronym_extract, combine, AcronymHit, Span, TableCache, Trace, Via,
    WordMapping,
};
pub use rules::{
    apply_rule, collapse_duplicates, is_vowel, is_year, rule1_prefix, rule2_vowel_drop,
    rule3_random_drop, shorten_year,
};

#[derive(Debug, Error)]
pub enum AbbrevError {
    #[error("header has no tokens")]
    EmptyHeader,
    #[error("invalid fabrication config: {0}")]
    InvalidConfig(String),
    #[error("dictionary line {line}: {message}")]
    Dictionary { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
