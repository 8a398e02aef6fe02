use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::Rng;

use super::AbbrevError;

static DEFAULT_LOOKUP: &str = include_str!("../../data/lookup.tsv");
static DEFAULT_ACRONYMS: &str = include_str!("../../data/acronyms.tsv");

/// Lowercase words of a key joined by single spaces, so `end-to-end` and
/// `end to end` share one entry.
pub fn phrase_key<S: AsRef<str>>(words: &[S]) -> String {
    words
        .iter()
        .flat_map(|w| w.as_ref().split(|c: char| !c.is_alphanumeric()))
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_tsv<R: Read>(source: R) -> Result<Vec<(usize, String, String)>, AbbrevError> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(source).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('\t') else {
            return Err(AbbrevError::Dictionary {
                line: i + 1,
                message: "expected a tab-separated key and value".into(),
            });
        };
        out.push((i + 1, key.trim().to_string(), value.trim().to_string()));
    }
    Ok(out)
}

/// Expansion-to-abbreviation table, keyed by word or phrase.
#[derive(Debug, Clone, Default)]
pub struct LookupDict {
    map: HashMap<String, Vec<String>>,
    max_phrase_words: usize,
}

impl LookupDict {
    /// Reads `word<TAB>abbr1|abbr2|...` lines.
    pub fn load<R: Read>(source: R) -> Result<Self, AbbrevError> {
        let mut dict = Self::default();
        for (line, key, value) in parse_tsv(source)? {
            let key = phrase_key(&[key]);
            if key.is_empty() {
                return Err(AbbrevError::Dictionary { line, message: "empty key".into() });
            }
            let candidates: Vec<String> = value.split('|').map(|c| c.trim().to_string()).collect();
            if candidates.iter().any(String::is_empty) {
                return Err(AbbrevError::Dictionary {
                    line,
                    message: "empty abbreviation candidate".into(),
                });
            }
            dict.max_phrase_words = dict.max_phrase_words.max(key.split(' ').count());
            let slot = dict.map.entry(key).or_default();
            for c in candidates {
                if !slot.contains(&c) {
                    slot.push(c);
                }
            }
        }
        Ok(dict)
    }

    pub fn embedded() -> Self {
        Self::load(DEFAULT_LOOKUP.as_bytes()).expect("bundled lookup table is valid")
    }

    pub fn from_path(path: &Path) -> Result<Self, AbbrevError> {
        Self::load(File::open(path)?)
    }

    pub fn get(&self, key: &str) -> Option<&[String]> {
        self.map.get(key).map(Vec::as_slice)
    }

    pub fn max_phrase_words(&self) -> usize {
        self.max_phrase_words
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.map.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }
}

/// Uniform pick among the candidates for `word`; `None` on a miss.
pub fn lookup_abbreviation<R: Rng + ?Sized>(
    word: &str,
    dict: &LookupDict,
    rng: &mut R,
) -> Option<String> {
    dict.get(&phrase_key(&[word]))?.choose(rng).cloned()
}

/// Multi-word phrase to acronym table.
#[derive(Debug, Clone, Default)]
pub struct AcronymDict {
    map: HashMap<String, String>,
    max_words: usize,
}

impl AcronymDict {
    /// Reads `phrase<TAB>acronym` lines.
    pub fn load<R: Read>(source: R) -> Result<Self, AbbrevError> {
        let mut dict = Self::default();
        for (line, phrase, acronym) in parse_tsv(source)? {
            let key = phrase_key(&[phrase]);
            let words = key.split(' ').count();
            if words < 2 {
                return Err(AbbrevError::Dictionary {
                    line,
                    message: "acronym phrases need at least two words".into(),
                });
            }
            if acronym.is_empty() || !acronym.chars().all(char::is_alphabetic) {
                return Err(AbbrevError::Dictionary {
                    line,
                    message: "acronyms must be alphabetic".into(),
                });
            }
            dict.max_words = dict.max_words.max(words);
            dict.map.insert(key, acronym.to_lowercase());
        }
        Ok(dict)
    }

    pub fn embedded() -> Self {
        Self::load(DEFAULT_ACRONYMS.as_bytes()).expect("bundled acronym table is valid")
    }

    pub fn from_path(path: &Path) -> Result<Self, AbbrevError> {
        Self::load(File::open(path)?)
    }

    pub fn get(&self, phrase: &str) -> Option<&str> {
        self.map.get(phrase).map(String::as_str)
    }

    pub fn max_words(&self) -> usize {
        self.max_words
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Both dictionaries used by the generator.
#[derive(Debug, Clone, Default)]
pub struct Dictionaries {
    pub lookup: LookupDict,
    pub acronyms: AcronymDict,
}

impl Dictionaries {
    pub fn embedded() -> Self {
        Self {
            lookup: LookupDict::embedded(),
            acronyms: AcronymDict::embedded(),
        }
    }

    /// Loads from the given paths, falling back to the bundled tables.
    pub fn load(lookup: Option<&Path>, acronyms: Option<&Path>) -> Result<Self, AbbrevError> {
        Ok(Self {
            lookup: match lookup {
                Some(p) => LookupDict::from_path(p)?,
                None => LookupDict::embedded(),
            },
            acronyms: match acronyms {
                Some(p) => AcronymDict::from_path(p)?,
                None => AcronymDict::embedded(),
            },
        })
    }
}
