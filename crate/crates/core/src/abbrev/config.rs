use std::path::PathBuf;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::AbbrevError;

/// How the words of a header are shortened. Drawn once per header.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Keep,
    Lookup,
    Rule,
}

/// Word-level rule used by `Method::Rule` and as the lookup fallback.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// Keep the first k characters.
    Prefix,
    /// Drop the rightmost non-leading vowel until the word fits in k.
    VowelDrop,
    /// Collapse doubled letters, then drop random vowels, then consonants.
    RandomDrop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseStyle {
    Camel,
    Pascal,
    Snake,
    Simple,
}

/// Letter casing applied to snake-case output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnakeCasing {
    Upper,
    Lower,
    AsProduced,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodWeights {
    pub keep: f64,
    pub lookup: f64,
    pub rule: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuleWeights {
    pub prefix: f64,
    pub vowel_drop: f64,
    pub random_drop: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseWeights {
    pub camel: f64,
    pub pascal: f64,
    pub snake: f64,
    pub simple: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnakeCasingWeights {
    pub upper: f64,
    pub lower: f64,
    pub as_produced: f64,
}

impl MethodWeights {
    pub fn only(method: Method) -> Self {
        let mut w = Self { keep: 0.0, lookup: 0.0, rule: 0.0 };
        match method {
            Method::Keep => w.keep = 1.0,
            Method::Lookup => w.lookup = 1.0,
            Method::Rule => w.rule = 1.0,
        }
        w
    }

    fn as_array(&self) -> [f64; 3] {
        [self.keep, self.lookup, self.rule]
    }
}

impl RuleWeights {
    pub fn only(rule: Rule) -> Self {
        let mut w = Self { prefix: 0.0, vowel_drop: 0.0, random_drop: 0.0 };
        match rule {
            Rule::Prefix => w.prefix = 1.0,
            Rule::VowelDrop => w.vowel_drop = 1.0,
            Rule::RandomDrop => w.random_drop = 1.0,
        }
        w
    }

    fn as_array(&self) -> [f64; 3] {
        [self.prefix, self.vowel_drop, self.random_drop]
    }
}

impl CaseWeights {
    pub fn only(style: CaseStyle) -> Self {
        let mut w = Self { camel: 0.0, pascal: 0.0, snake: 0.0, simple: 0.0 };
        match style {
            CaseStyle::Camel => w.camel = 1.0,
            CaseStyle::Pascal => w.pascal = 1.0,
            CaseStyle::Snake => w.snake = 1.0,
            CaseStyle::Simple => w.simple = 1.0,
        }
        w
    }

    fn as_array(&self) -> [f64; 4] {
        [self.camel, self.pascal, self.snake, self.simple]
    }
}

impl SnakeCasingWeights {
    pub fn only(casing: SnakeCasing) -> Self {
        let mut w = Self { upper: 0.0, lower: 0.0, as_produced: 0.0 };
        match casing {
            SnakeCasing::Upper => w.upper = 1.0,
            SnakeCasing::Lower => w.lower = 1.0,
            SnakeCasing::AsProduced => w.as_produced = 1.0,
        }
        w
    }

    fn as_array(&self) -> [f64; 3] {
        [self.upper, self.lower, self.as_produced]
    }
}

/// Categorical draw over non-negative weights summing to one.
pub(crate) fn draw_index<R: Rng + ?Sized>(rng: &mut R, weights: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    // rounding left u above the final sum
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

pub fn select_method<R: Rng + ?Sized>(rng: &mut R, weights: &MethodWeights) -> Method {
    [Method::Keep, Method::Lookup, Method::Rule][draw_index(rng, &weights.as_array())]
}

pub fn select_rule<R: Rng + ?Sized>(rng: &mut R, weights: &RuleWeights) -> Rule {
    [Rule::Prefix, Rule::VowelDrop, Rule::RandomDrop][draw_index(rng, &weights.as_array())]
}

pub fn select_case<R: Rng + ?Sized>(rng: &mut R, weights: &CaseWeights) -> CaseStyle {
    [CaseStyle::Camel, CaseStyle::Pascal, CaseStyle::Snake, CaseStyle::Simple]
        [draw_index(rng, &weights.as_array())]
}

pub fn select_snake_casing<R: Rng + ?Sized>(rng: &mut R, weights: &SnakeCasingWeights) -> SnakeCasing {
    [SnakeCasing::Upper, SnakeCasing::Lower, SnakeCasing::AsProduced]
        [draw_index(rng, &weights.as_array())]
}

/// Probabilities, thresholds, dictionary paths and seed for fabrication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FabricationConfig {
    pub p_method: MethodWeights,
    pub p_rule: RuleWeights,
    /// Inclusive bounds for the per-header k.
    pub k_range: [usize; 2],
    pub p_acronym: f64,
    pub p_year_shorten: f64,
    pub p_case: CaseWeights,
    pub p_snake_casing: SnakeCasingWeights,
    pub p_word_removal: f64,
    pub p_reorder_year_front: f64,
    /// Words the removal step may drop.
    pub drop_candidates: Vec<String>,
    pub seed: u64,
    pub lookup_path: Option<PathBuf>,
    pub acronym_path: Option<PathBuf>,
}

impl Default for FabricationConfig {
    fn default() -> Self {
        Self {
            p_method: MethodWeights { keep: 0.3, lookup: 0.6, rule: 0.1 },
            p_rule: RuleWeights { prefix: 0.2, vowel_drop: 0.4, random_drop: 0.4 },
            k_range: [1, 5],
            p_acronym: 0.5,
            p_year_shorten: 0.5,
            p_case: CaseWeights { camel: 0.25, pascal: 0.25, snake: 0.25, simple: 0.25 },
            p_snake_casing: SnakeCasingWeights {
                upper: 1.0 / 3.0,
                lower: 1.0 / 3.0,
                as_produced: 1.0 / 3.0,
            },
            p_word_removal: 0.05,
            p_reorder_year_front: 0.05,
            drop_candidates: ["name", "code", "value", "identifier", "id"]
                .map(String::from)
                .to_vec(),
            seed: 42,
            lookup_path: None,
            acronym_path: None,
        }
    }
}

fn check_weights(name: &str, weights: &[f64]) -> Result<(), AbbrevError> {
    if weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
        return Err(AbbrevError::InvalidConfig(format!(
            "{name}: every weight must lie in [0, 1]"
        )));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(AbbrevError::InvalidConfig(format!(
            "{name}: weights sum to {sum}, expected 1"
        )));
    }
    Ok(())
}

impl FabricationConfig {
    pub fn validate(&self) -> Result<(), AbbrevError> {
        check_weights("p_method", &self.p_method.as_array())?;
        check_weights("p_rule", &self.p_rule.as_array())?;
        check_weights("p_case", &self.p_case.as_array())?;
        check_weights("p_snake_casing", &self.p_snake_casing.as_array())?;
        let [lo, hi] = self.k_range;
        if lo < 1 || hi > 5 || lo > hi {
            return Err(AbbrevError::InvalidConfig(format!(
                "k_range [{lo}, {hi}] must satisfy 1 <= lo <= hi <= 5"
            )));
        }
        for (name, p) in [
            ("p_acronym", self.p_acronym),
            ("p_year_shorten", self.p_year_shorten),
            ("p_word_removal", self.p_word_removal),
            ("p_reorder_year_front", self.p_reorder_year_front),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(AbbrevError::InvalidConfig(format!("{name} must lie in [0, 1]")));
            }
        }
        Ok(())
    }
}
