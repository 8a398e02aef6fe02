//! Word-level abbreviation rules. All rules keep the leading character.

use rand::Rng;

use super::config::Rule;

pub fn is_vowel(c: char) -> bool {
    matches!(c.to_ascii_lowercase(), 'a' | 'e' | 'i' | 'o' | 'u')
}

/// First `min(k, len)` characters.
pub fn rule1_prefix(word: &str, k: usize) -> String {
    word.chars().take(k).collect()
}

/// Removes the rightmost non-leading vowel until the word is at most `k`
/// characters or no such vowel is left.
pub fn rule2_vowel_drop(word: &str, k: usize) -> String {
    let mut chars: Vec<char> = word.chars().collect();
    while chars.len() > k {
        match (1..chars.len()).rev().find(|&i| is_vowel(chars[i])) {
            Some(i) => {
                chars.remove(i);
            }
            None => break,
        }
    }
    chars.into_iter().collect()
}

/// Collapses runs of the same letter (case-insensitive) to their first
/// character.
pub fn collapse_duplicates(word: &str) -> String {
    let mut out = String::with_capacity(word.len());
    let mut prev: Option<char> = None;
    for c in word.chars() {
        let lc = c.to_lowercase().next();
        if prev.map(|p| p.to_lowercase().next()) != Some(lc) {
            out.push(c);
        }
        prev = Some(c);
    }
    out
}

fn remove_random<R: Rng + ?Sized>(
    chars: &mut Vec<char>,
    k: usize,
    rng: &mut R,
    pick: impl Fn(char) -> bool,
) {
    while chars.len() > k {
        let positions: Vec<usize> = (1..chars.len()).filter(|&i| pick(chars[i])).collect();
        if positions.is_empty() {
            return;
        }
        let at = positions[rng.random_range(0..positions.len())];
        chars.remove(at);
    }
}

/// While the word is longer than `k`: collapse neighbouring duplicates, then
/// remove random non-leading vowels, then random non-leading consonants.
pub fn rule3_random_drop<R: Rng + ?Sized>(word: &str, k: usize, rng: &mut R) -> String {
    if word.chars().count() <= k {
        return word.to_string();
    }
    let mut chars: Vec<char> = collapse_duplicates(word).chars().collect();
    remove_random(&mut chars, k, rng, is_vowel);
    remove_random(&mut chars, k, rng, |c| !is_vowel(c));
    chars.into_iter().collect()
}

pub fn apply_rule<R: Rng + ?Sized>(rule: Rule, word: &str, k: usize, rng: &mut R) -> String {
    match rule {
        Rule::Prefix => rule1_prefix(word, k),
        Rule::VowelDrop => rule2_vowel_drop(word, k),
        Rule::RandomDrop => rule3_random_drop(word, k, rng),
    }
}

/// Four-digit numbers in [1000, 2999].
pub fn is_year(token: &str) -> bool {
    token.len() == 4
        && token.bytes().all(|b| b.is_ascii_digit())
        && matches!(token.as_bytes()[0], b'1' | b'2')
}

/// With probability `p`, replaces a four-digit year by its last two digits.
/// Other tokens pass through and consume no randomness.
pub fn shorten_year<R: Rng + ?Sized>(token: &str, rng: &mut R, p: f64) -> String {
    if is_year(token) && rng.random_bool(p) {
        token[2..].to_string()
    } else {
        token.to_string()
    }
}
