//! Four-level difficulty buckets from character edit distance.
//!
//! Both names are normalized (split, digits and punctuation dropped,
//! lowercased, single-space joined) and their Levenshtein distance is divided
//! by the normalized gold length. The ratio is bucketed with three cutpoints.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::segment::{coarse_split, is_digit_token};

#[derive(Debug, Error, PartialEq)]
pub enum DifficultyError {
    #[error("gold name {0:?} is empty after normalization")]
    EmptyGold(String),
    #[error("invalid thresholds: {0}")]
    InvalidThresholds(String),
    #[error("invalid calibration target: {0}")]
    InvalidTarget(String),
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum DifficultyLevel {
    Easy,
    Medium,
    Hard,
    ExtraHard,
}

impl DifficultyLevel {
    pub const ALL: [DifficultyLevel; 4] = [
        DifficultyLevel::Easy,
        DifficultyLevel::Medium,
        DifficultyLevel::Hard,
        DifficultyLevel::ExtraHard,
    ];

    pub fn label(self) -> &'static str {
        match self {
            DifficultyLevel::Easy => "Easy",
            DifficultyLevel::Medium => "Medium",
            DifficultyLevel::Hard => "Hard",
            DifficultyLevel::ExtraHard => "Extra Hard",
        }
    }
}

impl fmt::Display for DifficultyLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Upper bounds (inclusive) on normalized distance for Easy, Medium, Hard.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DifficultyThresholds {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
}

impl Default for DifficultyThresholds {
    fn default() -> Self {
        Self { t1: 0.1, t2: 0.35, t3: 0.6 }
    }
}

impl DifficultyThresholds {
    pub fn new(t1: f64, t2: f64, t3: f64) -> Result<Self, DifficultyError> {
        let t = Self { t1, t2, t3 };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), DifficultyError> {
        let ok = 0.0 <= self.t1 && self.t1 < self.t2 && self.t2 < self.t3 && self.t3 <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(DifficultyError::InvalidThresholds(format!(
                "need 0 <= t1 < t2 < t3 <= 1, got {}, {}, {}",
                self.t1, self.t2, self.t3
            )))
        }
    }

    pub fn level(&self, distance: f64) -> DifficultyLevel {
        if distance <= self.t1 {
            DifficultyLevel::Easy
        } else if distance <= self.t2 {
            DifficultyLevel::Medium
        } else if distance <= self.t3 {
            DifficultyLevel::Hard
        } else {
            DifficultyLevel::ExtraHard
        }
    }
}

impl FromStr for DifficultyThresholds {
    type Err = DifficultyError;

    /// Parses `t1,t2,t3`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| DifficultyError::InvalidThresholds(e.to_string()))?;
        match parts.as_slice() {
            [a, b, c] => Self::new(*a, *b, *c),
            _ => Err(DifficultyError::InvalidThresholds(format!(
                "expected three comma-separated values, got {}",
                parts.len()
            ))),
        }
    }
}

pub fn normalize_for_distance(name: &str) -> String {
    coarse_split(name)
        .into_iter()
        .filter(|t| !is_digit_token(t))
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Levenshtein distance over characters with unit costs.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Edit distance between normalized names over the normalized gold length.
pub fn normalized_distance(query: &str, gold: &str) -> Result<f64, DifficultyError> {
    let g = normalize_for_distance(gold);
    let len = g.chars().count();
    if len == 0 {
        return Err(DifficultyError::EmptyGold(gold.to_string()));
    }
    let q = normalize_for_distance(query);
    Ok(edit_distance(&q, &g) as f64 / len as f64)
}

pub fn classify(
    query: &str,
    gold: &str,
    thresholds: &DifficultyThresholds,
) -> Result<DifficultyLevel, DifficultyError> {
    Ok(thresholds.level(normalized_distance(query, gold)?))
}

/// Target share of each level, in Easy..ExtraHard order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetSplit(pub [f64; 4]);

impl FromStr for TargetSplit {
    type Err = DifficultyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| DifficultyError::InvalidTarget(e.to_string()))?;
        let arr: [f64; 4] = parts
            .try_into()
            .map_err(|_| DifficultyError::InvalidTarget("expected four values".into()))?;
        if arr.iter().any(|p| *p < 0.0) || (arr.iter().sum::<f64>() - 1.0).abs() > 1e-6 {
            return Err(DifficultyError::InvalidTarget(
                "shares must be non-negative and sum to 1".into(),
            ));
        }
        Ok(Self(arr))
    }
}

/// Fits cutpoints minimizing the largest gap between achieved and target
/// level shares. Cuts sit halfway between adjacent distinct distances, so
/// tied distances always share a level.
pub fn calibrate(
    distances: &[f64],
    target: &TargetSplit,
) -> Result<DifficultyThresholds, DifficultyError> {
    if distances.is_empty() {
        return Err(DifficultyError::InvalidTarget("no distances to calibrate on".into()));
    }
    let mut sorted = distances.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;

    // (cut value, share at or below it); the top candidate takes everything
    let mut candidates: Vec<(f64, f64)> = Vec::new();
    if sorted[0] > 0.0 {
        candidates.push((0.0, 0.0));
    }
    for (i, pair) in sorted.windows(2).enumerate() {
        if pair[0] < pair[1] {
            candidates.push(((pair[0] + pair[1]) / 2.0, (i + 1) as f64 / n));
        }
    }
    let top = sorted[sorted.len() - 1].max(0.0);
    candidates.push((top.min(1.0), 1.0));
    let shares: Vec<f64> = candidates.iter().map(|c| c.1).collect();
    // smallest achievable worst-level gap, then the least squared error among
    // cut triples that reach it
    let (worst, _) = fit_cuts(&shares, &target.0, f64::INFINITY, f64::max);
    let (_, [i, j, l]) = fit_cuts(&shares, &target.0, worst + 1e-12, |acc, dev| acc + dev * dev);
    let mut cuts = [i, j, l].map(|c| candidates[c].0.clamp(0.0, 1.0));

    // equal cuts leave an empty level between them; separate them slightly
    for i in 1..3 {
        if cuts[i] <= cuts[i - 1] {
            cuts[i] = cuts[i - 1] + 1e-9;
        }
    }
    if cuts[2] > 1.0 {
        cuts[2] = 1.0;
        cuts[1] = cuts[1].min(1.0 - 1e-9);
        cuts[0] = cuts[0].min(cuts[1] - 1e-9);
    }
    DifficultyThresholds::new(cuts[0], cuts[1], cuts[2])
}

/// Dynamic program over cut indices i <= j <= l into `cumulative` (shares at
/// or below each candidate cut). Each level's absolute gap to its target must
/// not exceed `cap`; gaps are folded with `fold` starting from 0.
fn fit_cuts(
    cumulative: &[f64],
    target: &[f64; 4],
    cap: f64,
    fold: impl Fn(f64, f64) -> f64,
) -> (f64, [usize; 3]) {
    let m = cumulative.len();
    let gap = |lo: f64, hi: f64, level: usize| {
        let d = (hi - lo - target[level]).abs();
        (d <= cap).then_some(d)
    };
    // best[c] = (folded cost, previous cut) for a partial assignment ending at c
    let mut best: Vec<(f64, usize)> = (0..m)
        .map(|i| gap(0.0, cumulative[i], 0).map_or((f64::INFINITY, 0), |d| (fold(0.0, d), 0)))
        .collect();
    let mut back = Vec::with_capacity(2);
    for level in 1..3 {
        let mut next = vec![(f64::INFINITY, 0usize); m];
        for hi in 0..m {
            for lo in 0..=hi {
                if !best[lo].0.is_finite() {
                    continue;
                }
                if let Some(d) = gap(cumulative[lo], cumulative[hi], level) {
                    let cost = fold(best[lo].0, d);
                    if cost < next[hi].0 {
                        next[hi] = (cost, lo);
                    }
                }
            }
        }
        back.push(std::mem::replace(&mut best, next));
    }
    let mut end = (f64::INFINITY, m - 1);
    for (l, &(cost, _)) in best.iter().enumerate() {
        if let Some(d) = gap(cumulative[l], 1.0, 3).filter(|_| cost.is_finite()) {
            let total = fold(cost, d);
            if total < end.0 {
                end = (total, l);
            }
        }
    }
    let l = end.1;
    let j = best[l].1;
    let i = back[1][j].1;
    (end.0, [i, j, l])
}

/// Share of distances falling in each level.
pub fn level_shares(distances: &[f64], thresholds: &DifficultyThresholds) -> [f64; 4] {
    let mut counts = [0usize; 4];
    for &d in distances {
        counts[thresholds.level(d) as usize] += 1;
    }
    let n = distances.len().max(1) as f64;
    counts.map(|c| c as f64 / n)
}
