use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::FabricationConfig;
use super::dict::Dictionaries;
use super::header::{abbreviate_header, TableCache, Trace};
use super::AbbrevError;
use crate::corpus::Table;
use crate::difficulty::DifficultyLevel;
use crate::segment::{is_logical_name, split_surface, FrequencyLexicon, Vocabulary};

/// One abbreviated/expanded column pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamePair {
    pub table_id: String,
    pub column_index: usize,
    pub query_name: String,
    pub logical_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Trace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub difficulty: Option<DifficultyLevel>,
}

/// Stable per-table seed: the first 8 bytes of SHA-256 over the run seed and
/// the table id.
pub fn table_seed(seed: u64, table_id: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(table_id.as_bytes());
    let digest = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn table_rng(seed: u64, table_id: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(table_seed(seed, table_id))
}

/// Everything fabrication reads, bundled so tables can be processed from
/// any thread.
pub struct Fabricator<'a> {
    pub config: &'a FabricationConfig,
    pub dicts: &'a Dictionaries,
    pub vocab: &'a Vocabulary,
    pub lexicon: &'a FrequencyLexicon,
}

impl Fabricator<'_> {
    /// Pairs for one table, in column order. Headers that are not well
    /// curated are skipped.
    pub fn fabricate_table(&self, table: &Table) -> Result<Vec<NamePair>, AbbrevError> {
        let mut rng = table_rng(self.config.seed, &table.id);
        let mut cache = TableCache::new();
        let mut pairs = Vec::new();
        for (column_index, header) in table.headers().iter().enumerate() {
            let logical = header.trim();
            if !is_logical_name(logical, self.vocab, self.lexicon) {
                tracing::debug!(table = %table.id, column_index, header, "skipped: not well curated");
                continue;
            }
            let tokens = split_surface(logical, self.lexicon);
            if tokens.is_empty() {
                continue;
            }
            let (query_name, trace) =
                abbreviate_header(&tokens, self.config, self.dicts, &mut cache, &mut rng)?;
            pairs.push(NamePair {
                table_id: table.id.clone(),
                column_index,
                query_name,
                logical_name: logical.to_string(),
                trace: Some(trace),
                difficulty: None,
            });
        }
        Ok(pairs)
    }

    /// Fabricates pairs for every table on the current rayon pool. Output
    /// is sorted by (table_id, column_index), so it does not depend on
    /// scheduling.
    pub fn fabricate_corpus(&self, tables: &[Table]) -> Result<Vec<NamePair>, AbbrevError> {
        self.config.validate()?;
        let per_table: Vec<Vec<NamePair>> = tables
            .par_iter()
            .map(|t| self.fabricate_table(t))
            .collect::<Result<_, _>>()?;
        let mut pairs: Vec<NamePair> = per_table.into_iter().flatten().collect();
        pairs.sort_by(|a, b| {
            (a.table_id.as_str(), a.column_index).cmp(&(b.table_id.as_str(), b.column_index))
        });
        Ok(pairs)
    }

    /// Same as `fabricate_corpus` on a dedicated pool of `threads` workers.
    pub fn fabricate_with_threads(
        &self,
        tables: &[Table],
        threads: usize,
    ) -> Result<Vec<NamePair>, AbbrevError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .map_err(|e| AbbrevError::InvalidConfig(e.to_string()))?;
        pool.install(|| self.fabricate_corpus(tables))
    }
}
