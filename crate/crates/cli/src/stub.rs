use std::collections::HashMap;
use std::future::Future;

use clap::ValueEnum;
use nameguess_core::abbrev::table_rng;
use nameguess_core::promptkit::PromptBundle;
use nameguess_remote::{CompletionBackend, EndpointError};
use rand::seq::SliceRandom;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StubKind {
    /// Answers with the gold names.
    Oracle,
    /// Answers with the query names unchanged.
    Identity,
    /// Answers with the bundle's gold names in shuffled order.
    Scrambler,
}

/// Offline stand-in for a model endpoint.
pub struct StubModel {
    pub kind: StubKind,
    pub golds: HashMap<(String, usize), String>,
    pub seed: u64,
}

impl StubModel {
    fn answers(&self, bundle: &PromptBundle) -> Result<Vec<String>, EndpointError> {
        let golds = || {
            bundle
                .columns
                .iter()
                .map(|&c| {
                    self.golds.get(&(bundle.table_id.clone(), c)).cloned().ok_or_else(|| {
                        EndpointError::InvalidResponse(format!(
                            "no gold for {} column {c}",
                            bundle.table_id
                        ))
                    })
                })
                .collect::<Result<Vec<_>, _>>()
        };
        Ok(match self.kind {
            StubKind::Oracle => golds()?,
            StubKind::Identity => bundle.queries.clone(),
            StubKind::Scrambler => {
                let mut g = golds()?;
                g.shuffle(&mut table_rng(self.seed, &bundle.bundle_id));
                g
            }
        })
    }
}

impl CompletionBackend for StubModel {
    fn complete(
        &self,
        bundle: &PromptBundle,
    ) -> impl Future<Output = Result<String, EndpointError>> + Send {
        let out = self.answers(bundle).map(|a| format!(" {}.", a.join(" | ")));
        async move { out }
    }
}
