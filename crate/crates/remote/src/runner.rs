use std::time::Instant;

use futures::stream::{self, StreamExt};
use nameguess_core::promptkit::PromptBundle;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::completion::{CompletionBackend, EndpointError};

/// One raw-log line, written before any answer parsing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawCompletion {
    pub bundle_id: String,
    pub prompt_sha256: String,
    pub completion: Option<String>,
    pub latency_ms: u64,
    /// "ok", or the error message.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub http_status: Option<u16>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InferenceResult {
    pub bundle_id: String,
    pub completion: Result<String, EndpointError>,
    pub latency_ms: u64,
}

impl InferenceResult {
    pub fn raw(&self, prompt: &str) -> RawCompletion {
        RawCompletion {
            bundle_id: self.bundle_id.clone(),
            prompt_sha256: prompt_sha256(prompt),
            completion: self.completion.as_ref().ok().cloned(),
            latency_ms: self.latency_ms,
            status: match &self.completion {
                Ok(_) => "ok".into(),
                Err(e) => e.to_string(),
            },
            http_status: self.completion.as_ref().err().and_then(EndpointError::status),
        }
    }
}

pub fn prompt_sha256(prompt: &str) -> String {
    Sha256::digest(prompt.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Completes every bundle with at most `max_in_flight` requests open.
/// `sink` sees each raw record as soon as its request finishes; a sink error
/// stops the run. Results come back sorted by bundle id; each bundle appears
/// exactly once.
pub async fn run_inference<B, F, E>(
    backend: &B,
    bundles: &[PromptBundle],
    max_in_flight: usize,
    mut sink: F,
) -> Result<Vec<InferenceResult>, E>
where
    B: CompletionBackend,
    F: FnMut(&RawCompletion) -> Result<(), E>,
{
    let mut stream = stream::iter(bundles.iter().enumerate())
        .map(|(i, bundle)| async move {
            let start = Instant::now();
            let completion = backend.complete(bundle).await;
            let latency_ms = start.elapsed().as_millis() as u64;
            (i, InferenceResult { bundle_id: bundle.bundle_id.clone(), completion, latency_ms })
        })
        .buffer_unordered(max_in_flight.max(1));

    let mut results = Vec::with_capacity(bundles.len());
    while let Some((i, result)) = stream.next().await {
        sink(&result.raw(&bundles[i].prompt))?;
        results.push(result);
    }
    results.sort_by(|a, b| a.bundle_id.cmp(&b.bundle_id));
    Ok(results)
}
