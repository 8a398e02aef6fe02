use std::future::Future;
use std::time::Duration;

use nameguess_core::promptkit::PromptBundle;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

pub const API_KEY_ENV: &str = "NAMEGUESS_API_KEY";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EndpointError {
    #[error("HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("transport: {0}")]
    Transport(String),
    #[error("request timed out")]
    Timeout,
    #[error("unexpected response: {0}")]
    InvalidResponse(String),
    #[error("gave up after {attempts} attempts; last error: {last}")]
    Exhausted { attempts: u32, last: Box<EndpointError> },
    #[error("invalid endpoint config: {0}")]
    Config(String),
}

impl EndpointError {
    pub fn is_retryable(&self) -> bool {
        match self {
            EndpointError::Status { status, .. } => *status == 429 || (500..600).contains(status),
            EndpointError::Transport(_) | EndpointError::Timeout => true,
            _ => false,
        }
    }

    /// HTTP status of the final failure, when there was one.
    pub fn status(&self) -> Option<u16> {
        match self {
            EndpointError::Status { status, .. } => Some(*status),
            EndpointError::Exhausted { last, .. } => last.status(),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EndpointConfig {
    pub base_url: String,
    pub model: String,
    pub max_new_tokens: u32,
    pub temperature: f64,
    pub stop: Vec<String>,
    pub timeout_secs: f64,
    pub max_retries: u32,
    pub max_in_flight: usize,
    pub initial_backoff_ms: u64,
    pub max_backoff_ms: u64,
    /// Extra request fields passed through untouched (e.g. beam settings).
    pub extra: Map<String, Value>,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        Self {
            base_url: "http://localhost:8000".into(),
            model: String::new(),
            max_new_tokens: 128,
            temperature: 0.0,
            stop: vec![".".into()],
            timeout_secs: 60.0,
            max_retries: 5,
            max_in_flight: 4,
            initial_backoff_ms: 500,
            max_backoff_ms: 30_000,
            extra: Map::new(),
        }
    }
}

impl EndpointConfig {
    pub fn validate(&self) -> Result<(), EndpointError> {
        if self.max_in_flight == 0 {
            return Err(EndpointError::Config("max_in_flight must be at least 1".into()));
        }
        if self.timeout_secs.is_nan() || self.timeout_secs <= 0.0 {
            return Err(EndpointError::Config("timeout_secs must be positive".into()));
        }
        Ok(())
    }

    /// Delay before retry number `attempt` (0-based): exponential growth
    /// capped at `max_backoff_ms`, scaled by a random factor in [0.5, 1).
    pub fn backoff<R: Rng + ?Sized>(&self, attempt: u32, rng: &mut R) -> Duration {
        let base = self
            .initial_backoff_ms
            .saturating_mul(1u64 << attempt.min(20))
            .min(self.max_backoff_ms);
        Duration::from_millis((base as f64 * rng.random_range(0.5..1.0)) as u64)
    }
}

/// Anything that can turn a prompt bundle into completion text.
pub trait CompletionBackend: Send + Sync {
    fn complete(
        &self,
        bundle: &PromptBundle,
    ) -> impl Future<Output = Result<String, EndpointError>> + Send;
}

/// OpenAI-compatible `/v1/completions` adapter.
pub struct OpenAiCompletions {
    client: reqwest::Client,
    config: EndpointConfig,
    api_key: Option<String>,
}

impl OpenAiCompletions {
    /// Reads the bearer token from `NAMEGUESS_API_KEY` if set.
    pub fn new(config: EndpointConfig) -> Result<Self, EndpointError> {
        let key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty());
        Self::with_key(config, key)
    }

    pub fn with_key(config: EndpointConfig, api_key: Option<String>) -> Result<Self, EndpointError> {
        config.validate()?;
        let client = reqwest::Client::builder()
            .timeout(Duration::from_secs_f64(config.timeout_secs))
            .build()
            .map_err(|e| EndpointError::Config(e.to_string()))?;
        Ok(Self { client, config, api_key })
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.config
    }

    pub fn request_body(&self, prompt: &str) -> Value {
        let c = &self.config;
        let mut body = json!({
            "model": c.model,
            "prompt": prompt,
            "max_tokens": c.max_new_tokens,
            "temperature": c.temperature,
        });
        let obj = body.as_object_mut().expect("object literal");
        if !c.stop.is_empty() {
            obj.insert("stop".into(), json!(c.stop));
        }
        for (k, v) in &c.extra {
            obj.insert(k.clone(), v.clone());
        }
        body
    }

    async fn attempt(&self, body: &Value) -> Result<String, EndpointError> {
        let url = format!("{}/v1/completions", self.config.base_url.trim_end_matches('/'));
        let mut req = self.client.post(url).json(body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().await.map_err(|e| {
            if e.is_timeout() {
                EndpointError::Timeout
            } else {
                EndpointError::Transport(e.to_string())
            }
        })?;
        let status = resp.status();
        if !status.is_success() {
            let body = resp.text().await.unwrap_or_default();
            return Err(EndpointError::Status { status: status.as_u16(), body });
        }
        let value: Value = resp.json().await.map_err(|e| {
            if e.is_timeout() {
                EndpointError::Timeout
            } else {
                EndpointError::InvalidResponse(e.to_string())
            }
        })?;
        value
            .pointer("/choices/0/text")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| EndpointError::InvalidResponse("missing choices[0].text".into()))
    }

    /// Sends one prompt, retrying transport errors, timeouts, 429 and 5xx.
    pub async fn complete_prompt(&self, prompt: &str) -> Result<String, EndpointError> {
        let body = self.request_body(prompt);
        let mut attempt = 0u32;
        loop {
            match self.attempt(&body).await {
                Ok(text) => return Ok(text),
                Err(e) if e.is_retryable() && attempt < self.config.max_retries => {
                    let delay = self.config.backoff(attempt, &mut rand::rng());
                    tracing::warn!(attempt, error = %e, delay_ms = delay.as_millis() as u64, "retrying");
                    tokio::time::sleep(delay).await;
                    attempt += 1;
                }
                Err(e) if e.is_retryable() => {
                    return Err(EndpointError::Exhausted { attempts: attempt + 1, last: Box::new(e) })
                }
                Err(e) => return Err(e),
            }
        }
    }
}

impl CompletionBackend for OpenAiCompletions {
    fn complete(
        &self,
        bundle: &PromptBundle,
    ) -> impl Future<Output = Result<String, EndpointError>> + Send {
        self.complete_prompt(&bundle.prompt)
    }
}
