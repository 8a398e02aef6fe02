//! Network clients: Socrata dataset download and completion-style inference
//! endpoints with bounded concurrency and retries.

pub mod completion;
pub mod runner;
pub mod socrata;

pub use completion::{CompletionBackend, EndpointConfig, EndpointError, OpenAiCompletions};
pub use runner::{run_inference, InferenceResult, RawCompletion};
pub use reqwest::Client as HttpClient;
pub use socrata::{fetch_socrata, SocrataError};
