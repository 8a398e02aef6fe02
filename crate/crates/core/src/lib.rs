//! Column-name abbreviation corpus fabrication and expansion evaluation.
//!
//! The pipeline runs corpus ingestion and filtering, identifier
//! segmentation, abbreviation fabrication, difficulty bucketing, prompt
//! construction and scoring. Everything here is synchronous and free of
//! network access; HTTP clients live in `nameguess-remote`.

pub mod abbrev;
pub mod corpus;
pub mod difficulty;
pub mod jsonl;
pub mod metrics;
pub mod promptkit;
pub mod segment;

pub use abbrev::{FabricationConfig, Fabricator, NamePair};
pub use corpus::{FilterCriteria, Table};
pub use difficulty::{DifficultyLevel, DifficultyThresholds};
pub use metrics::{EvalRecord, EvalReport};
pub use promptkit::PromptBundle;
