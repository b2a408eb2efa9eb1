//! IO and orchestration around the `rjoin-core` algorithms: dataset
//! ingestion, histogram and partitioner persistence, the model repository,
//! the simulated distributed join executor, and the offline/online/bench
//! pipelines behind the CLI.

pub mod checkpoint;
pub mod config;
pub mod dataset;
pub mod engine;
pub mod error;
pub mod fsutil;
pub mod histio;
pub mod partfile;
pub mod pipeline;
pub mod repository;

pub use config::EngineConfig;
pub use dataset::{Dataset, ScanStats};
pub use engine::{JoinResult, JoinStats};
pub use error::{EngineError, Result};
pub use repository::Repository;
