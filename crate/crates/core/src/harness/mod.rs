//! Configuration, data ingestion, orchestration and report emission.

pub mod config;
pub mod data;
pub mod report;
pub mod run;

pub use config::{AdversaryConfig, DatasetSource, RunConfig, OUTPUT_DIR_ENV};
pub use data::{generate_synthetic, load_idx_pair, partition_target_shadow, Partition, SyntheticSpec};
pub use report::{render_summary, RunDocument};
pub use run::{execute, run};
