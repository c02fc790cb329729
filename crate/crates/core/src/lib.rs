//! Subsample-and-merge parallel de novo motif discovery.
//!
//! The target FASTA is cut into sub-sampled replicates, each replicate is run
//! through a k-mer enrichment engine on its own worker, and the per-worker
//! motif lists are merged by how often each motif was found. The evaluator
//! compares merged results against a sequential run of the same engine.

pub mod background;
pub mod bench;
pub mod corpus;
pub mod engine;
pub mod evaluator;
pub mod exec;
pub mod fasta;
pub mod reducer;
pub mod scatter;
pub mod stats;
pub mod subsample;

pub use engine::{discover, EngineConfig, EngineSpec, Motif};
pub use exec::Exec;
pub use fasta::SequenceRecord;
pub use scatter::{run_distributed, Backend, RunOptions, RunTimings, WorkerDescriptor};
pub use subsample::SubsampleSpec;
