//! Scatter-gather runtime: the master sub-samples the target, hands one
//! replicate to each worker together with the shared background, collects one
//! motif list per worker and merges them by mode.
//!
//! Three backends share the same master logic: in-process threads, local
//! child processes (one engine command per worker, files in a scratch
//! directory), and TCP workers speaking the framed protocol in [`protocol`].

mod hosts;
mod master;
pub mod protocol;
mod worker;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use hosts::{parse_hosts, read_hosts_file, WorkerDescriptor};
pub use master::{run_distributed, run_distributed_records, Backend, RunOptions, RunOutcome};
pub use worker::{run_job, worker_serve, Worker};

use crate::engine::EngineError;
use crate::fasta::FastaError;
use crate::reducer::ReduceError;
use crate::subsample::SubsampleError;

#[derive(Debug, Error)]
pub enum ScatterError {
    #[error("{replicates} replicates requested for {workers} workers; they must be equal")]
    ReplicateCountMismatch { replicates: usize, workers: usize },
    #[error("worker {worker} ({addr}) unreachable: {reason}")]
    WorkerUnreachable {
        worker: usize,
        addr: String,
        reason: String,
    },
    #[error("worker {worker} ({addr}) failed: {message}")]
    WorkerFailed {
        worker: usize,
        addr: String,
        message: String,
    },
    #[error("cannot bind {addr}: {reason}")]
    PortUnavailable { addr: String, reason: String },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Fasta(#[from] FastaError),
    #[error(transparent)]
    Subsample(#[from] SubsampleError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<protocol::FrameError> for ScatterError {
    fn from(e: protocol::FrameError) -> Self {
        match e {
            protocol::FrameError::Io(io) => Self::Io(io),
            other => Self::Protocol(other.to_string()),
        }
    }
}

/// Wall-clock phase durations of one run, in whole milliseconds.
///
/// Phases can overlap (a worker may finish discovery while another is still
/// receiving its files), so only `total_ms >= each phase` holds.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunTimings {
    pub subsample_ms: u64,
    pub distribute_ms: u64,
    /// One entry per worker, in worker order.
    pub discover_ms: Vec<u64>,
    pub gather_ms: u64,
    pub reduce_ms: u64,
    pub total_ms: u64,
    /// Per-worker discovery time in microseconds; not serialized.
    #[serde(skip)]
    pub discover_us: Vec<u64>,
}

impl RunTimings {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("timings serialize")
    }

    /// Timings for a single sequential discovery taking `elapsed`.
    pub fn sequential(elapsed: std::time::Duration) -> Self {
        let ms = elapsed.as_millis() as u64;
        Self {
            discover_ms: vec![ms],
            discover_us: vec![elapsed.as_micros() as u64],
            total_ms: ms,
            ..Default::default()
        }
    }
}
