//! Replicate generation: every sequence is cut down to one contiguous window
//! of a fixed percentage of its length, with a uniformly drawn start.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exec::Exec;
use crate::fasta::{self, SequenceRecord};

#[derive(Debug, Error)]
pub enum SubsampleError {
    #[error("percent must be in 1..=100, got {0}")]
    InvalidPercent(u32),
    #[error("replicate count must be at least 1")]
    NoReplicates,
    #[error("no input records to subsample")]
    EmptyInput,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SubsampleSpec {
    percent: u32,
    replicates: usize,
    seed: u64,
}

impl SubsampleSpec {
    pub fn new(percent: u32, replicates: usize, seed: u64) -> Result<Self, SubsampleError> {
        if !(1..=100).contains(&percent) {
            return Err(SubsampleError::InvalidPercent(percent));
        }
        if replicates == 0 {
            return Err(SubsampleError::NoReplicates);
        }
        Ok(Self {
            percent,
            replicates,
            seed,
        })
    }

    pub fn percent(&self) -> u32 {
        self.percent
    }

    pub fn replicates(&self) -> usize {
        self.replicates
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// `max(1, floor(len * percent / 100))`.
pub fn window_len(len: usize, percent: u32) -> usize {
    (len * percent as usize / 100).max(1)
}

/// The random stream for replicate `index`: one ChaCha stream per replicate
/// under the shared seed, so replicates differ yet reproduce independently.
pub fn replicate_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Keeps a window of `percent`% of the record, starting at a uniform offset.
pub fn subsample_record<R: Rng + ?Sized>(
    record: &SequenceRecord,
    percent: u32,
    rng: &mut R,
) -> SequenceRecord {
    let len = record.len();
    let keep = window_len(len, percent.clamp(1, 100));
    let start = rng.random_range(0..=len - keep);
    record.with_residues(record.residues()[start..start + keep].to_vec())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Replicate {
    pub index: usize,
    pub records: Vec<SequenceRecord>,
}

impl Replicate {
    pub fn file_name(&self) -> String {
        replicate_file_name(self.index)
    }
}

pub fn replicate_file_name(index: usize) -> String {
    format!("sub_{index}.fa")
}

pub fn generate_replicates(
    records: &[SequenceRecord],
    spec: &SubsampleSpec,
) -> Result<Vec<Replicate>, SubsampleError> {
    generate_replicates_with(records, spec, Exec::default())
}

pub fn generate_replicates_with(
    records: &[SequenceRecord],
    spec: &SubsampleSpec,
    exec: Exec,
) -> Result<Vec<Replicate>, SubsampleError> {
    if records.is_empty() {
        return Err(SubsampleError::EmptyInput);
    }
    Ok(exec.map_range(spec.replicates, |index| {
        let mut rng = replicate_rng(spec.seed, index);
        let records = records
            .iter()
            .map(|r| subsample_record(r, spec.percent, &mut rng))
            .collect();
        Replicate { index, records }
    }))
}

/// Writes `sub_<i>.fa` for each replicate into `dir`, returning the paths.
pub fn write_replicates(dir: &Path, replicates: &[Replicate]) -> Result<Vec<PathBuf>, SubsampleError> {
    std::fs::create_dir_all(dir)?;
    replicates
        .iter()
        .map(|rep| {
            let path = dir.join(rep.file_name());
            fasta::write_fasta_file(&path, &rep.records)?;
            Ok(path)
        })
        .collect()
}
