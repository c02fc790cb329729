//! Synthetic planted-motif corpora for tests and benchmarks.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::background::{scramble, ScrambleMode};
use crate::fasta::SequenceRecord;

#[derive(Debug, Clone)]
pub struct CorpusSpec {
    pub sequences: usize,
    pub length: usize,
    pub motif: String,
    /// Fraction of target sequences receiving one copy of the motif.
    pub plant_fraction: f64,
    pub line_width: usize,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            sequences: 100,
            length: 300,
            motif: "ACGTACGT".into(),
            plant_fraction: 0.6,
            line_width: 60,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub target: Vec<SequenceRecord>,
    pub background: Vec<SequenceRecord>,
    /// Indices of target sequences that carry the motif.
    pub planted: Vec<usize>,
}

/// Uniform random ACGT sequences with the motif planted at a uniform offset
/// in a random subset; the background is a mononucleotide scramble of the target.
pub fn planted_corpus(spec: &CorpusSpec) -> Corpus {
    assert!(spec.sequences > 0 && spec.length >= spec.motif.len() && spec.line_width > 0);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut seqs: Vec<Vec<u8>> = (0..spec.sequences)
        .map(|_| (0..spec.length).map(|_| b"ACGT"[rng.random_range(0..4)]).collect())
        .collect();
    let n_planted = ((spec.sequences as f64) * spec.plant_fraction).round() as usize;
    let mut planted = sample(&mut rng, spec.sequences, n_planted.min(spec.sequences)).into_vec();
    planted.sort_unstable();
    let motif = spec.motif.as_bytes();
    for &i in &planted {
        let at = rng.random_range(0..=spec.length - motif.len());
        seqs[i][at..at + motif.len()].copy_from_slice(motif);
    }
    let target: Vec<SequenceRecord> = seqs
        .iter()
        .enumerate()
        .map(|(i, s)| SequenceRecord::new(format!("seq{i}"), s, spec.line_width).expect("valid residues"))
        .collect();
    let background = scramble(&target, spec.seed ^ 0x9e37_79b9_7f4a_7c15, ScrambleMode::Mononucleotide)
        .expect("non-empty target");
    Corpus {
        target,
        background,
        planted,
    }
}
