//! Scrambled background generation from the target sequences.
//!
//! Mononucleotide mode is a Fisher-Yates permutation of each record's residues.
//! Dinucleotide mode is the Altschul-Erickson Eulerian-walk shuffle: the
//! sequence is a walk on the multigraph whose vertices are residues and whose
//! edges are the adjacent pairs; a random Eulerian path with the same endpoints
//! yields a new sequence with identical dinucleotide counts.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exec::Exec;
use crate::fasta::SequenceRecord;

#[derive(Debug, Error)]
pub enum BackgroundError {
    #[error("no input records to scramble")]
    EmptyInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScrambleMode {
    #[default]
    Mononucleotide,
    Dinucleotide,
}

impl std::str::FromStr for ScrambleMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mono" | "mononucleotide" => Ok(Self::Mononucleotide),
            "di" | "dinucleotide" => Ok(Self::Dinucleotide),
            other => Err(format!("unknown scramble mode {other:?} (expected mono or di)")),
        }
    }
}

const SYMBOLS: [u8; 5] = [b'A', b'C', b'G', b'T', b'N'];

fn symbol_index(b: u8) -> usize {
    match b {
        b'A' => 0,
        b'C' => 1,
        b'G' => 2,
        b'T' => 3,
        _ => 4,
    }
}

pub fn scramble(
    records: &[SequenceRecord],
    seed: u64,
    mode: ScrambleMode,
) -> Result<Vec<SequenceRecord>, BackgroundError> {
    scramble_with(records, seed, mode, Exec::default())
}

pub fn scramble_with(
    records: &[SequenceRecord],
    seed: u64,
    mode: ScrambleMode,
    exec: Exec,
) -> Result<Vec<SequenceRecord>, BackgroundError> {
    if records.is_empty() {
        return Err(BackgroundError::EmptyInput);
    }
    Ok(exec.map_range(records.len(), |i| {
        let rec = &records[i];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let residues = match mode {
            ScrambleMode::Mononucleotide => mono_shuffle(rec.residues(), &mut rng),
            ScrambleMode::Dinucleotide => dinuc_shuffle(rec.residues(), &mut rng),
        };
        rec.with_header_and_residues(format!("{}_bg", rec.header()), residues)
    }))
}

pub fn mono_shuffle<R: Rng + ?Sized>(seq: &[u8], rng: &mut R) -> Vec<u8> {
    let mut out = seq.to_vec();
    out.shuffle(rng);
    out
}

/// Shuffle preserving every dinucleotide count and the first and last residue.
pub fn dinuc_shuffle<R: Rng + ?Sized>(seq: &[u8], rng: &mut R) -> Vec<u8> {
    if seq.len() <= 2 {
        return seq.to_vec();
    }
    let mut edges: [Vec<u8>; 5] = Default::default();
    for w in seq.windows(2) {
        edges[symbol_index(w[0])].push(symbol_index(w[1]) as u8);
    }
    let first = symbol_index(seq[0]);
    let last = symbol_index(seq[seq.len() - 1]);

    // Pick a last exit edge for every vertex but the final one so that the
    // last-exit edges form a tree rooted at `last`; retry until they do.
    let mut last_exit = [usize::MAX; 5];
    loop {
        for v in 0..5 {
            last_exit[v] = if v == last || edges[v].is_empty() {
                usize::MAX
            } else {
                rng.random_range(0..edges[v].len())
            };
        }
        let reaches_last = (0..5).all(|start| {
            if last_exit[start] == usize::MAX {
                return true;
            }
            let mut v = start;
            for _ in 0..5 {
                if v == last {
                    return true;
                }
                v = edges[v][last_exit[v]] as usize;
            }
            v == last
        });
        if reaches_last {
            break;
        }
    }

    for v in 0..5 {
        if edges[v].is_empty() {
            continue;
        }
        if last_exit[v] == usize::MAX {
            edges[v].shuffle(rng);
        } else {
            let keep = edges[v].swap_remove(last_exit[v]);
            edges[v].shuffle(rng);
            edges[v].push(keep);
        }
    }

    let mut next = [0usize; 5];
    let mut out = Vec::with_capacity(seq.len());
    let mut v = first;
    out.push(SYMBOLS[v]);
    for _ in 1..seq.len() {
        let to = edges[v][next[v]] as usize;
        next[v] += 1;
        out.push(SYMBOLS[to]);
        v = to;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(seq: &[u8]) -> [usize; 5] {
        let mut c = [0; 5];
        for &b in seq {
            c[symbol_index(b)] += 1;
        }
        c
    }

    fn dinuc_counts(seq: &[u8]) -> [[usize; 5]; 5] {
        let mut c = [[0; 5]; 5];
        for w in seq.windows(2) {
            c[symbol_index(w[0])][symbol_index(w[1])] += 1;
        }
        c
    }

    #[test]
    fn single_symbol_is_fixed_point() {
        let r = vec![SequenceRecord::new("s", "AAAA", 2).unwrap()];
        for mode in [ScrambleMode::Mononucleotide, ScrambleMode::Dinucleotide] {
            let out = scramble(&r, 5, mode).unwrap();
            assert_eq!(out[0].residues_str(), "AAAA");
            assert_eq!(out[0].header(), "s_bg");
            assert_eq!(out[0].line_width(), 2);
        }
    }

    #[test]
    fn mono_preserves_composition() {
        let r = vec![SequenceRecord::new("s", "ACGT", 4).unwrap()];
        let out = scramble(&r, 11, ScrambleMode::Mononucleotide).unwrap();
        assert_eq!(counts(out[0].residues()), [1, 1, 1, 1, 0]);
    }

    #[test]
    fn dinuc_preserves_pair_counts_with_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let seq: Vec<u8> = (0..2000).map(|_| SYMBOLS[rng.random_range(0..5)]).collect();
        for s in 0..20 {
            let mut r = ChaCha8Rng::seed_from_u64(s);
            let out = dinuc_shuffle(&seq, &mut r);
            assert_eq!(dinuc_counts(&out), dinuc_counts(&seq));
            assert_eq!(out[0], seq[0]);
            assert_eq!(out.last(), seq.last());
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let r = vec![
            SequenceRecord::new("a", "ACGTTGCAACGGTTAC", 5).unwrap(),
            SequenceRecord::new("b", "GGGTTTAAACCC", 5).unwrap(),
        ];
        for mode in [ScrambleMode::Mononucleotide, ScrambleMode::Dinucleotide] {
            assert_eq!(
                scramble_with(&r, 8, mode, Exec::Sequential).unwrap(),
                scramble_with(&r, 8, mode, Exec::Parallel).unwrap()
            );
        }
        assert!(matches!(
            scramble(&[], 0, ScrambleMode::Mononucleotide),
            Err(BackgroundError::EmptyInput)
        ));
    }

    #[test]
    fn parses_mode_names() {
        assert_eq!("mono".parse::<ScrambleMode>().unwrap(), ScrambleMode::Mononucleotide);
        assert_eq!("di".parse::<ScrambleMode>().unwrap(), ScrambleMode::Dinucleotide);
        assert!("tri".parse::<ScrambleMode>().is_err());
    }
}
