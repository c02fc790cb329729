//! 2-bit packed k-mers and ZOOPS (per-sequence presence) counting.

use std::collections::HashMap;

use crate::exec::Exec;
use crate::fasta::SequenceRecord;

/// Longest k that fits the 2-bit packing in a `u64`.
pub const MAX_K: usize = 32;

#[inline]
fn base_code(b: u8) -> Option<u64> {
    match b {
        b'A' => Some(0),
        b'C' => Some(1),
        b'G' => Some(2),
        b'T' => Some(3),
        _ => None,
    }
}

#[inline]
fn mask(k: usize) -> u64 {
    if k == 32 {
        u64::MAX
    } else {
        (1u64 << (2 * k)) - 1
    }
}

pub fn encode(kmer: &[u8]) -> Option<u64> {
    if kmer.is_empty() || kmer.len() > MAX_K {
        return None;
    }
    kmer.iter()
        .try_fold(0u64, |acc, &b| Some((acc << 2) | base_code(b.to_ascii_uppercase())?))
}

pub fn decode(code: u64, k: usize) -> String {
    (0..k)
        .rev()
        .map(|i| b"ACGT"[((code >> (2 * i)) & 3) as usize] as char)
        .collect()
}

#[inline]
pub fn reverse_complement(code: u64, k: usize) -> u64 {
    let mut x = !code;
    let mut rc = 0u64;
    for _ in 0..k {
        rc = (rc << 2) | (x & 3);
        x >>= 2;
    }
    rc
}

/// Lexicographically smaller of a k-mer and its reverse complement. Numeric
/// order of packed codes equals lexicographic order over `ACGT`.
#[inline]
pub fn canonical(code: u64, k: usize) -> u64 {
    code.min(reverse_complement(code, k))
}

/// Number of mismatching positions between two packed k-mers.
#[inline]
pub fn hamming(a: u64, b: u64) -> u32 {
    let x = a ^ b;
    ((x | (x >> 1)) & 0x5555_5555_5555_5555).count_ones()
}

pub fn reverse_complement_str(s: &str) -> String {
    s.bytes()
        .rev()
        .map(|b| match b {
            b'A' => 'T',
            b'C' => 'G',
            b'G' => 'C',
            b'T' => 'A',
            other => other as char,
        })
        .collect()
}

/// Distinct (optionally canonical) k-mers of one sequence, skipping any
/// window that touches a non-ACGT residue. Sorted ascending.
pub fn distinct_kmers(seq: &[u8], k: usize, both_strands: bool) -> Vec<u64> {
    assert!((1..=MAX_K).contains(&k), "k must be in 1..={MAX_K}");
    let m = mask(k);
    let mut out = Vec::with_capacity(seq.len().saturating_sub(k - 1));
    let mut code = 0u64;
    let mut valid = 0usize;
    for &b in seq {
        match base_code(b) {
            Some(c) => {
                code = ((code << 2) | c) & m;
                valid += 1;
                if valid >= k {
                    out.push(if both_strands { canonical(code, k) } else { code });
                }
            }
            None => {
                valid = 0;
                code = 0;
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Per-k-mer count of sequences containing it at least once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KmerCounts {
    k: usize,
    both_strands: bool,
    counts: HashMap<u64, u32>,
}

impl KmerCounts {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn both_strands(&self) -> bool {
        self.both_strands
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn get_code(&self, code: u64) -> u32 {
        self.counts.get(&code).copied().unwrap_or(0)
    }

    /// Count for a k-mer string; with both strands on, either orientation works.
    pub fn get(&self, kmer: &str) -> u32 {
        if kmer.len() != self.k {
            return 0;
        }
        match encode(kmer.as_bytes()) {
            Some(c) if self.both_strands => self.get_code(canonical(c, self.k)),
            Some(c) => self.get_code(c),
            None => 0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u32)> + '_ {
        self.counts.iter().map(|(&c, &n)| (c, n))
    }

    /// Entries sorted by packed code, for deterministic iteration.
    pub fn sorted(&self) -> Vec<(u64, u32)> {
        let mut v: Vec<_> = self.iter().collect();
        v.sort_unstable();
        v
    }

    pub fn to_string_map(&self) -> std::collections::BTreeMap<String, u32> {
        self.iter().map(|(c, n)| (decode(c, self.k), n)).collect()
    }
}

const CHUNK: usize = 16;

pub fn count_kmers(records: &[SequenceRecord], k: usize, both_strands: bool) -> KmerCounts {
    count_kmers_with(records, k, both_strands, Exec::default())
}

pub fn count_kmers_with(
    records: &[SequenceRecord],
    k: usize,
    both_strands: bool,
    exec: Exec,
) -> KmerCounts {
    let chunks: Vec<&[SequenceRecord]> = records.chunks(CHUNK).collect();
    let partials = exec.map(&chunks, |chunk| {
        let mut local: HashMap<u64, u32> = HashMap::new();
        for rec in chunk.iter() {
            for code in distinct_kmers(rec.residues(), k, both_strands) {
                *local.entry(code).or_default() += 1;
            }
        }
        local
    });
    let mut counts = HashMap::new();
    for part in partials {
        if counts.is_empty() {
            counts = part;
            continue;
        }
        for (code, n) in part {
            *counts.entry(code).or_default() += n;
        }
    }
    KmerCounts {
        k,
        both_strands,
        counts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_decode() {
        let c = encode(b"ACGTTGCA").unwrap();
        assert_eq!(decode(c, 8), "ACGTTGCA");
        assert_eq!(encode(b"ACNT"), None);
        assert_eq!(encode(b""), None);
        let long = "ACGT".repeat(8);
        assert_eq!(decode(encode(long.as_bytes()).unwrap(), 32), long);
    }

    #[test]
    fn revcomp_matches_string_version() {
        for s in ["A", "AC", "ACGTAC", "GGGATTTC", &"ACGGT".repeat(6)] {
            let c = encode(s.as_bytes()).unwrap();
            assert_eq!(decode(reverse_complement(c, s.len()), s.len()), reverse_complement_str(s));
        }
        let c = encode(b"ACGT").unwrap();
        assert_eq!(reverse_complement(c, 4), c);
    }

    #[test]
    fn hamming_counts_positions() {
        let a = encode(b"ACGTACGT").unwrap();
        assert_eq!(hamming(a, a), 0);
        assert_eq!(hamming(a, encode(b"ACGTACGA").unwrap()), 1);
        assert_eq!(hamming(a, encode(b"TGCATGCA").unwrap()), 8);
        assert_eq!(hamming(a, encode(b"CCGTACGG").unwrap()), 2);
    }

    #[test]
    fn palindrome_single_count() {
        let r = vec![SequenceRecord::new("s", "ACGT", 4).unwrap()];
        for strands in [false, true] {
            let c = count_kmers(&r, 4, strands);
            assert_eq!(c.to_string_map().into_iter().collect::<Vec<_>>(), vec![("ACGT".to_string(), 1)]);
        }
    }

    #[test]
    fn n_windows_and_short_sequences() {
        let r = vec![
            SequenceRecord::new("a", "ACGNACG", 4).unwrap(),
            SequenceRecord::new("b", "AC", 2).unwrap(),
        ];
        assert!(count_kmers(&r, 4, false).is_empty());
        let c3 = count_kmers(&r, 3, false);
        assert_eq!(c3.get("ACG"), 1);
        assert_eq!(c3.len(), 1);
    }

    #[test]
    fn zoops_counts_once_per_sequence() {
        let r = vec![
            SequenceRecord::new("a", "AAAAAAAA", 4).unwrap(),
            SequenceRecord::new("b", "TTTT", 4).unwrap(),
        ];
        let off = count_kmers(&r, 3, false);
        assert_eq!(off.get("AAA"), 1);
        assert_eq!(off.get("TTT"), 1);
        let on = count_kmers(&r, 3, true);
        assert_eq!(on.get("AAA"), 2);
        assert_eq!(on.get("TTT"), 2);
        assert_eq!(on.len(), 1);
    }
}
