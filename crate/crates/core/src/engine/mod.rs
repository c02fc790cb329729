//! Built-in de novo motif discovery: ZOOPS k-mer counts in target versus
//! background, hypergeometric enrichment, greedy Hamming-distance
//! redundancy filtering. An adapter runs external discovery commands instead.

mod external;
pub mod kmer;
pub mod tsv;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Exec;
use crate::fasta::SequenceRecord;
use crate::stats::{EnrichmentInput, HypergeomTail, StatsError};

pub use external::{run_external, ExternalEngine};
pub use kmer::{count_kmers, count_kmers_with, KmerCounts};
pub use tsv::TsvError;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("target sequence list is empty")]
    EmptyTarget,
    #[error("background sequence list is empty")]
    EmptyBackground,
    #[error("invalid engine configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("engine command template must contain {0}")]
    InvalidTemplate(&'static str),
    #[error("engine command failed ({status}): {diagnostic}")]
    CommandFailed { status: String, diagnostic: String },
    #[error("engine command timed out after {0:?}")]
    Timeout(std::time::Duration),
    #[error("engine output unparseable: {0}")]
    UnparseableOutput(#[from] TsvError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A discovered candidate motif.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Motif {
    pub length: usize,
    pub consensus: String,
    pub target_containing: u64,
    pub target_total: u64,
    pub bg_containing: u64,
    pub bg_total: u64,
    /// Natural-log enrichment p-value.
    pub ln_p: f64,
}

/// Identity used for merging and comparison: exact `(length, consensus)`.
pub type MotifId = (usize, String);

impl Motif {
    pub fn id(&self) -> MotifId {
        (self.length, self.consensus.clone())
    }

    /// The ln p-value as it appears in the TSV, in units of 1e-4.
    pub fn ln_p_key(&self) -> i64 {
        ln_p_key(self.ln_p)
    }
}

/// `lnP` column text: exactly four decimals, never `-0.0000`.
pub fn format_ln_p(ln_p: f64) -> String {
    let s = format!("{ln_p:.4}");
    if s == "-0.0000" {
        "0.0000".to_string()
    } else {
        s
    }
}

/// Integer key of the printed `lnP` value. Ranking on the printed value keeps
/// a list's order identical before and after a TSV round trip.
pub fn ln_p_key(ln_p: f64) -> i64 {
    if ln_p.is_nan() {
        return i64::MAX;
    }
    if !ln_p.is_finite() {
        return if ln_p < 0.0 { i64::MIN } else { i64::MAX };
    }
    format_ln_p(ln_p)
        .replace('.', "")
        .parse()
        .unwrap_or(if ln_p < 0.0 { i64::MIN } else { i64::MAX })
}

/// Report order: ascending printed lnP, then length, then consensus.
pub fn rank_order(a: &Motif, b: &Motif) -> Ordering {
    a.ln_p_key()
        .cmp(&b.ln_p_key())
        .then(a.length.cmp(&b.length))
        .then_with(|| a.consensus.cmp(&b.consensus))
}

pub fn sort_ranked(motifs: &mut [Motif]) {
    motifs.sort_by(rank_order);
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub lengths: Vec<usize>,
    pub per_length: usize,
    pub both_strands: bool,
    pub redundancy_hamming: u32,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            lengths: vec![8, 10, 12],
            per_length: 25,
            both_strands: true,
            redundancy_hamming: 1,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.lengths.is_empty() {
            return Err(EngineError::InvalidConfig("no motif lengths".into()));
        }
        if let Some(&k) = self.lengths.iter().find(|&&k| !(4..=kmer::MAX_K).contains(&k)) {
            return Err(EngineError::InvalidConfig(format!(
                "motif length {k} outside 4..={}",
                kmer::MAX_K
            )));
        }
        if self.per_length == 0 {
            return Err(EngineError::InvalidConfig("per_length must be at least 1".into()));
        }
        Ok(())
    }

    /// Largest possible report size.
    pub fn report_cap(&self) -> usize {
        self.per_length * self.lengths.len()
    }
}

/// Which discovery engine a job runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineSpec {
    Builtin(EngineConfig),
    External(ExternalEngine),
}

impl Default for EngineSpec {
    fn default() -> Self {
        Self::Builtin(EngineConfig::default())
    }
}

impl EngineSpec {
    /// Report size bound, when the engine has one.
    pub fn report_cap(&self) -> Option<usize> {
        match self {
            Self::Builtin(cfg) => Some(cfg.report_cap()),
            Self::External(_) => None,
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        match self {
            Self::Builtin(cfg) => cfg.validate(),
            Self::External(e) => e.check_template(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Scored {
    code: u64,
    target: u32,
    background: u32,
    ln_p: f64,
}

/// Scores every k-mer present in at least one target sequence.
fn score_length(
    target: &[SequenceRecord],
    background: &[SequenceRecord],
    k: usize,
    cfg: &EngineConfig,
    scorer: &HypergeomTail,
    exec: Exec,
) -> Result<Vec<Scored>, StatsError> {
    let tc = count_kmers_with(target, k, cfg.both_strands, exec);
    let bc = count_kmers_with(background, k, cfg.both_strands, exec);
    let t_total = target.len() as u64;
    let total = t_total + background.len() as u64;
    let entries = tc.sorted();
    let scored = exec.map(&entries, |&(code, t)| {
        let b = bc.get_code(code);
        let e = EnrichmentInput {
            total,
            target_total: t_total,
            containing: (t + b) as u64,
            target_containing: t as u64,
        };
        scorer.log_tail(&e).map(|ln_p| Scored {
            code,
            target: t,
            background: b,
            ln_p,
        })
    });
    scored.into_iter().collect()
}

fn select_non_redundant(mut scored: Vec<Scored>, k: usize, cfg: &EngineConfig) -> Vec<Scored> {
    scored.sort_by(|a, b| a.ln_p.total_cmp(&b.ln_p).then(a.code.cmp(&b.code)));
    let mut picked: Vec<Scored> = Vec::with_capacity(cfg.per_length);
    for cand in scored {
        if picked.len() == cfg.per_length {
            break;
        }
        let redundant = picked.iter().any(|p| {
            kmer::hamming(cand.code, p.code) <= cfg.redundancy_hamming
                || (cfg.both_strands
                    && kmer::hamming(cand.code, kmer::reverse_complement(p.code, k))
                        <= cfg.redundancy_hamming)
        });
        if !redundant {
            picked.push(cand);
        }
    }
    picked
}

pub fn discover(
    target: &[SequenceRecord],
    background: &[SequenceRecord],
    cfg: &EngineConfig,
) -> Result<Vec<Motif>, EngineError> {
    discover_with(target, background, cfg, Exec::default())
}

pub fn discover_with(
    target: &[SequenceRecord],
    background: &[SequenceRecord],
    cfg: &EngineConfig,
    exec: Exec,
) -> Result<Vec<Motif>, EngineError> {
    if target.is_empty() {
        return Err(EngineError::EmptyTarget);
    }
    if background.is_empty() {
        return Err(EngineError::EmptyBackground);
    }
    cfg.validate()?;
    let t_total = target.len() as u64;
    let b_total = background.len() as u64;
    let scorer = HypergeomTail::new(t_total + b_total);

    let mut motifs = Vec::with_capacity(cfg.report_cap());
    for &k in &cfg.lengths {
        let scored = score_length(target, background, k, cfg, &scorer, exec)?;
        motifs.extend(select_non_redundant(scored, k, cfg).into_iter().map(|s| Motif {
            length: k,
            consensus: kmer::decode(s.code, k),
            target_containing: s.target as u64,
            target_total: t_total,
            bg_containing: s.background as u64,
            bg_total: b_total,
            ln_p: s.ln_p,
        }));
    }
    sort_ranked(&mut motifs);
    Ok(motifs)
}
