//! Mode reduction: merge per-worker motif lists by how many workers found each motif.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use thiserror::Error;

use crate::engine::{Motif, MotifId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReduceError {
    #[error("no worker lists to reduce")]
    EmptyInput,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergedMotif {
    /// Fields from the supporting worker with the best ln p-value.
    pub motif: Motif,
    /// Number of worker lists containing this motif.
    pub support: usize,
    /// Indices of the supporting workers, ascending.
    pub workers: Vec<usize>,
}

fn merged_order(a: &MergedMotif, b: &MergedMotif) -> Ordering {
    b.support
        .cmp(&a.support)
        .then(a.motif.ln_p_key().cmp(&b.motif.ln_p_key()))
        .then(a.motif.length.cmp(&b.motif.length))
        .then_with(|| a.motif.consensus.cmp(&b.motif.consensus))
}

pub fn reduce_mode(lists: &[Vec<Motif>], report_cap: usize) -> Result<Vec<MergedMotif>, ReduceError> {
    reduce_mode_with(lists, report_cap, 1)
}

/// As [`reduce_mode`], dropping motifs supported by fewer than `min_support` workers.
pub fn reduce_mode_with(
    lists: &[Vec<Motif>],
    report_cap: usize,
    min_support: usize,
) -> Result<Vec<MergedMotif>, ReduceError> {
    if lists.is_empty() {
        return Err(ReduceError::EmptyInput);
    }
    let mut groups: BTreeMap<MotifId, MergedMotif> = BTreeMap::new();
    for (worker, list) in lists.iter().enumerate() {
        for m in list {
            match groups.get_mut(&m.id()) {
                None => {
                    groups.insert(
                        m.id(),
                        MergedMotif {
                            motif: m.clone(),
                            support: 1,
                            workers: vec![worker],
                        },
                    );
                }
                Some(g) => {
                    if g.workers.last() != Some(&worker) {
                        g.workers.push(worker);
                        g.support += 1;
                    }
                    // strictly better printed value only, so ties keep the lowest worker index
                    if m.ln_p_key() < g.motif.ln_p_key() {
                        g.motif = m.clone();
                    }
                }
            }
        }
    }
    let mut merged: Vec<MergedMotif> = groups
        .into_values()
        .filter(|g| g.support >= min_support)
        .collect();
    merged.sort_by(merged_order);
    merged.truncate(report_cap);
    Ok(merged)
}

/// Strips merge metadata, keeping order.
pub fn merged_to_motifs(merged: &[MergedMotif]) -> Vec<Motif> {
    merged.iter().map(|m| m.motif.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(c: &str, ln_p: f64) -> Motif {
        Motif {
            length: c.len(),
            consensus: c.into(),
            target_containing: 1,
            target_total: 2,
            bg_containing: 0,
            bg_total: 2,
            ln_p,
        }
    }

    #[test]
    fn counts_support() {
        let (a, b, c, d, e) = (
            m("AAAA", -1.0),
            m("CCCC", -5.0),
            m("GGGG", -2.0),
            m("TTTT", -4.0),
            m("ACAC", -3.0),
        );
        let lists = vec![
            vec![a.clone(), b.clone(), c.clone()],
            vec![a.clone(), c.clone(), d.clone()],
            vec![a.clone(), e.clone()],
        ];
        let out = reduce_mode(&lists, 10).unwrap();
        let order: Vec<(&str, usize)> = out.iter().map(|x| (x.motif.consensus.as_str(), x.support)).collect();
        assert_eq!(
            order,
            [("AAAA", 3), ("GGGG", 2), ("CCCC", 1), ("TTTT", 1), ("ACAC", 1)]
        );
        assert_eq!(out[0].workers, [0, 1, 2]);
        assert_eq!(out[1].workers, [0, 1]);
        assert_eq!(reduce_mode(&lists, 2).unwrap().len(), 2);
    }

    #[test]
    fn best_ln_p_wins() {
        let lists = vec![vec![m("AAAA", -1.0)], vec![m("AAAA", -3.0)]];
        let out = reduce_mode(&lists, 5).unwrap();
        assert_eq!(out[0].motif.ln_p, -3.0);
    }

    #[test]
    fn single_list_identity() {
        let l = vec![m("AAAA", -9.0), m("CCCC", -5.0), m("GGGG", -2.0)];
        let out = reduce_mode(std::slice::from_ref(&l), 2).unwrap();
        assert_eq!(merged_to_motifs(&out), l[..2].to_vec());
        assert!(out.iter().all(|x| x.support == 1));
    }

    #[test]
    fn min_support_filter_and_errors() {
        let lists = vec![vec![m("AAAA", -1.0), m("CCCC", -2.0)], vec![m("AAAA", -1.0)]];
        let out = reduce_mode_with(&lists, 10, 2).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(reduce_mode(&[], 3), Err(ReduceError::EmptyInput));
    }
}
