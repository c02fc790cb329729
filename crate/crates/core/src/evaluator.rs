//! Result-quality comparison between two motif lists and the CSV tables
//! summarising a bench sweep.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Motif, MotifId};
use crate::scatter::RunTimings;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("list {list} is not sorted ascending by lnP at position {position}")]
    UnsortedInput { list: char, position: usize },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub a_total: usize,
    pub b_total: usize,
    pub common: usize,
    pub a_only: usize,
    pub b_only: usize,
    /// k -> how many of a's top-k identities occur anywhere in b.
    pub topk_recall: BTreeMap<usize, usize>,
    /// k -> how many of a's top-k identities occur in b's top-k.
    pub topk_strict: BTreeMap<usize, usize>,
}

fn check_sorted(list: &[Motif], name: char) -> Result<(), EvalError> {
    for (i, w) in list.windows(2).enumerate() {
        if w[1].ln_p_key() < w[0].ln_p_key() {
            return Err(EvalError::UnsortedInput {
                list: name,
                position: i + 1,
            });
        }
    }
    Ok(())
}

fn distinct_ids(list: &[Motif]) -> Vec<MotifId> {
    let mut seen = HashSet::new();
    list.iter()
        .map(Motif::id)
        .filter(|id| seen.insert(id.clone()))
        .collect()
}

/// Compares `a` (reference, e.g. sequential) against `b` by exact identity.
/// Both lists must be sorted ascending by lnP; the head of a list is its top.
pub fn compare(a: &[Motif], b: &[Motif], ks: &[usize]) -> Result<ComparisonReport, EvalError> {
    check_sorted(a, 'a')?;
    check_sorted(b, 'b')?;
    let a_ids = distinct_ids(a);
    let b_ids = distinct_ids(b);
    let b_set: HashSet<&MotifId> = b_ids.iter().collect();
    let common = a_ids.iter().filter(|id| b_set.contains(id)).count();

    let ks: BTreeSet<usize> = ks.iter().copied().collect();
    let mut topk_recall = BTreeMap::new();
    let mut topk_strict = BTreeMap::new();
    for k in ks {
        let b_top: HashSet<&MotifId> = b_ids.iter().take(k).collect();
        let a_top = a_ids.iter().take(k);
        topk_recall.insert(k, a_top.clone().filter(|id| b_set.contains(id)).count());
        topk_strict.insert(k, a_top.filter(|id| b_top.contains(id)).count());
    }

    Ok(ComparisonReport {
        a_total: a_ids.len(),
        b_total: b_ids.len(),
        common,
        a_only: a_ids.len() - common,
        b_only: b_ids.len() - common,
        topk_recall,
        topk_strict,
    })
}

/// One distributed run of a sweep, compared against its sequential baseline.
#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub percent: u32,
    pub run: usize,
    pub report: ComparisonReport,
    pub timings: RunTimings,
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn fmt_ms(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.1}")).unwrap_or_default()
}

/// Writes `runtimes.csv`, `topk.csv` and `quality.csv` into `out_dir`.
///
/// `sequential` holds the baseline timings, one per run index.
pub fn emit_tables(
    entries: &[SweepEntry],
    sequential: &[RunTimings],
    ks: &[usize],
    out_dir: &Path,
) -> Result<(), EvalError> {
    std::fs::create_dir_all(out_dir)?;
    let mut by_percent: BTreeMap<u32, Vec<&SweepEntry>> = BTreeMap::new();
    for e in entries {
        by_percent.entry(e.percent).or_default().push(e);
    }
    for v in by_percent.values_mut() {
        v.sort_by_key(|e| e.run);
    }
    let runs: BTreeSet<usize> = entries.iter().map(|e| e.run).collect();
    let n_workers = entries.iter().map(|e| e.timings.discover_ms.len()).max().unwrap_or(0);
    let ks: BTreeSet<usize> = ks.iter().copied().collect();

    // runtimes
    let mut w = csv::Writer::from_path(out_dir.join("runtimes.csv"))?;
    let mut header = vec!["percent".to_string(), "total_ms".to_string()];
    header.extend((1..=n_workers).map(|i| format!("node{i}_ms")));
    w.write_record(&header)?;
    for (percent, rows) in &by_percent {
        let mut rec = vec![percent.to_string(), fmt_ms(mean(rows.iter().map(|e| e.timings.total_ms as f64)))];
        for node in 0..n_workers {
            rec.push(fmt_ms(mean(
                rows.iter().filter_map(|e| e.timings.discover_ms.get(node)).map(|&t| t as f64),
            )));
        }
        w.write_record(&rec)?;
    }
    let mut rec = vec![
        "sequential".to_string(),
        fmt_ms(mean(sequential.iter().map(|t| t.total_ms as f64))),
    ];
    rec.extend(std::iter::repeat_n(String::new(), n_workers));
    w.write_record(&rec)?;
    w.flush()?;

    let cell = |rows: &[&SweepEntry], run: usize, f: &dyn Fn(&ComparisonReport) -> Option<usize>| {
        rows.iter()
            .find(|e| e.run == run)
            .and_then(|e| f(&e.report))
            .map(|v| v.to_string())
            .unwrap_or_default()
    };

    // top-k overlap
    let mut w = csv::Writer::from_path(out_dir.join("topk.csv"))?;
    let mut header = vec!["percent".to_string()];
    for run in &runs {
        header.extend(ks.iter().map(|k| format!("run{run}_top{k}")));
        header.extend(ks.iter().map(|k| format!("run{run}_top{k}_strict")));
    }
    w.write_record(&header)?;
    for (percent, rows) in &by_percent {
        let mut rec = vec![percent.to_string()];
        for &run in &runs {
            for &k in &ks {
                rec.push(cell(rows, run, &|r| r.topk_recall.get(&k).copied()));
            }
            for &k in &ks {
                rec.push(cell(rows, run, &|r| r.topk_strict.get(&k).copied()));
            }
        }
        w.write_record(&rec)?;
    }
    w.flush()?;

    // common / only counts
    let mut w = csv::Writer::from_path(out_dir.join("quality.csv"))?;
    let mut header = vec!["percent".to_string()];
    for run in &runs {
        for col in ["br", "common", "seq_only", "br_only"] {
            header.push(format!("run{run}_{col}"));
        }
    }
    w.write_record(&header)?;
    for (percent, rows) in &by_percent {
        let mut rec = vec![percent.to_string()];
        for &run in &runs {
            rec.push(cell(rows, run, &|r| Some(r.b_total)));
            rec.push(cell(rows, run, &|r| Some(r.common)));
            rec.push(cell(rows, run, &|r| Some(r.a_only)));
            rec.push(cell(rows, run, &|r| Some(r.b_only)));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
