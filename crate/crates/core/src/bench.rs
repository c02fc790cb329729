//! Sweep driver: a sequential baseline per run index plus one distributed run
//! per (percent, run) point, followed by the evaluator tables.
//!
//! Layout under the output directory:
//!
//! ```text
//! runs/seq_run<r>.tsv            runs/seq_run<r>.timings.json
//! runs/p<pct>_run<r>.tsv         runs/p<pct>_run<r>.timings.json
//! runs/p<pct>_run<r>.merged.tsv
//! runtimes.csv  topk.csv  quality.csv
//! ```
//!
//! Points whose TSV and timings files both exist are skipped, so an
//! interrupted sweep resumes where it stopped.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

use crate::engine::{self, tsv, EngineSpec, Motif};
use crate::evaluator::{self, EvalError, SweepEntry};
use crate::fasta;
use crate::scatter::{self, Backend, RunOptions, RunTimings, ScatterError};
use crate::subsample::SubsampleSpec;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid bench plan: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Scatter(#[from] ScatterError),
    #[error(transparent)]
    Engine(#[from] engine::EngineError),
    #[error(transparent)]
    Fasta(#[from] fasta::FastaError),
    #[error(transparent)]
    Tsv(#[from] tsv::TsvError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct BenchPlan {
    pub percents: Vec<u32>,
    pub runs_per_point: usize,
    /// Seed of run 1; run `r` uses `seed + r - 1`.
    pub seed: u64,
    pub engine: EngineSpec,
    pub topk: Vec<usize>,
}

impl Default for BenchPlan {
    fn default() -> Self {
        Self {
            percents: vec![25, 55, 75, 90, 100],
            runs_per_point: 2,
            seed: 0,
            engine: EngineSpec::default(),
            topk: vec![3, 5, 10],
        }
    }
}

impl BenchPlan {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.percents.is_empty() || self.percents.iter().any(|p| !(1..=100).contains(p)) {
            return Err(BenchError::InvalidPlan("percents must be non-empty, each in 1..=100".into()));
        }
        if self.runs_per_point == 0 {
            return Err(BenchError::InvalidPlan("runs_per_point must be at least 1".into()));
        }
        self.engine.validate()?;
        Ok(())
    }

    pub fn seed_for_run(&self, run: usize) -> u64 {
        self.seed.wrapping_add(run as u64 - 1)
    }
}

/// Which points ran and which were already present.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BenchSummary {
    pub executed: Vec<String>,
    pub skipped: Vec<String>,
}

fn seq_stem(run: usize) -> String {
    format!("seq_run{run}")
}

fn point_stem(percent: u32, run: usize) -> String {
    format!("p{percent}_run{run}")
}

fn done(runs: &Path, stem: &str) -> bool {
    runs.join(format!("{stem}.tsv")).is_file() && runs.join(format!("{stem}.timings.json")).is_file()
}

fn write_outputs(runs: &Path, stem: &str, motifs: &[Motif], timings: &RunTimings) -> Result<(), BenchError> {
    // timings last: their presence marks the point complete
    let timings_path = runs.join(format!("{stem}.timings.json"));
    let _ = std::fs::remove_file(&timings_path);
    std::fs::write(runs.join(format!("{stem}.tsv")), tsv::motif_tsv_string(motifs))?;
    std::fs::write(timings_path, timings.to_json())?;
    Ok(())
}

/// Runs the engine once on the full input, timing only discovery.
pub fn run_sequential(target: &Path, background: &Path, engine: &EngineSpec) -> Result<(Vec<Motif>, RunTimings), BenchError> {
    let start = Instant::now();
    let motifs = match engine {
        EngineSpec::Builtin(cfg) => {
            let t = fasta::read_fasta_file(target)?;
            let b = fasta::read_fasta_file(background)?;
            let d = Instant::now();
            let motifs = engine::discover(&t, &b, cfg)?;
            let mut timings = RunTimings::sequential(d.elapsed());
            timings.total_ms = start.elapsed().as_millis() as u64;
            return Ok((motifs, timings));
        }
        EngineSpec::External(ext) => {
            let dir = tempfile::tempdir()?;
            ext.run_to(target, background, &dir.path().join("motifs.tsv"))?
        }
    };
    Ok((motifs, RunTimings::sequential(start.elapsed())))
}

pub fn run_bench(
    plan: &BenchPlan,
    target: &Path,
    background: &Path,
    backend: &Backend,
    opts: &RunOptions,
    out_dir: &Path,
) -> Result<BenchSummary, BenchError> {
    plan.validate()?;
    let runs = out_dir.join("runs");
    std::fs::create_dir_all(&runs)?;
    let mut summary = BenchSummary::default();

    for run in 1..=plan.runs_per_point {
        let stem = seq_stem(run);
        if done(&runs, &stem) {
            summary.skipped.push(stem);
            continue;
        }
        log::info!("sequential baseline, run {run}");
        let (motifs, timings) = run_sequential(target, background, &plan.engine)?;
        write_outputs(&runs, &stem, &motifs, &timings)?;
        summary.executed.push(stem);
    }

    for &percent in &plan.percents {
        for run in 1..=plan.runs_per_point {
            let stem = point_stem(percent, run);
            if done(&runs, &stem) {
                summary.skipped.push(stem);
                continue;
            }
            log::info!("distributed run: {percent}%, run {run}");
            let spec = SubsampleSpec::new(percent, backend.worker_count(), plan.seed_for_run(run))
                .map_err(|e| BenchError::InvalidPlan(e.to_string()))?;
            let outcome = scatter::run_distributed(target, background, &spec, backend, &plan.engine, opts)?;
            let mut merged = Vec::new();
            tsv::write_merged_tsv(&mut merged, &outcome.merged)?;
            std::fs::write(runs.join(format!("{stem}.merged.tsv")), merged)?;
            write_outputs(&runs, &stem, &outcome.motifs(), &outcome.timings)?;
            summary.executed.push(stem);
        }
    }

    build_report(&runs, &plan.topk, out_dir)?;
    Ok(summary)
}

fn read_timings(path: &Path) -> Result<RunTimings, BenchError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|source| BenchError::Json {
        path: path.to_path_buf(),
        source,
    })
}

enum RunFile {
    Sequential(usize),
    Point(u32, usize),
}

fn classify(stem: &str) -> Option<RunFile> {
    if let Some(run) = stem.strip_prefix("seq_run") {
        return run.parse().ok().map(RunFile::Sequential);
    }
    let (pct, run) = stem.strip_prefix('p')?.split_once("_run")?;
    Some(RunFile::Point(pct.parse().ok()?, run.parse().ok()?))
}

/// Compares every distributed run in `runs` against the sequential baseline
/// with the same run index and writes the three CSV tables into `out_dir`.
pub fn build_report(runs: &Path, topk: &[usize], out_dir: &Path) -> Result<Vec<SweepEntry>, BenchError> {
    let mut sequential: BTreeMap<usize, (Vec<Motif>, RunTimings)> = BTreeMap::new();
    let mut points: BTreeMap<(u32, usize), PathBuf> = BTreeMap::new();
    for entry in std::fs::read_dir(runs)? {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else { continue };
        let Some(stem) = name.strip_suffix(".tsv") else { continue };
        if stem.ends_with(".merged") {
            continue;
        }
        match classify(stem) {
            Some(RunFile::Sequential(run)) => {
                let motifs = tsv::read_motif_tsv_file(&path)?;
                let timings = read_timings(&runs.join(format!("{stem}.timings.json")))?;
                sequential.insert(run, (motifs, timings));
            }
            Some(RunFile::Point(pct, run)) => {
                points.insert((pct, run), path);
            }
            None => {}
        }
    }

    let mut entries = Vec::new();
    for ((percent, run), path) in points {
        let baseline = sequential
            .get(&run)
            .or_else(|| sequential.values().next())
            .ok_or_else(|| BenchError::InvalidPlan(format!("no sequential baseline in {}", runs.display())))?;
        let motifs = tsv::read_motif_tsv_file(&path)?;
        let timings = read_timings(&path.with_extension("timings.json"))?;
        let report = evaluator::compare(&baseline.0, &motifs, topk)?;
        entries.push(SweepEntry {
            percent,
            run,
            report,
            timings,
        });
    }
    let seq_timings: Vec<RunTimings> = sequential.into_values().map(|(_, t)| t).collect();
    evaluator::emit_tables(&entries, &seq_timings, topk, out_dir)?;
    Ok(entries)
}
