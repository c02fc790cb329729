//! `brmotif`: subsample-and-merge motif discovery from the command line.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use brmotif_core::background::{self, ScrambleMode};
use brmotif_core::bench::{self, BenchPlan};
use brmotif_core::corpus::{self, CorpusSpec};
use brmotif_core::engine::{self, tsv, EngineConfig, EngineSpec, ExternalEngine};
use brmotif_core::scatter::{self, Backend, RunOptions, Worker};
use brmotif_core::subsample::{self, SubsampleSpec};
use brmotif_core::{evaluator, fasta};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "brmotif", version, about = "Subsample-and-merge parallel de novo motif discovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// A u64 seed, or `random` for an entropy-derived one.
fn parse_seed(s: &str) -> Result<u64, String> {
    if s == "random" {
        return Ok(rand::random());
    }
    s.parse().map_err(|_| format!("expected an unsigned integer or `random`, got {s:?}"))
}

#[derive(Args, Clone)]
struct EngineArgs {
    /// Motif lengths to search.
    #[arg(long, value_delimiter = ',', default_value = "8,10,12")]
    lengths: Vec<usize>,
    /// Motifs reported per length.
    #[arg(long, default_value_t = 25)]
    per_length: usize,
    /// Count the given strand only.
    #[arg(long)]
    no_rc: bool,
    /// Hamming distance at or below which motifs are redundant.
    #[arg(long, default_value_t = 1)]
    redundancy: u32,
}

impl EngineArgs {
    fn config(&self) -> EngineConfig {
        EngineConfig {
            lengths: self.lengths.clone(),
            per_length: self.per_length,
            both_strands: !self.no_rc,
            redundancy_hamming: self.redundancy,
        }
    }
}

#[derive(Args, Clone)]
struct DistributedArgs {
    #[command(flatten)]
    engine: EngineArgs,
    /// External engine command with {target}, {background} and {output} placeholders.
    #[arg(long)]
    engine_cmd: Option<String>,
    /// Hosts file: one `host port_base` per line.
    #[arg(long, conflicts_with = "local", required_unless_present = "local")]
    workers: Option<PathBuf>,
    /// Number of local worker processes.
    #[arg(long)]
    local: Option<usize>,
    /// Let each worker pick a random replicate instead of its own index.
    #[arg(long)]
    random_assignment: bool,
    /// Drop merged motifs found by fewer workers than this.
    #[arg(long, default_value_t = 1)]
    min_support: usize,
    /// Merged report size (defaults to lengths x per-length).
    #[arg(long)]
    report_cap: Option<usize>,
    #[arg(long, default_value_t = 10)]
    connect_timeout_secs: u64,
    #[arg(long, default_value_t = 3600)]
    job_timeout_secs: u64,
    /// Scratch directory for local worker processes.
    #[arg(long)]
    work_dir: Option<PathBuf>,
}

impl DistributedArgs {
    fn engine_spec(&self) -> Result<EngineSpec> {
        Ok(match &self.engine_cmd {
            Some(t) => EngineSpec::External(
                ExternalEngine::new(t.clone())?.with_timeout(Duration::from_secs(self.job_timeout_secs)),
            ),
            None => EngineSpec::Builtin(self.engine.config()),
        })
    }

    fn backend(&self) -> Result<Backend> {
        if let Some(path) = &self.workers {
            return Ok(Backend::Tcp(scatter::read_hosts_file(path)?));
        }
        let count = self.local.unwrap_or(1);
        if count == 0 {
            bail!("--local needs at least one worker");
        }
        let exe = std::env::current_exe().context("locating own executable")?;
        Ok(Backend::LocalProcesses { count, exe })
    }

    fn options(&self) -> RunOptions {
        RunOptions {
            connect_timeout: Duration::from_secs(self.connect_timeout_secs),
            job_timeout: Duration::from_secs(self.job_timeout_secs),
            random_assignment: self.random_assignment,
            report_cap: self.report_cap,
            min_support: self.min_support,
            work_dir: self.work_dir.clone(),
        }
    }
}

fn parse_percent(s: &str) -> Result<u32, String> {
    match s.parse::<u32>() {
        Ok(p) if (1..=100).contains(&p) => Ok(p),
        _ => Err(format!("percent must be an integer in 1..=100, got {s:?}")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Discover enriched motifs in a target set against a background set.
    Discover {
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        background: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Write `sub_<i>.fa` replicates keeping a window of each sequence.
    Subsample {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_parser = parse_percent)]
        percent: u32,
        #[arg(long)]
        count: usize,
        #[arg(long, value_parser = parse_seed, default_value = "0")]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Produce a scrambled background from a target FASTA.
    Scramble {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_parser = parse_seed, default_value = "0")]
        seed: u64,
        #[arg(long, default_value = "mono")]
        mode: ScrambleMode,
    },
    /// Sub-sample, scatter to workers, gather and merge by mode.
    Run {
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        background: PathBuf,
        #[arg(long, value_parser = parse_percent)]
        percent: u32,
        #[arg(long, value_parser = parse_seed, default_value = "0")]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        timings: PathBuf,
        /// Also write the merged TSV with support and worker columns.
        #[arg(long)]
        merged_out: Option<PathBuf>,
        #[command(flatten)]
        dist: DistributedArgs,
    },
    /// Serve jobs on host:port (control) and host:port+1 (data).
    Worker {
        #[arg(long)]
        listen: String,
    },
    /// Compare two motif TSVs by motif identity.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "3,5,10")]
        topk: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build runtimes.csv, topk.csv and quality.csv from a bench runs directory.
    Report {
        #[arg(long)]
        runs: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "3,5,10")]
        topk: Vec<usize>,
    },
    /// Sequential baselines plus distributed runs over a percent sweep.
    Bench {
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        background: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "25,55,75,90,100", value_parser = parse_percent)]
        percents: Vec<u32>,
        #[arg(long, default_value_t = 2)]
        runs: usize,
        #[arg(long, value_parser = parse_seed, default_value = "0")]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "3,5,10")]
        topk: Vec<usize>,
        #[command(flatten)]
        dist: DistributedArgs,
    },
    /// Generate a synthetic planted-motif corpus (target.fa, background.fa).
    #[command(hide = true)]
    MakeCorpus {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 100)]
        sequences: usize,
        #[arg(long, default_value_t = 300)]
        length: usize,
        #[arg(long, default_value = "ACGTACGT")]
        motif: String,
        #[arg(long, default_value_t = 0.6)]
        fraction: f64,
        #[arg(long, default_value_t = 60)]
        line_width: usize,
        #[arg(long, value_parser = parse_seed, default_value = "0")]
        seed: u64,
    },
}

fn write_tsv(path: &Path, motifs: &[engine::Motif]) -> Result<()> {
    std::fs::write(path, tsv::motif_tsv_string(motifs)).with_context(|| format!("writing {}", path.display()))
}

fn split_listen(listen: &str) -> Result<(String, u16)> {
    let (host, port) = listen
        .rsplit_once(':')
        .with_context(|| format!("--listen expects host:port, got {listen:?}"))?;
    let port = port.parse().with_context(|| format!("bad port in {listen:?}"))?;
    Ok((host.trim_matches(['[', ']']).to_string(), port))
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Discover {
            target,
            background,
            out,
            engine: e,
        } => {
            let t = fasta::read_fasta_file(&target).with_context(|| format!("reading {}", target.display()))?;
            let b = fasta::read_fasta_file(&background)
                .with_context(|| format!("reading {}", background.display()))?;
            let motifs = engine::discover(&t, &b, &e.config())?;
            write_tsv(&out, &motifs)
        }
        Command::Subsample {
            input,
            percent,
            count,
            seed,
            out_dir,
        } => {
            let records = fasta::read_fasta_file(&input).with_context(|| format!("reading {}", input.display()))?;
            let spec = SubsampleSpec::new(percent, count, seed)?;
            let reps = subsample::generate_replicates(&records, &spec)?;
            subsample::write_replicates(&out_dir, &reps)?;
            Ok(())
        }
        Command::Scramble {
            input,
            out,
            seed,
            mode,
        } => {
            let records = fasta::read_fasta_file(&input).with_context(|| format!("reading {}", input.display()))?;
            let bg = background::scramble(&records, seed, mode)?;
            fasta::write_fasta_file(&out, &bg)?;
            Ok(())
        }
        Command::Run {
            target,
            background,
            percent,
            seed,
            out,
            timings,
            merged_out,
            dist,
        } => {
            let backend = dist.backend()?;
            let spec = SubsampleSpec::new(percent, backend.worker_count(), seed)?;
            let outcome = scatter::run_distributed(
                &target,
                &background,
                &spec,
                &backend,
                &dist.engine_spec()?,
                &dist.options(),
            )?;
            write_tsv(&out, &outcome.motifs())?;
            if let Some(path) = merged_out {
                let mut buf = Vec::new();
                tsv::write_merged_tsv(&mut buf, &outcome.merged)?;
                std::fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))?;
            }
            std::fs::write(&timings, outcome.timings.to_json())
                .with_context(|| format!("writing {}", timings.display()))?;
            Ok(())
        }
        Command::Worker { listen } => {
            let (host, port) = split_listen(&listen)?;
            let worker = Worker::bind(&host, port)?;
            match worker.serve()? {}
        }
        Command::Compare { a, b, topk, out } => {
            let la = tsv::read_motif_tsv_file(&a).with_context(|| format!("reading {}", a.display()))?;
            let lb = tsv::read_motif_tsv_file(&b).with_context(|| format!("reading {}", b.display()))?;
            let report = evaluator::compare(&la, &lb, &topk)?;
            std::fs::write(&out, serde_json::to_string_pretty(&report)?)
                .with_context(|| format!("writing {}", out.display()))?;
            Ok(())
        }
        Command::Report { runs, out_dir, topk } => {
            bench::build_report(&runs, &topk, &out_dir)?;
            Ok(())
        }
        Command::Bench {
            target,
            background,
            out_dir,
            percents,
            runs,
            seed,
            topk,
            dist,
        } => {
            let plan = BenchPlan {
                percents,
                runs_per_point: runs,
                seed,
                engine: dist.engine_spec()?,
                topk,
            };
            let summary = bench::run_bench(&plan, &target, &background, &dist.backend()?, &dist.options(), &out_dir)?;
            log::info!(
                "bench finished: {} points executed, {} reused",
                summary.executed.len(),
                summary.skipped.len()
            );
            Ok(())
        }
        Command::MakeCorpus {
            out_dir,
            sequences,
            length,
            motif,
            fraction,
            line_width,
            seed,
        } => {
            if motif.is_empty() || !motif.bytes().all(|b| b"ACGT".contains(&b)) || motif.len() > length {
                bail!("--motif must be a non-empty ACGT string no longer than --length");
            }
            if sequences == 0 || line_width == 0 || !(0.0..=1.0).contains(&fraction) {
                bail!("--sequences and --line-width must be positive, --fraction in [0, 1]");
            }
            let c = corpus::planted_corpus(&CorpusSpec {
                sequences,
                length,
                motif,
                plant_fraction: fraction,
                line_width,
                seed,
            });
            std::fs::create_dir_all(&out_dir)?;
            fasta::write_fasta_file(&out_dir.join("target.fa"), &c.target)?;
            fasta::write_fasta_file(&out_dir.join("background.fa"), &c.background)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("brmotif: {e:#}");
            ExitCode::from(2)
        }
    }
}
