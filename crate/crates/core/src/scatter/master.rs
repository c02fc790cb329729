use std::net::{TcpStream, ToSocketAddrs};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::Rng;

use super::protocol::{
    read_frame, send_control, ControlMessage, FileEntry, FileRole, FrameError, JobDescriptor,
};
use super::worker::send_files;
use super::{RunTimings, ScatterError, WorkerDescriptor};
use crate::engine::{self, tsv, EngineSpec, ExternalEngine, Motif};
use crate::fasta::{self, SequenceRecord};
use crate::reducer::{self, MergedMotif};
use crate::subsample::{self, generate_replicates, replicate_file_name, SubsampleSpec};

/// Where worker jobs run.
#[derive(Debug, Clone)]
pub enum Backend {
    /// Worker threads inside this process.
    InProcess(usize),
    /// One child process per worker; `exe` is this tool's binary, used to run
    /// the built-in engine through its `discover` subcommand.
    LocalProcesses { count: usize, exe: PathBuf },
    /// Remote workers over TCP.
    Tcp(Vec<WorkerDescriptor>),
}

impl Backend {
    pub fn worker_count(&self) -> usize {
        match self {
            Self::InProcess(n) => *n,
            Self::LocalProcesses { count, .. } => *count,
            Self::Tcp(w) => w.len(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub connect_timeout: Duration,
    pub job_timeout: Duration,
    /// Each worker picks a replicate at random instead of replicate `i` for worker `i`.
    pub random_assignment: bool,
    /// Merged list size; defaults to the engine's report cap (or unbounded).
    pub report_cap: Option<usize>,
    pub min_support: usize,
    /// Scratch directory for the local-process backend; a temporary one if `None`.
    pub work_dir: Option<PathBuf>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            connect_timeout: Duration::from_secs(10),
            job_timeout: Duration::from_secs(3600),
            random_assignment: false,
            report_cap: None,
            min_support: 1,
            work_dir: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub merged: Vec<MergedMotif>,
    pub timings: RunTimings,
    /// Replicate index processed by each worker.
    pub assignment: Vec<usize>,
}

impl RunOutcome {
    /// The merged motifs in motif-TSV order (ascending lnP). Support order
    /// decides which motifs survive the cap; `merged` keeps that order.
    pub fn motifs(&self) -> Vec<Motif> {
        let mut motifs = reducer::merged_to_motifs(&self.merged);
        engine::sort_ranked(&mut motifs);
        motifs
    }
}

struct WorkerResult {
    motifs: Vec<Motif>,
    /// Time from phase start until inputs were delivered.
    distribute: Duration,
    discover: Duration,
    gather: Duration,
}

fn ms(d: Duration) -> u64 {
    d.as_millis() as u64
}

fn assignment(spec: &SubsampleSpec, workers: usize, random: bool) -> Vec<usize> {
    if !random {
        return (0..workers).collect();
    }
    let mut rng = subsample::replicate_rng(spec.seed(), usize::MAX);
    (0..workers).map(|_| rng.random_range(0..spec.replicates())).collect()
}

/// Reads both FASTA files and runs [`run_distributed_records`].
pub fn run_distributed(
    target: &Path,
    background: &Path,
    spec: &SubsampleSpec,
    backend: &Backend,
    engine: &EngineSpec,
    opts: &RunOptions,
) -> Result<RunOutcome, ScatterError> {
    let start = Instant::now();
    let target = fasta::read_fasta_file(target)?;
    let background = fasta::read_fasta_file(background)?;
    let load = start.elapsed();
    let mut out = run_distributed_records(&target, &background, spec, backend, engine, opts)?;
    // input parsing counts toward the subsample phase
    out.timings.subsample_ms += ms(load);
    out.timings.total_ms = ms(start.elapsed());
    Ok(out)
}

pub fn run_distributed_records(
    target: &[SequenceRecord],
    background: &[SequenceRecord],
    spec: &SubsampleSpec,
    backend: &Backend,
    engine: &EngineSpec,
    opts: &RunOptions,
) -> Result<RunOutcome, ScatterError> {
    let n = backend.worker_count();
    if n == 0 || spec.replicates() != n {
        return Err(ScatterError::ReplicateCountMismatch {
            replicates: spec.replicates(),
            workers: n,
        });
    }
    engine.validate()?;
    if background.is_empty() {
        return Err(engine::EngineError::EmptyBackground.into());
    }
    let start = Instant::now();

    let replicates = generate_replicates(target, spec)?;
    let assign = assignment(spec, n, opts.random_assignment);
    let subsample = start.elapsed();

    let results: Vec<Result<WorkerResult, ScatterError>> = match backend {
        Backend::InProcess(_) => run_in_process(&replicates, &assign, background, engine),
        Backend::LocalProcesses { exe, .. } => {
            run_processes(&replicates, &assign, background, engine, exe, opts)?
        }
        Backend::Tcp(workers) => run_tcp(&replicates, &assign, background, engine, workers, opts),
    };
    let mut lists = Vec::with_capacity(n);
    let mut per_worker = Vec::with_capacity(n);
    for r in results {
        let r = r?;
        per_worker.push((r.distribute, r.discover, r.gather));
        lists.push(r.motifs);
    }

    let reduce_start = Instant::now();
    let cap = opts.report_cap.or(engine.report_cap()).unwrap_or(usize::MAX);
    let merged = reducer::reduce_mode_with(&lists, cap, opts.min_support)?;
    let reduce = reduce_start.elapsed();

    let timings = RunTimings {
        subsample_ms: ms(subsample),
        distribute_ms: per_worker.iter().map(|p| ms(p.0)).max().unwrap_or(0),
        discover_ms: per_worker.iter().map(|p| ms(p.1)).collect(),
        discover_us: per_worker.iter().map(|p| p.1.as_micros() as u64).collect(),
        gather_ms: per_worker.iter().map(|p| ms(p.2)).max().unwrap_or(0),
        reduce_ms: ms(reduce),
        total_ms: ms(start.elapsed()),
    };
    Ok(RunOutcome {
        merged,
        timings,
        assignment: assign,
    })
}

fn run_in_process(
    replicates: &[subsample::Replicate],
    assign: &[usize],
    background: &[SequenceRecord],
    engine: &EngineSpec,
) -> Vec<Result<WorkerResult, ScatterError>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = assign
            .iter()
            .enumerate()
            .map(|(i, &rep)| {
                let target = &replicates[rep].records;
                s.spawn(move || -> Result<WorkerResult, ScatterError> {
                    let t0 = Instant::now();
                    let motifs = match engine {
                        EngineSpec::Builtin(cfg) => engine::discover(target, background, cfg),
                        EngineSpec::External(ext) => run_external_records(ext, target, background),
                    }
                    .map_err(|e| ScatterError::WorkerFailed {
                        worker: i,
                        addr: format!("thread {i}"),
                        message: e.to_string(),
                    })?;
                    Ok(WorkerResult {
                        motifs,
                        distribute: Duration::ZERO,
                        discover: t0.elapsed(),
                        gather: Duration::ZERO,
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker thread panicked"))
            .collect()
    })
}

fn run_external_records(
    ext: &ExternalEngine,
    target: &[SequenceRecord],
    background: &[SequenceRecord],
) -> Result<Vec<Motif>, engine::EngineError> {
    let dir = tempfile::tempdir()?;
    let (t, b) = (dir.path().join("target.fa"), dir.path().join("background.fa"));
    fasta::write_fasta_file(&t, target)?;
    fasta::write_fasta_file(&b, background)?;
    ext.run_to(&t, &b, &dir.path().join("motifs.tsv"))
}

fn shell_quote(p: &Path) -> String {
    format!("'{}'", p.to_string_lossy().replace('\'', r"'\''"))
}

/// Command template that runs the built-in engine through the CLI binary.
pub(crate) fn builtin_template(exe: &Path, cfg: &engine::EngineConfig) -> String {
    let lengths: Vec<String> = cfg.lengths.iter().map(|k| k.to_string()).collect();
    format!(
        "{} discover --target {{target}} --background {{background}} --out {{output}} \
         --lengths {} --per-length {} --redundancy {}{}",
        shell_quote(exe),
        lengths.join(","),
        cfg.per_length,
        cfg.redundancy_hamming,
        if cfg.both_strands { "" } else { " --no-rc" }
    )
}

fn run_processes(
    replicates: &[subsample::Replicate],
    assign: &[usize],
    background: &[SequenceRecord],
    engine: &EngineSpec,
    exe: &Path,
    opts: &RunOptions,
) -> Result<Vec<Result<WorkerResult, ScatterError>>, ScatterError> {
    let scratch;
    let root = match &opts.work_dir {
        Some(d) => d.clone(),
        None => {
            scratch = tempfile::tempdir()?;
            scratch.path().to_path_buf()
        }
    };
    let command = match engine {
        EngineSpec::Builtin(cfg) => ExternalEngine {
            template: builtin_template(exe, cfg),
            timeout_secs: opts.job_timeout.as_secs().max(1),
        },
        EngineSpec::External(ext) => ExternalEngine {
            template: ext.template.clone(),
            timeout_secs: opts.job_timeout.as_secs().max(1),
        },
    };

    // Without a shared filesystem every worker gets its own copy of the inputs.
    let t0 = Instant::now();
    let bg_bytes = fasta::to_fasta_bytes(background);
    let mut jobs = Vec::with_capacity(assign.len());
    for (i, &rep) in assign.iter().enumerate() {
        let dir = root.join(format!("worker_{i}"));
        std::fs::create_dir_all(&dir)?;
        let target = dir.join(replicate_file_name(rep));
        fasta::write_fasta_file(&target, &replicates[rep].records)?;
        let bg = dir.join("background.fa");
        std::fs::write(&bg, &bg_bytes)?;
        let out = dir.join("motifs.tsv");
        let _ = std::fs::remove_file(&out);
        jobs.push((target, bg, out));
    }
    let distribute = t0.elapsed();

    Ok(std::thread::scope(|s| {
        let handles: Vec<_> = jobs
            .iter()
            .enumerate()
            .map(|(i, (target, bg, out))| {
                let command = &command;
                s.spawn(move || -> Result<WorkerResult, ScatterError> {
                    let failed = |message: String| ScatterError::WorkerFailed {
                        worker: i,
                        addr: format!("process {i}"),
                        message,
                    };
                    let t = Instant::now();
                    command.execute(target, bg, out).map_err(|e| failed(e.to_string()))?;
                    let discover = t.elapsed();
                    let t = Instant::now();
                    let motifs = tsv::read_motif_tsv_file(out).map_err(|e| failed(e.to_string()))?;
                    Ok(WorkerResult {
                        motifs,
                        distribute,
                        discover,
                        gather: t.elapsed(),
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker thread panicked"))
            .collect()
    }))
}

fn connect(addr: &str, timeout: Duration) -> std::io::Result<TcpStream> {
    let mut last = None;
    for sa in addr.to_socket_addrs()? {
        match TcpStream::connect_timeout(&sa, timeout) {
            Ok(s) => {
                s.set_nodelay(true)?;
                return Ok(s);
            }
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| std::io::Error::new(std::io::ErrorKind::NotFound, "no address")))
}

fn tcp_session(
    index: usize,
    worker: &WorkerDescriptor,
    descriptor: JobDescriptor,
    files: &[&[u8]],
    opts: &RunOptions,
    phase_start: Instant,
) -> Result<WorkerResult, ScatterError> {
    let unreachable = |reason: String| ScatterError::WorkerUnreachable {
        worker: index,
        addr: worker.to_string(),
        reason,
    };
    let failed = |message: String| ScatterError::WorkerFailed {
        worker: index,
        addr: worker.to_string(),
        message,
    };

    let mut control = connect(&worker.control_addr(), opts.connect_timeout)
        .map_err(|e| unreachable(format!("control port: {e}")))?;
    control.set_read_timeout(Some(opts.connect_timeout))?;
    send_control(&mut control, &ControlMessage::Ping).map_err(|e| unreachable(e.to_string()))?;
    match read_frame(&mut control).map(|f| ControlMessage::decode(&f)) {
        Ok(Ok(ControlMessage::Pong)) => {}
        Ok(other) => return Err(unreachable(format!("bad handshake reply {other:?}"))),
        Err(e) => return Err(unreachable(format!("handshake: {e}"))),
    }
    let mut data = connect(&worker.data_addr(), opts.connect_timeout)
        .map_err(|e| unreachable(format!("data port: {e}")))?;

    let job_id = format!("r{}-w{index}", descriptor.replicate);
    send_control(
        &mut control,
        &ControlMessage::Job {
            id: job_id.clone(),
            descriptor,
        },
    )
    .map_err(|e| failed(e.to_string()))?;
    send_files(&mut data, files).map_err(|e| failed(format!("sending inputs: {e}")))?;
    let delivered = Instant::now();

    control.set_read_timeout(Some(opts.job_timeout))?;
    let frame = read_frame(&mut control).map_err(|e| match e {
        FrameError::Io(io)
            if matches!(io.kind(), std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut) =>
        {
            failed(format!("no result within {:?}", opts.job_timeout))
        }
        other => failed(other.to_string()),
    })?;
    let finished = Instant::now();
    let motifs = match ControlMessage::decode(&frame).map_err(failed)? {
        ControlMessage::Result { id, body } if id == job_id => {
            tsv::read_motif_tsv(body.as_bytes()).map_err(|e| failed(format!("bad result: {e}")))?
        }
        ControlMessage::Error { message, .. } => return Err(failed(message)),
        other => return Err(failed(format!("unexpected reply {other:?}"))),
    };
    Ok(WorkerResult {
        motifs,
        distribute: delivered - phase_start,
        discover: finished - delivered,
        gather: finished.elapsed(),
    })
}

fn run_tcp(
    replicates: &[subsample::Replicate],
    assign: &[usize],
    background: &[SequenceRecord],
    engine: &EngineSpec,
    workers: &[WorkerDescriptor],
    opts: &RunOptions,
) -> Vec<Result<WorkerResult, ScatterError>> {
    let bg_bytes = fasta::to_fasta_bytes(background);
    let target_bytes: Vec<Vec<u8>> = replicates.iter().map(|r| fasta::to_fasta_bytes(&r.records)).collect();
    let phase_start = Instant::now();
    std::thread::scope(|s| {
        let handles: Vec<_> = assign
            .iter()
            .enumerate()
            .map(|(i, &rep)| {
                let descriptor = JobDescriptor {
                    replicate: rep,
                    files: vec![
                        FileEntry {
                            name: replicate_file_name(rep),
                            role: FileRole::Target,
                        },
                        FileEntry {
                            name: "background.fa".into(),
                            role: FileRole::Background,
                        },
                    ],
                    engine: engine.clone(),
                };
                let files = [target_bytes[rep].as_slice(), bg_bytes.as_slice()];
                let worker = &workers[i];
                s.spawn(move || tcp_session(i, worker, descriptor, &files, opts, phase_start))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("session thread panicked"))
            .collect()
    })
}
