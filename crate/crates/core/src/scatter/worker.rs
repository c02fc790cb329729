//! Worker side: runs one job at a time, either received over TCP or handed
//! over in-process.

use std::convert::Infallible;
use std::net::{TcpListener, TcpStream};
use std::path::Path;
use std::time::{Duration, Instant};

use super::protocol::{
    read_frame, send_control, write_frame, ControlMessage, FileRole, FrameError, JobDescriptor,
};
use super::{ScatterError, WorkerDescriptor};
use crate::engine::{self, tsv, EngineSpec};
use crate::fasta;

/// Runs a job on in-memory file contents, returning the motif TSV text.
pub fn run_job(descriptor: &JobDescriptor, files: &[Vec<u8>]) -> Result<String, String> {
    if files.len() != descriptor.files.len() {
        return Err(format!(
            "descriptor lists {} files, received {}",
            descriptor.files.len(),
            files.len()
        ));
    }
    let find = |role: FileRole| {
        descriptor
            .files
            .iter()
            .position(|f| f.role == role)
            .ok_or_else(|| format!("job has no {role:?} file"))
    };
    let (ti, bi) = (find(FileRole::Target)?, find(FileRole::Background)?);

    match &descriptor.engine {
        EngineSpec::Builtin(cfg) => {
            let target = fasta::parse_fasta(files[ti].as_slice()).map_err(|e| format!("target: {e}"))?;
            let background = fasta::parse_fasta(files[bi].as_slice()).map_err(|e| format!("background: {e}"))?;
            let motifs = engine::discover(&target, &background, cfg).map_err(|e| e.to_string())?;
            Ok(tsv::motif_tsv_string(&motifs))
        }
        EngineSpec::External(ext) => {
            let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            let mut paths = Vec::with_capacity(files.len());
            for (entry, body) in descriptor.files.iter().zip(files) {
                let name = Path::new(&entry.name)
                    .file_name()
                    .ok_or_else(|| format!("bad file name {:?}", entry.name))?;
                let path = dir.path().join(name);
                std::fs::write(&path, body).map_err(|e| e.to_string())?;
                paths.push(path);
            }
            let out = dir.path().join("motifs.tsv");
            let motifs = ext.run_to(&paths[ti], &paths[bi], &out).map_err(|e| e.to_string())?;
            Ok(tsv::motif_tsv_string(&motifs))
        }
    }
}

/// A worker bound to its control port and the data port right above it.
pub struct Worker {
    control: TcpListener,
    data: TcpListener,
    descriptor: WorkerDescriptor,
    accept_timeout: Duration,
}

impl Worker {
    pub fn bind(host: &str, port_base: u16) -> Result<Self, ScatterError> {
        let descriptor = WorkerDescriptor::new(host, port_base)?;
        let unavailable = |addr: String, e: std::io::Error| ScatterError::PortUnavailable {
            addr,
            reason: e.to_string(),
        };
        let control = TcpListener::bind(descriptor.control_addr())
            .map_err(|e| unavailable(descriptor.control_addr(), e))?;
        let data =
            TcpListener::bind(descriptor.data_addr()).map_err(|e| unavailable(descriptor.data_addr(), e))?;
        Ok(Self {
            control,
            data,
            descriptor,
            accept_timeout: Duration::from_secs(10),
        })
    }

    /// Binds an OS-chosen consecutive port pair on `host`.
    pub fn bind_any(host: &str) -> Result<Self, ScatterError> {
        let mut last = None;
        for _ in 0..64 {
            let control = TcpListener::bind((host, 0))?;
            let port = control.local_addr()?.port();
            if !(1024..=65534).contains(&port) {
                continue;
            }
            match TcpListener::bind((host, port + 1)) {
                Ok(data) => {
                    return Ok(Self {
                        control,
                        data,
                        descriptor: WorkerDescriptor::new(host, port)?,
                        accept_timeout: Duration::from_secs(10),
                    })
                }
                Err(e) => last = Some(e),
            }
        }
        Err(ScatterError::PortUnavailable {
            addr: format!("{host}:*"),
            reason: last.map(|e| e.to_string()).unwrap_or_else(|| "no port pair".into()),
        })
    }

    pub fn descriptor(&self) -> WorkerDescriptor {
        self.descriptor.clone()
    }

    /// Serves sessions until the process is terminated.
    pub fn serve(&self) -> Result<Infallible, ScatterError> {
        log::info!("worker listening on {} (data {})", self.descriptor.control_addr(), self.descriptor.data_addr());
        loop {
            if let Err(e) = self.serve_session() {
                log::warn!("session ended with error: {e}");
            }
        }
    }

    fn accept_data(&self) -> Result<TcpStream, ScatterError> {
        self.data.set_nonblocking(true)?;
        let deadline = Instant::now() + self.accept_timeout;
        let res = loop {
            match self.data.accept() {
                Ok((s, _)) => break Ok(s),
                Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => {
                    if Instant::now() >= deadline {
                        break Err(ScatterError::Protocol("no data connection for job".into()));
                    }
                    std::thread::sleep(Duration::from_millis(2));
                }
                Err(e) => break Err(e.into()),
            }
        };
        self.data.set_nonblocking(false)?;
        let s = res?;
        s.set_nonblocking(false)?;
        Ok(s)
    }

    /// Accepts one master connection and serves its jobs until it disconnects.
    pub fn serve_session(&self) -> Result<(), ScatterError> {
        let (mut control, peer) = self.control.accept()?;
        log::debug!("session from {peer}");
        let mut data: Option<TcpStream> = None;
        loop {
            let frame = match read_frame(&mut control) {
                Ok(f) => f,
                Err(FrameError::Closed) => return Ok(()),
                Err(FrameError::TooLarge(n)) => {
                    let _ = send_control(
                        &mut control,
                        &ControlMessage::Error {
                            id: "-".into(),
                            message: format!("frame of {n} bytes exceeds cap"),
                        },
                    );
                    return Err(ScatterError::Protocol(format!("oversized control frame ({n} bytes)")));
                }
                Err(FrameError::Io(e)) => return Err(e.into()),
            };
            let msg = match ControlMessage::decode(&frame) {
                Ok(m) => m,
                Err(why) => {
                    let _ = send_control(
                        &mut control,
                        &ControlMessage::Error {
                            id: "-".into(),
                            message: why.clone(),
                        },
                    );
                    return Err(ScatterError::Protocol(why));
                }
            };
            match msg {
                ControlMessage::Ping => send_control(&mut control, &ControlMessage::Pong)?,
                ControlMessage::Job { id, descriptor } => {
                    if data.is_none() {
                        data = Some(self.accept_data()?);
                    }
                    let stream = data.as_mut().expect("data connection");
                    let mut files = Vec::with_capacity(descriptor.files.len());
                    for _ in 0..descriptor.files.len() {
                        match read_frame(stream) {
                            Ok(f) => files.push(f),
                            Err(e) => {
                                let _ = send_control(
                                    &mut control,
                                    &ControlMessage::Error {
                                        id: id.clone(),
                                        message: format!("data channel: {e}"),
                                    },
                                );
                                return Err(ScatterError::Protocol(format!("data channel: {e}")));
                            }
                        }
                    }
                    let reply = match run_job(&descriptor, &files) {
                        Ok(body) => ControlMessage::Result { id, body },
                        Err(message) => ControlMessage::Error { id, message },
                    };
                    send_control(&mut control, &reply)?;
                }
                other => {
                    let why = format!("unexpected control frame {other:?}");
                    let _ = send_control(
                        &mut control,
                        &ControlMessage::Error {
                            id: "-".into(),
                            message: why.clone(),
                        },
                    );
                    return Err(ScatterError::Protocol(why));
                }
            }
        }
    }
}

/// Binds `host:port_base` (and `port_base + 1`) and serves jobs forever.
pub fn worker_serve(host: &str, port_base: u16) -> Result<Infallible, ScatterError> {
    Worker::bind(host, port_base)?.serve()
}

pub(crate) fn send_files(stream: &mut TcpStream, files: &[&[u8]]) -> Result<(), FrameError> {
    for f in files {
        write_frame(stream, f)?;
    }
    Ok(())
}
