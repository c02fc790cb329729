//! Adapter for external discovery commands.
//!
//! A template is a shell command line with `{target}`, `{background}` and
//! `{output}` placeholders; the command must write a motif TSV to `{output}`.

use std::io::Read;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{tsv, EngineError, Motif};

pub const DEFAULT_JOB_TIMEOUT: Duration = Duration::from_secs(3600);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalEngine {
    pub template: String,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
}

fn default_timeout_secs() -> u64 {
    DEFAULT_JOB_TIMEOUT.as_secs()
}

fn shell_quote(p: &Path) -> String {
    format!("'{}'", p.to_string_lossy().replace('\'', r"'\''"))
}

impl ExternalEngine {
    pub fn new(template: impl Into<String>) -> Result<Self, EngineError> {
        let e = Self {
            template: template.into(),
            timeout_secs: default_timeout_secs(),
        };
        e.check_template()?;
        Ok(e)
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout_secs = timeout.as_secs().max(1);
        self
    }

    pub fn check_template(&self) -> Result<(), EngineError> {
        for p in ["{target}", "{background}", "{output}"] {
            if !self.template.contains(p) {
                return Err(EngineError::InvalidTemplate(p));
            }
        }
        Ok(())
    }

    pub fn command_line(&self, target: &Path, background: &Path, output: &Path) -> String {
        self.template
            .replace("{target}", &shell_quote(target))
            .replace("{background}", &shell_quote(background))
            .replace("{output}", &shell_quote(output))
    }

    /// Runs the command and parses the TSV it wrote to `output`.
    pub fn run_to(&self, target: &Path, background: &Path, output: &Path) -> Result<Vec<Motif>, EngineError> {
        self.execute(target, background, output)?;
        Ok(tsv::read_motif_tsv_file(output)?)
    }

    /// Runs the command to completion without reading its output.
    pub fn execute(&self, target: &Path, background: &Path, output: &Path) -> Result<(), EngineError> {
        self.check_template()?;
        let line = self.command_line(target, background, output);
        log::debug!("running engine command: {line}");
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&line)
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()?;

        let drain = |mut r: Box<dyn Read + Send>| {
            std::thread::spawn(move || {
                let mut buf = Vec::new();
                let _ = r.read_to_end(&mut buf);
                buf
            })
        };
        let out_reader = drain(Box::new(child.stdout.take().expect("piped stdout")));
        let err_reader = drain(Box::new(child.stderr.take().expect("piped stderr")));

        let timeout = Duration::from_secs(self.timeout_secs);
        let deadline = Instant::now() + timeout;
        let status = loop {
            if let Some(status) = child.try_wait()? {
                break status;
            }
            if Instant::now() >= deadline {
                let _ = child.kill();
                let _ = child.wait();
                return Err(EngineError::Timeout(timeout));
            }
            std::thread::sleep(Duration::from_millis(5));
        };
        let stdout = out_reader.join().unwrap_or_default();
        let stderr = err_reader.join().unwrap_or_default();

        if !status.success() {
            let mut diagnostic = String::from_utf8_lossy(&stderr).trim().to_string();
            if diagnostic.is_empty() {
                diagnostic = String::from_utf8_lossy(&stdout).trim().to_string();
            }
            return Err(EngineError::CommandFailed {
                status: status.to_string(),
                diagnostic,
            });
        }
        Ok(())
    }
}

/// Runs `template` on the two FASTA paths, with the output in a scratch directory.
pub fn run_external(template: &str, target: &Path, background: &Path) -> Result<Vec<Motif>, EngineError> {
    let engine = ExternalEngine::new(template)?;
    let scratch = tempfile::tempdir()?;
    engine.run_to(target, background, &scratch.path().join("motifs.tsv"))
}
