//! Framed wire protocol between master and worker.
//!
//! Every frame is a 4-byte big-endian payload length followed by the payload,
//! capped at [`MAX_FRAME`]. The control port carries UTF-8 text frames:
//!
//! ```text
//! JOB <job-id> <json descriptor>
//! RESULT <job-id>\n<motif tsv>
//! ERROR <job-id> <message>
//! PING
//! PONG
//! ```
//!
//! The data port carries raw file contents, one frame per file, in the order
//! the job descriptor lists them.

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::EngineSpec;

pub const MAX_FRAME: usize = 64 * 1024 * 1024;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("frame length {0} exceeds the {MAX_FRAME}-byte cap")]
    TooLarge(usize),
    #[error("connection closed")]
    Closed,
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn write_frame<W: Write>(w: &mut W, payload: &[u8]) -> Result<(), FrameError> {
    if payload.len() > MAX_FRAME {
        return Err(FrameError::TooLarge(payload.len()));
    }
    w.write_all(&(payload.len() as u32).to_be_bytes())?;
    w.write_all(payload)?;
    w.flush()?;
    Ok(())
}

pub fn read_frame<R: Read>(r: &mut R) -> Result<Vec<u8>, FrameError> {
    let mut len = [0u8; 4];
    match r.read_exact(&mut len) {
        Ok(()) => {}
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Err(FrameError::Closed),
        Err(e) => return Err(e.into()),
    }
    let len = u32::from_be_bytes(len) as usize;
    if len > MAX_FRAME {
        return Err(FrameError::TooLarge(len));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FileRole {
    Target,
    Background,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub role: FileRole,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobDescriptor {
    pub replicate: usize,
    pub files: Vec<FileEntry>,
    pub engine: EngineSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ControlMessage {
    Job { id: String, descriptor: JobDescriptor },
    Result { id: String, body: String },
    Error { id: String, message: String },
    Ping,
    Pong,
}

impl ControlMessage {
    pub fn encode(&self) -> Vec<u8> {
        match self {
            Self::Job { id, descriptor } => format!(
                "JOB {id} {}",
                serde_json::to_string(descriptor).expect("descriptor serializes")
            ),
            Self::Result { id, body } => format!("RESULT {id}\n{body}"),
            Self::Error { id, message } => format!("ERROR {id} {message}"),
            Self::Ping => "PING".into(),
            Self::Pong => "PONG".into(),
        }
        .into_bytes()
    }

    pub fn decode(frame: &[u8]) -> Result<Self, String> {
        let text = std::str::from_utf8(frame).map_err(|_| "control frame is not UTF-8".to_string())?;
        let (first, rest) = match text.split_once('\n') {
            Some((f, r)) => (f, Some(r)),
            None => (text, None),
        };
        let mut parts = first.splitn(3, ' ');
        let verb = parts.next().unwrap_or("");
        let id = parts.next();
        let tail = parts.next();
        let need_id = || {
            id.filter(|s| !s.is_empty())
                .map(str::to_string)
                .ok_or_else(|| format!("{verb} frame without a job id"))
        };
        match verb {
            "PING" if id.is_none() && rest.is_none() => Ok(Self::Ping),
            "PONG" if id.is_none() && rest.is_none() => Ok(Self::Pong),
            "JOB" => {
                let id = need_id()?;
                let json = match (tail, rest) {
                    (Some(t), None) => t.to_string(),
                    (Some(t), Some(r)) => format!("{t}\n{r}"),
                    _ => return Err("JOB frame without a descriptor".into()),
                };
                let descriptor = serde_json::from_str(&json).map_err(|e| format!("bad job descriptor: {e}"))?;
                Ok(Self::Job { id, descriptor })
            }
            "RESULT" if tail.is_none() => Ok(Self::Result {
                id: need_id()?,
                body: rest.unwrap_or("").to_string(),
            }),
            "ERROR" => {
                let id = need_id()?;
                let mut message = tail.unwrap_or("").to_string();
                if let Some(r) = rest {
                    message.push('\n');
                    message.push_str(r);
                }
                Ok(Self::Error { id, message })
            }
            _ => Err(format!("unrecognised control frame {first:?}")),
        }
    }
}

pub fn send_control<W: Write>(w: &mut W, msg: &ControlMessage) -> Result<(), FrameError> {
    write_frame(w, &msg.encode())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::EngineConfig;

    #[test]
    fn frame_round_trip_and_cap() {
        let mut buf = Vec::new();
        write_frame(&mut buf, b"hello").unwrap();
        assert_eq!(&buf[..4], &[0, 0, 0, 5]);
        assert_eq!(read_frame(&mut buf.as_slice()).unwrap(), b"hello");

        let oversized = ((MAX_FRAME + 1) as u32).to_be_bytes();
        assert!(matches!(
            read_frame(&mut oversized.as_slice()),
            Err(FrameError::TooLarge(n)) if n == MAX_FRAME + 1
        ));
        assert!(matches!(read_frame(&mut [].as_slice()), Err(FrameError::Closed)));
    }

    #[test]
    fn control_messages_round_trip() {
        let msgs = [
            ControlMessage::Job {
                id: "j0".into(),
                descriptor: JobDescriptor {
                    replicate: 3,
                    files: vec![
                        FileEntry { name: "sub_3.fa".into(), role: FileRole::Target },
                        FileEntry { name: "bg.fa".into(), role: FileRole::Background },
                    ],
                    engine: EngineSpec::Builtin(EngineConfig::default()),
                },
            },
            ControlMessage::Result { id: "j0".into(), body: "#rank\n1\n".into() },
            ControlMessage::Error { id: "j0".into(), message: "boom went\nthe engine".into() },
            ControlMessage::Ping,
            ControlMessage::Pong,
        ];
        for m in msgs {
            assert_eq!(ControlMessage::decode(&m.encode()).unwrap(), m);
        }
    }

    #[test]
    fn job_frame_text_shape() {
        let text = String::from_utf8(
            ControlMessage::Job {
                id: "7".into(),
                descriptor: JobDescriptor {
                    replicate: 0,
                    files: vec![],
                    engine: EngineSpec::Builtin(EngineConfig::default()),
                },
            }
            .encode(),
        )
        .unwrap();
        assert!(text.starts_with("JOB 7 {\"replicate\":0,"), "{text}");
    }

    #[test]
    fn malformed_control_frames() {
        for bad in [&b"HELLO"[..], b"JOB", b"JOB 1 {not json", b"RESULT", b"\xff\xfe", b"PING extra"] {
            assert!(ControlMessage::decode(bad).is_err(), "{bad:?}");
        }
    }
}
