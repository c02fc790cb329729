//! FASTA reading and writing that keeps the per-record body line width, so a
//! sub-sampled or scrambled record can be written back in the layout it came in.

use std::io::{self, BufRead, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FastaError {
    #[error("input contains no FASTA records")]
    EmptyInput,
    #[error("line {line}: sequence text before the first '>' header")]
    MalformedHeader { line: usize },
    #[error("line {line}: illegal residue character {ch:?}")]
    IllegalCharacter { line: usize, ch: char },
    #[error("record {header:?} has no residues")]
    EmptyBody { header: String },
    #[error("line {line}: input is not valid UTF-8")]
    InvalidUtf8 { line: usize },
    #[error("invalid record: {0}")]
    InvalidRecord(&'static str),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// One FASTA entry. Residues are upper-case over `ACGTN`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceRecord {
    header: String,
    residues: Vec<u8>,
    line_width: usize,
}

fn normalize_residue(b: u8) -> Option<u8> {
    match b {
        b'A' | b'C' | b'G' | b'T' | b'N' => Some(b),
        b'a' | b'c' | b'g' | b't' | b'n' => Some(b.to_ascii_uppercase()),
        _ => None,
    }
}

impl SequenceRecord {
    /// Builds a record, upper-casing residues. Fails if any invariant is broken.
    pub fn new(
        header: impl Into<String>,
        residues: impl AsRef<[u8]>,
        line_width: usize,
    ) -> Result<Self, FastaError> {
        let header = header.into();
        if header.contains('\n') || header.contains('\r') {
            return Err(FastaError::InvalidRecord("header contains a line break"));
        }
        if line_width == 0 {
            return Err(FastaError::InvalidRecord("line width must be at least 1"));
        }
        let raw = residues.as_ref();
        if raw.is_empty() {
            return Err(FastaError::EmptyBody { header });
        }
        let mut out = Vec::with_capacity(raw.len());
        for &b in raw {
            match normalize_residue(b) {
                Some(r) => out.push(r),
                None => {
                    return Err(FastaError::IllegalCharacter {
                        line: 0,
                        ch: b as char,
                    })
                }
            }
        }
        Ok(Self {
            header,
            residues: out,
            line_width,
        })
    }

    pub fn header(&self) -> &str {
        &self.header
    }

    pub fn residues(&self) -> &[u8] {
        &self.residues
    }

    pub fn residues_str(&self) -> &str {
        // residues are ASCII by construction
        std::str::from_utf8(&self.residues).expect("ASCII residues")
    }

    pub fn line_width(&self) -> usize {
        self.line_width
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }

    /// Same header and line width, different residues. The new residues must
    /// already be valid (they come from a slice or permutation of a valid record).
    pub(crate) fn with_residues(&self, residues: Vec<u8>) -> Self {
        debug_assert!(!residues.is_empty());
        Self {
            header: self.header.clone(),
            residues,
            line_width: self.line_width,
        }
    }

    pub(crate) fn with_header_and_residues(&self, header: String, residues: Vec<u8>) -> Self {
        Self {
            header,
            residues,
            line_width: self.line_width,
        }
    }
}

struct Pending {
    header: String,
    residues: Vec<u8>,
    line_width: Option<usize>,
}

impl Pending {
    fn finish(self) -> Result<SequenceRecord, FastaError> {
        if self.residues.is_empty() {
            return Err(FastaError::EmptyBody {
                header: self.header,
            });
        }
        Ok(SequenceRecord {
            header: self.header,
            residues: self.residues,
            line_width: self.line_width.unwrap_or(1),
        })
    }
}

/// Reads every record from `reader`. Accepts lower-case residues and `\r\n`
/// line endings; blank lines are ignored.
pub fn parse_fasta<R: BufRead>(mut reader: R) -> Result<Vec<SequenceRecord>, FastaError> {
    let mut records = Vec::new();
    let mut current: Option<Pending> = None;
    let mut buf = Vec::new();
    let mut line_no = 0usize;

    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let mut line: &[u8] = &buf;
        if let Some(rest) = line.strip_suffix(b"\n") {
            line = rest;
        }
        if let Some(rest) = line.strip_suffix(b"\r") {
            line = rest;
        }

        if let Some(header) = line.strip_prefix(b">") {
            let header = std::str::from_utf8(header)
                .map_err(|_| FastaError::InvalidUtf8 { line: line_no })?;
            if let Some(done) = current.take() {
                records.push(done.finish()?);
            }
            current = Some(Pending {
                header: header.to_string(),
                residues: Vec::new(),
                line_width: None,
            });
            continue;
        }

        if line.iter().all(|b| b.is_ascii_whitespace()) {
            continue;
        }

        let Some(rec) = current.as_mut() else {
            return Err(FastaError::MalformedHeader { line: line_no });
        };
        if rec.line_width.is_none() {
            rec.line_width = Some(line.len());
        }
        rec.residues.reserve(line.len());
        for &b in line {
            match normalize_residue(b) {
                Some(r) => rec.residues.push(r),
                None => {
                    let ch = std::str::from_utf8(line)
                        .ok()
                        .and_then(|s| s.chars().find(|c| !"ACGTNacgtn".contains(*c)))
                        .unwrap_or(b as char);
                    return Err(FastaError::IllegalCharacter { line: line_no, ch });
                }
            }
        }
    }

    if let Some(done) = current.take() {
        records.push(done.finish()?);
    }
    if records.is_empty() {
        return Err(FastaError::EmptyInput);
    }
    Ok(records)
}

pub fn parse_fasta_str(text: &str) -> Result<Vec<SequenceRecord>, FastaError> {
    parse_fasta(text.as_bytes())
}

pub fn read_fasta_file(path: &std::path::Path) -> Result<Vec<SequenceRecord>, FastaError> {
    let f = std::fs::File::open(path)?;
    parse_fasta(io::BufReader::new(f))
}

/// Writes records re-wrapped at each record's own line width, `\n` endings.
pub fn write_fasta<W: Write>(mut w: W, records: &[SequenceRecord]) -> io::Result<()> {
    for rec in records {
        w.write_all(b">")?;
        w.write_all(rec.header.as_bytes())?;
        w.write_all(b"\n")?;
        for chunk in rec.residues.chunks(rec.line_width) {
            w.write_all(chunk)?;
            w.write_all(b"\n")?;
        }
    }
    Ok(())
}

pub fn to_fasta_bytes(records: &[SequenceRecord]) -> Vec<u8> {
    let mut out = Vec::with_capacity(records.iter().map(|r| r.len() + r.header.len() + 8).sum());
    write_fasta(&mut out, records).expect("writing to a Vec cannot fail");
    out
}

pub fn write_fasta_file(path: &std::path::Path, records: &[SequenceRecord]) -> io::Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = io::BufWriter::new(f);
    write_fasta(&mut w, records)?;
    w.flush()
}
