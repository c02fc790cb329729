//! Motif TSV reading and writing.
//!
//! ```text
//! #rank	length	consensus	target_containing	target_total	bg_containing	bg_total	lnP
//! ```
//! Merged output appends `support` and `workers` (comma-separated indices).

use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::{format_ln_p, Motif};
use crate::reducer::MergedMotif;

pub const MOTIF_COLUMNS: [&str; 8] = [
    "rank",
    "length",
    "consensus",
    "target_containing",
    "target_total",
    "bg_containing",
    "bg_total",
    "lnP",
];

#[derive(Debug, Error)]
pub enum TsvError {
    #[error("missing header line")]
    MissingHeader,
    #[error("missing required column {0:?}")]
    MissingColumn(String),
    #[error("line {line}: bad value {value:?} in column {column:?}")]
    BadValue {
        line: usize,
        column: String,
        value: String,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn write_motif_fields<W: Write>(w: &mut W, rank: usize, m: &Motif) -> io::Result<()> {
    write!(
        w,
        "{rank}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
        m.length,
        m.consensus,
        m.target_containing,
        m.target_total,
        m.bg_containing,
        m.bg_total,
        format_ln_p(m.ln_p)
    )
}

/// Writes motifs in the given order, ranks numbered from 1.
pub fn write_motif_tsv<W: Write>(mut w: W, motifs: &[Motif]) -> io::Result<()> {
    writeln!(w, "#{}", MOTIF_COLUMNS.join("\t"))?;
    for (i, m) in motifs.iter().enumerate() {
        write_motif_fields(&mut w, i + 1, m)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn motif_tsv_string(motifs: &[Motif]) -> String {
    let mut out = Vec::new();
    write_motif_tsv(&mut out, motifs).expect("in-memory write");
    String::from_utf8(out).expect("ASCII output")
}

pub fn write_merged_tsv<W: Write>(mut w: W, merged: &[MergedMotif]) -> io::Result<()> {
    writeln!(w, "#{}\tsupport\tworkers", MOTIF_COLUMNS.join("\t"))?;
    for (i, m) in merged.iter().enumerate() {
        write_motif_fields(&mut w, i + 1, &m.motif)?;
        let workers: Vec<String> = m.workers.iter().map(|w| w.to_string()).collect();
        writeln!(w, "\t{}\t{}", m.support, workers.join(","))?;
    }
    Ok(())
}

fn parse_field<T: std::str::FromStr>(
    fields: &[&str],
    idx: usize,
    column: &str,
    line: usize,
) -> Result<T, TsvError> {
    let raw = fields.get(idx).copied().unwrap_or("");
    raw.parse().map_err(|_| TsvError::BadValue {
        line,
        column: column.to_string(),
        value: raw.to_string(),
    })
}

/// Reads a motif TSV by column name; extra columns are ignored.
pub fn read_motif_tsv<R: BufRead>(reader: R) -> Result<Vec<Motif>, TsvError> {
    let mut lines = reader.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, line)) => {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                break line;
            }
            None => return Err(TsvError::MissingHeader),
        }
    };
    let Some(header) = header.strip_prefix('#') else {
        return Err(TsvError::MissingHeader);
    };
    let names: Vec<&str> = header.trim_end_matches('\r').split('\t').collect();
    let mut idx = [0usize; 8];
    for (slot, col) in idx.iter_mut().zip(MOTIF_COLUMNS) {
        *slot = names
            .iter()
            .position(|n| *n == col)
            .ok_or_else(|| TsvError::MissingColumn(col.to_string()))?;
    }

    let mut motifs = Vec::new();
    for (i, line) in lines {
        let line = line?;
        let line_no = i + 1;
        let line = line.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let _rank: usize = parse_field(&fields, idx[0], "rank", line_no)?;
        let length: usize = parse_field(&fields, idx[1], "length", line_no)?;
        let consensus: String = parse_field(&fields, idx[2], "consensus", line_no)?;
        if consensus.len() != length || !consensus.bytes().all(|b| b"ACGT".contains(&b)) {
            return Err(TsvError::BadValue {
                line: line_no,
                column: "consensus".into(),
                value: consensus,
            });
        }
        motifs.push(Motif {
            length,
            consensus,
            target_containing: parse_field(&fields, idx[3], "target_containing", line_no)?,
            target_total: parse_field(&fields, idx[4], "target_total", line_no)?,
            bg_containing: parse_field(&fields, idx[5], "bg_containing", line_no)?,
            bg_total: parse_field(&fields, idx[6], "bg_total", line_no)?,
            ln_p: parse_field(&fields, idx[7], "lnP", line_no)?,
        });
    }
    Ok(motifs)
}

pub fn read_motif_tsv_file(path: &std::path::Path) -> Result<Vec<Motif>, TsvError> {
    let f = std::fs::File::open(path)?;
    read_motif_tsv(io::BufReader::new(f))
}
