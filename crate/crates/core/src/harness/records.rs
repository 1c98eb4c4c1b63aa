//! Newline-delimited JSON record files.
//!
//! Each line is one [`EstimateRecord`] carrying a `schema` field. Readers
//! skip lines that do not parse (for example a line cut short by an
//! interrupted run) and report how many were skipped; a line that parses but
//! declares another schema version is an error.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::Diagnostics;
use crate::scenarios::Family;

pub const SCHEMA_VERSION: u32 = 1;

/// Outputs of one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub schema: u32,
    pub run_id: u64,
    pub scenario_id: String,
    pub family: Family,
    pub seed: u64,
    pub d: usize,
    pub n_per_class: usize,
    pub true_ber: f64,
    pub estimates: BTreeMap<String, f64>,
    #[serde(default)]
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReadOutcome {
    pub records: Vec<EstimateRecord>,
    /// Lines that could not be parsed.
    pub skipped: usize,
}

fn write_lines<W: Write>(out: &mut W, records: &[EstimateRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut *out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Writes `records` to `path`, replacing any existing file.
pub fn write_records(records: &[EstimateRecord], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_lines(&mut out, records)?;
    out.flush()?;
    Ok(())
}

/// Appends `records` to `path`, creating it if needed. A trailing partial
/// line left by an interrupted writer is removed first.
pub fn append_records(records: &[EstimateRecord], path: &Path) -> Result<()> {
    drop_partial_tail(path)?;
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut out = BufWriter::new(file);
    write_lines(&mut out, records)?;
    out.flush()?;
    Ok(())
}

/// Truncates `path` after its last newline.
pub(crate) fn drop_partial_tail(path: &Path) -> Result<()> {
    let mut file = match OpenOptions::new().read(true).write(true).open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(()),
        Err(e) => return Err(e.into()),
    };
    let len = file.metadata()?.len();
    if len == 0 {
        return Ok(());
    }
    // scan backwards in blocks for the last newline
    let mut end = len;
    let mut buf = vec![0u8; 4096];
    loop {
        let start = end.saturating_sub(buf.len() as u64);
        let chunk = &mut buf[..(end - start) as usize];
        file.seek(SeekFrom::Start(start))?;
        file.read_exact(chunk)?;
        if let Some(pos) = chunk.iter().rposition(|&b| b == b'\n') {
            let keep = start + pos as u64 + 1;
            if keep != len {
                file.set_len(keep)?;
            }
            return Ok(());
        }
        if start == 0 {
            file.set_len(0)?;
            return Ok(());
        }
        end = start;
    }
}

#[derive(Deserialize)]
struct SchemaProbe {
    schema: Option<u32>,
}

/// Reads every parseable record from `path`.
pub fn read_records(path: &Path) -> Result<ReadOutcome> {
    let reader = BufReader::new(File::open(path)?);
    let mut outcome = ReadOutcome::default();
    for line in reader.split(b'\n') {
        let line = line?;
        if line.iter().all(|b| b.is_ascii_whitespace()) {
            continue;
        }
        match serde_json::from_slice::<SchemaProbe>(&line) {
            Ok(SchemaProbe { schema: Some(v) }) if v != SCHEMA_VERSION => {
                return Err(Error::SchemaVersion {
                    expected: SCHEMA_VERSION,
                    found: v,
                });
            }
            Ok(_) => {}
            Err(_) => {
                outcome.skipped += 1;
                continue;
            }
        }
        match serde_json::from_slice::<EstimateRecord>(&line) {
            Ok(r) => outcome.records.push(r),
            Err(_) => outcome.skipped += 1,
        }
    }
    Ok(outcome)
}
