//! Versioned JSON Lines containers.
//!
//! Every file starts with a header line `{"format": .., "version": .., "count": ..}`
//! followed by one record per line.

use std::io::{BufRead, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CoosError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub format: String,
    pub version: u32,
    pub count: usize,
}

pub fn write<W: Write, T: Serialize>(
    mut out: W,
    format: &str,
    version: u32,
    records: &[T],
) -> Result<()> {
    let header = Header {
        format: format.to_string(),
        version,
        count: records.len(),
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for record in records {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read<R: BufRead, T: DeserializeOwned>(
    input: R,
    format: &str,
    max_version: u32,
) -> Result<Vec<T>> {
    let mut lines = input.lines();
    let header_line = lines
        .next()
        .ok_or_else(|| CoosError::Format("missing header line".into()))??;
    let header: Header = serde_json::from_str(&header_line)?;
    if header.format != format {
        return Err(CoosError::Format(format!(
            "expected format {format:?}, found {:?}",
            header.format
        )));
    }
    if header.version == 0 || header.version > max_version {
        return Err(CoosError::Format(format!(
            "unsupported {format} version {}",
            header.version
        )));
    }
    let mut records = Vec::with_capacity(header.count);
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line)?);
    }
    if records.len() != header.count {
        return Err(CoosError::Format(format!(
            "header declares {} records, found {}",
            header.count,
            records.len()
        )));
    }
    Ok(records)
}

pub fn write_file<T: Serialize>(
    path: &std::path::Path,
    format: &str,
    version: u32,
    records: &[T],
) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write(std::io::BufWriter::new(file), format, version, records)
}

pub fn read_file<T: DeserializeOwned>(
    path: &std::path::Path,
    format: &str,
    max_version: u32,
) -> Result<Vec<T>> {
    let file = std::fs::File::open(path)?;
    read(std::io::BufReader::new(file), format, max_version)
}
