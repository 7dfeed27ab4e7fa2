//! Append-only JSON-lines journal of every session event. Each append is
//! flushed and fsynced before the request that produced it is acknowledged.

use crate::ServiceError;
use lode_core::editor::EditEvent;
use parking_lot::Mutex;
use serde::{Deserialize, Serialize};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalRecord {
    pub session: String,
    /// Session seed; lets any record rebuild its session without the others.
    pub seed: u64,
    pub event: EditEvent,
}

pub struct Journal {
    path: PathBuf,
    file: Mutex<File>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ServiceError + '_ {
    move |source| ServiceError::Io {
        path: path.to_path_buf(),
        source,
    }
}

impl Journal {
    /// Opens or creates the journal, dropping a torn trailing line left by a
    /// crash mid-append.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self, ServiceError> {
        let path = path.into();
        let file = OpenOptions::new()
            .create(true)
            .read(true)
            .append(true)
            .open(&path)
            .map_err(io_err(&path))?;
        let bytes = std::fs::read(&path).map_err(io_err(&path))?;
        if !bytes.is_empty() && bytes.last() != Some(&b'\n') {
            let keep = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
            log::warn!(
                "{}: dropping {} bytes of torn trailing record",
                path.display(),
                bytes.len() - keep
            );
            file.set_len(keep as u64).map_err(io_err(&path))?;
        }
        Ok(Self {
            path,
            file: Mutex::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Appends records as one write and syncs them to disk.
    pub fn append(&self, records: &[JournalRecord]) -> Result<(), ServiceError> {
        if records.is_empty() {
            return Ok(());
        }
        let mut buf = Vec::new();
        for r in records {
            serde_json::to_writer(&mut buf, r).expect("journal records serialize");
            buf.push(b'\n');
        }
        let mut file = self.file.lock();
        file.write_all(&buf).map_err(io_err(&self.path))?;
        file.sync_data().map_err(io_err(&self.path))
    }

    /// Every complete record currently on disk.
    pub fn read_all(&self) -> Result<Vec<JournalRecord>, ServiceError> {
        let _guard = self.file.lock();
        read_records(&self.path)
    }
}

/// Parses a journal file; an incomplete final line is ignored.
pub fn read_records(path: &Path) -> Result<Vec<JournalRecord>, ServiceError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(io_err(path)(e)),
    };
    let mut reader = BufReader::new(file);
    let mut out = Vec::new();
    let mut line = String::new();
    let mut n = 0;
    loop {
        line.clear();
        let read = reader.read_line(&mut line).map_err(io_err(path))?;
        if read == 0 || !line.ends_with('\n') {
            break;
        }
        n += 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| ServiceError::Corrupt {
            path: path.to_path_buf(),
            line: n,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}
