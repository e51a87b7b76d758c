//! Append-only record log.
//!
//! Each line is `<crc32 as 8 hex digits> <record as JSON>\n`. A record is
//! acknowledged once its line has been written (and synced, if configured).
//! On open, a damaged final line is a write that was cut short and is
//! truncated away; damage anywhere else means the file is corrupt.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use super::state::Record;
use super::StoreError;

pub struct Log {
    path: PathBuf,
    file: File,
    sync: bool,
}

fn encode(record: &Record) -> Vec<u8> {
    let json = serde_json::to_vec(record).expect("records always serialize");
    let mut line = format!("{:08x} ", crc32fast::hash(&json)).into_bytes();
    line.extend_from_slice(&json);
    line.push(b'\n');
    line
}

fn decode(line: &[u8]) -> Option<Record> {
    let (crc, json) = (line.get(..8)?, line.get(9..)?);
    if line.get(8) != Some(&b' ') {
        return None;
    }
    let crc = u32::from_str_radix(std::str::from_utf8(crc).ok()?, 16).ok()?;
    if crc32fast::hash(json) != crc {
        return None;
    }
    serde_json::from_slice(json).ok()
}

impl Log {
    /// Opens (creating if needed) the log and returns it with every intact
    /// record in order.
    pub fn open(path: &Path, sync: bool) -> Result<(Log, Vec<Record>), StoreError> {
        let mut file = OpenOptions::new().read(true).append(true).create(true).open(path)?;
        let mut records = Vec::new();
        let mut good_len = 0u64;
        let mut damaged_at = None;
        {
            let mut reader = BufReader::new(&mut file);
            let mut buf = Vec::new();
            let mut lineno = 0usize;
            loop {
                buf.clear();
                let n = reader.read_until(b'\n', &mut buf)?;
                if n == 0 {
                    break;
                }
                lineno += 1;
                if let Some(at) = damaged_at {
                    return Err(StoreError::Corrupt(format!(
                        "{}: damaged record at line {at} followed by more data",
                        path.display()
                    )));
                }
                let complete = buf.last() == Some(&b'\n');
                match decode(&buf[..buf.len() - usize::from(complete)]) {
                    Some(record) if complete => {
                        records.push(record);
                        good_len += n as u64;
                    }
                    _ => damaged_at = Some(lineno),
                }
            }
        }
        if let Some(line) = damaged_at {
            log::warn!("{}: dropping torn record at line {line}", path.display());
            file.set_len(good_len)?;
            file.sync_all()?;
        }
        file.seek(SeekFrom::End(0))?;
        Ok((Log { path: path.to_path_buf(), file, sync }, records))
    }

    pub fn append(&mut self, records: &[Record]) -> io::Result<()> {
        let mut buf = Vec::new();
        for record in records {
            buf.extend_from_slice(&encode(record));
        }
        self.file.write_all(&buf)?;
        self.file.flush()?;
        if self.sync {
            self.file.sync_data()?;
        }
        Ok(())
    }

    pub fn sync(&mut self) -> io::Result<()> {
        self.file.sync_all()
    }

    /// Atomically replaces the log with `records`.
    pub fn rewrite(&mut self, records: &[Record]) -> io::Result<()> {
        let tmp = self.path.with_extension("log.compact");
        {
            let mut out = File::create(&tmp)?;
            for record in records {
                out.write_all(&encode(record))?;
            }
            out.sync_all()?;
        }
        fs::rename(&tmp, &self.path)?;
        if let Some(dir) = self.path.parent() {
            File::open(dir)?.sync_all()?;
        }
        self.file = OpenOptions::new().append(true).open(&self.path)?;
        Ok(())
    }
}
