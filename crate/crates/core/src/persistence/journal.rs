//! Line-delimited JSON journal. The first line identifies the schema; every
//! following line is one committed write (audit entry plus the record as
//! stored). Replaying the lines in order rebuilds the tables exactly.

use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::entity::Entity;
use super::tables::AuditEntry;
use crate::error::{Error, Result};

const SCHEMA: &str = "consortium-journal";
const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    schema: String,
    version: u32,
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct JournalLine {
    pub entry: AuditEntry,
    pub entity: Entity,
}

#[derive(Debug)]
pub(crate) struct Journal {
    file: File,
    path: PathBuf,
    len: u64,
}

impl Journal {
    /// Opens (creating if needed) the journal at `path` and returns it
    /// together with every committed line. A torn final line left by a crash
    /// mid-write is cut off.
    pub fn open(path: &Path) -> Result<(Journal, Vec<JournalLine>)> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(Error::storage)?;
        }
        let mut file = OpenOptions::new()
            .read(true)
            .write(true)
            .create(true)
            .truncate(false)
            .open(path)
            .map_err(|e| Error::Storage(format!("{}: {e}", path.display())))?;
        let mut raw = Vec::new();
        file.read_to_end(&mut raw).map_err(Error::storage)?;

        let mut journal = Journal {
            file,
            path: path.to_owned(),
            len: 0,
        };
        if raw.is_empty() {
            let header = serde_json::to_vec(&Header {
                schema: SCHEMA.into(),
                version: SCHEMA_VERSION,
            })
            .map_err(Error::storage)?;
            journal.write_line(header)?;
            return Ok((journal, Vec::new()));
        }

        let mut lines = Vec::new();
        let mut offset = 0usize;
        let mut first = true;
        while let Some(nl) = raw[offset..].iter().position(|b| *b == b'\n') {
            let line = &raw[offset..offset + nl];
            let line_no = lines.len() + 1;
            if first {
                let header: Header = serde_json::from_slice(line).map_err(|e| {
                    Error::Storage(format!("{}: bad journal header: {e}", path.display()))
                })?;
                if header.schema != SCHEMA || header.version != SCHEMA_VERSION {
                    return Err(Error::Storage(format!(
                        "{}: unsupported journal {} v{}",
                        path.display(),
                        header.schema,
                        header.version
                    )));
                }
                first = false;
            } else {
                let parsed: JournalLine = serde_json::from_slice(line).map_err(|e| {
                    Error::Storage(format!("{}: corrupt entry {line_no}: {e}", path.display()))
                })?;
                if parsed.entry.global_version != line_no as u64 {
                    return Err(Error::Storage(format!(
                        "{}: entry {line_no} carries version {}",
                        path.display(),
                        parsed.entry.global_version
                    )));
                }
                lines.push(parsed);
            }
            offset += nl + 1;
        }

        journal.len = offset as u64;
        if offset < raw.len() {
            log::warn!(
                "{}: dropping {} bytes of incomplete trailing write",
                path.display(),
                raw.len() - offset
            );
            journal.file.set_len(journal.len).map_err(Error::storage)?;
        }
        if first {
            return Err(Error::Storage(format!(
                "{}: missing journal header",
                path.display()
            )));
        }
        Ok((journal, lines))
    }

    pub fn append(&mut self, entry: &AuditEntry, entity: &Entity) -> Result<()> {
        #[derive(Serialize)]
        struct Borrowed<'a> {
            entry: &'a AuditEntry,
            entity: &'a Entity,
        }
        let bytes = serde_json::to_vec(&Borrowed { entry, entity }).map_err(Error::storage)?;
        self.write_line(bytes)
    }

    fn write_line(&mut self, mut bytes: Vec<u8>) -> Result<()> {
        bytes.push(b'\n');
        let result = self
            .file
            .seek(SeekFrom::Start(self.len))
            .and_then(|_| self.file.write_all(&bytes))
            .and_then(|_| self.file.sync_data());
        match result {
            Ok(()) => {
                self.len += bytes.len() as u64;
                Ok(())
            }
            Err(e) => {
                // leave no partial line behind for the next append to extend
                let _ = self.file.set_len(self.len);
                Err(Error::Storage(format!("{}: {e}", self.path.display())))
            }
        }
    }
}
