use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;

use abf_core::filter::CountingFilter;
use tempfile::NamedTempFile;

use crate::commands::CliError;

pub fn load(path: &Path) -> Result<CountingFilter, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(CountingFilter::from_bytes(&bytes)?)
}

/// Replace `path` atomically: write a sibling temp file, then rename.
pub fn save(path: &Path, filter: &CountingFilter) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(&filter.to_bytes()).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Standard-input lines as raw bytes, without the trailing `\n` or `\r\n`.
pub fn read_lines(input: impl BufRead) -> io::Result<Vec<Vec<u8>>> {
    input
        .split(b'\n')
        .map(|line| {
            line.map(|mut l| {
                if l.last() == Some(&b'\r') {
                    l.pop();
                }
                l
            })
        })
        .collect()
}
