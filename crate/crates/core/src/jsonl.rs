//! JSON-lines reading and writing. Each record is serialized to a full line
//! before it is written, so an interrupted run leaves only whole lines.

use std::io::{BufRead, Write};

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JsonlError {
    #[error("line {line}: {source}")]
    Parse { line: usize, source: serde_json::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Reads one record per non-blank line.
pub fn read<T: DeserializeOwned, R: BufRead>(reader: R) -> Result<Vec<T>, JsonlError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line)
            .map_err(|source| JsonlError::Parse { line: i + 1, source })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_line<T: Serialize, W: Write>(writer: &mut W, record: &T) -> Result<(), JsonlError> {
    let mut buf = serde_json::to_vec(record).map_err(std::io::Error::other)?;
    buf.push(b'\n');
    writer.write_all(&buf)?;
    Ok(())
}

pub fn write_all<'a, T, W, I>(mut writer: W, records: I) -> Result<(), JsonlError>
where
    T: Serialize + 'a,
    W: Write,
    I: IntoIterator<Item = &'a T>,
{
    for r in records {
        write_line(&mut writer, r)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_line_numbers() {
        let mut buf = Vec::new();
        write_all(&mut buf, &[1u32, 2, 3]).unwrap();
        assert_eq!(buf, b"1\n2\n3\n");
        let back: Vec<u32> = read(&buf[..]).unwrap();
        assert_eq!(back, [1, 2, 3]);
        let err = read::<u32, _>(&b"1\n\nx\n"[..]).unwrap_err();
        assert!(matches!(err, JsonlError::Parse { line: 3, .. }));
    }
}
