//! JSON-lines reading and writing.
//!
//! Output files may start with provenance lines prefixed with `#`; every
//! reader here skips them, along with blank lines.

use std::io::{BufRead, Write};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::{Error, Result};

/// Returns true for lines that readers must ignore.
pub fn is_comment(line: &str) -> bool {
    let t = line.trim_start();
    t.is_empty() || t.starts_with('#')
}

/// Write a `#`-prefixed header line holding `header` as compact JSON.
pub fn write_header<W: Write, H: Serialize + ?Sized>(mut w: W, header: &H) -> Result<()> {
    let json = serde_json::to_string(header).map_err(|source| Error::Json { line: 0, source })?;
    writeln!(w, "#{json}")?;
    Ok(())
}

pub fn write_jsonl<'a, W, T, I>(mut w: W, items: I) -> Result<()>
where
    W: Write,
    T: Serialize + 'a,
    I: IntoIterator<Item = &'a T>,
{
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(|source| Error::Json { line: 0, source })?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead, T: DeserializeOwned>(r: R) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        if is_comment(&line) {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|source| Error::Json {
            line: idx + 1,
            source,
        })?;
        out.push(item);
    }
    Ok(out)
}

/// Read the whole stream as a single JSON document after dropping `#` lines.
pub fn read_json<R: BufRead, T: DeserializeOwned>(r: R) -> Result<T> {
    let mut body = String::new();
    for line in r.lines() {
        let line = line?;
        if line.trim_start().starts_with('#') {
            continue;
        }
        body.push_str(&line);
        body.push('\n');
    }
    serde_json::from_str(&body).map_err(|source| Error::Json { line: 0, source })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_lines_are_skipped() {
        let mut buf = Vec::new();
        write_header(&mut buf, &serde_json::json!({"seed": 1})).unwrap();
        write_jsonl(&mut buf, &[1u32, 2, 3]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("#{\"seed\":1}\n"));
        let back: Vec<u32> = read_jsonl(&buf[..]).unwrap();
        assert_eq!(back, vec![1, 2, 3]);
    }

    #[test]
    fn bad_line_reports_number() {
        let data = b"#h\n1\nnope\n";
        let err = read_jsonl::<_, u32>(&data[..]).unwrap_err();
        assert!(matches!(err, Error::Json { line: 3, .. }));
    }
}
