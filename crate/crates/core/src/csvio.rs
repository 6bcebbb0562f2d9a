//! Thin layer over the `csv` crate: fixed headers, line-numbered parse errors,
//! `\n` terminators.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

pub(crate) struct Row {
    source: String,
    line: u64,
    record: csv::StringRecord,
}

impl Row {
    pub fn line(&self) -> u64 {
        self.line
    }

    pub fn raw(&self, idx: usize) -> &str {
        self.record.get(idx).unwrap_or("")
    }

    pub fn parse<F: FromStr>(&self, idx: usize, name: &str) -> Result<F> {
        let raw = self.raw(idx);
        raw.trim()
            .parse()
            .map_err(|_| self.error(format!("invalid {name} `{raw}`")))
    }

    pub fn error(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.source.clone(),
            line: self.line,
            msg: msg.into(),
        }
    }
}

pub(crate) fn read_file(path: &Path, header: &[&str]) -> Result<Vec<Row>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_from(file, &path.display().to_string(), header)
}

pub(crate) fn read_from<R: Read>(reader: R, source: &str, header: &[&str]) -> Result<Vec<Row>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let parse_err = |line: u64, msg: String| Error::Parse {
        path: source.to_string(),
        line,
        msg,
    };
    let found = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?;
    let found: Vec<&str> = found.iter().map(str::trim).collect();
    if found != header {
        return Err(parse_err(
            1,
            format!("expected header `{}`, found `{}`", header.join(","), found.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let record = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        rows.push(Row {
            source: source.to_string(),
            line,
            record,
        });
    }
    Ok(rows)
}

pub(crate) fn write_file<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut buf = Vec::new();
    write_to(&mut buf, header, rows).map_err(|e| Error::io(path, e))?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_to<W: Write, I>(writer: W, header: &[&str], rows: I) -> std::io::Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .flexible(false)
        .from_writer(writer);
    wtr.write_record(header)?;
    for row in rows {
        wtr.write_record(&row)?;
    }
    wtr.flush()
}
