//! Text trace files: one `tick instance pid vaddr_hex weight` record per
//! line, `#` starts a comment. Files whose name ends in `.gz` are gzipped.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use crate::error::{Error, Result};

use super::TraceRecord;

fn is_gz(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "gz")
}

fn parse_line(line: &str) -> std::result::Result<Option<TraceRecord>, String> {
    let body = line.split('#').next().unwrap_or("").trim();
    if body.is_empty() {
        return Ok(None);
    }
    let fields: Vec<&str> = body.split_whitespace().collect();
    if fields.len() != 5 {
        return Err(format!("expected 5 fields, found {}", fields.len()));
    }
    let num = |i: usize, name: &str| {
        fields[i]
            .parse::<u64>()
            .map_err(|e| format!("bad {name} `{}`: {e}", fields[i]))
    };
    let hex = fields[3]
        .strip_prefix("0x")
        .or_else(|| fields[3].strip_prefix("0X"))
        .unwrap_or(fields[3]);
    let vaddr =
        u64::from_str_radix(hex, 16).map_err(|e| format!("bad vaddr `{}`: {e}", fields[3]))?;
    let instance_id = fields[1]
        .parse::<u16>()
        .map_err(|e| format!("bad instance `{}`: {e}", fields[1]))?;
    let pid = fields[2]
        .parse::<u32>()
        .map_err(|e| format!("bad pid `{}`: {e}", fields[2]))?;
    Ok(Some(TraceRecord {
        tick: num(0, "tick")?,
        instance_id,
        pid,
        vaddr,
        weight_instructions: num(4, "weight")?,
    }))
}

/// Parse trace text from `reader`; `path` only labels errors.
pub fn parse_trace<R: Read>(reader: R, path: &Path) -> Result<Vec<TraceRecord>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        match parse_line(&line) {
            Ok(Some(r)) => out.push(r),
            Ok(None) => {}
            Err(msg) => {
                return Err(Error::TraceParse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    msg,
                })
            }
        }
    }
    Ok(out)
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRecord>> {
    let f = File::open(path)?;
    if is_gz(path) {
        parse_trace(GzDecoder::new(f), path)
    } else {
        parse_trace(f, path)
    }
}

pub fn write_trace_to<W: Write>(mut w: W, records: &[TraceRecord]) -> Result<()> {
    writeln!(w, "# tick instance pid vaddr weight")?;
    for r in records {
        writeln!(
            w,
            "{} {} {} {:#x} {}",
            r.tick, r.instance_id, r.pid, r.vaddr, r.weight_instructions
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace(path: &Path, records: &[TraceRecord]) -> Result<()> {
    let f = BufWriter::new(File::create(path)?);
    if is_gz(path) {
        let mut gz = GzEncoder::new(f, Compression::default());
        write_trace_to(&mut gz, records)?;
        gz.finish()?.flush()?;
        Ok(())
    } else {
        write_trace_to(f, records)
    }
}
