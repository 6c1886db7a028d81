//! Flat serialisations of [`SampledField`].
//!
//! Binary layout (little endian):
//!
//! ```text
//! magic  b"BNF1"
//! u32    dimension n
//! u32    samples per axis N
//! u8     0 = real, 1 = complex
//! f64..  N^n samples in row-major order (re, or re then im)
//! ```
//!
//! CSV layout: a `dim,samples_per_axis,kind` header row, one metadata row,
//! then one row per sample (`re` or `re,im`).

use std::io::{Read, Write};

use num_complex::Complex64;

use super::{GridSpec, SampledField};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"BNF1";

fn io_err(e: std::io::Error) -> Error {
    Error::Format(e.to_string())
}

pub fn write_binary(field: &SampledField, mut out: impl Write) -> Result<()> {
    let grid = field.grid();
    out.write_all(MAGIC).map_err(io_err)?;
    out.write_all(&(grid.dim() as u32).to_le_bytes())
        .map_err(io_err)?;
    out.write_all(&(grid.samples_per_axis() as u32).to_le_bytes())
        .map_err(io_err)?;
    out.write_all(&[u8::from(!field.is_real())])
        .map_err(io_err)?;
    for v in field.values() {
        out.write_all(&v.re.to_le_bytes()).map_err(io_err)?;
        if !field.is_real() {
            out.write_all(&v.im.to_le_bytes()).map_err(io_err)?;
        }
    }
    Ok(())
}

pub fn read_binary(mut input: impl Read) -> Result<SampledField> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic).map_err(io_err)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let mut word = [0u8; 4];
    input.read_exact(&mut word).map_err(io_err)?;
    let dim = u32::from_le_bytes(word) as usize;
    input.read_exact(&mut word).map_err(io_err)?;
    let n = u32::from_le_bytes(word) as usize;
    let mut flag = [0u8; 1];
    input.read_exact(&mut flag).map_err(io_err)?;
    let complex = match flag[0] {
        0 => false,
        1 => true,
        other => return Err(Error::Format(format!("bad kind flag {other}"))),
    };
    let grid = GridSpec::new(dim, n)?;
    let mut values = Vec::with_capacity(grid.len());
    let mut buf = [0u8; 8];
    for _ in 0..grid.len() {
        input.read_exact(&mut buf).map_err(io_err)?;
        let re = f64::from_le_bytes(buf);
        let im = if complex {
            input.read_exact(&mut buf).map_err(io_err)?;
            f64::from_le_bytes(buf)
        } else {
            0.0
        };
        values.push(Complex64::new(re, im));
    }
    let field = SampledField::new(grid, values)?;
    Ok(field.with_real_flag(!complex))
}

pub fn write_csv(field: &SampledField, out: impl Write) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    let fmt = |e: csv::Error| Error::Format(e.to_string());
    let grid = field.grid();
    w.write_record(["dim", "samples_per_axis", "kind"])
        .map_err(fmt)?;
    let kind = if field.is_real() { "real" } else { "complex" };
    w.write_record([
        grid.dim().to_string(),
        grid.samples_per_axis().to_string(),
        kind.to_string(),
    ])
    .map_err(fmt)?;
    for v in field.values() {
        if field.is_real() {
            w.write_record([format!("{:e}", v.re)]).map_err(fmt)?;
        } else {
            w.write_record([format!("{:e}", v.re), format!("{:e}", v.im)])
                .map_err(fmt)?;
        }
    }
    w.flush().map_err(io_err)
}

pub fn read_csv(input: impl Read) -> Result<SampledField> {
    let mut r = csv::ReaderBuilder::new()
        .flexible(true)
        .has_headers(true)
        .from_reader(input);
    let fmt = |e: csv::Error| Error::Format(e.to_string());
    let mut records = r.records();
    let meta = records
        .next()
        .ok_or_else(|| Error::Format("missing metadata row".into()))?
        .map_err(fmt)?;
    let parse_usize = |s: Option<&str>| -> Result<usize> {
        s.and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Format("bad metadata row".into()))
    };
    let dim = parse_usize(meta.get(0))?;
    let n = parse_usize(meta.get(1))?;
    let complex = match meta.get(2).map(str::trim) {
        Some("real") => false,
        Some("complex") => true,
        _ => return Err(Error::Format("kind must be real or complex".into())),
    };
    let grid = GridSpec::new(dim, n)?;
    let parse_f64 = |s: Option<&str>| -> Result<f64> {
        s.and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Format("bad sample row".into()))
    };
    let mut values = Vec::with_capacity(grid.len());
    for rec in records {
        let rec = rec.map_err(fmt)?;
        let re = parse_f64(rec.get(0))?;
        let im = if complex { parse_f64(rec.get(1))? } else { 0.0 };
        values.push(Complex64::new(re, im));
    }
    let field = SampledField::new(grid, values)?;
    Ok(field.with_real_flag(!complex))
}
