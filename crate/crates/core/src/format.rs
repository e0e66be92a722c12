//! CSV and little-endian binary encodings of dominance and distance matrices.
//!
//! Binary layouts:
//!
//! * dominance: `b"DOMP"`, `n: u32`, mode `u8` (0 = le, 1 = lt, 2 = eq), then `n * n` `u32`
//! * distance: `b"DIST"`, `n: u32`, kind `u8` (0 = minplus, 1 = maxplus, 2 = linf), then `n * n` `i64`
//!
//! Entries are row-major. The dominance header does not carry `d`, so the
//! reader takes it from the caller.

use std::io::{self, Read, Write};

use crate::distance_product::{DistanceMatrix, ProductKind};
use crate::dominance::{DominanceMatrix, Mode};
use crate::error::{Error, Result};

pub const DOMINANCE_MAGIC: &[u8; 4] = b"DOMP";
pub const DISTANCE_MAGIC: &[u8; 4] = b"DIST";

fn mode_tag(mode: Mode) -> u8 {
    match mode {
        Mode::Le => 0,
        Mode::Lt => 1,
        Mode::Eq => 2,
    }
}

fn kind_tag(kind: ProductKind) -> u8 {
    match kind {
        ProductKind::MinPlus => 0,
        ProductKind::MaxPlus => 1,
        ProductKind::Linf => 2,
    }
}

fn write_csv<T: ToString>(n: usize, data: &[T], mut w: impl Write) -> io::Result<()> {
    for row in data.chunks(n.max(1)) {
        let line: Vec<String> = row.iter().map(T::to_string).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn write_dominance_csv<W: Write>(m: &DominanceMatrix, w: W) -> io::Result<()> {
    write_csv(m.len(), m.as_slice(), w)
}

pub fn write_distance_csv<W: Write>(m: &DistanceMatrix, w: W) -> io::Result<()> {
    write_csv(m.len(), m.as_slice(), w)
}

fn header(magic: &[u8; 4], n: usize, tag: u8) -> io::Result<Vec<u8>> {
    let n = u32::try_from(n).map_err(|_| {
        io::Error::new(
            io::ErrorKind::InvalidInput,
            "matrix too large for u32 header",
        )
    })?;
    let mut out = magic.to_vec();
    out.extend_from_slice(&n.to_le_bytes());
    out.push(tag);
    Ok(out)
}

pub fn write_dominance_binary<W: Write>(m: &DominanceMatrix, mut w: W) -> io::Result<()> {
    w.write_all(&header(DOMINANCE_MAGIC, m.len(), mode_tag(m.mode()))?)?;
    let body: Vec<u8> = m.as_slice().iter().flat_map(|v| v.to_le_bytes()).collect();
    w.write_all(&body)
}

pub fn write_distance_binary<W: Write>(m: &DistanceMatrix, mut w: W) -> io::Result<()> {
    w.write_all(&header(DISTANCE_MAGIC, m.len(), kind_tag(m.kind()))?)?;
    let body: Vec<u8> = m.as_slice().iter().flat_map(|v| v.to_le_bytes()).collect();
    w.write_all(&body)
}

fn read_all(mut r: impl Read) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf).map_err(|e| Error::Parse {
        line: 0,
        message: e.to_string(),
    })?;
    Ok(buf)
}

fn bad(message: impl Into<String>) -> Error {
    Error::Parse {
        line: 0,
        message: message.into(),
    }
}

/// Splits a binary file into `(n, tag, body)` after checking magic and length.
fn split<'a>(buf: &'a [u8], magic: &[u8; 4], width: usize) -> Result<(usize, u8, &'a [u8])> {
    if buf.len() < 9 || &buf[..4] != magic {
        return Err(bad(format!(
            "missing {} header",
            String::from_utf8_lossy(magic)
        )));
    }
    let n = u32::from_le_bytes(buf[4..8].try_into().unwrap()) as usize;
    let body = &buf[9..];
    let expected = n.checked_mul(n).and_then(|c| c.checked_mul(width));
    if expected != Some(body.len()) {
        return Err(bad(format!(
            "expected {n}x{n} entries of {width} bytes, found {} bytes",
            body.len()
        )));
    }
    Ok((n, buf[8], body))
}

pub fn read_dominance_binary<R: Read>(r: R, d: usize) -> Result<DominanceMatrix> {
    let buf = read_all(r)?;
    let (n, tag, body) = split(&buf, DOMINANCE_MAGIC, 4)?;
    let mode = match tag {
        0 => Mode::Le,
        1 => Mode::Lt,
        2 => Mode::Eq,
        t => return Err(bad(format!("unknown mode tag {t}"))),
    };
    let counts = body
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    DominanceMatrix::from_counts(n, d, mode, counts)
}

pub fn read_distance_binary<R: Read>(r: R) -> Result<DistanceMatrix> {
    let buf = read_all(r)?;
    let (n, tag, body) = split(&buf, DISTANCE_MAGIC, 8)?;
    let kind = match tag {
        0 => ProductKind::MinPlus,
        1 => ProductKind::MaxPlus,
        2 => ProductKind::Linf,
        t => return Err(bad(format!("unknown kind tag {t}"))),
    };
    let data = body
        .chunks_exact(8)
        .map(|c| i64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    DistanceMatrix::new(n, kind, data)
}
