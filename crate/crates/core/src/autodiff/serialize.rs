//! Binary wire format for named parameter tensors.
//!
//! Layout, all little-endian:
//!   u32 entry count, then per entry:
//!   u16 name length, name bytes (utf-8), u64 rows, u64 cols,
//!   rows*cols f64 values in row-major order.
//!
//! The format is exact: f64 bits round-trip unchanged, so serialized model
//! updates aggregate identically to in-memory ones.

use crate::error::{Error, Result};
use crate::mat::Mat;

pub fn write_params(entries: &[(String, &Mat)]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&(entries.len() as u32).to_le_bytes());
    for (name, mat) in entries {
        let name_bytes = name.as_bytes();
        assert!(name_bytes.len() <= u16::MAX as usize, "parameter name too long");
        out.extend_from_slice(&(name_bytes.len() as u16).to_le_bytes());
        out.extend_from_slice(name_bytes);
        out.extend_from_slice(&(mat.rows() as u64).to_le_bytes());
        out.extend_from_slice(&(mat.cols() as u64).to_le_bytes());
        mat.write_le(&mut out);
    }
    out
}

pub fn read_params(bytes: &[u8]) -> Result<Vec<(String, Mat)>> {
    let mut cur = Cursor { bytes, pos: 0 };
    let count = cur.u32()? as usize;
    let mut entries = Vec::with_capacity(count);
    for _ in 0..count {
        let name_len = cur.u16()? as usize;
        let name_bytes = cur.take(name_len)?;
        let name = std::str::from_utf8(name_bytes)
            .map_err(|_| Error::Checkpoint("parameter name is not utf-8".into()))?
            .to_string();
        let rows = cur.u64()? as usize;
        let cols = cur.u64()? as usize;
        let n = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::Checkpoint("parameter shape overflows".into()))?;
        let data = cur.take(n * 8)?;
        let mat = Mat::read_le(rows, cols, data)
            .ok_or_else(|| Error::Checkpoint("truncated parameter payload".into()))?;
        entries.push((name, mat));
    }
    if cur.pos != bytes.len() {
        return Err(Error::Checkpoint(format!(
            "{} trailing bytes after parameter payload",
            bytes.len() - cur.pos
        )));
    }
    Ok(entries)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Checkpoint("parameter payload truncated".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16> {
        let b = self.take(2)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn u64(&mut self) -> Result<u64> {
        let b = self.take(8)?;
        let mut a = [0u8; 8];
        a.copy_from_slice(b);
        Ok(u64::from_le_bytes(a))
    }
}
