//! Weight container: `BSAW` magic, u32 matrix count, `count` pairs of u32
//! (rows, cols), then every matrix's entries as row-major f64. All integers
//! and floats are little-endian. Nothing may follow the last matrix.

use std::fs;
use std::path::Path;

use crate::bsa::FeatureMatrix;
use crate::error::{Error, Result};

pub const WEIGHTS_MAGIC: [u8; 4] = *b"BSAW";

fn werr(offset: usize, message: impl Into<String>) -> Error {
    Error::Weights {
        offset: offset as u64,
        message: message.into(),
    }
}

pub fn encode_weights(matrices: &[FeatureMatrix]) -> Vec<u8> {
    let total: usize = matrices.iter().map(|m| m.data().len()).sum();
    let mut out = Vec::with_capacity(8 + 8 * matrices.len() + 8 * total);
    out.extend_from_slice(&WEIGHTS_MAGIC);
    out.extend_from_slice(&(matrices.len() as u32).to_le_bytes());
    for m in matrices {
        out.extend_from_slice(&(m.rows() as u32).to_le_bytes());
        out.extend_from_slice(&(m.cols() as u32).to_le_bytes());
    }
    for m in matrices {
        for v in m.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize, what: &str) -> Result<&[u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(werr(self.pos, format!("truncated while reading {what}")));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
}

pub fn decode_weights(bytes: &[u8]) -> Result<Vec<FeatureMatrix>> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(4, "magic")? != WEIGHTS_MAGIC {
        return Err(werr(0, "bad magic (expected \"BSAW\")"));
    }
    let count = c.u32("matrix count")? as usize;
    let mut shapes = Vec::with_capacity(count.min(1024));
    for k in 0..count {
        let rows = c.u32(&format!("shape of matrix {k}"))? as usize;
        let cols = c.u32(&format!("shape of matrix {k}"))? as usize;
        shapes.push((rows, cols));
    }
    let mut out = Vec::with_capacity(count);
    for (k, (rows, cols)) in shapes.into_iter().enumerate() {
        let n = rows
            .checked_mul(cols)
            .and_then(|n| n.checked_mul(8))
            .ok_or_else(|| werr(c.pos, format!("matrix {k} is too large")))?;
        let raw = c.take(n, &format!("data of matrix {k}"))?;
        let data = raw
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .collect();
        out.push(FeatureMatrix::new(rows, cols, data)?);
    }
    if c.pos != bytes.len() {
        return Err(werr(c.pos, format!("{} trailing bytes", bytes.len() - c.pos)));
    }
    Ok(out)
}

pub fn read_weights(path: impl AsRef<Path>) -> Result<Vec<FeatureMatrix>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_weights(&bytes)
}

pub fn write_weights(path: impl AsRef<Path>, matrices: &[FeatureMatrix]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_weights(matrices)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let m = FeatureMatrix::new(1, 2, vec![1.0, -2.5]).unwrap();
        let bytes = encode_weights(std::slice::from_ref(&m));
        assert_eq!(&bytes[..4], b"BSAW");
        assert_eq!(&bytes[4..8], &[1, 0, 0, 0]);
        assert_eq!(&bytes[8..16], &[1, 0, 0, 0, 2, 0, 0, 0]);
        assert_eq!(&bytes[16..24], &1.0f64.to_le_bytes());
        assert_eq!(bytes.len(), 32);
        assert_eq!(decode_weights(&bytes).unwrap(), vec![m]);
    }

    #[test]
    fn truncation_offset() {
        let m = FeatureMatrix::new(2, 2, vec![1.0; 4]).unwrap();
        let bytes = encode_weights(&[m]);
        match decode_weights(&bytes[..30]).unwrap_err() {
            Error::Weights { offset, .. } => assert_eq!(offset, 16),
            e => panic!("unexpected {e}"),
        }
        assert!(decode_weights(b"BSAX\0\0\0\0").is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode_weights(&extra).is_err());
    }
}
