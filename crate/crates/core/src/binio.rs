//! Little-endian primitives shared by the binary artifact formats
//! (graph and embedding files). Read helpers map short reads onto the
//! crate's structured corruption error so callers get "truncated file"
//! diagnostics with the offending path.

use std::io::{Read, Write};

use crate::error::{Error, Result};

pub(crate) fn write_u8<W: Write>(w: &mut W, v: u8) -> std::io::Result<()> {
    w.write_all(&[v])
}

pub(crate) fn write_u32<W: Write>(w: &mut W, v: u32) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

pub(crate) fn write_u64<W: Write>(w: &mut W, v: u64) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

pub(crate) fn write_f64<W: Write>(w: &mut W, v: f64) -> std::io::Result<()> {
    w.write_all(&v.to_bits().to_le_bytes())
}

pub(crate) fn write_str<W: Write>(w: &mut W, s: &str) -> std::io::Result<()> {
    write_u32(w, s.len() as u32)?;
    w.write_all(s.as_bytes())
}

fn fill<R: Read>(r: &mut R, buf: &mut [u8], path: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::Format {
                path: path.to_string(),
                msg: "truncated file".to_string(),
            }
        } else {
            Error::io(path, e)
        }
    })
}

pub(crate) fn read_u8<R: Read>(r: &mut R, path: &str) -> Result<u8> {
    let mut b = [0u8; 1];
    fill(r, &mut b, path)?;
    Ok(b[0])
}

pub(crate) fn read_u32<R: Read>(r: &mut R, path: &str) -> Result<u32> {
    let mut b = [0u8; 4];
    fill(r, &mut b, path)?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn read_u64<R: Read>(r: &mut R, path: &str) -> Result<u64> {
    let mut b = [0u8; 8];
    fill(r, &mut b, path)?;
    Ok(u64::from_le_bytes(b))
}

pub(crate) fn read_f64<R: Read>(r: &mut R, path: &str) -> Result<f64> {
    Ok(f64::from_bits(read_u64(r, path)?))
}

/// Keys are short identifiers; an absurd length means we are reading garbage.
const MAX_STR: u32 = 1 << 20;

pub(crate) fn read_str<R: Read>(r: &mut R, path: &str) -> Result<String> {
    let len = read_u32(r, path)?;
    if len > MAX_STR {
        return Err(Error::Format {
            path: path.to_string(),
            msg: format!("string length {len} exceeds limit (corrupt file?)"),
        });
    }
    let mut buf = vec![0u8; len as usize];
    fill(r, &mut buf, path)?;
    String::from_utf8(buf).map_err(|_| Error::Format {
        path: path.to_string(),
        msg: "invalid UTF-8 in string field".to_string(),
    })
}

/// Read and verify a fixed magic tag.
pub(crate) fn expect_magic<R: Read>(r: &mut R, magic: &[u8], path: &str) -> Result<()> {
    let mut buf = vec![0u8; magic.len()];
    fill(r, &mut buf, path)?;
    if buf != magic {
        return Err(Error::Format {
            path: path.to_string(),
            msg: format!(
                "bad magic {:?}, expected {:?}",
                String::from_utf8_lossy(&buf),
                String::from_utf8_lossy(magic)
            ),
        });
    }
    Ok(())
}
