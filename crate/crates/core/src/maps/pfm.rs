//! Single-channel portable float map (`Pf`) I/O.
//!
//! Writes little-endian (scale `-1.0`), bottom row first. Reads either
//! endianness. Values travel as `f32`.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::maps::FloatMap;

pub fn encode(m: &FloatMap) -> Vec<u8> {
    let (w, h) = m.dims();
    let mut out = format!("Pf\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(w * h * 4);
    for y in (0..h).rev() {
        for x in 0..w {
            out.extend_from_slice(&(m.get(x, y) as f32).to_le_bytes());
        }
    }
    out
}

fn next_token<'a>(buf: &'a [u8], pos: &mut usize) -> Option<&'a str> {
    while *pos < buf.len() && buf[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    let start = *pos;
    while *pos < buf.len() && !buf[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return None;
    }
    std::str::from_utf8(&buf[start..*pos]).ok()
}

pub fn decode(buf: &[u8]) -> Result<FloatMap> {
    let mut pos = 0;
    let bad = |m: &str| Error::Input(format!("PFM: {m}"));
    match next_token(buf, &mut pos) {
        Some("Pf") => {}
        Some("PF") => return Err(bad("3-channel PF maps are not supported")),
        _ => return Err(bad("missing Pf magic")),
    }
    let w: usize = next_token(buf, &mut pos)
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| bad("bad width"))?;
    let h: usize = next_token(buf, &mut pos)
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| bad("bad height"))?;
    let scale: f64 = next_token(buf, &mut pos)
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| bad("bad scale"))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(bad("scale must be non-zero"));
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    let need = w
        .checked_mul(h)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| bad("dimensions overflow"))?;
    if buf.len() < pos + need {
        return Err(bad(&format!(
            "truncated raster: need {need} bytes, have {}",
            buf.len().saturating_sub(pos)
        )));
    }
    let little = scale < 0.0;
    let mut data = vec![0.0f64; w * h];
    let mut chunks = buf[pos..pos + need].chunks_exact(4);
    for y in (0..h).rev() {
        for x in 0..w {
            let c: [u8; 4] = chunks.next().expect("length checked").try_into().expect("4 bytes");
            let v = if little {
                f32::from_le_bytes(c)
            } else {
                f32::from_be_bytes(c)
            };
            if !v.is_finite() {
                return Err(bad(&format!("non-finite value at ({x}, {y})")));
            }
            data[y * w + x] = v as f64;
        }
    }
    FloatMap::from_vec(w, h, data)
}

pub fn write(path: impl AsRef<Path>, m: &FloatMap) -> Result<()> {
    let path = path.as_ref();
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&encode(m)).map_err(|e| Error::io(path, e))
}

pub fn read(path: impl AsRef<Path>) -> Result<FloatMap> {
    let path = path.as_ref();
    let buf = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&buf).map_err(|e| match e {
        Error::Input(m) => Error::Input(format!("{}: {m}", path.display())),
        other => other,
    })
}
