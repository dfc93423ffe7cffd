//! Instance and image file formats.
//!
//! LVLF layout (little-endian): magic `LVLF`, `u16` version, `u16` array
//! count, then per array `u64` rows, `u64` cols and `rows·cols` row-major
//! `f64` values.

use std::io::{BufRead, Read, Write};

use crate::error::{Result, SolverError};

use super::tv::ImageDims;

pub const LVLF_MAGIC: [u8; 4] = *b"LVLF";
pub const LVLF_VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct LvlfArray {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl LvlfArray {
    pub fn column(data: Vec<f64>) -> Self {
        Self {
            rows: data.len(),
            cols: 1,
            data,
        }
    }
}

fn format_err(msg: impl Into<String>) -> SolverError {
    SolverError::Format(msg.into())
}

pub fn write_lvlf<W: Write>(mut w: W, arrays: &[LvlfArray]) -> Result<()> {
    let count = u16::try_from(arrays.len()).map_err(|_| format_err("too many arrays for one container"))?;
    w.write_all(&LVLF_MAGIC)?;
    w.write_all(&LVLF_VERSION.to_le_bytes())?;
    w.write_all(&count.to_le_bytes())?;
    for a in arrays {
        if a.rows * a.cols != a.data.len() {
            return Err(format_err("array payload does not match its shape"));
        }
        w.write_all(&(a.rows as u64).to_le_bytes())?;
        w.write_all(&(a.cols as u64).to_le_bytes())?;
        for v in &a.data {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

pub fn read_lvlf<R: Read>(mut r: R) -> Result<Vec<LvlfArray>> {
    if read_array::<4, _>(&mut r)? != LVLF_MAGIC {
        return Err(format_err("bad magic, not an LVLF container"));
    }
    let version = u16::from_le_bytes(read_array(&mut r)?);
    if version != LVLF_VERSION {
        return Err(format_err(format!("unsupported LVLF version {version}")));
    }
    let count = u16::from_le_bytes(read_array(&mut r)?);
    let mut out = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let rows = u64::from_le_bytes(read_array(&mut r)?) as usize;
        let cols = u64::from_le_bytes(read_array(&mut r)?) as usize;
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| format_err("array shape overflows"))?;
        let mut data = Vec::with_capacity(len.min(1 << 24));
        for _ in 0..len {
            data.push(f64::from_le_bytes(read_array(&mut r)?));
        }
        out.push(LvlfArray { rows, cols, data });
    }
    Ok(out)
}

/// Dense `array real general` Matrix Market, values in column-major order.
pub fn write_matrix_market<W: Write>(mut w: W, a: &LvlfArray) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{} {}", a.rows, a.cols)?;
    for c in 0..a.cols {
        for r in 0..a.rows {
            writeln!(w, "{:e}", a.data[r * a.cols + c])?;
        }
    }
    Ok(())
}

pub fn read_matrix_market<R: BufRead>(r: R) -> Result<LvlfArray> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| format_err("empty Matrix Market file"))??;
    let h = header.to_ascii_lowercase();
    if !h.starts_with("%%matrixmarket matrix array real") {
        return Err(format_err(format!("unsupported Matrix Market header: {header}")));
    }
    let mut body = lines
        .map(|l| l.map_err(SolverError::from))
        .filter(|l| !matches!(l, Ok(s) if s.trim().is_empty() || s.starts_with('%')));
    let size = body.next().ok_or_else(|| format_err("missing size line"))??;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| format_err(format!("bad size token {t}"))))
        .collect::<Result<_>>()?;
    let [rows, cols] = dims[..] else {
        return Err(format_err("size line needs two integers"));
    };
    let mut col_major = Vec::with_capacity(rows * cols);
    for line in body {
        let line = line?;
        let v: f64 = line
            .trim()
            .parse()
            .map_err(|_| format_err(format!("bad value {line}")))?;
        col_major.push(v);
    }
    if col_major.len() != rows * cols {
        return Err(format_err(format!("expected {} values, found {}", rows * cols, col_major.len())));
    }
    let mut data = vec![0.0; rows * cols];
    for c in 0..cols {
        for r in 0..rows {
            data[r * cols + c] = col_major[c * rows + r];
        }
    }
    Ok(LvlfArray { rows, cols, data })
}

/// ASCII PGM (P2, maxval 255). Values are clamped to `[0, 1]`.
pub fn write_pgm<W: Write>(mut w: W, image: &[f64], dims: ImageDims) -> Result<()> {
    if image.len() != dims.pixels() {
        return Err(format_err("image length does not match dimensions"));
    }
    writeln!(w, "P2")?;
    writeln!(w, "{} {}", dims.width, dims.height)?;
    writeln!(w, "255")?;
    for row in image.chunks(dims.width) {
        let line: Vec<String> = row
            .iter()
            .map(|v| ((v.clamp(0.0, 1.0) * 255.0).round() as u8).to_string())
            .collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

/// Reads a P2 PGM into values in `[0, 1]`.
pub fn read_pgm<R: Read>(mut r: R) -> Result<(Vec<f64>, ImageDims)> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace);
    if tokens.next() != Some("P2") {
        return Err(format_err("only ASCII PGM (P2) is supported"));
    }
    let mut num = |what: &str| -> Result<usize> {
        tokens
            .next()
            .ok_or_else(|| format_err(format!("missing {what}")))?
            .parse()
            .map_err(|_| format_err(format!("bad {what}")))
    };
    let width = num("width")?;
    let height = num("height")?;
    let maxval = num("maxval")?;
    if maxval == 0 {
        return Err(format_err("maxval must be positive"));
    }
    let mut image = Vec::with_capacity(width * height);
    for _ in 0..width * height {
        image.push(num("pixel")? as f64 / maxval as f64);
    }
    Ok((image, ImageDims::new(height, width)))
}
