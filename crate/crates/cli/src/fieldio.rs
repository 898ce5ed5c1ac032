//! Field files.
//!
//! * `csv-grid` (`.csv`, `.txt`): one row of comma-separated decimals per grid row, one channel.
//! * `raw-f32` (`.raw`, `.f32`, `.bin`): 12-byte header of little-endian `u32` `H, W, C`,
//!   then `H*W*C` little-endian `f32` values, row-major with channels innermost.
//! * `pgm8` (`.pgm`): binary P5 greymap with maxval <= 255, scaled to `[0, 1]`.

use std::fs;
use std::path::{Path, PathBuf};

use toporeg_core::{GridShape, MultiChannelField, ScalarField};

use crate::error::{CliError, Result};
use crate::numfmt::format_g17;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldFormat {
    CsvGrid,
    RawF32,
    Pgm8,
}

impl FieldFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("csv") | Some("txt") => Ok(FieldFormat::CsvGrid),
            Some("raw") | Some("f32") | Some("bin") => Ok(FieldFormat::RawF32),
            Some("pgm") => Ok(FieldFormat::Pgm8),
            _ => Err(CliError::format(
                path,
                "unknown field format; expected .csv, .raw/.f32/.bin or .pgm",
            )),
        }
    }
}

pub fn read_field(path: &Path) -> Result<MultiChannelField> {
    let format = FieldFormat::from_path(path)?;
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    match format {
        FieldFormat::CsvGrid => {
            let text = String::from_utf8(bytes).map_err(|_| CliError::format(path, "not UTF-8 text"))?;
            parse_csv(&text).map_err(|m| CliError::format(path, m))
        }
        FieldFormat::RawF32 => decode_raw_f32(&bytes).map_err(|m| CliError::format(path, m)),
        FieldFormat::Pgm8 => decode_pgm(&bytes).map_err(|m| CliError::format(path, m)),
    }
}

/// Read one file, or stack several single-channel files as channels.
pub fn read_fields(paths: &[PathBuf]) -> Result<MultiChannelField> {
    match paths {
        [] => Err(CliError::Usage("no input field given".into())),
        [one] => read_field(one),
        many => {
            let mut planes = Vec::with_capacity(many.len());
            for p in many {
                let f = read_field(p)?;
                let plane = f
                    .as_scalar()
                    .ok_or_else(|| CliError::format(p, "per-channel inputs must have one channel each"))?;
                if let Some(first) = planes.first() {
                    let first: &ScalarField = first;
                    if first.shape() != plane.shape() {
                        return Err(CliError::format(
                            p,
                            format!("channel shape {} differs from {}", plane.shape(), first.shape()),
                        ));
                    }
                }
                planes.push(plane);
            }
            Ok(MultiChannelField::from_channels(&planes)?)
        }
    }
}

pub fn write_field(path: &Path, field: &MultiChannelField) -> Result<()> {
    let bytes = match FieldFormat::from_path(path)? {
        FieldFormat::CsvGrid => {
            let plane = field
                .as_scalar()
                .ok_or_else(|| CliError::format(path, "csv-grid holds a single channel"))?;
            format_csv(&plane).into_bytes()
        }
        FieldFormat::RawF32 => encode_raw_f32(field),
        FieldFormat::Pgm8 => {
            let plane = field
                .as_scalar()
                .ok_or_else(|| CliError::format(path, "pgm8 holds a single channel"))?;
            encode_pgm(&plane)
        }
    };
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn parse_csv(text: &str) -> std::result::Result<MultiChannelField, String> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|cell| {
                let cell = cell.trim();
                cell.parse::<f64>()
                    .map_err(|_| format!("line {}: cannot parse {cell:?} as a number", ln + 1))
            })
            .collect::<std::result::Result<Vec<f64>, String>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(format!(
                    "line {}: expected {} columns, found {}",
                    ln + 1,
                    first.len(),
                    row.len()
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err("empty grid".into());
    }
    ScalarField::from_rows(&rows)
        .map(|f| f.to_multichannel())
        .map_err(|e| e.to_string())
}

pub fn format_csv(field: &ScalarField) -> String {
    let w = field.shape().width();
    let mut out = String::new();
    for row in field.values().chunks(w) {
        let cells: Vec<String> = row.iter().map(|&v| format_g17(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn decode_raw_f32(bytes: &[u8]) -> std::result::Result<MultiChannelField, String> {
    if bytes.len() < 12 {
        return Err(format!("raw-f32 header needs 12 bytes, file has {}", bytes.len()));
    }
    let dim = |i: usize| u32::from_le_bytes(bytes[i * 4..i * 4 + 4].try_into().unwrap()) as usize;
    let (h, w, c) = (dim(0), dim(1), dim(2));
    let shape = GridShape::new(h, w).map_err(|e| e.to_string())?;
    let expected = h
        .checked_mul(w)
        .and_then(|n| n.checked_mul(c))
        .and_then(|n| n.checked_mul(4))
        .ok_or("header dimensions overflow")?;
    let body = &bytes[12..];
    if body.len() != expected {
        return Err(format!(
            "header {h}x{w}x{c} needs {expected} data bytes, found {}",
            body.len()
        ));
    }
    let values = body
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
        .collect();
    MultiChannelField::new(shape, c, values).map_err(|e| e.to_string())
}

/// Values are narrowed to `f32`.
pub fn encode_raw_f32(field: &MultiChannelField) -> Vec<u8> {
    let s = field.shape();
    let mut out = Vec::with_capacity(12 + field.values().len() * 4);
    for d in [s.height(), s.width(), field.channels()] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for &v in field.values() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn decode_pgm(bytes: &[u8]) -> std::result::Result<MultiChannelField, String> {
    let mut pos = 0;
    let mut token = || -> std::result::Result<String, String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("truncated PGM header".into());
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    if token()? != "P5" {
        return Err("not a binary PGM (P5) file".into());
    }
    let mut num = |what: &str| -> std::result::Result<usize, String> {
        let t = token()?;
        t.parse().map_err(|_| format!("bad PGM {what} {t:?}"))
    };
    let w = num("width")?;
    let h = num("height")?;
    let maxval = num("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(format!("pgm8 requires 1 <= maxval <= 255, got {maxval}"));
    }
    // Exactly one whitespace byte separates the header from the raster.
    let data = bytes.get(pos + 1..).unwrap_or(&[]);
    let n = w * h;
    if data.len() < n {
        return Err(format!("PGM raster needs {n} bytes, found {}", data.len()));
    }
    let shape = GridShape::new(h, w).map_err(|e| e.to_string())?;
    let values = data[..n].iter().map(|&b| b as f64 / maxval as f64).collect();
    MultiChannelField::new(shape, 1, values).map_err(|e| e.to_string())
}

/// Values are clamped to `[0, 1]` and quantized to 255 levels.
pub fn encode_pgm(field: &ScalarField) -> Vec<u8> {
    let s = field.shape();
    let mut out = format!("P5\n{} {}\n255\n", s.width(), s.height()).into_bytes();
    out.extend(
        field
            .values()
            .iter()
            .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    out
}
