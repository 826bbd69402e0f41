//! File formats: the TNM1 binary matrix/mask container, headerless numeric
//! CSV, and the JSON benchmark report.
//!
//! TNM1 layout (all integers little-endian):
//!
//! | offset | size | field                                         |
//! |--------|------|-----------------------------------------------|
//! | 0      | 4    | magic `b"TNM1"`                               |
//! | 4      | 1    | dtype: 0 = f32, 1 = f64, 2 = u8 mask (0 or 1) |
//! | 5      | 3    | reserved, zero                                |
//! | 8      | 8    | rows (u64)                                    |
//! | 16     | 8    | cols (u64)                                    |
//! | 24     | ...  | rows * cols values, row-major                 |

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::block::DenseMatrix;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"TNM1";
pub const HEADER_LEN: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TnmDtype {
    F32,
    F64,
    Mask,
}

impl TnmDtype {
    pub fn code(self) -> u8 {
        match self {
            TnmDtype::F32 => 0,
            TnmDtype::F64 => 1,
            TnmDtype::Mask => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(TnmDtype::F32),
            1 => Some(TnmDtype::F64),
            2 => Some(TnmDtype::Mask),
            _ => None,
        }
    }

    pub fn size(self) -> usize {
        match self {
            TnmDtype::F32 => 4,
            TnmDtype::F64 => 8,
            TnmDtype::Mask => 1,
        }
    }
}

/// Serializes `matrix` as a TNM1 byte stream. Mask dtype requires 0/1
/// entries; f32 narrows each value.
pub fn encode(matrix: &DenseMatrix, dtype: TnmDtype) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(HEADER_LEN + matrix.values().len() * dtype.size());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[dtype.code(), 0, 0, 0]);
    out.extend_from_slice(&(matrix.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(matrix.cols() as u64).to_le_bytes());
    for (pos, &v) in matrix.values().iter().enumerate() {
        match dtype {
            TnmDtype::F32 => out.extend_from_slice(&(v as f32).to_le_bytes()),
            TnmDtype::F64 => out.extend_from_slice(&v.to_le_bytes()),
            TnmDtype::Mask => {
                if v != 0.0 && v != 1.0 {
                    return Err(Error::Precondition(format!(
                        "mask entry ({}, {}) is {v}, not 0 or 1",
                        pos / matrix.cols(),
                        pos % matrix.cols()
                    )));
                }
                out.push(v as u8);
            }
        }
    }
    Ok(out)
}

/// Parses a TNM1 byte stream; `origin` only labels errors.
pub fn decode(bytes: &[u8], origin: &Path) -> Result<(TnmDtype, DenseMatrix)> {
    let fail = |reason: String| Error::format(origin, reason);
    if bytes.len() < HEADER_LEN {
        return Err(fail(format!("truncated header ({} of {HEADER_LEN} bytes)", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(fail(format!("bad magic {:?}", String::from_utf8_lossy(&bytes[..4]))));
    }
    let dtype = TnmDtype::from_code(bytes[4]).ok_or_else(|| fail(format!("unknown dtype {}", bytes[4])))?;
    if bytes[5..8] != [0, 0, 0] {
        return Err(fail("reserved header bytes are not zero".into()));
    }
    let word = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8-byte slice"));
    let (rows, cols) = (word(8), word(16));
    if rows == 0 || cols == 0 {
        return Err(fail(format!("empty {rows}x{cols} matrix")));
    }
    let count = rows
        .checked_mul(cols)
        .and_then(|c| usize::try_from(c).ok())
        .filter(|c| c.checked_mul(dtype.size()).is_some())
        .ok_or_else(|| fail(format!("{rows}x{cols} is too large")))?;
    let payload = &bytes[HEADER_LEN..];
    let expected = count * dtype.size();
    if payload.len() < expected {
        return Err(fail(format!("truncated payload ({} of {expected} bytes)", payload.len())));
    }
    if payload.len() > expected {
        return Err(fail(format!("{} trailing bytes after payload", payload.len() - expected)));
    }
    let values: Vec<f64> = match dtype {
        TnmDtype::F32 => payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4-byte chunk")) as f64)
            .collect(),
        TnmDtype::F64 => payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect(),
        TnmDtype::Mask => {
            if let Some(pos) = payload.iter().position(|&b| b > 1) {
                return Err(fail(format!("mask value {} at offset {pos}", payload[pos])));
            }
            payload.iter().map(|&b| b as f64).collect()
        }
    };
    let matrix = DenseMatrix::new(rows as usize, cols as usize, values).map_err(|e| fail(e.to_string()))?;
    Ok((dtype, matrix))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Reads any TNM1 file as a matrix; f32 and mask payloads are widened.
pub fn read_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let path = path.as_ref();
    decode(&read_bytes(path)?, path).map(|(_, m)| m)
}

/// Writes a float matrix with dtype [`TnmDtype::F32`] or [`TnmDtype::F64`].
pub fn write_matrix(path: impl AsRef<Path>, matrix: &DenseMatrix, dtype: TnmDtype) -> Result<()> {
    if dtype == TnmDtype::Mask {
        return Err(Error::InvalidConfig("use write_mask for mask files".into()));
    }
    write_bytes(path.as_ref(), &encode(matrix, dtype)?)
}

/// Reads a mask file (dtype 2) as a 0/1 matrix.
pub fn read_mask(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let path = path.as_ref();
    match decode(&read_bytes(path)?, path)? {
        (TnmDtype::Mask, m) => Ok(m),
        (other, _) => Err(Error::format(path, format!("expected a mask file, found dtype {}", other.code()))),
    }
}

/// Writes a 0/1 matrix as a mask file.
pub fn write_mask(path: impl AsRef<Path>, mask: &DenseMatrix) -> Result<()> {
    write_bytes(path.as_ref(), &encode(mask, TnmDtype::Mask)?)
}

/// Parses headerless numeric CSV text. Rows and columns in errors are 1-based.
pub fn parse_csv(text: &str) -> Result<DenseMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut values = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse { row: r + 1, col: 0, reason: e.to_string() })?;
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::Parse {
                row: r + 1,
                col: record.len().min(expected) + 1,
                reason: format!("expected {expected} fields, found {}", record.len()),
            });
        }
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                row: r + 1,
                col: c + 1,
                reason: format!("not a number: {field:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse { row: r + 1, col: c + 1, reason: format!("non-finite value {field:?}") });
            }
            values.push(v);
        }
        rows += 1;
    }
    let cols = width.unwrap_or(0);
    if rows == 0 || cols == 0 {
        return Err(Error::Parse { row: 1, col: 1, reason: "no data".into() });
    }
    DenseMatrix::new(rows, cols, values)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}

/// CSV for files ending in `.csv`, TNM1 otherwise.
pub fn load_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let path = path.as_ref();
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        read_csv(path)
    } else {
        read_matrix(path)
    }
}

/// One solver's results on one pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub solver: String,
    pub pattern: String,
    pub blocks: usize,
    pub mean_relative_error: f64,
    pub max_relative_error: f64,
    pub mean_objective: f64,
    /// Solver-only stopwatch. Omitted unless timings were requested, so that
    /// reports stay byte-identical across runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
    pub seed: u64,
}

/// Benchmark output. Field order is the serialization order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub format: String,
    /// Weight distribution the blocks were drawn from.
    pub distribution: String,
    pub seed: u64,
    pub records: Vec<BenchRecord>,
}

impl BenchReport {
    pub const FORMAT: &'static str = "tnm-bench-1";

    pub fn new(distribution: impl Into<String>, seed: u64, records: Vec<BenchRecord>) -> Self {
        Self { format: Self::FORMAT.into(), distribution: distribution.into(), seed, records }
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        write_bytes(path.as_ref(), self.to_json().as_bytes())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
    }
}
