//! Domain types shared by every solver: sparsity patterns, dense matrices,
//! square block batches and binary mask batches, plus the objective and
//! feasibility checks that all masks are measured against.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An `n:m` pattern: `n` kept entries in every group of `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SparsityPattern {
    n: usize,
    m: usize,
}

impl SparsityPattern {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidPattern { n, m, reason: "group size must be at least 2" });
        }
        if n == 0 {
            return Err(Error::InvalidPattern { n, m, reason: "must keep at least one entry" });
        }
        if n > m {
            return Err(Error::InvalidPattern { n, m, reason: "cannot keep more than the group size" });
        }
        Ok(Self { n, m })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    /// Fraction of entries kept, `n / m`.
    pub fn density(&self) -> f64 {
        self.n as f64 / self.m as f64
    }
}

impl fmt::Display for SparsityPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.n, self.m)
    }
}

impl FromStr for SparsityPattern {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (n, m) = s
            .split_once(':')
            .ok_or_else(|| format!("expected N:M, got {s:?}"))?;
        let n: usize = n.trim().parse().map_err(|_| format!("non-numeric N in {s:?}"))?;
        let m: usize = m.trim().parse().map_err(|_| format!("non-numeric M in {s:?}"))?;
        SparsityPattern::new(n, m).map_err(|e| e.to_string())
    }
}

/// Row-major dense matrix of finite `f64` values.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!("matrix must be non-empty, got {rows}x{cols}")));
        }
        if values.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite entry at ({}, {})",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, values: vec![0.0; rows * cols] }
    }

    pub fn identity(size: usize) -> Self {
        let mut out = Self::zeros(size, size);
        for i in 0..size {
            out.values[i * size + i] = 1.0;
        }
        out
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::new(r, c, rows.concat())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { rows: self.rows, cols: self.cols, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.values[j * self.rows + i] = self.values[i * self.cols + j];
            }
        }
        out
    }

    /// Elementwise product; used to apply a 0/1 mask.
    pub fn hadamard(&self, other: &DenseMatrix) -> Result<Self> {
        self.same_shape(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, values })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub(crate) fn same_shape(&self, other: &DenseMatrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }
}

/// `b` independent `m x m` magnitude blocks cut from a source matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockBatch {
    m: usize,
    magnitudes: Vec<f64>,
    origin: Vec<(usize, usize)>,
    source_rows: usize,
    source_cols: usize,
}

impl BlockBatch {
    /// Builds a batch from raw blocks stacked vertically, so block `k` sits
    /// at tile `(k, 0)` of a `(b*m) x m` source. Entries are made absolute.
    pub fn from_blocks(m: usize, values: Vec<f64>) -> Result<Self> {
        if m == 0 || values.is_empty() || !values.len().is_multiple_of(m * m) {
            return Err(Error::Shape(format!("{} values do not form {m}x{m} blocks", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite block entry".into()));
        }
        let b = values.len() / (m * m);
        Ok(Self {
            m,
            magnitudes: values.into_iter().map(f64::abs).collect(),
            origin: (0..b).map(|k| (k, 0)).collect(),
            source_rows: b * m,
            source_cols: m,
        })
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.origin.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origin.is_empty()
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    /// Tile coordinates `(block_row, block_col)` of each block.
    pub fn origin(&self) -> &[(usize, usize)] {
        &self.origin
    }

    pub fn source_dims(&self) -> (usize, usize) {
        (self.source_rows, self.source_cols)
    }

    #[inline]
    pub fn block(&self, k: usize) -> &[f64] {
        let sz = self.m * self.m;
        &self.magnitudes[k * sz..(k + 1) * sz]
    }

    pub fn blocks(&self) -> std::slice::ChunksExact<'_, f64> {
        self.magnitudes.chunks_exact(self.m * self.m)
    }

    pub fn par_blocks(&self) -> rayon::slice::ChunksExact<'_, f64> {
        self.magnitudes.par_chunks_exact(self.m * self.m)
    }
}

/// Binary masks, one `m x m` block per entry of a [`BlockBatch`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMaskBatch {
    m: usize,
    bits: Vec<u8>,
}

impl BinaryMaskBatch {
    pub fn zeros(b: usize, m: usize) -> Self {
        Self { m, bits: vec![0; b * m * m] }
    }

    pub fn new(m: usize, bits: Vec<u8>) -> Result<Self> {
        if m == 0 || bits.is_empty() || !bits.len().is_multiple_of(m * m) {
            return Err(Error::Shape(format!("{} bits do not form {m}x{m} blocks", bits.len())));
        }
        if bits.iter().any(|&v| v > 1) {
            return Err(Error::Shape("mask entries must be 0 or 1".into()));
        }
        Ok(Self { m, bits })
    }

    /// Concatenates per-block masks produced independently.
    pub fn from_blocks(m: usize, blocks: Vec<Vec<u8>>) -> Self {
        Self { m, bits: blocks.concat() }
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.len() / (self.m * self.m)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    #[inline]
    pub fn block(&self, k: usize) -> &[u8] {
        let sz = self.m * self.m;
        &self.bits[k * sz..(k + 1) * sz]
    }

    #[inline]
    pub fn block_mut(&mut self, k: usize) -> &mut [u8] {
        let sz = self.m * self.m;
        &mut self.bits[k * sz..(k + 1) * sz]
    }

    pub fn blocks(&self) -> std::slice::ChunksExact<'_, u8> {
        self.bits.chunks_exact(self.m * self.m)
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaskObjectiveReport {
    pub objective: f64,
    pub per_block: Vec<f64>,
}

/// `sum S_ij |W_ij|` over one block, in row-major order.
pub fn block_objective(magnitudes: &[f64], bits: &[u8]) -> f64 {
    magnitudes
        .iter()
        .zip(bits)
        .filter(|(_, &s)| s != 0)
        .map(|(w, _)| *w)
        .sum()
}

pub fn partition_blocks(matrix: &DenseMatrix, pattern: SparsityPattern) -> Result<BlockBatch> {
    let m = pattern.m();
    let (rows, cols) = (matrix.rows(), matrix.cols());
    if rows % m != 0 || cols % m != 0 {
        return Err(Error::Dimension(format!(
            "{rows}x{cols} matrix is not divisible into {m}x{m} blocks"
        )));
    }
    let (br, bc) = (rows / m, cols / m);
    let mut magnitudes = Vec::with_capacity(rows * cols);
    let mut origin = Vec::with_capacity(br * bc);
    for tr in 0..br {
        for tc in 0..bc {
            origin.push((tr, tc));
            for i in 0..m {
                let start = (tr * m + i) * cols + tc * m;
                magnitudes.extend(matrix.values()[start..start + m].iter().map(|v| v.abs()));
            }
        }
    }
    Ok(BlockBatch { m, magnitudes, origin, source_rows: rows, source_cols: cols })
}

/// Places each block mask at its tile and returns the full 0/1 matrix.
pub fn assemble_mask(
    batch: &BinaryMaskBatch,
    origin: &[(usize, usize)],
    rows: usize,
    cols: usize,
) -> Result<DenseMatrix> {
    let m = batch.m();
    if !rows.is_multiple_of(m) || !cols.is_multiple_of(m) {
        return Err(Error::Shape(format!("{rows}x{cols} is not tiled by {m}x{m} blocks")));
    }
    let tiles = (rows / m) * (cols / m);
    if batch.len() != origin.len() || origin.len() != tiles {
        return Err(Error::Shape(format!(
            "{} mask blocks and {} origins for {tiles} tiles",
            batch.len(),
            origin.len()
        )));
    }
    let mut out = DenseMatrix::zeros(rows, cols);
    let mut seen = vec![false; tiles];
    for (k, &(tr, tc)) in origin.iter().enumerate() {
        if tr >= rows / m || tc >= cols / m {
            return Err(Error::Shape(format!("tile ({tr}, {tc}) outside {rows}x{cols}")));
        }
        let slot = tr * (cols / m) + tc;
        if std::mem::replace(&mut seen[slot], true) {
            return Err(Error::Shape(format!("tile ({tr}, {tc}) assigned twice")));
        }
        let bits = batch.block(k);
        for i in 0..m {
            for j in 0..m {
                out.set(tr * m + i, tc * m + j, bits[i * m + j] as f64);
            }
        }
    }
    Ok(out)
}

pub fn mask_objective(batch: &BlockBatch, mask: &BinaryMaskBatch) -> Result<MaskObjectiveReport> {
    if batch.m() != mask.m() || batch.len() != mask.len() {
        return Err(Error::Shape(format!(
            "{} blocks of side {} vs {} masks of side {}",
            batch.len(),
            batch.m(),
            mask.len(),
            mask.m()
        )));
    }
    let per_block: Vec<f64> = batch
        .par_blocks()
        .zip(mask.bits().par_chunks_exact(mask.m() * mask.m()))
        .map(|(w, s)| block_objective(w, s))
        .collect();
    // Ascending block order, independent of how the blocks were scheduled.
    let objective = per_block.iter().sum();
    Ok(MaskObjectiveReport { objective, per_block })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Row,
    Col,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub block: usize,
    pub axis: Axis,
    pub index: usize,
    pub sum: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Row and column sums of a square 0/1 block.
pub fn line_sums(bits: &[u8], m: usize) -> (Vec<usize>, Vec<usize>) {
    let mut rows = vec![0usize; m];
    let mut cols = vec![0usize; m];
    for i in 0..m {
        for j in 0..m {
            let v = bits[i * m + j] as usize;
            rows[i] += v;
            cols[j] += v;
        }
    }
    (rows, cols)
}

fn collect_violations(
    mask: &BinaryMaskBatch,
    bad: impl Fn(usize) -> bool,
) -> FeasibilityReport {
    let m = mask.m();
    let mut violations = Vec::new();
    for (k, bits) in mask.blocks().enumerate() {
        let (rows, cols) = line_sums(bits, m);
        for (axis, sums) in [(Axis::Row, rows), (Axis::Col, cols)] {
            for (index, sum) in sums.into_iter().enumerate() {
                if bad(sum) {
                    violations.push(Violation { block: k, axis, index, sum });
                }
            }
        }
    }
    FeasibilityReport { violations }
}

/// Every row and column of every block must hold exactly `n` ones.
pub fn check_feasible(mask: &BinaryMaskBatch, pattern: SparsityPattern) -> FeasibilityReport {
    let n = pattern.n();
    let mut report = collect_violations(mask, |s| s != n);
    if mask.m() != pattern.m() {
        report.violations.clear();
        report.violations.push(Violation { block: 0, axis: Axis::Row, index: 0, sum: mask.m() });
    }
    report
}

/// Weaker check used for under-full baselines: at most `n` per row/column.
pub fn check_at_most(mask: &BinaryMaskBatch, pattern: SparsityPattern) -> FeasibilityReport {
    let n = pattern.n();
    collect_violations(mask, |s| s > n)
}

/// A group of `m` consecutive entries of one row (or column) of a full mask
/// that breaks the N:M rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupViolation {
    pub axis: Axis,
    /// Row index for [`Axis::Row`], column index for [`Axis::Col`].
    pub line: usize,
    /// Which group of `m` along that line.
    pub group: usize,
    pub count: usize,
}

/// Checks a full 0/1 mask: every row group of `m` consecutive columns holds
/// at most `n` ones (exactly `n` when `exact`); with `transposable`, column
/// groups of `m` consecutive rows are checked the same way.
pub fn check_groups(
    mask: &DenseMatrix,
    pattern: SparsityPattern,
    transposable: bool,
    exact: bool,
) -> Result<Vec<GroupViolation>> {
    let (rows, cols, m, n) = (mask.rows(), mask.cols(), pattern.m(), pattern.n());
    if cols % m != 0 || (transposable && rows % m != 0) {
        return Err(Error::Dimension(format!("{rows}x{cols} mask is not divisible into {pattern} groups")));
    }
    if let Some(pos) = mask.values().iter().position(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::Precondition(format!("mask entry ({}, {}) is not 0 or 1", pos / cols, pos % cols)));
    }
    let bad = |count: usize| if exact { count != n } else { count > n };
    let mut out = Vec::new();
    for i in 0..rows {
        for g in 0..cols / m {
            let count = mask.row(i)[g * m..(g + 1) * m].iter().filter(|&&v| v == 1.0).count();
            if bad(count) {
                out.push(GroupViolation { axis: Axis::Row, line: i, group: g, count });
            }
        }
    }
    if transposable {
        for j in 0..cols {
            for g in 0..rows / m {
                let count = (g * m..(g + 1) * m).filter(|&i| mask.get(i, j) == 1.0).count();
                if bad(count) {
                    out.push(GroupViolation { axis: Axis::Col, line: j, group: g, count });
                }
            }
        }
    }
    Ok(out)
}
