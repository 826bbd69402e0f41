//! Comparison heuristics: magnitude greedy with counters (2-approximation),
//! row-then-column N:M masking (Bi-NM) and best-of-k random feasible masks.

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::block::{
    assemble_mask, block_objective, partition_blocks, BinaryMaskBatch, BlockBatch, DenseMatrix,
    SparsityPattern,
};
use crate::error::{Error, Result};
use crate::rounding::{complete_block, greedy_block, RoundingStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    Greedy2Approx,
    BiNm,
    RandomBest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaselineChoice {
    pub kind: BaselineKind,
    /// Samples drawn by [`BaselineKind::RandomBest`].
    pub k: usize,
    pub seed: u64,
}

impl BaselineChoice {
    pub fn new(kind: BaselineKind, k: usize, seed: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidConfig("random_best needs k >= 1".into()));
        }
        Ok(Self { kind, k, seed })
    }

    /// Runs the chosen heuristic on every block.
    pub fn run(&self, batch: &BlockBatch, pattern: SparsityPattern) -> Result<BinaryMaskBatch> {
        match self.kind {
            BaselineKind::Greedy2Approx => two_approximation(batch, pattern).map(|(mask, _)| mask),
            BaselineKind::BiNm => bi_nm_batch(batch, pattern),
            BaselineKind::RandomBest => random_best_batch(batch, pattern, self.k, self.seed),
        }
    }
}

fn check_layout(batch: &BlockBatch, pattern: SparsityPattern) -> Result<()> {
    if batch.m() != pattern.m() {
        return Err(Error::Shape(format!("pattern {pattern} on blocks of side {}", batch.m())));
    }
    Ok(())
}

/// Greedy on `|W|` followed by the completion pass; no relaxation, no swaps.
pub fn two_approximation(
    batch: &BlockBatch,
    pattern: SparsityPattern,
) -> Result<(BinaryMaskBatch, RoundingStats)> {
    check_layout(batch, pattern)?;
    let m = batch.m();
    let blocks: Vec<(Vec<u8>, usize)> = batch
        .par_blocks()
        .map(|w| {
            let mut state = greedy_block(w, m, pattern.n());
            let moves = complete_block(w, &mut state);
            (state.into_mask(), moves)
        })
        .collect();
    let mut stats = RoundingStats::default();
    let mut out = Vec::with_capacity(blocks.len());
    for (bits, moves) in blocks {
        stats.completion_moves += moves;
        stats.completed_blocks += usize::from(moves > 0);
        out.push(bits);
    }
    Ok((BinaryMaskBatch::from_blocks(m, out), stats))
}

/// Indices of the `n` largest values (ties: lower index first).
fn top_n(values: &[f64], n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    idx.truncate(n);
    idx
}

/// Bi-NM on one block: top-`n` per row, then top-`n` per column of the
/// row-masked magnitudes; the product of both masks.
pub fn bi_nm_block(w: &[f64], m: usize, n: usize) -> Vec<u8> {
    let mut row_mask = vec![0u8; m * m];
    for i in 0..m {
        let row: Vec<f64> = (0..m).map(|j| w[i * m + j].abs()).collect();
        for j in top_n(&row, n) {
            row_mask[i * m + j] = 1;
        }
    }
    let mut out = vec![0u8; m * m];
    for j in 0..m {
        let col: Vec<f64> = (0..m).map(|i| w[i * m + j].abs() * row_mask[i * m + j] as f64).collect();
        for i in top_n(&col, n) {
            out[i * m + j] = row_mask[i * m + j];
        }
    }
    out
}

pub fn bi_nm_batch(batch: &BlockBatch, pattern: SparsityPattern) -> Result<BinaryMaskBatch> {
    check_layout(batch, pattern)?;
    let m = batch.m();
    let blocks = batch.par_blocks().map(|w| bi_nm_block(w, m, pattern.n())).collect();
    Ok(BinaryMaskBatch::from_blocks(m, blocks))
}

/// Full-matrix Bi-NM. Row groups are `m` consecutive columns and column
/// groups `m` consecutive rows, which is exactly a per-tile application.
pub fn bi_nm(matrix: &DenseMatrix, pattern: SparsityPattern) -> Result<DenseMatrix> {
    let batch = partition_blocks(matrix, pattern)?;
    let mask = bi_nm_batch(&batch, pattern)?;
    assemble_mask(&mask, batch.origin(), matrix.rows(), matrix.cols())
}

/// Draws one feasible mask row by row. Columns whose remaining demand
/// equals the rows left are forced; the rest of the row is a uniform pick
/// among columns that still need ones. This never dead-ends.
pub fn random_feasible_mask(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Vec<u8> {
    let mut need = vec![n; m];
    let mut mask = vec![0u8; m * m];
    let mut open = Vec::with_capacity(m);
    for i in 0..m {
        let rows_left = m - i;
        let mut take = 0;
        open.clear();
        for j in 0..m {
            if need[j] == rows_left {
                mask[i * m + j] = 1;
                take += 1;
            } else if need[j] > 0 {
                open.push(j);
            }
        }
        for &j in open.choose_multiple(rng, n - take) {
            mask[i * m + j] = 1;
        }
        for j in 0..m {
            need[j] -= mask[i * m + j] as usize;
        }
    }
    mask
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed for block `index` of a run seeded with `seed`.
pub fn block_seed(seed: u64, index: usize) -> u64 {
    splitmix64(seed ^ splitmix64(index as u64))
}

/// Best of `k` random feasible masks; first maximum wins on ties.
pub fn random_best(block: &[f64], m: usize, pattern: SparsityPattern, k: usize, seed: u64) -> Result<Vec<u8>> {
    if k == 0 {
        return Err(Error::InvalidConfig("random_best needs k >= 1".into()));
    }
    if pattern.m() != m || block.len() != m * m {
        return Err(Error::Shape(format!("{} values for a {pattern} block", block.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = random_feasible_mask(&mut rng, m, pattern.n());
    let mut best_obj = block_objective(block, &best);
    for _ in 1..k {
        let cand = random_feasible_mask(&mut rng, m, pattern.n());
        let obj = block_objective(block, &cand);
        if obj > best_obj {
            best = cand;
            best_obj = obj;
        }
    }
    Ok(best)
}

pub fn random_best_batch(
    batch: &BlockBatch,
    pattern: SparsityPattern,
    k: usize,
    seed: u64,
) -> Result<BinaryMaskBatch> {
    check_layout(batch, pattern)?;
    let m = batch.m();
    let blocks = batch
        .par_blocks()
        .enumerate()
        .map(|(idx, w)| random_best(w, m, pattern, k, block_seed(seed, idx)))
        .collect::<Result<Vec<_>>>()?;
    Ok(BinaryMaskBatch::from_blocks(m, blocks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::{check_at_most, check_feasible};

    const GOLDEN: [f64; 16] = [
        0.88, 0.01, 0.84, 0.27, //
        0.01, 0.71, 0.75, 0.53, //
        0.82, 0.78, 0.15, 0.25, //
        0.29, 0.50, 0.26, 0.95,
    ];

    fn pat(n: usize, m: usize) -> SparsityPattern {
        SparsityPattern::new(n, m).unwrap()
    }

    #[test]
    fn bi_nm_on_golden_block_is_underfull() {
        let mask = bi_nm_block(&GOLDEN, 4, 2);
        assert_eq!(mask.iter().map(|&b| b as usize).sum::<usize>(), 7);
        let obj = block_objective(&GOLDEN, &mask);
        assert!((obj - 5.73).abs() < 1e-9);
        let batch = BinaryMaskBatch::new(4, mask).unwrap();
        assert!(check_at_most(&batch, pat(2, 4)).is_feasible());
        assert!(!check_feasible(&batch, pat(2, 4)).is_feasible());
    }

    #[test]
    fn bi_nm_preserves_transposable_support() {
        // Weights already supported on a feasible 2:4 mask.
        let support = [1, 1, 0, 0, 0, 1, 1, 0, 0, 0, 1, 1, 1, 0, 0, 1];
        let w: Vec<f64> = support.iter().enumerate().map(|(k, &s)| s as f64 * (1.0 + k as f64)).collect();
        assert_eq!(bi_nm_block(&w, 4, 2), support.to_vec());
    }

    #[test]
    fn bi_nm_full_matrix_matches_blocks() {
        let v: Vec<f64> = (0..64).map(|k| ((k * 37) % 23) as f64 - 11.0).collect();
        let w = DenseMatrix::new(8, 8, v).unwrap();
        let full = bi_nm(&w, pat(2, 4)).unwrap();
        let batch = partition_blocks(&w, pat(2, 4)).unwrap();
        let blocks = bi_nm_batch(&batch, pat(2, 4)).unwrap();
        assert_eq!(full, assemble_mask(&blocks, batch.origin(), 8, 8).unwrap());
        assert!(bi_nm(&DenseMatrix::zeros(6, 8), pat(2, 4)).is_err());
    }

    #[test]
    fn two_approximation_diagonal() {
        let mut block = vec![1.0; 16];
        for i in 0..4 {
            block[i * 5] = 10.0;
        }
        let batch = BlockBatch::from_blocks(4, block).unwrap();
        let (mask, _) = two_approximation(&batch, pat(1, 4)).unwrap();
        assert_eq!(mask.bits(), &[1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1]);
    }

    #[test]
    fn random_best_is_deterministic_and_feasible() {
        let a = random_best(&GOLDEN, 4, pat(2, 4), 50, 7).unwrap();
        let b = random_best(&GOLDEN, 4, pat(2, 4), 50, 7).unwrap();
        assert_eq!(a, b);
        let mask = BinaryMaskBatch::new(4, a).unwrap();
        assert!(check_feasible(&mask, pat(2, 4)).is_feasible());
        assert!(random_best(&GOLDEN, 4, pat(2, 4), 0, 7).is_err());
    }

    #[test]
    fn random_uniform_block_any_mask() {
        let block = vec![0.25; 64];
        let mask = random_best(&block, 8, pat(3, 8), 1, 1).unwrap();
        assert!((block_objective(&block, &mask) - 3.0 * 8.0 * 0.25).abs() < 1e-12);
    }

    #[test]
    fn random_draws_always_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (n, m) in [(1, 2), (2, 4), (3, 8), (7, 8), (8, 16), (5, 32)] {
            for _ in 0..50 {
                let mask = BinaryMaskBatch::new(m, random_feasible_mask(&mut rng, m, n)).unwrap();
                assert!(check_feasible(&mask, pat(n, m)).is_feasible());
            }
        }
    }
}
