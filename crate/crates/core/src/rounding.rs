//! Fractional-to-binary rounding: greedy selection under row/column
//! counters, then swap-based local search on `|W|`, then a completion pass
//! that guarantees every row and column ends with exactly `n` ones.

use rayon::prelude::*;
use serde::Serialize;

use crate::block::{
    check_feasible, mask_objective, partition_blocks, BinaryMaskBatch, BlockBatch, DenseMatrix,
    MaskObjectiveReport, SparsityPattern,
};
use crate::dykstra::{dykstra_solve, DykstraConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundingConfig {
    pub local_search_steps: usize,
}

impl Default for RoundingConfig {
    fn default() -> Self {
        Self { local_search_steps: 10 }
    }
}

/// A partially filled block mask with its row and column counters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyState {
    m: usize,
    n: usize,
    mask: Vec<u8>,
    row_counts: Vec<usize>,
    col_counts: Vec<usize>,
}

impl GreedyState {
    pub fn empty(m: usize, n: usize) -> Self {
        Self { m, n, mask: vec![0; m * m], row_counts: vec![0; m], col_counts: vec![0; m] }
    }

    /// Adopts an existing mask; every row and column must hold at most `n` ones.
    pub fn from_mask(bits: &[u8], m: usize, n: usize) -> Result<Self> {
        if bits.len() != m * m {
            return Err(Error::Shape(format!("{} bits for a {m}x{m} block", bits.len())));
        }
        let mut state = Self::empty(m, n);
        for (idx, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => state.insert(idx / m, idx % m),
                _ => return Err(Error::Shape("mask entries must be 0 or 1".into())),
            }
        }
        if state.row_counts.iter().chain(&state.col_counts).any(|&c| c > n) {
            return Err(Error::Precondition(format!("mask exceeds {n} ones in a row or column")));
        }
        Ok(state)
    }

    pub fn mask(&self) -> &[u8] {
        &self.mask
    }

    pub fn into_mask(self) -> Vec<u8> {
        self.mask
    }

    pub fn row_counts(&self) -> &[usize] {
        &self.row_counts
    }

    pub fn col_counts(&self) -> &[usize] {
        &self.col_counts
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.mask[i * self.m + j] != 0
    }

    #[inline]
    fn can_insert(&self, i: usize, j: usize) -> bool {
        !self.get(i, j) && self.row_counts[i] < self.n && self.col_counts[j] < self.n
    }

    fn insert(&mut self, i: usize, j: usize) {
        self.mask[i * self.m + j] = 1;
        self.row_counts[i] += 1;
        self.col_counts[j] += 1;
    }

    fn remove(&mut self, i: usize, j: usize) {
        self.mask[i * self.m + j] = 0;
        self.row_counts[i] -= 1;
        self.col_counts[j] -= 1;
    }

    pub fn is_complete(&self) -> bool {
        self.row_counts.iter().chain(&self.col_counts).all(|&c| c == self.n)
    }

    /// Lowest-index under-full row and lowest-index under-full column.
    pub fn deficit_pair(&self) -> Option<(usize, usize)> {
        let i = self.row_counts.iter().position(|&c| c < self.n)?;
        let j = self.col_counts.iter().position(|&c| c < self.n)?;
        Some((i, j))
    }

    /// Insert `(i, j')` and `(i', j)`, remove `(i', j')`.
    fn apply_swap(&mut self, i: usize, j: usize, ip: usize, jp: usize) {
        self.remove(ip, jp);
        self.insert(ip, j);
        self.insert(i, jp);
    }
}

/// Visits cells by descending score (ties: ascending flat index) and keeps
/// every cell whose row and column still have room.
pub fn greedy_block(scores: &[f64], m: usize, n: usize) -> GreedyState {
    let mut order: Vec<usize> = (0..m * m).collect();
    // Stable sort keeps equal scores in ascending index order.
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut state = GreedyState::empty(m, n);
    for idx in order {
        let (i, j) = (idx / m, idx % m);
        if state.row_counts[i] < n && state.col_counts[j] < n {
            state.insert(i, j);
        }
    }
    state
}

pub fn greedy_round(
    scores: &[f64],
    m: usize,
    pattern: SparsityPattern,
) -> Result<(BinaryMaskBatch, Vec<GreedyState>)> {
    if pattern.m() != m || scores.is_empty() || !scores.len().is_multiple_of(m * m) {
        return Err(Error::Shape(format!("{} scores for {pattern} blocks of side {m}", scores.len())));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Numerical("non-finite rounding score".into()));
    }
    let states: Vec<GreedyState> = scores
        .par_chunks_exact(m * m)
        .map(|s| greedy_block(s, m, pattern.n()))
        .collect();
    let mask = BinaryMaskBatch::from_blocks(m, states.iter().map(|s| s.mask.clone()).collect());
    Ok((mask, states))
}

/// Value standing in for minus infinity in swap scores: strictly below any
/// attainable `|W_ij'| + |W_i'j| - |W_i'j'|`.
pub fn swap_sentinel(weights: &[f64]) -> f64 {
    let max = weights.iter().fold(0.0_f64, |a, &w| a.max(w.abs()));
    -(1.0 + 3.0 * max)
}

/// Gain of inserting `(i, j')` and `(i', j)` while removing `(i', j')`, for
/// every candidate `(i', j')`. Ineligible candidates get [`swap_sentinel`].
pub fn swap_score(weights: &[f64], state: &GreedyState, i: usize, j: usize) -> Result<Vec<f64>> {
    let (m, n) = (state.m, state.n);
    if weights.len() != m * m {
        return Err(Error::Shape(format!("{} weights for a {m}x{m} block", weights.len())));
    }
    if i >= m || j >= m || state.row_counts[i] >= n || state.col_counts[j] >= n {
        return Err(Error::Precondition(format!("({i}, {j}) is not an under-full row/column pair")));
    }
    let sentinel = swap_sentinel(weights);
    let mut scores = vec![sentinel; m * m];
    for ip in 0..m {
        if ip == i || state.get(ip, j) {
            continue;
        }
        for jp in 0..m {
            if jp == j || !state.get(ip, jp) || state.get(i, jp) {
                continue;
            }
            scores[ip * m + jp] =
                weights[i * m + jp].abs() + weights[ip * m + j].abs() - weights[ip * m + jp].abs();
        }
    }
    Ok(scores)
}

/// First index of the maximum (ties resolve to the lowest flat index).
fn argmax(values: &[f64]) -> (usize, f64) {
    let mut best = (0, values[0]);
    for (k, &v) in values.iter().enumerate().skip(1) {
        if v > best.1 {
            best = (k, v);
        }
    }
    best
}

/// Up to `steps` strictly improving swaps. Returns how many were applied.
pub fn local_search_block(weights: &[f64], state: &mut GreedyState, steps: usize) -> usize {
    let m = state.m;
    let mut applied = 0;
    for _ in 0..steps {
        let Some((i, j)) = state.deficit_pair() else { break };
        let scores = swap_score(weights, state, i, j).expect("deficit pair is under-full");
        let (flat, gain) = argmax(&scores);
        if gain <= 0.0 {
            break;
        }
        state.apply_swap(i, j, flat / m, flat % m);
        applied += 1;
    }
    applied
}

/// Fills the remaining deficits so that every line holds exactly `n` ones.
/// Returns the number of moves made.
///
/// For the lowest deficit pair `(i, j)`: insert `(i, j)` directly if it is
/// free, otherwise take the eligible swap whose insertion in row `i` has the
/// largest `|W|`, otherwise the largest-`|W|` free cell at any deficit
/// row/column crossing. One of the three always exists while deficits remain.
pub fn complete_block(weights: &[f64], state: &mut GreedyState) -> usize {
    let (m, n) = (state.m, state.n);
    let mut moves = 0;
    while let Some((i, j)) = state.deficit_pair() {
        if !state.get(i, j) {
            state.insert(i, j);
            moves += 1;
            continue;
        }
        let scores = swap_score(weights, state, i, j).expect("deficit pair is under-full");
        let sentinel = swap_sentinel(weights);
        let mut pick: Option<(usize, f64, f64)> = None;
        for (flat, &s) in scores.iter().enumerate() {
            if s == sentinel {
                continue;
            }
            let ins = weights[i * m + flat % m].abs();
            let better = match pick {
                None => true,
                Some((_, bi, bs)) => ins > bi || (ins == bi && s > bs),
            };
            if better {
                pick = Some((flat, ins, s));
            }
        }
        if let Some((flat, _, _)) = pick {
            state.apply_swap(i, j, flat / m, flat % m);
            moves += 1;
            continue;
        }
        let mut direct: Option<(usize, f64)> = None;
        for r in (0..m).filter(|&r| state.row_counts[r] < n) {
            for c in (0..m).filter(|&c| state.can_insert(r, c)) {
                let w = weights[r * m + c].abs();
                if direct.is_none_or(|(_, bw)| w > bw) {
                    direct = Some((r * m + c, w));
                }
            }
        }
        match direct {
            Some((flat, _)) => {
                state.insert(flat / m, flat % m);
                moves += 1;
            }
            None => break,
        }
    }
    moves
}

/// Runs the local-search phase over a batch of partial masks (no completion).
pub fn local_search(
    weights: &BlockBatch,
    mask: &BinaryMaskBatch,
    pattern: SparsityPattern,
    config: &RoundingConfig,
) -> Result<BinaryMaskBatch> {
    let m = weights.m();
    if mask.m() != m || mask.len() != weights.len() || pattern.m() != m {
        return Err(Error::Shape("weights, mask and pattern disagree on block layout".into()));
    }
    let blocks = weights
        .par_blocks()
        .zip(mask.bits().par_chunks_exact(m * m))
        .map(|(w, bits)| {
            let mut state = GreedyState::from_mask(bits, m, pattern.n())?;
            local_search_block(w, &mut state, config.local_search_steps);
            Ok(state.into_mask())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BinaryMaskBatch::from_blocks(m, blocks))
}

/// Counters describing how rounding reached feasibility.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RoundingStats {
    /// Positive-gain swaps applied by local search.
    pub swaps: usize,
    /// Moves made by the completion pass.
    pub completion_moves: usize,
    /// Blocks that needed at least one completion move.
    pub completed_blocks: usize,
}

impl RoundingStats {
    fn absorb(&mut self, swaps: usize, moves: usize) {
        self.swaps += swaps;
        self.completion_moves += moves;
        self.completed_blocks += usize::from(moves > 0);
    }
}

/// Greedy on `scores`, local search and completion on `weights`.
pub fn round_block(
    scores: &[f64],
    weights: &[f64],
    m: usize,
    n: usize,
    steps: usize,
) -> (Vec<u8>, usize, usize) {
    let mut state = greedy_block(scores, m, n);
    let swaps = local_search_block(weights, &mut state, steps);
    let moves = complete_block(weights, &mut state);
    (state.into_mask(), swaps, moves)
}

/// Rounds every block of `scores` against `batch`; output is feasible.
pub fn round_batch(
    scores: &[f64],
    batch: &BlockBatch,
    pattern: SparsityPattern,
    config: &RoundingConfig,
) -> Result<(BinaryMaskBatch, RoundingStats)> {
    let m = batch.m();
    if scores.len() != batch.magnitudes().len() {
        return Err(Error::Shape("score and weight batches differ in size".into()));
    }
    let rounded: Vec<(Vec<u8>, usize, usize)> = scores
        .par_chunks_exact(m * m)
        .zip(batch.par_blocks())
        .map(|(s, w)| round_block(s, w, m, pattern.n(), config.local_search_steps))
        .collect();
    let mut stats = RoundingStats::default();
    let mut blocks = Vec::with_capacity(rounded.len());
    for (bits, swaps, moves) in rounded {
        stats.absorb(swaps, moves);
        blocks.push(bits);
    }
    let mask = BinaryMaskBatch::from_blocks(m, blocks);
    if let Some(v) = check_feasible(&mask, pattern).violations.first() {
        return Err(Error::InfeasibleInternal { block: v.block });
    }
    Ok((mask, stats))
}

/// Full mask pipeline result for one matrix or batch.
#[derive(Debug, Clone)]
pub struct MaskSolution {
    pub mask: BinaryMaskBatch,
    pub report: MaskObjectiveReport,
    pub stats: RoundingStats,
}

/// Entropy-regularized transport followed by rounding, on a prepared batch.
pub fn solve_batch(
    batch: &BlockBatch,
    pattern: SparsityPattern,
    dykstra: &DykstraConfig,
    rounding: &RoundingConfig,
) -> Result<MaskSolution> {
    let frac = dykstra_solve(batch, pattern, dykstra)?;
    let (mask, stats) = round_batch(&frac.values(), batch, pattern, rounding)?;
    let report = mask_objective(batch, &mask)?;
    Ok(MaskSolution { mask, report, stats })
}

/// Partitions `matrix` into blocks and solves each for a transposable mask.
pub fn solve_mask(
    matrix: &DenseMatrix,
    pattern: SparsityPattern,
    dykstra: &DykstraConfig,
    rounding: &RoundingConfig,
) -> Result<(BlockBatch, MaskSolution)> {
    let batch = partition_blocks(matrix, pattern)?;
    let solution = solve_batch(&batch, pattern, dykstra, rounding)?;
    Ok((batch, solution))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::{block_objective, line_sums};

    const GOLDEN: [f64; 16] = [
        0.88, 0.01, 0.84, 0.27, //
        0.01, 0.71, 0.75, 0.53, //
        0.82, 0.78, 0.15, 0.25, //
        0.29, 0.50, 0.26, 0.95,
    ];

    #[test]
    fn greedy_identity_dominant() {
        let s = greedy_block(&[0.9, 0.1, 0.2, 0.8], 2, 1);
        assert_eq!(s.mask(), &[1, 0, 0, 1]);
    }

    #[test]
    fn greedy_ties_fill_by_index() {
        let s = greedy_block(&[1.0; 16], 4, 2);
        assert_eq!(
            s.mask(),
            &[
                1, 1, 0, 0, //
                1, 1, 0, 0, //
                0, 0, 1, 1, //
                0, 0, 1, 1,
            ]
        );
    }

    #[test]
    fn greedy_counters_match_mask() {
        let s = greedy_block(&GOLDEN, 4, 2);
        let (r, c) = line_sums(s.mask(), 4);
        assert_eq!(r, s.row_counts());
        assert_eq!(c, s.col_counts());
        assert_eq!(s.deficit_pair(), Some((3, 3)));
    }

    #[test]
    fn swap_score_requires_deficit() {
        let s = greedy_block(&GOLDEN, 4, 2);
        assert!(matches!(swap_score(&GOLDEN, &s, 0, 3), Err(Error::Precondition(_))));
    }

    #[test]
    fn swap_score_all_sentinel_when_nothing_removable() {
        // Only the deficit row/column pair is populated: no (i', j') qualifies.
        let mut state = GreedyState::empty(4, 2);
        state.insert(0, 0);
        let scores = swap_score(&GOLDEN, &state, 0, 0).unwrap();
        let sentinel = swap_sentinel(&GOLDEN);
        assert!(scores.iter().all(|&s| s == sentinel));
        assert!(sentinel < -(GOLDEN.iter().cloned().fold(0.0, f64::max) * 3.0));
    }

    #[test]
    fn local_search_leaves_feasible_mask_alone() {
        let bits = [1, 1, 0, 0, 0, 1, 1, 0, 0, 0, 1, 1, 1, 0, 0, 1];
        let mut state = GreedyState::from_mask(&bits, 4, 2).unwrap();
        assert_eq!(local_search_block(&GOLDEN, &mut state, 10), 0);
        assert_eq!(state.mask(), &bits);
    }

    #[test]
    fn from_mask_rejects_overfull() {
        let bits = [1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0];
        assert!(GreedyState::from_mask(&bits, 4, 2).is_err());
    }

    #[test]
    fn completion_fills_empty_and_partial_masks() {
        for n in 1..=4 {
            let mut state = GreedyState::empty(4, n);
            let moves = complete_block(&GOLDEN, &mut state);
            assert!(state.is_complete());
            assert_eq!(moves, 4 * n);
        }
        // Greedy leaves row 3 / column 3 short; completion repairs it.
        let mut state = greedy_block(&GOLDEN, 4, 2);
        assert_eq!(complete_block(&GOLDEN, &mut state), 1);
        assert!(state.is_complete());
    }

    #[test]
    fn dense_pattern_keeps_everything() {
        let w: Vec<f64> = (0..16).map(|x| x as f64 * 0.1 - 0.5).collect();
        let m = DenseMatrix::new(4, 4, w.clone()).unwrap();
        let p = SparsityPattern::new(4, 4).unwrap();
        let (_, sol) = solve_mask(&m, p, &DykstraConfig::default(), &RoundingConfig::default()).unwrap();
        assert!(sol.mask.bits().iter().all(|&b| b == 1));
        let total: f64 = w.iter().map(|v| v.abs()).sum();
        assert!((sol.report.objective - total).abs() < 1e-12);
    }

    #[test]
    fn golden_block_pipeline_reaches_optimum() {
        let m = DenseMatrix::new(4, 4, GOLDEN.to_vec()).unwrap();
        let p = SparsityPattern::new(2, 4).unwrap();
        let (batch, sol) = solve_mask(&m, p, &DykstraConfig::default(), &RoundingConfig::default()).unwrap();
        assert!(sol.report.objective >= 6.05 - 1e-9);
        assert!((block_objective(batch.block(0), sol.mask.block(0)) - sol.report.objective).abs() < 1e-12);
    }
}
