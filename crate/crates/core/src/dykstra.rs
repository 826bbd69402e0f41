//! Entropy-regularized capacitated transport on each `m x m` block.
//!
//! Each block is the KL projection of `exp(tau |W|)` onto the intersection of
//! three sets: rows summing to `n`, columns summing to `n`, and entries in
//! `[0, 1]`. The first two are affine, so their Dykstra correction terms
//! cancel and only the capacity set carries a dual. Everything runs in the
//! log domain so that large `tau |W|` never overflows.

use rayon::prelude::*;

use crate::block::{BlockBatch, SparsityPattern};
use crate::error::{Error, Result};

/// Coefficient used when `tau` is taken verbatim as `0.005 * max|W|`.
pub const ABSOLUTE_TAU_COEFFICIENT: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TauMode {
    /// `tau = tau_scale / max_block |W|`, so `tau |W|` is independent of scale.
    #[default]
    ScaleInvariant,
    /// `tau = 0.005 * max |W|` over the whole batch; `tau_scale` is ignored.
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DykstraConfig {
    pub tau_scale: f64,
    pub max_iters: usize,
    /// Stop early once both marginal violations drop below this. Zero disables.
    pub marginal_tol: f64,
    pub tau_mode: TauMode,
}

impl Default for DykstraConfig {
    fn default() -> Self {
        Self { tau_scale: 20.0, max_iters: 300, marginal_tol: 1e-4, tau_mode: TauMode::ScaleInvariant }
    }
}

impl DykstraConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_scale > 0.0 && self.tau_scale.is_finite()) {
            return Err(Error::InvalidConfig(format!("tau_scale must be positive, got {}", self.tau_scale)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if !(self.marginal_tol >= 0.0) {
            return Err(Error::InvalidConfig(format!("marginal_tol must be >= 0, got {}", self.marginal_tol)));
        }
        Ok(())
    }
}

/// Stable `log(sum(exp(x)))` over a strided view.
fn logsumexp(x: &[f64], start: usize, stride: usize, count: usize) -> f64 {
    let mut mx = f64::NEG_INFINITY;
    for k in 0..count {
        mx = mx.max(x[start + k * stride]);
    }
    if mx == f64::NEG_INFINITY {
        return mx;
    }
    let mut acc = 0.0;
    for k in 0..count {
        acc += (x[start + k * stride] - mx).exp();
    }
    mx + acc.ln()
}

/// Iteration state of one block: log-plan and log-dual of the capacity set.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockState {
    m: usize,
    log_n: f64,
    n: usize,
    log_s: Vec<f64>,
    log_q: Vec<f64>,
}

impl BlockState {
    /// Starts from `log S = tau |W|` and `log Q = 0`.
    pub fn new(magnitudes: &[f64], m: usize, n: usize, tau: f64) -> Self {
        debug_assert_eq!(magnitudes.len(), m * m);
        Self {
            m,
            n,
            log_n: (n as f64).ln(),
            log_s: magnitudes.iter().map(|w| tau * w).collect(),
            log_q: vec![0.0; m * m],
        }
    }

    pub fn project_rows(&mut self) {
        let m = self.m;
        for i in 0..m {
            let shift = logsumexp(&self.log_s, i * m, 1, m) - self.log_n;
            for v in &mut self.log_s[i * m..(i + 1) * m] {
                *v -= shift;
            }
        }
    }

    pub fn project_cols(&mut self) {
        let m = self.m;
        for j in 0..m {
            let shift = logsumexp(&self.log_s, j, m, m) - self.log_n;
            for i in 0..m {
                self.log_s[i * m + j] -= shift;
            }
        }
    }

    /// Clamp onto `S <= 1` and fold the clipped mass into the dual.
    pub fn project_capacity(&mut self) {
        for (s, q) in self.log_s.iter_mut().zip(self.log_q.iter_mut()) {
            let tmp = *s + *q;
            *s = tmp.min(0.0);
            *q = tmp - *s;
        }
    }

    pub fn sweep(&mut self) {
        self.project_rows();
        self.project_cols();
        self.project_capacity();
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_s
    }

    pub fn log_dual(&self) -> &[f64] {
        &self.log_q
    }

    pub fn values(&self) -> Vec<f64> {
        self.log_s.iter().map(|v| v.exp()).collect()
    }

    /// `(max |row_sum - n|, max |col_sum - n|)` of the current plan.
    pub fn marginal_violation(&self) -> (f64, f64) {
        violation_of(&self.values(), self.m, self.n)
    }

    /// Dual value (in objective units) of the potentials behind the current
    /// iterate. Each projection step minimises it exactly over one group of
    /// potentials, so it never increases, and it bounds the regularised
    /// optimum `<S, |W|> + (H(S) + sum S) / tau` from above.
    pub fn dual_objective(&self, magnitudes: &[f64], tau: f64) -> f64 {
        // log S + log Q - tau |W| = a_i + b_j, and n (sum a + sum b) is
        // (n / m) times the sum of that matrix.
        let mut mass = 0.0;
        let mut potentials = 0.0;
        let mut capacity = 0.0;
        for ((ls, lq), w) in self.log_s.iter().zip(&self.log_q).zip(magnitudes) {
            mass += ls.exp();
            potentials += ls + lq - tau * w;
            capacity += lq;
        }
        (mass - potentials * self.n as f64 / self.m as f64 + capacity) / tau
    }

    fn has_nan(&self) -> bool {
        self.log_s.iter().chain(&self.log_q).any(|v| v.is_nan())
    }
}

fn violation_of(values: &[f64], m: usize, n: usize) -> (f64, f64) {
    let target = n as f64;
    let mut col = vec![0.0; m];
    let mut row_v: f64 = 0.0;
    for i in 0..m {
        let mut r = 0.0;
        for j in 0..m {
            let v = values[i * m + j];
            r += v;
            col[j] += v;
        }
        row_v = row_v.max((r - target).abs());
    }
    let col_v = col.iter().fold(0.0_f64, |acc, c| acc.max((c - target).abs()));
    (row_v, col_v)
}

/// Dykstra output for a whole batch, kept in the log domain.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalMask {
    m: usize,
    log_values: Vec<f64>,
    log_dual: Vec<f64>,
    sweeps: Vec<usize>,
}

impl FractionalMask {
    /// Wraps plain plan values (entries in `[0, 1]`), e.g. for diagnostics.
    pub fn from_values(m: usize, values: &[f64]) -> Result<Self> {
        if m == 0 || values.is_empty() || !values.len().is_multiple_of(m * m) {
            return Err(Error::Shape(format!("{} values do not form {m}x{m} blocks", values.len())));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Shape("fractional entries must lie in [0, 1]".into()));
        }
        let b = values.len() / (m * m);
        Ok(Self {
            m,
            log_values: values.iter().map(|v| v.ln()).collect(),
            log_dual: vec![0.0; values.len()],
            sweeps: vec![0; b],
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.sweeps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sweeps.is_empty()
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }

    pub fn log_dual(&self) -> &[f64] {
        &self.log_dual
    }

    /// Plan values `exp(log S)`, all in `[0, 1]`.
    pub fn values(&self) -> Vec<f64> {
        self.log_values.iter().map(|v| v.exp()).collect()
    }

    /// Sweeps actually run per block (may be below `max_iters` on early stop).
    pub fn sweeps(&self) -> &[usize] {
        &self.sweeps
    }
}

/// The `tau` used for one block under `config`.
pub fn block_tau(config: &DykstraConfig, block_max: f64, batch_max: f64) -> f64 {
    match config.tau_mode {
        TauMode::ScaleInvariant if block_max > 0.0 => config.tau_scale / block_max,
        TauMode::ScaleInvariant => 0.0,
        TauMode::Absolute => ABSOLUTE_TAU_COEFFICIENT * batch_max,
    }
}

/// Runs up to `max_iters` sweeps on one block.
pub fn solve_block(
    magnitudes: &[f64],
    m: usize,
    n: usize,
    tau: f64,
    config: &DykstraConfig,
) -> Result<(BlockState, usize)> {
    let mut state = BlockState::new(magnitudes, m, n, tau);
    if state.log_s.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("tau*|W| overflowed (tau = {tau})")));
    }
    let mut sweeps = 0;
    while sweeps < config.max_iters {
        state.sweep();
        sweeps += 1;
        if config.marginal_tol > 0.0 {
            let (r, c) = state.marginal_violation();
            if r < config.marginal_tol && c < config.marginal_tol {
                break;
            }
        }
    }
    if state.has_nan() {
        return Err(Error::Numerical("NaN in log-domain plan".into()));
    }
    Ok((state, sweeps))
}

pub fn dykstra_solve(
    batch: &BlockBatch,
    pattern: SparsityPattern,
    config: &DykstraConfig,
) -> Result<FractionalMask> {
    config.validate()?;
    let m = batch.m();
    if pattern.m() != m {
        return Err(Error::Shape(format!("pattern {pattern} applied to {m}x{m} blocks")));
    }
    let batch_max = batch.magnitudes().iter().fold(0.0_f64, |a, &v| a.max(v));
    let solved: Vec<(BlockState, usize)> = batch
        .par_blocks()
        .map(|w| {
            let block_max = w.iter().fold(0.0_f64, |a, &v| a.max(v));
            let tau = block_tau(config, block_max, batch_max);
            solve_block(w, m, pattern.n(), tau, config)
        })
        .collect::<Result<_>>()?;

    let mut log_values = Vec::with_capacity(batch.magnitudes().len());
    let mut log_dual = Vec::with_capacity(batch.magnitudes().len());
    let mut sweeps = Vec::with_capacity(batch.len());
    for (state, k) in solved {
        log_values.extend_from_slice(&state.log_s);
        log_dual.extend_from_slice(&state.log_q);
        sweeps.push(k);
    }
    Ok(FractionalMask { m, log_values, log_dual, sweeps })
}

/// Per-block `(row_violation, col_violation)` max-abs marginal deviations.
pub fn marginal_violation(frac: &FractionalMask, pattern: SparsityPattern) -> Vec<(f64, f64)> {
    let m = frac.m();
    frac.values()
        .chunks_exact(m * m)
        .map(|v| violation_of(v, m, pattern.n()))
        .collect()
}

/// `<S, |W|> + H(S) / tau` with `H(S) = -sum S ln S`.
pub fn entropic_objective(values: &[f64], magnitudes: &[f64], tau: f64) -> f64 {
    let linear: f64 = values.iter().zip(magnitudes).map(|(s, w)| s * w).sum();
    let entropy: f64 = values.iter().filter(|&&s| s > 0.0).map(|s| -s * s.ln()).sum();
    linear + entropy / tau
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pat(n: usize, m: usize) -> SparsityPattern {
        SparsityPattern::new(n, m).unwrap()
    }

    #[test]
    fn uniform_block_converges_to_n_over_m() {
        for (n, m) in [(1, 2), (2, 4), (3, 8), (5, 8)] {
            let batch = BlockBatch::from_blocks(m, vec![0.7; m * m]).unwrap();
            let frac = dykstra_solve(&batch, pat(n, m), &DykstraConfig::default()).unwrap();
            for v in frac.values() {
                assert!((v - n as f64 / m as f64).abs() < 1e-12, "{n}:{m} gave {v}");
            }
        }
    }

    #[test]
    fn zero_block_is_uniform_plan() {
        let batch = BlockBatch::from_blocks(4, vec![0.0; 16]).unwrap();
        let frac = dykstra_solve(&batch, pat(2, 4), &DykstraConfig::default()).unwrap();
        assert!(frac.values().iter().all(|v| (v - 0.5).abs() < 1e-12));
    }

    #[test]
    fn identity_block_concentrates_on_diagonal() {
        let batch = BlockBatch::from_blocks(2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let cfg = DykstraConfig { tau_scale: 50.0, ..Default::default() };
        let v = dykstra_solve(&batch, pat(1, 2), &cfg).unwrap().values();
        assert!(v[0] > 1.0 - 1e-9 && v[3] > 1.0 - 1e-9);
        assert!(v[1] < 1e-9 && v[2] < 1e-9);
    }

    #[test]
    fn violation_diagnostics() {
        let p = pat(2, 4);
        let feasible = FractionalMask::from_values(4, &[0.5; 16]).unwrap();
        assert_eq!(marginal_violation(&feasible, p), vec![(0.0, 0.0)]);
        let zeros = FractionalMask::from_values(4, &[0.0; 16]).unwrap();
        assert_eq!(marginal_violation(&zeros, p), vec![(2.0, 2.0)]);
    }

    #[test]
    fn config_validation() {
        assert!(DykstraConfig { tau_scale: 0.0, ..Default::default() }.validate().is_err());
        assert!(DykstraConfig { max_iters: 0, ..Default::default() }.validate().is_err());
        assert!(DykstraConfig { marginal_tol: -1.0, ..Default::default() }.validate().is_err());
        assert!(DykstraConfig::default().validate().is_ok());
    }

    #[test]
    fn overflow_is_numerical_error() {
        let batch = BlockBatch::from_blocks(2, vec![1e300, 0.0, 0.0, 1e300]).unwrap();
        let cfg = DykstraConfig { tau_mode: TauMode::Absolute, ..Default::default() };
        assert!(matches!(dykstra_solve(&batch, pat(1, 2), &cfg), Err(Error::Numerical(_))));
    }

    #[test]
    fn pattern_side_mismatch() {
        let batch = BlockBatch::from_blocks(4, vec![1.0; 16]).unwrap();
        assert!(dykstra_solve(&batch, pat(2, 8), &DykstraConfig::default()).is_err());
    }
}
