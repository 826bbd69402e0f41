//! Benchmark harness: random block generation, solver comparison against the
//! exact oracle, and the rounding ablation sweep.
//!
//! Everything here is deterministic for a given seed and independent of the
//! worker-pool size; wall times are only reported when asked for.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::{bi_nm_block, bi_nm_batch, random_best_batch, two_approximation};
use crate::block::{block_objective, BinaryMaskBatch, BlockBatch, SparsityPattern};
use crate::dykstra::{dykstra_solve, DykstraConfig};
use crate::error::{Error, Result};
use crate::exact::{exact_solve_batch, relative_error_or_zero};
use crate::io::{BenchRecord, BenchReport};
use crate::rounding::{round_batch, solve_batch, RoundingConfig};

/// Distribution of the raw block entries (magnitudes are taken afterwards).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightDistribution {
    #[default]
    Gaussian,
    /// Uniform on `[-1, 1)`.
    Uniform,
    /// Standard Laplace, drawn by inverting its CDF.
    Laplace,
}

impl WeightDistribution {
    pub fn name(self) -> &'static str {
        match self {
            WeightDistribution::Gaussian => "gaussian",
            WeightDistribution::Uniform => "uniform",
            WeightDistribution::Laplace => "laplace",
        }
    }

    pub fn sample(self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            WeightDistribution::Gaussian => rng.sample(StandardNormal),
            WeightDistribution::Uniform => rng.random_range(-1.0..1.0),
            WeightDistribution::Laplace => {
                let u: f64 = rng.random::<f64>() - 0.5;
                -u.signum() * (1.0 - 2.0 * u.abs()).ln()
            }
        }
    }
}

impl fmt::Display for WeightDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WeightDistribution {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "gaussian" => Ok(WeightDistribution::Gaussian),
            "uniform" => Ok(WeightDistribution::Uniform),
            "laplace" => Ok(WeightDistribution::Laplace),
            _ => Err(format!("unknown distribution {s:?} (gaussian|uniform|laplace)")),
        }
    }
}

/// `count` random `m x m` blocks, drawn sequentially from one seeded stream.
pub fn sample_blocks(dist: WeightDistribution, count: usize, m: usize, seed: u64) -> Result<BlockBatch> {
    if count == 0 {
        return Err(Error::InvalidConfig("block count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..count * m * m).map(|_| dist.sample(&mut rng)).collect();
    BlockBatch::from_blocks(m, values)
}

/// Mask solvers exposed by `solve` and `bench`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Solver {
    Tsenor,
    Exact,
    Greedy2,
    BiNm,
    Random,
}

impl Solver {
    pub const ALL: [Solver; 5] = [Solver::Tsenor, Solver::Exact, Solver::Greedy2, Solver::BiNm, Solver::Random];

    pub fn name(self) -> &'static str {
        match self {
            Solver::Tsenor => "tsenor",
            Solver::Exact => "exact",
            Solver::Greedy2 => "greedy2",
            Solver::BiNm => "binm",
            Solver::Random => "random",
        }
    }

    /// Whether every row and column of every block is guaranteed to hold
    /// exactly `n` ones (Bi-NM only guarantees at most `n`).
    pub fn always_full(self) -> bool {
        self != Solver::BiNm
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Solver {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Solver::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown solver {s:?} (tsenor|exact|greedy2|binm|random)"))
    }
}

/// Knobs shared by all solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub dykstra: DykstraConfig,
    pub rounding: RoundingConfig,
    /// Samples for the random baseline.
    pub k: usize,
    pub seed: u64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { dykstra: DykstraConfig::default(), rounding: RoundingConfig::default(), k: 1000, seed: 0 }
    }
}

/// Runs one solver on every block.
pub fn run_solver(
    solver: Solver,
    batch: &BlockBatch,
    pattern: SparsityPattern,
    settings: &SolverSettings,
) -> Result<BinaryMaskBatch> {
    match solver {
        Solver::Tsenor => solve_batch(batch, pattern, &settings.dykstra, &settings.rounding).map(|s| s.mask),
        Solver::Exact => {
            let sols = exact_solve_batch(batch, pattern)?;
            Ok(BinaryMaskBatch::from_blocks(batch.m(), sols.into_iter().map(|s| s.mask).collect()))
        }
        Solver::Greedy2 => two_approximation(batch, pattern).map(|(mask, _)| mask),
        Solver::BiNm => bi_nm_batch(batch, pattern),
        Solver::Random => random_best_batch(batch, pattern, settings.k, settings.seed),
    }
}

/// Rounding ablation variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Row-then-column top-n on the fractional plan.
    EntropySimple,
    /// Greedy on the fractional plan, completion, no swaps.
    EntropyGreedy,
    /// Greedy on the fractional plan, local search, completion.
    EntropyGreedyLs,
    /// Greedy on `|W|` and completion.
    DirectGreedy,
    /// Greedy on `|W|`, local search, completion.
    DirectGreedyLs,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::EntropySimple,
        Variant::EntropyGreedy,
        Variant::EntropyGreedyLs,
        Variant::DirectGreedy,
        Variant::DirectGreedyLs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::EntropySimple => "entropy+simple",
            Variant::EntropyGreedy => "entropy+greedy",
            Variant::EntropyGreedyLs => "entropy+greedy+ls",
            Variant::DirectGreedy => "direct+greedy",
            Variant::DirectGreedyLs => "direct+greedy+ls",
        }
    }

    pub fn always_full(self) -> bool {
        self != Variant::EntropySimple
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Variant::ALL.into_iter().find(|v| v.name() == s).ok_or_else(|| format!("unknown variant {s:?}"))
    }
}

pub fn run_variant(
    variant: Variant,
    batch: &BlockBatch,
    pattern: SparsityPattern,
    settings: &SolverSettings,
) -> Result<BinaryMaskBatch> {
    let no_swaps = RoundingConfig { local_search_steps: 0 };
    let m = batch.m();
    match variant {
        Variant::EntropySimple => {
            let frac = dykstra_solve(batch, pattern, &settings.dykstra)?.values();
            let blocks = frac.par_chunks_exact(m * m).map(|s| bi_nm_block(s, m, pattern.n())).collect();
            Ok(BinaryMaskBatch::from_blocks(m, blocks))
        }
        Variant::EntropyGreedy => {
            let frac = dykstra_solve(batch, pattern, &settings.dykstra)?.values();
            round_batch(&frac, batch, pattern, &no_swaps).map(|(mask, _)| mask)
        }
        Variant::EntropyGreedyLs => {
            let frac = dykstra_solve(batch, pattern, &settings.dykstra)?.values();
            round_batch(&frac, batch, pattern, &settings.rounding).map(|(mask, _)| mask)
        }
        Variant::DirectGreedy => two_approximation(batch, pattern).map(|(mask, _)| mask),
        Variant::DirectGreedyLs => {
            round_batch(batch.magnitudes(), batch, pattern, &settings.rounding).map(|(mask, _)| mask)
        }
    }
}

/// Per-block objectives and relative errors of a mask batch.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub objectives: Vec<f64>,
    pub relative_errors: Vec<f64>,
}

impl Evaluation {
    pub fn mean_relative_error(&self) -> f64 {
        mean(&self.relative_errors)
    }

    pub fn max_relative_error(&self) -> f64 {
        self.relative_errors.iter().cloned().fold(0.0, f64::max)
    }

    pub fn mean_objective(&self) -> f64 {
        mean(&self.objectives)
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Optimal objective of every block, from the exact oracle.
pub fn optimal_objectives(batch: &BlockBatch, pattern: SparsityPattern) -> Result<Vec<f64>> {
    let sols = exact_solve_batch(batch, pattern)?;
    Ok(sols.iter().zip(batch.blocks()).map(|(s, w)| block_objective(w, &s.mask)).collect())
}

/// Scores `mask` against the per-block optima. All-zero blocks count as
/// zero error.
pub fn evaluate(batch: &BlockBatch, mask: &BinaryMaskBatch, optimal: &[f64]) -> Result<Evaluation> {
    if mask.len() != batch.len() || optimal.len() != batch.len() || mask.m() != batch.m() {
        return Err(Error::Shape("mask, batch and optima disagree in size".into()));
    }
    let objectives: Vec<f64> = batch.blocks().zip(mask.blocks()).map(|(w, s)| block_objective(w, s)).collect();
    let relative_errors = objectives.iter().zip(optimal).map(|(&c, &o)| relative_error_or_zero(c, o)).collect();
    Ok(Evaluation { objectives, relative_errors })
}

/// Inputs of a solver comparison on one pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchSpec {
    pub blocks: usize,
    pub pattern: SparsityPattern,
    pub distribution: WeightDistribution,
    pub solvers: Vec<Solver>,
    pub settings: SolverSettings,
    /// Include solver wall time in the records. Off by default because it
    /// makes the report differ between runs.
    pub timings: bool,
}

/// Compares each solver with the exact oracle on freshly sampled blocks.
pub fn run_bench(spec: &BenchSpec) -> Result<BenchReport> {
    let seed = spec.settings.seed;
    let batch = sample_blocks(spec.distribution, spec.blocks, spec.pattern.m(), seed)?;
    let optimal = optimal_objectives(&batch, spec.pattern)?;
    let mut records = Vec::with_capacity(spec.solvers.len());
    for &solver in &spec.solvers {
        let start = Instant::now();
        let mask = run_solver(solver, &batch, spec.pattern, &spec.settings)?;
        let elapsed = start.elapsed().as_secs_f64() * 1e3;
        let eval = evaluate(&batch, &mask, &optimal)?;
        records.push(BenchRecord {
            solver: solver.name().into(),
            pattern: spec.pattern.to_string(),
            blocks: batch.len(),
            mean_relative_error: eval.mean_relative_error(),
            max_relative_error: eval.max_relative_error(),
            mean_objective: eval.mean_objective(),
            wall_time_ms: spec.timings.then_some(elapsed),
            seed,
        });
    }
    Ok(BenchReport::new(spec.distribution.name(), seed, records))
}

/// Factorial sweep over patterns and rounding variants.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub patterns: Vec<SparsityPattern>,
    pub block_count: usize,
    pub distribution: WeightDistribution,
    pub variants: Vec<Variant>,
}

impl SweepSpec {
    /// The eight patterns of the relative-error study with all variants.
    pub fn standard(block_count: usize) -> Self {
        let patterns = [(4, 8), (3, 8), (6, 16), (8, 16), (4, 16), (12, 32), (16, 32), (8, 32)]
            .into_iter()
            .map(|(n, m)| SparsityPattern::new(n, m).expect("valid pattern"))
            .collect();
        Self { patterns, block_count, distribution: WeightDistribution::Gaussian, variants: Variant::ALL.to_vec() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_count == 0 {
            return Err(Error::InvalidConfig("block_count must be at least 1".into()));
        }
        if self.patterns.is_empty() || self.variants.is_empty() {
            return Err(Error::InvalidConfig("sweep needs at least one pattern and one variant".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub pattern: String,
    pub variant: String,
    pub blocks: usize,
    pub mean_relative_error: f64,
    pub max_relative_error: f64,
    /// Solver-only wall time; excludes sampling and the oracle.
    pub wall_time_ms: f64,
    #[serde(skip)]
    pub relative_errors: Vec<f64>,
}

/// Runs every variant on every pattern. Blocks for a pattern are drawn from
/// `seed` mixed with the pattern, so adding patterns does not change others.
pub fn run_sweep(spec: &SweepSpec, settings: &SolverSettings) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let mut rows = Vec::with_capacity(spec.patterns.len() * spec.variants.len());
    for &pattern in &spec.patterns {
        let seed = pattern_seed(settings.seed, pattern);
        let batch = sample_blocks(spec.distribution, spec.block_count, pattern.m(), seed)?;
        let optimal = optimal_objectives(&batch, pattern)?;
        for &variant in &spec.variants {
            let start = Instant::now();
            let mask = run_variant(variant, &batch, pattern, settings)?;
            let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
            let eval = evaluate(&batch, &mask, &optimal)?;
            rows.push(SweepRow {
                pattern: pattern.to_string(),
                variant: variant.name().into(),
                blocks: batch.len(),
                mean_relative_error: eval.mean_relative_error(),
                max_relative_error: eval.max_relative_error(),
                wall_time_ms,
                relative_errors: eval.relative_errors,
            });
        }
    }
    Ok(rows)
}

/// Seed for the blocks of `pattern` in a run seeded with `seed`.
pub fn pattern_seed(seed: u64, pattern: SparsityPattern) -> u64 {
    crate::baselines::block_seed(seed, (pattern.n() << 32) | pattern.m())
}

/// CSV table of sweep rows with a header line.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::{check_at_most, check_feasible};

    fn pat(n: usize, m: usize) -> SparsityPattern {
        SparsityPattern::new(n, m).unwrap()
    }

    #[test]
    fn names_round_trip() {
        for s in Solver::ALL {
            assert_eq!(s.name().parse::<Solver>().unwrap(), s);
        }
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        for d in ["gaussian", "uniform", "laplace"] {
            assert_eq!(d.parse::<WeightDistribution>().unwrap().name(), d);
        }
        assert!("lasso".parse::<Solver>().is_err());
    }

    #[test]
    fn sampling_is_seeded() {
        for dist in [WeightDistribution::Gaussian, WeightDistribution::Uniform, WeightDistribution::Laplace] {
            let a = sample_blocks(dist, 3, 8, 42).unwrap();
            let b = sample_blocks(dist, 3, 8, 42).unwrap();
            let c = sample_blocks(dist, 3, 8, 43).unwrap();
            assert_eq!(a.magnitudes(), b.magnitudes());
            assert_ne!(a.magnitudes(), c.magnitudes());
        }
        assert!(sample_blocks(WeightDistribution::Gaussian, 0, 8, 1).is_err());
    }

    #[test]
    fn laplace_has_unit_scale() {
        let b = sample_blocks(WeightDistribution::Laplace, 400, 16, 9).unwrap();
        // E|X| = 1 for the standard Laplace.
        let m = mean(b.magnitudes());
        assert!((m - 1.0).abs() < 0.02, "mean |x| = {m}");
    }

    #[test]
    fn exact_solver_has_zero_error() {
        let spec = BenchSpec {
            blocks: 20,
            pattern: pat(4, 8),
            distribution: WeightDistribution::Gaussian,
            solvers: vec![Solver::Exact, Solver::Tsenor, Solver::Greedy2],
            settings: SolverSettings { seed: 5, ..Default::default() },
            timings: false,
        };
        let report = run_bench(&spec).unwrap();
        assert_eq!(report.records[0].mean_relative_error, 0.0);
        assert_eq!(report.records[0].max_relative_error, 0.0);
        for r in &report.records {
            assert!(r.wall_time_ms.is_none());
            assert!(r.mean_relative_error >= -1e-9 && r.max_relative_error <= 1.0);
        }
        assert_eq!(run_bench(&spec).unwrap().to_json(), report.to_json());
    }

    #[test]
    fn variants_feasibility() {
        let batch = sample_blocks(WeightDistribution::Gaussian, 10, 8, 3).unwrap();
        let p = pat(3, 8);
        for v in Variant::ALL {
            let mask = run_variant(v, &batch, p, &SolverSettings::default()).unwrap();
            assert!(check_at_most(&mask, p).is_feasible());
            if v.always_full() {
                assert!(check_feasible(&mask, p).is_feasible(), "{v}");
            }
        }
    }

    #[test]
    fn sweep_table() {
        let spec = SweepSpec {
            patterns: vec![pat(2, 4), pat(4, 8)],
            block_count: 5,
            distribution: WeightDistribution::Uniform,
            variants: vec![Variant::EntropyGreedyLs, Variant::DirectGreedy],
        };
        let rows = run_sweep(&spec, &SolverSettings::default()).unwrap();
        assert_eq!(rows.len(), 4);
        let csv = sweep_csv(&rows);
        assert!(csv.starts_with("pattern,variant,blocks,mean_relative_error,max_relative_error,wall_time_ms\n"));
        assert_eq!(csv.lines().count(), 5);
        assert_eq!(SweepSpec::standard(1).patterns.len(), 8);
        assert!(run_sweep(&SweepSpec { block_count: 0, ..spec }, &SolverSettings::default()).is_err());
    }
}
