//! Relative error of every solver on the same Gaussian blocks.

use tsenor::bench::{run_bench, BenchSpec, Solver, SolverSettings, WeightDistribution};
use tsenor::SparsityPattern;

fn main() -> tsenor::Result<()> {
    for (n, m) in [(2, 4), (4, 8), (8, 16)] {
        let pattern = SparsityPattern::new(n, m)?;
        let spec = BenchSpec {
            blocks: 200,
            pattern,
            distribution: WeightDistribution::Gaussian,
            solvers: Solver::ALL.to_vec(),
            settings: SolverSettings { k: 200, seed: 5, ..SolverSettings::default() },
            timings: true,
        };
        println!("{pattern}");
        for r in run_bench(&spec)?.records {
            println!(
                "  {:>8}  mean {:.5}  max {:.5}  {:8.1} ms",
                r.solver,
                r.mean_relative_error,
                r.max_relative_error,
                r.wall_time_ms.unwrap_or(0.0)
            );
        }
    }
    Ok(())
}
