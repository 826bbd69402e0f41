//! The min-cost-flow oracle against exhaustive search, and the size of the
//! search space it avoids.

use std::time::Instant;

use tsenor::bench::{sample_blocks, WeightDistribution};
use tsenor::exact::count_feasible;
use tsenor::{brute_force, exact_solve, SparsityPattern};

fn main() -> tsenor::Result<()> {
    for (n, m) in [(1, 4), (2, 4), (2, 6), (3, 6)] {
        let pattern = SparsityPattern::new(n, m)?;
        let batch = sample_blocks(WeightDistribution::Uniform, 20, m, 4)?;
        let (mut flow_time, mut brute_time, mut worst) = (0.0, 0.0, 0.0f64);
        for block in batch.blocks() {
            let t = Instant::now();
            let flow = exact_solve(block, m, pattern)?;
            flow_time += t.elapsed().as_secs_f64();
            let t = Instant::now();
            let brute = brute_force(block, m, pattern)?;
            brute_time += t.elapsed().as_secs_f64();
            worst = worst.max((flow.objective - brute.objective).abs());
        }
        println!(
            "{pattern}: {:>6} feasible masks, max |flow - brute| {worst:.1e}, flow {:.2} ms, brute {:.2} ms",
            count_feasible(pattern)?,
            flow_time * 1e3,
            brute_time * 1e3
        );
    }
    let big = SparsityPattern::new(16, 32)?;
    let batch = sample_blocks(WeightDistribution::Gaussian, 1, 32, 4)?;
    let t = Instant::now();
    let sol = exact_solve(batch.block(0), 32, big)?;
    println!("{big}: optimum {:.3} in {:.2} ms", sol.objective, t.elapsed().as_secs_f64() * 1e3);
    Ok(())
}
