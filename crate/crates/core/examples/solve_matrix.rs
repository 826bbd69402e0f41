//! Solves a transposable 8:16 mask for a 256x256 Gaussian matrix and checks
//! that the mask, transposed, is still a valid 8:16 mask.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use tsenor::block::check_groups;
use tsenor::{assemble_mask, solve_mask, DenseMatrix, DykstraConfig, RoundingConfig, SparsityPattern};

fn main() -> tsenor::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let size = 256;
    let w = DenseMatrix::new(size, size, (0..size * size).map(|_| StandardNormal.sample(&mut rng)).collect())?;
    let pattern = SparsityPattern::new(8, 16)?;

    let (batch, sol) = solve_mask(&w, pattern, &DykstraConfig::default(), &RoundingConfig::default())?;
    let mask = assemble_mask(&sol.mask, batch.origin(), size, size)?;

    let total: f64 = w.values().iter().map(|v| v.abs()).sum();
    println!("{} blocks, kept {:.1}% of |W|", batch.len(), 100.0 * sol.report.objective / total);
    println!(
        "{} swaps, {} completion moves in {} blocks",
        sol.stats.swaps, sol.stats.completion_moves, sol.stats.completed_blocks
    );
    println!("violations as stored: {}", check_groups(&mask, pattern, true, true)?.len());
    println!("violations transposed: {}", check_groups(&mask.transpose(), pattern, true, true)?.len());
    Ok(())
}
