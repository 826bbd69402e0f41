//! The 4x4 example block solved four ways at 2:4: the entropic plan, its
//! rounding, the row-wise heuristic and the exact optimum (6.05).

use tsenor::baselines::bi_nm_block;
use tsenor::block::{block_objective, BlockBatch, SparsityPattern};
use tsenor::{dykstra_solve, exact_solve, solve_batch, DykstraConfig, RoundingConfig};

const W: [f64; 16] = [
    0.88, 0.01, 0.84, 0.27, //
    0.01, 0.71, 0.75, 0.53, //
    0.82, 0.78, 0.15, 0.25, //
    0.29, 0.50, 0.26, 0.95,
];

fn print_block(title: &str, values: impl Iterator<Item = f64>) {
    println!("{title}");
    let values: Vec<f64> = values.collect();
    for row in values.chunks(4) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:6.3}")).collect();
        println!("  {}", cells.join(" "));
    }
}

fn main() -> tsenor::Result<()> {
    let pattern = SparsityPattern::new(2, 4)?;
    let batch = BlockBatch::from_blocks(4, W.to_vec())?;

    let frac = dykstra_solve(&batch, pattern, &DykstraConfig::default())?;
    print_block("entropic plan (rows and columns sum to 2):", frac.values().into_iter());

    let sol = solve_batch(&batch, pattern, &DykstraConfig::default(), &RoundingConfig::default())?;
    print_block("rounded mask:", sol.mask.block(0).iter().map(|&b| f64::from(b)));
    println!("objective {:.2}", sol.report.objective);

    let rowwise = bi_nm_block(&W, 4, 2);
    println!("row-then-column heuristic keeps {:.2}", block_objective(&W, &rowwise));

    let exact = exact_solve(&W, 4, pattern)?;
    println!("exact optimum {:.2}", exact.objective);
    Ok(())
}
