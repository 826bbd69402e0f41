//! How the entropy scale trades convergence speed for tightness: marginal
//! violation after a fixed sweep budget and the gap to the exact optimum.

use tsenor::bench::{optimal_objectives, sample_blocks, WeightDistribution};
use tsenor::{dykstra_solve, marginal_violation, DykstraConfig, SparsityPattern};

fn main() -> tsenor::Result<()> {
    let pattern = SparsityPattern::new(8, 16)?;
    let batch = sample_blocks(WeightDistribution::Gaussian, 50, 16, 3)?;
    let optimal = optimal_objectives(&batch, pattern)?;

    println!("{:>9} {:>7} {:>14} {:>12}", "tau_scale", "sweeps", "max violation", "mean gap %");
    for tau_scale in [5.0, 20.0, 50.0, 200.0] {
        let cfg = DykstraConfig { tau_scale, ..DykstraConfig::default() };
        let frac = dykstra_solve(&batch, pattern, &cfg)?;
        let violation = marginal_violation(&frac, pattern).iter().map(|(r, c)| r.max(*c)).fold(0.0, f64::max);
        let values = frac.values();
        let gap: f64 = (0..batch.len())
            .map(|k| {
                let plan = &values[k * 256..(k + 1) * 256];
                let linear: f64 = plan.iter().zip(batch.block(k)).map(|(s, w)| s * w).sum();
                (optimal[k] - linear) / optimal[k]
            })
            .sum::<f64>()
            / batch.len() as f64;
        let sweeps = frac.sweeps().iter().max().copied().unwrap_or(0);
        println!("{tau_scale:>9} {sweeps:>7} {violation:>14.2e} {:>12.3}", 100.0 * gap);
    }
    Ok(())
}
