//! Rounding ablation over the standard patterns: where the fractional start
//! and the local search each earn their keep.

use tsenor::bench::{run_sweep, SolverSettings, SweepSpec, Variant};

fn main() -> tsenor::Result<()> {
    let spec = SweepSpec::standard(100);
    let rows = run_sweep(&spec, &SolverSettings { seed: 8, ..SolverSettings::default() })?;
    print!("{:>7}", "pattern");
    for v in Variant::ALL {
        print!(" {:>18}", v.name());
    }
    println!();
    for pattern in &spec.patterns {
        let name = pattern.to_string();
        print!("{name:>7}");
        for v in Variant::ALL {
            let row = rows.iter().find(|r| r.pattern == name && r.variant == v.name()).expect("row per variant");
            print!(" {:>18.5}", row.mean_relative_error);
        }
        println!();
    }
    Ok(())
}
