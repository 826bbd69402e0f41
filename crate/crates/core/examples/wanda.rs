//! Activation-aware scores: the same weights pruned by magnitude and by
//! |W| scaled with input norms, under the three constraint kinds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use tsenor::layerwise::{
    magnitude_prune, reconstruction_error, wanda_prune, ConstraintKind, LayerProblem, MaskSettings,
};
use tsenor::{DenseMatrix, SparsityPattern};

fn main() -> tsenor::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (d_in, d_out, samples) = (32, 32, 128);
    let w = DenseMatrix::new(d_in, d_out, (0..d_in * d_out).map(|_| StandardNormal.sample(&mut rng)).collect())?;
    // Input features with very different scales.
    let x = DenseMatrix::new(
        samples,
        d_in,
        (0..samples * d_in)
            .map(|k| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z * (1.0 + (k % d_in) as f64 / 4.0)
            })
            .collect(),
    )?;
    let layer = LayerProblem::from_activations(w.clone(), &x, 0.0)?;
    let pattern = SparsityPattern::new(4, 8)?;

    // Row-wise groups share one input norm, so the scaling cannot change them.
    println!("{:>13} {:>10} {:>10}", "constraint", "magnitude", "wanda");
    for kind in [ConstraintKind::Unstructured, ConstraintKind::RowWise, ConstraintKind::Transposable] {
        let settings = MaskSettings { kind, ..MaskSettings::default() };
        let (by_magnitude, _) = magnitude_prune(&w, pattern, &settings)?;
        let (by_wanda, _) = wanda_prune(&w, &layer.input_norms(), pattern, &settings)?;
        println!(
            "{:>13} {:>10.4} {:>10.4}",
            format!("{kind:?}"),
            reconstruction_error(&layer, &by_magnitude)?,
            reconstruction_error(&layer, &by_wanda)?
        );
    }
    Ok(())
}
