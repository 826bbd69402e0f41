//! Layer-wise pruning of a synthetic layer: ADMM with transposable masks
//! against one-shot magnitude pruning, with the convergence trace.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use tsenor::layerwise::{admm_prune, magnitude_prune, reconstruction_error, AdmmConfig, LayerProblem, MaskSettings};
use tsenor::{DenseMatrix, SparsityPattern};

fn main() -> tsenor::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut gaussian = |r: usize, c: usize| {
        DenseMatrix::new(r, c, (0..r * c).map(|_| StandardNormal.sample(&mut rng)).collect())
    };
    let w = gaussian(64, 64)?;
    let x = gaussian(256, 64)?;
    let layer = LayerProblem::from_activations(w.clone(), &x, 1.0)?;
    let pattern = SparsityPattern::new(2, 4)?;

    let (one_shot, _) = magnitude_prune(&w, pattern, &MaskSettings::default())?;
    let out = admm_prune(&layer, pattern, &AdmmConfig::default())?;

    for it in out.trace.iterations.iter().step_by(10) {
        println!(
            "iter {:>3}  rho {:8.3}  residual {:.2e}  error {:.4}",
            it.iteration, it.rho, it.primal_residual, it.reconstruction_error
        );
    }
    println!(
        "converged {} after {} iterations ({} safeguard triggers)",
        out.trace.converged,
        out.trace.iterations.len(),
        out.trace.safeguard_triggers
    );
    println!("magnitude error {:.4}", reconstruction_error(&layer, &one_shot)?);
    println!("admm error      {:.4}", reconstruction_error(&layer, &out.weights)?);
    Ok(())
}
