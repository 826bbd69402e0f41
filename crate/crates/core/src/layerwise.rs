//! Layer-wise reconstruction pruning: the Wanda importance transform, one-shot
//! magnitude masks and an ADMM loop that alternates a ridge-regularized
//! least-squares update with a transposable mask projection.
//!
//! Weights are `d_in x d_out` (columns are output channels). The layer is
//! described by its Gram matrix `H = X^T X + lambda I`.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::block::{assemble_mask, DenseMatrix, SparsityPattern};
use crate::dykstra::DykstraConfig;
use crate::error::{Error, Result};
use crate::rounding::{solve_mask, RoundingConfig};

fn to_na(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.values())
}

fn from_na(m: &DMatrix<f64>) -> Result<DenseMatrix> {
    let (r, c) = m.shape();
    let mut v = Vec::with_capacity(r * c);
    for i in 0..r {
        for j in 0..c {
            v.push(m[(i, j)]);
        }
    }
    DenseMatrix::new(r, c, v)
}

/// A pretrained layer together with its calibration statistics.
#[derive(Debug, Clone)]
pub struct LayerProblem {
    w_hat: DenseMatrix,
    gram: DenseMatrix,
    lambda: f64,
    n_samples: usize,
}

impl LayerProblem {
    /// Validates that `gram` is `d_in x d_in`, symmetric and has every
    /// eigenvalue at least `lambda` (up to round-off).
    pub fn new(w_hat: DenseMatrix, gram: DenseMatrix, lambda: f64, n_samples: usize) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!("lambda must be >= 0, got {lambda}")));
        }
        let d = w_hat.rows();
        if gram.rows() != d || gram.cols() != d {
            return Err(Error::Shape(format!(
                "gram is {}x{} but weights have {d} input rows",
                gram.rows(),
                gram.cols()
            )));
        }
        let scale = gram.max_abs().max(1.0);
        for i in 0..d {
            for j in 0..i {
                if (gram.get(i, j) - gram.get(j, i)).abs() > 1e-8 * scale {
                    return Err(Error::Numerical(format!("gram is not symmetric at ({i}, {j})")));
                }
            }
        }
        let eig = SymmetricEigen::new(to_na(&gram)).eigenvalues;
        let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < lambda - 1e-8 * scale {
            return Err(Error::Numerical(format!(
                "gram has eigenvalue {min:.3e} below lambda {lambda:.3e}; not X^T X + lambda I"
            )));
        }
        Ok(Self { w_hat, gram, lambda, n_samples })
    }

    /// Builds `H = X^T X + lambda I` from calibration rows `x` (`n x d_in`).
    pub fn from_activations(w_hat: DenseMatrix, x: &DenseMatrix, lambda: f64) -> Result<Self> {
        if x.cols() != w_hat.rows() {
            return Err(Error::Shape(format!(
                "activations have {} features but weights have {} input rows",
                x.cols(),
                w_hat.rows()
            )));
        }
        let xn = to_na(x);
        let mut h = xn.transpose() * &xn;
        for i in 0..h.nrows() {
            h[(i, i)] += lambda;
        }
        // Exact symmetry regardless of summation order.
        let h = (&h + h.transpose()) * 0.5;
        Self::new(w_hat, from_na(&h)?, lambda, x.rows())
    }

    pub fn w_hat(&self) -> &DenseMatrix {
        &self.w_hat
    }

    pub fn gram(&self) -> &DenseMatrix {
        &self.gram
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    /// `X^T X`, recovered as `H - lambda I`.
    pub fn xtx(&self) -> DenseMatrix {
        let mut a = self.gram.clone();
        for i in 0..a.rows() {
            a.set(i, i, a.get(i, i) - self.lambda);
        }
        a
    }

    /// Column norms `||X[:, i]||` of the calibration activations.
    pub fn input_norms(&self) -> Vec<f64> {
        (0..self.gram.rows()).map(|i| (self.gram.get(i, i) - self.lambda).max(0.0).sqrt()).collect()
    }

    pub fn mean_gram_diag(&self) -> f64 {
        let d = self.gram.rows();
        (0..d).map(|i| self.gram.get(i, i)).sum::<f64>() / d as f64
    }
}

/// `||X (W - W_hat)||^2 / ||X W_hat||^2`, evaluated through the Gram matrix.
pub fn reconstruction_error(layer: &LayerProblem, w: &DenseMatrix) -> Result<f64> {
    let w_hat = layer.w_hat();
    if w.rows() != w_hat.rows() || w.cols() != w_hat.cols() {
        return Err(Error::Shape(format!(
            "{}x{} weights for a {}x{} layer",
            w.rows(),
            w.cols(),
            w_hat.rows(),
            w_hat.cols()
        )));
    }
    let a = to_na(&layer.xtx());
    let quad = |m: &DMatrix<f64>| (m.transpose() * &a * m).trace();
    let wh = to_na(w_hat);
    let den = quad(&wh);
    if den <= 0.0 {
        return Err(Error::Degenerate("||X W_hat|| is zero"));
    }
    let delta = to_na(w) - wh;
    Ok(quad(&delta).max(0.0) / den)
}

/// Scales row `i` of `w` by `norms[i]` (Wanda importance).
pub fn wanda_transform(w: &DenseMatrix, norms: &[f64]) -> Result<DenseMatrix> {
    if norms.len() != w.rows() {
        return Err(Error::Shape(format!("{} norms for {} input rows", norms.len(), w.rows())));
    }
    if let Some(bad) = norms.iter().find(|&&x| !(x >= 0.0 && x.is_finite())) {
        return Err(Error::Precondition(format!("norms must be finite and >= 0, got {bad}")));
    }
    let mut out = w.clone();
    for i in 0..w.rows() {
        for j in 0..w.cols() {
            out.set(i, j, w.get(i, j) * norms[i]);
        }
    }
    Ok(out)
}

/// Which sparsity structure a mask must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintKind {
    /// N:M along rows and along columns of every `m x m` block.
    #[default]
    Transposable,
    /// N:M along rows only: every `m` consecutive entries of a row.
    RowWise,
    /// Global top-k with density `n / m`.
    Unstructured,
}

/// Mask-solver settings shared by the projection step of every pruner.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MaskSettings {
    pub kind: ConstraintKind,
    pub dykstra: DykstraConfig,
    pub rounding: RoundingConfig,
}

fn ranked(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    idx
}

/// 0/1 mask maximizing the sum of `scores` under the chosen structure.
pub fn project_mask(scores: &DenseMatrix, pattern: SparsityPattern, settings: &MaskSettings) -> Result<DenseMatrix> {
    let (rows, cols, m, n) = (scores.rows(), scores.cols(), pattern.m(), pattern.n());
    match settings.kind {
        ConstraintKind::Transposable => {
            let (batch, sol) = solve_mask(scores, pattern, &settings.dykstra, &settings.rounding)?;
            assemble_mask(&sol.mask, batch.origin(), rows, cols)
        }
        ConstraintKind::RowWise => {
            if cols % m != 0 {
                return Err(Error::Dimension(format!("{cols} columns are not divisible by {m}")));
            }
            let mut out = DenseMatrix::zeros(rows, cols);
            for i in 0..rows {
                for g in 0..cols / m {
                    let group: Vec<f64> = scores.row(i)[g * m..(g + 1) * m].iter().map(|v| v.abs()).collect();
                    for &j in &ranked(&group)[..n] {
                        out.set(i, g * m + j, 1.0);
                    }
                }
            }
            Ok(out)
        }
        ConstraintKind::Unstructured => {
            let total = rows * cols;
            let keep = (total * n + m / 2) / m;
            let abs: Vec<f64> = scores.values().iter().map(|v| v.abs()).collect();
            let mut bits = vec![0.0; total];
            for &k in &ranked(&abs)[..keep] {
                bits[k] = 1.0;
            }
            DenseMatrix::new(rows, cols, bits)
        }
    }
}

/// Keeps `w` where `mask` is one.
pub fn apply_mask(w: &DenseMatrix, mask: &DenseMatrix) -> Result<DenseMatrix> {
    w.hadamard(mask)
}

/// One-shot pruning on `|W|`.
pub fn magnitude_prune(w: &DenseMatrix, pattern: SparsityPattern, settings: &MaskSettings) -> Result<(DenseMatrix, DenseMatrix)> {
    let mask = project_mask(&w.map(f64::abs), pattern, settings)?;
    Ok((apply_mask(w, &mask)?, mask))
}

/// One-shot pruning on `|W_ij| * ||X[:, i]||`.
pub fn wanda_prune(
    w: &DenseMatrix,
    norms: &[f64],
    pattern: SparsityPattern,
    settings: &MaskSettings,
) -> Result<(DenseMatrix, DenseMatrix)> {
    let importance = wanda_transform(w, norms)?.map(f64::abs);
    let mask = project_mask(&importance, pattern, settings)?;
    Ok((apply_mask(w, &mask)?, mask))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmmConfig {
    /// Initial penalty; `None` uses `0.1 * mean(diag(H))`.
    pub rho0: Option<f64>,
    /// Geometric penalty growth per iteration, `> 1`.
    pub growth: f64,
    pub max_iters: usize,
    /// Stop once `||W - D||_F / ||W_hat||_F` falls below this.
    pub primal_tol: f64,
    pub mask: MaskSettings,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self { rho0: None, growth: 1.03, max_iters: 300, primal_tol: 1e-4, mask: MaskSettings::default() }
    }
}

impl AdmmConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(r) = self.rho0 {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidConfig(format!("rho0 must be positive, got {r}")));
            }
        }
        if !(self.growth > 1.0 && self.growth.is_finite()) {
            return Err(Error::InvalidConfig(format!("growth must exceed 1, got {}", self.growth)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if !(self.primal_tol > 0.0) {
            return Err(Error::InvalidConfig(format!("primal_tol must be positive, got {}", self.primal_tol)));
        }
        self.mask.dykstra.validate()
    }
}

/// Diagnostics of one ADMM iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmmIteration {
    pub iteration: usize,
    pub rho: f64,
    /// `||W - D||_F / ||W_hat||_F` after the dual update.
    pub primal_residual: f64,
    /// `sum S (W + V/rho)^2` of the accepted mask.
    pub mask_score: f64,
    /// The same score for the previous mask at the same point.
    pub previous_mask_score: f64,
    pub safeguard_triggered: bool,
    /// `||D_new - Z||^2` and `||D_old - Z||^2` with `Z = W + V/rho`.
    pub projection_distance: f64,
    pub previous_projection_distance: f64,
    /// Reconstruction error of the feasible iterate `D`.
    pub reconstruction_error: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AdmmTrace {
    pub iterations: Vec<AdmmIteration>,
    pub safeguard_triggers: usize,
    pub converged: bool,
}

impl AdmmTrace {
    pub fn final_residual(&self) -> Option<f64> {
        self.iterations.last().map(|r| r.primal_residual)
    }

    /// Every accepted mask scores at least as well as its predecessor.
    pub fn scores_monotone(&self) -> bool {
        self.iterations.iter().all(|r| r.mask_score >= r.previous_mask_score)
    }

    /// `||D_new - Z|| <= ||D_old - Z||` at every step, with relative slack.
    pub fn projection_monotone(&self, rel_tol: f64) -> bool {
        self.iterations.iter().all(|r| {
            r.projection_distance <= r.previous_projection_distance + rel_tol * r.previous_projection_distance.max(1e-300)
        })
    }
}

#[derive(Debug, Clone)]
pub struct PrunedLayer {
    pub weights: DenseMatrix,
    pub mask: DenseMatrix,
    pub trace: AdmmTrace,
}

/// Closed-form minimizer in `W` of the augmented Lagrangian:
/// `(H + rho I) W = H W_hat - V + rho D`.
pub fn w_update(layer: &LayerProblem, v: &DenseMatrix, d: &DenseMatrix, rho: f64) -> Result<DenseMatrix> {
    let h = to_na(layer.gram());
    let rhs = &h * to_na(layer.w_hat()) - to_na(v) + to_na(d) * rho;
    from_na(&solve_shifted(&h, rho, &rhs)?)
}

fn solve_shifted(h: &DMatrix<f64>, rho: f64, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut a = h.clone();
    for i in 0..a.nrows() {
        a[(i, i)] += rho;
    }
    let chol = Cholesky::new(a).ok_or_else(|| Error::Numerical(format!("H + {rho:.3e} I is not positive definite")))?;
    Ok(chol.solve(rhs))
}

fn masked_score(mask: &DMatrix<f64>, z: &DMatrix<f64>) -> f64 {
    mask.iter().zip(z.iter()).map(|(s, v)| s * v * v).sum()
}

fn distance_sq(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm_squared()
}

/// ADMM with a mask projection in the `D` step and a score safeguard.
pub fn admm_prune(layer: &LayerProblem, pattern: SparsityPattern, config: &AdmmConfig) -> Result<PrunedLayer> {
    config.validate()?;
    let w_hat = layer.w_hat();
    let m = pattern.m();
    let needs_rows = config.mask.kind == ConstraintKind::Transposable;
    if !w_hat.cols().is_multiple_of(m) || (needs_rows && !w_hat.rows().is_multiple_of(m)) {
        return Err(Error::Dimension(format!(
            "{}x{} weights are not divisible into {pattern} groups",
            w_hat.rows(),
            w_hat.cols()
        )));
    }
    let w_norm = w_hat.frobenius_norm();
    if w_norm == 0.0 {
        return Err(Error::Degenerate("weights are all zero"));
    }

    let h = to_na(layer.gram());
    let a = to_na(&layer.xtx());
    let wh = to_na(w_hat);
    let h_what = &h * &wh;
    let base = (wh.transpose() * &a * &wh).trace();
    let recon = |d: &DMatrix<f64>| {
        if base <= 0.0 {
            return 0.0;
        }
        let delta = d - &wh;
        (delta.transpose() * &a * &delta).trace().max(0.0) / base
    };

    let mut mask = to_na(&project_mask(&w_hat.map(f64::abs), pattern, &config.mask)?);
    let mut d = mask.component_mul(&wh);
    let mut v = DMatrix::<f64>::zeros(wh.nrows(), wh.ncols());
    let mut rho = config.rho0.unwrap_or(0.1 * layer.mean_gram_diag());
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Degenerate("mean Gram diagonal is zero; pass rho0 explicitly"));
    }

    let mut trace = AdmmTrace::default();
    for iteration in 0..config.max_iters {
        let rhs = &h_what - &v + &d * rho;
        let w = solve_shifted(&h, rho, &rhs)?;
        let z = &w + &v / rho;

        let scores = from_na(&z.map(|x| x * x))?;
        let candidate = to_na(&project_mask(&scores, pattern, &config.mask)?);
        let previous_mask_score = masked_score(&mask, &z);
        let candidate_score = masked_score(&candidate, &z);
        let safeguard_triggered = candidate_score < previous_mask_score;
        if !safeguard_triggered {
            mask = candidate;
        }
        let mask_score = masked_score(&mask, &z);
        let d_new = mask.component_mul(&z);
        let previous_projection_distance = distance_sq(&d, &z);
        let projection_distance = distance_sq(&d_new, &z);
        d = d_new;

        v += (&w - &d) * rho;
        let primal_residual = (&w - &d).norm() / w_norm;
        trace.safeguard_triggers += usize::from(safeguard_triggered);
        trace.iterations.push(AdmmIteration {
            iteration,
            rho,
            primal_residual,
            mask_score,
            previous_mask_score,
            safeguard_triggered,
            projection_distance,
            previous_projection_distance,
            reconstruction_error: recon(&d),
        });
        rho *= config.growth;
        if primal_residual < config.primal_tol {
            trace.converged = true;
            break;
        }
    }
    Ok(PrunedLayer { weights: from_na(&d)?, mask: from_na(&mask)?, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::check_groups;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    const GOLDEN: [f64; 16] = [
        0.88, 0.01, 0.84, 0.27, //
        0.01, 0.71, 0.75, 0.53, //
        0.82, 0.78, 0.15, 0.25, //
        0.29, 0.50, 0.26, 0.95,
    ];

    fn pat(n: usize, m: usize) -> SparsityPattern {
        SparsityPattern::new(n, m).unwrap()
    }

    fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
        let v = (0..rows * cols).map(|_| StandardNormal.sample(rng)).collect();
        DenseMatrix::new(rows, cols, v).unwrap()
    }

    fn golden_layer() -> LayerProblem {
        let w = DenseMatrix::new(4, 4, GOLDEN.to_vec()).unwrap();
        LayerProblem::new(w, DenseMatrix::identity(4), 0.0, 0).unwrap()
    }

    #[test]
    fn layer_validation() {
        let w = DenseMatrix::new(4, 4, GOLDEN.to_vec()).unwrap();
        let mut asym = DenseMatrix::identity(4);
        asym.set(0, 1, 0.5);
        assert!(LayerProblem::new(w.clone(), asym, 0.0, 0).is_err());
        let mut neg = DenseMatrix::identity(4);
        neg.set(2, 2, -1.0);
        assert!(LayerProblem::new(w.clone(), neg, 0.0, 0).is_err());
        // Identity cannot be X^T X + 2 I.
        assert!(LayerProblem::new(w.clone(), DenseMatrix::identity(4), 2.0, 0).is_err());
        assert!(LayerProblem::new(w, DenseMatrix::identity(3), 0.0, 0).is_err());
    }

    #[test]
    fn reconstruction_error_endpoints() {
        let layer = golden_layer();
        assert_eq!(reconstruction_error(&layer, layer.w_hat()).unwrap(), 0.0);
        let zero = DenseMatrix::zeros(4, 4);
        assert!((reconstruction_error(&layer, &zero).unwrap() - 1.0).abs() < 1e-12);
        let dead = LayerProblem::new(layer.w_hat().clone(), DenseMatrix::zeros(4, 4), 0.0, 0).unwrap();
        assert!(matches!(reconstruction_error(&dead, &zero), Err(Error::Degenerate(_))));
    }

    #[test]
    fn wanda_scaling() {
        let w = DenseMatrix::new(4, 4, GOLDEN.to_vec()).unwrap();
        assert_eq!(wanda_transform(&w, &[1.0; 4]).unwrap(), w);
        let z = wanda_transform(&w, &[1.0, 0.0, 1.0, 1.0]).unwrap();
        assert!(z.row(1).iter().all(|&v| v == 0.0));
        assert!(wanda_transform(&w, &[1.0, -1.0, 1.0, 1.0]).is_err());
        assert!(wanda_transform(&w, &[1.0; 3]).is_err());

        let s = MaskSettings::default();
        let (_, m1) = wanda_prune(&w, &[1.0, 2.0, 0.5, 1.5], pat(2, 4), &s).unwrap();
        let (_, m2) = wanda_prune(&w, &[2.0, 4.0, 1.0, 3.0], pat(2, 4), &s).unwrap();
        assert_eq!(m1, m2);
        let (wp, _) = wanda_prune(&w, &[1.0; 4], pat(2, 4), &s).unwrap();
        assert_eq!(wp, magnitude_prune(&w, pat(2, 4), &s).unwrap().0);
    }

    #[test]
    fn projections_satisfy_their_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = gaussian(16, 16, &mut rng);
        let p = pat(2, 4);
        for kind in [ConstraintKind::Transposable, ConstraintKind::RowWise, ConstraintKind::Unstructured] {
            let s = MaskSettings { kind, ..Default::default() };
            let mask = project_mask(&w.map(f64::abs), p, &s).unwrap();
            assert_eq!(mask.values().iter().sum::<f64>(), 128.0);
            let transposable = kind == ConstraintKind::Transposable;
            if kind != ConstraintKind::Unstructured {
                assert!(check_groups(&mask, p, transposable, true).unwrap().is_empty());
            }
        }
    }

    #[test]
    fn w_update_zeroes_the_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let w_hat = gaussian(8, 8, &mut rng);
        let x = gaussian(32, 8, &mut rng);
        let layer = LayerProblem::from_activations(w_hat, &x, 0.5).unwrap();
        let v = gaussian(8, 8, &mut rng);
        let d = gaussian(8, 8, &mut rng);
        let rho = 3.0;
        let w = w_update(&layer, &v, &d, rho).unwrap();
        // H (W - W_hat) + V + rho (W - D) = 0
        let h = to_na(layer.gram());
        let (wn, vn, dn) = (to_na(&w), to_na(&v), to_na(&d));
        let grad = &h * (&wn - to_na(layer.w_hat())) + &vn + (&wn - &dn) * rho;
        let scale = (&h * to_na(layer.w_hat())).norm() + vn.norm() + rho * dn.norm();
        assert!(grad.norm() / scale < 1e-6);
    }

    #[test]
    fn first_iterate_with_pure_ridge_interpolates() {
        let w_hat = DenseMatrix::new(4, 4, GOLDEN.to_vec()).unwrap();
        let lambda = 0.7;
        let mut gram = DenseMatrix::identity(4);
        for i in 0..4 {
            gram.set(i, i, lambda);
        }
        let layer = LayerProblem::new(w_hat.clone(), gram, lambda, 0).unwrap();
        let (d0, _) = magnitude_prune(&w_hat, pat(2, 4), &MaskSettings::default()).unwrap();
        let rho = 0.3;
        let w1 = w_update(&layer, &DenseMatrix::zeros(4, 4), &d0, rho).unwrap();
        for k in 0..16 {
            let expect = (lambda * w_hat.values()[k] + rho * d0.values()[k]) / (lambda + rho);
            assert!((w1.values()[k] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn golden_block_identity_gram_converges() {
        let layer = golden_layer();
        // rho0 = mean(diag(H)); the default 0.1 * mean(diag(H)) needs ~80 iterations here.
        let cfg = AdmmConfig { rho0: Some(1.0), max_iters: 50, primal_tol: 1e-12, ..Default::default() };
        let out = admm_prune(&layer, pat(2, 4), &cfg).unwrap();
        assert!(out.trace.iterations.len() <= 50);
        assert!(out.trace.final_residual().unwrap() < 1e-3);
        assert!(out.trace.scores_monotone());
        assert!(out.trace.projection_monotone(1e-9));
        assert!(check_groups(&out.mask, pat(2, 4), true, true).unwrap().is_empty());
        // Output is supported on its mask.
        for (w, s) in out.weights.values().iter().zip(out.mask.values()) {
            assert!(*s == 1.0 || *w == 0.0);
        }
    }

    #[test]
    fn golden_block_default_schedule_converges() {
        let out = admm_prune(&golden_layer(), pat(2, 4), &AdmmConfig::default()).unwrap();
        assert!(out.trace.converged);
        assert!(out.trace.scores_monotone());
    }

    #[test]
    fn config_validation() {
        let layer = golden_layer();
        let bad = [
            AdmmConfig { growth: 1.0, ..Default::default() },
            AdmmConfig { rho0: Some(0.0), ..Default::default() },
            AdmmConfig { max_iters: 0, ..Default::default() },
            AdmmConfig { primal_tol: 0.0, ..Default::default() },
        ];
        for cfg in bad {
            assert!(matches!(admm_prune(&layer, pat(2, 4), &cfg), Err(Error::InvalidConfig(_))));
        }
        let wide = LayerProblem::new(DenseMatrix::zeros(4, 6).map(|_| 1.0), DenseMatrix::identity(4), 0.0, 0).unwrap();
        assert!(matches!(admm_prune(&wide, pat(2, 4), &AdmmConfig::default()), Err(Error::Dimension(_))));
    }
}
