//! Synthetic multi-view data with a known latent row space, and the
//! rank/corruption phase experiment built on it.
//!
//! Samples are drawn from a union of random subspaces of a latent space of
//! dimension `m`: `L0 = [B_1 C_1, …, B_k C_k]` with `B_i` an `m x r_i`
//! orthonormal basis and `C_i` standard Gaussian. Each view is
//! `X_v = G_v L0 + S0_v` with `G_v` (`d_v x m`) having orthonormal columns and
//! `S0_v` entries drawn from `{−1, 0, +1}` with `P(±1) = ρ_s / 2` each.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use ndarray::{concatenate, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::MultiViewDataset;
use crate::error::{Error, Result};
use crate::linalg::{thin_svd, OrthonormalBasis};
use crate::solver::{solve, SolverConfig};

/// Sizes of the generative model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    /// Feature count `d_v` per view.
    pub view_dims: Vec<usize>,
    /// Latent dimension `m`.
    pub latent_dim: usize,
    /// Rank of each subspace.
    pub subspace_ranks: Vec<usize>,
    /// Number of samples drawn from each subspace.
    pub subspace_points: Vec<usize>,
}

impl ModelSpec {
    /// Two views of 100 features, `m = 50`, two subspaces of rank `r` with
    /// 100 points each (`n = 200`).
    pub fn two_subspaces(r: usize) -> Self {
        ModelSpec {
            view_dims: vec![100, 100],
            latent_dim: 50,
            subspace_ranks: vec![r, r],
            subspace_points: vec![100, 100],
        }
    }

    pub fn n_samples(&self) -> usize {
        self.subspace_points.iter().sum()
    }

    pub fn total_rank(&self) -> usize {
        self.subspace_ranks.iter().sum()
    }

    fn validate(&self) -> Result<()> {
        if self.view_dims.is_empty() {
            return Err(Error::param("need at least one view"));
        }
        if self.subspace_ranks.is_empty() || self.subspace_ranks.len() != self.subspace_points.len() {
            return Err(Error::param("subspace ranks and point counts must be non-empty and aligned"));
        }
        if self.subspace_ranks.contains(&0) || self.subspace_points.contains(&0) {
            return Err(Error::param("subspace ranks and point counts must be positive"));
        }
        if self.total_rank() > self.latent_dim {
            return Err(Error::param(format!(
                "subspace ranks sum to {} which exceeds the latent dimension {}",
                self.total_rank(),
                self.latent_dim
            )));
        }
        if let Some(d) = self.view_dims.iter().find(|&&d| d < self.latent_dim) {
            return Err(Error::param(format!(
                "view dimension {d} is below the latent dimension {}; G cannot have orthonormal columns",
                self.latent_dim
            )));
        }
        Ok(())
    }
}

/// Ground truth behind a generated dataset.
#[derive(Debug, Clone)]
pub struct LatentModel {
    pub l0: Array2<f64>,
    pub g: Vec<Array2<f64>>,
    pub s0: Vec<Array2<f64>>,
    /// Orthonormal basis of the row space of `L0`.
    pub v0: OrthonormalBasis,
    pub r0: usize,
    pub subspace_labels: Vec<usize>,
}

fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.sample(StandardNormal))
}

/// Orthonormal `rows x cols` factor from the QR decomposition of a Gaussian matrix.
fn random_orthonormal(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let g = gaussian(rows, cols, rng);
    let q = DMatrix::from_fn(rows, cols, |i, j| g[[i, j]]).qr().q();
    Array2::from_shape_fn((rows, cols), |(i, j)| q[(i, j)])
}

pub fn generate(spec: &ModelSpec, rho_s: f64, seed: u64) -> Result<(MultiViewDataset, LatentModel)> {
    spec.validate()?;
    if !(0.0..=1.0).contains(&rho_s) {
        return Err(Error::param(format!("rho_s must lie in [0, 1], got {rho_s}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = spec.latent_dim;

    let mut blocks = Vec::with_capacity(spec.subspace_ranks.len());
    let mut labels = Vec::with_capacity(spec.n_samples());
    for (i, (&r, &pts)) in spec.subspace_ranks.iter().zip(&spec.subspace_points).enumerate() {
        let basis = random_orthonormal(m, r, &mut rng);
        let coeffs = gaussian(r, pts, &mut rng);
        blocks.push(basis.dot(&coeffs));
        labels.extend(std::iter::repeat_n(i, pts));
    }
    let views: Vec<_> = blocks.iter().map(|b| b.view()).collect();
    let l0 = concatenate(Axis(1), &views).expect("blocks share the latent dimension");
    let n = l0.ncols();

    let mut g = Vec::with_capacity(spec.view_dims.len());
    let mut s0 = Vec::with_capacity(spec.view_dims.len());
    let mut xs = Vec::with_capacity(spec.view_dims.len());
    for &d in &spec.view_dims {
        let gv = random_orthonormal(d, m, &mut rng);
        let sv = Array2::from_shape_fn((d, n), |_| {
            let u: f64 = rng.random();
            if u < rho_s / 2.0 {
                -1.0
            } else if u < rho_s {
                1.0
            } else {
                0.0
            }
        });
        xs.push(gv.dot(&l0) + &sv);
        g.push(gv);
        s0.push(sv);
    }

    let svd = thin_svd(&l0)?;
    let v0 = svd.row_space();
    let r0 = v0.rank();
    let dataset = MultiViewDataset::new(xs)?.with_labels(labels.clone(), Some(spec.subspace_ranks.len()))?;
    Ok((
        dataset,
        LatentModel {
            l0,
            g,
            s0,
            v0,
            r0,
            subspace_labels: labels,
        },
    ))
}

/// Reported when the two projectors agree to within `1e-15` (Frobenius).
pub const SNR_CAP_DB: f64 = 300.0;
const PROJECTOR_TOL: f64 = 1e-6;

fn check_projector(p: &Array2<f64>, what: &str) -> Result<()> {
    if p.nrows() != p.ncols() {
        return Err(Error::param(format!("{what} is not square")));
    }
    let sym = (p - &p.t()).iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let idem = (&p.dot(p) - p).iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    if !(sym <= PROJECTOR_TOL && idem <= PROJECTOR_TOL) {
        return Err(Error::param(format!(
            "{what} is not an orthogonal projector (asymmetry {sym:e}, idempotence error {idem:e})"
        )));
    }
    Ok(())
}

fn snr_from_parts(signal_sq: f64, diff_sq: f64) -> f64 {
    if diff_sq.max(0.0).sqrt() < 1e-15 {
        return SNR_CAP_DB;
    }
    (10.0 * (signal_sq / diff_sq).log10()).min(SNR_CAP_DB)
}

/// `10 log10(‖P_true‖²_F / ‖P_true − P_est‖²_F)` in decibels.
pub fn snr_db(true_proj: &Array2<f64>, est_proj: &Array2<f64>) -> Result<f64> {
    check_projector(true_proj, "true projector")?;
    check_projector(est_proj, "estimated projector")?;
    if true_proj.dim() != est_proj.dim() {
        return Err(Error::param("projector sizes differ"));
    }
    let signal: f64 = true_proj.iter().map(|x| x * x).sum();
    let diff: f64 = true_proj.iter().zip(est_proj).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(snr_from_parts(signal, diff))
}

/// [`snr_db`] of the projectors onto two bases, without forming them:
/// `‖V₁V₁ᵀ − V₂V₂ᵀ‖² = r₁ + r₂ − 2‖V₁ᵀV₂‖²`.
pub fn basis_snr_db(truth: &OrthonormalBasis, est: &OrthonormalBasis) -> Result<f64> {
    if truth.dim() != est.dim() {
        return Err(Error::param("bases live in different dimensions"));
    }
    let cross = truth.matrix().t().dot(est.matrix());
    let overlap: f64 = cross.iter().map(|x| x * x).sum();
    let r1 = truth.rank() as f64;
    let r2 = est.rank() as f64;
    let diff = (r1 + r2 - 2.0 * overlap).max(0.0);
    Ok(snr_from_parts(r1, diff))
}

/// Step function of the SNR: 0 below 15 dB, 0.2 below 20, 0.5 below 30 (and
/// at exactly 30), 1 above 30.
pub fn recovery_score(snr: f64) -> f64 {
    if snr < 15.0 {
        0.0
    } else if snr < 20.0 {
        0.2
    } else if snr <= 30.0 {
        0.5
    } else {
        1.0
    }
}

/// Phase experiment layout. `r_values` are per-subspace ranks; each cell uses
/// two subspaces so the true rank is `2r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseConfig {
    pub r_values: Vec<usize>,
    pub rho_values: Vec<f64>,
    pub trials: usize,
    /// Every trial is solved with each λ and the best score kept.
    pub lambdas: Vec<f64>,
    pub seed: u64,
    pub view_dims: Vec<usize>,
    pub latent_dim: usize,
    pub points_per_subspace: usize,
    pub solver_tol: f64,
    pub solver_max_iter: usize,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        PhaseConfig {
            r_values: (1..=20).collect(),
            rho_values: (1..=20).map(|i| i as f64 / 50.0).collect(),
            trials: 20,
            lambdas: vec![1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2, 1e-1],
            seed: 0,
            view_dims: vec![100, 100],
            latent_dim: 50,
            points_per_subspace: 100,
            solver_tol: SolverConfig::DEFAULT_TOL,
            solver_max_iter: SolverConfig::DEFAULT_MAX_ITER,
        }
    }
}

impl PhaseConfig {
    fn spec(&self, r: usize) -> ModelSpec {
        ModelSpec {
            view_dims: self.view_dims.clone(),
            latent_dim: self.latent_dim,
            subspace_ranks: vec![r, r],
            subspace_points: vec![self.points_per_subspace; 2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryGrid {
    pub r_values: Vec<usize>,
    pub rho_values: Vec<f64>,
    /// `scores[i][j]` is the mean score for `r_values[i]`, `rho_values[j]`.
    pub scores: Vec<Vec<f64>>,
    pub trials: usize,
}

impl RecoveryGrid {
    pub fn score(&self, r: usize, rho: f64) -> Option<f64> {
        let i = self.r_values.iter().position(|&x| x == r)?;
        let j = self.rho_values.iter().position(|&x| x == rho)?;
        Some(self.scores[i][j])
    }

    /// `r,rho_s,avg_score,trials` rows, `r` being the per-subspace rank.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,rho_s,avg_score,trials\n");
        for (i, r) in self.r_values.iter().enumerate() {
            for (j, rho) in self.rho_values.iter().enumerate() {
                writeln!(out, "{r},{rho},{},{}", self.scores[i][j], self.trials).unwrap();
            }
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Seed for one trial, derived from the master seed and the cell position.
fn trial_seed(master: u64, r_idx: usize, rho_idx: usize, trial: usize) -> u64 {
    let mut z = master
        ^ (r_idx as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ (rho_idx as u64).wrapping_mul(0xc2b2_ae3d_27d4_eb4f)
        ^ (trial as u64).wrapping_mul(0x1656_67b1_9e37_79f9);
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Best recovery score over `lambdas` for one generated instance.
pub fn score_trial(
    spec: &ModelSpec,
    rho_s: f64,
    seed: u64,
    lambdas: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let (data, model) = generate(spec, rho_s, seed)?;
    let mut best: f64 = 0.0;
    for &lambda in lambdas {
        let cfg = SolverConfig::new(model.r0, lambda).with_tol(tol).with_max_iter(max_iter);
        let result = solve(&data, &cfg)?;
        let snr = basis_snr_db(&model.v0, &result.v_hat)?;
        best = best.max(recovery_score(snr));
        if best == 1.0 {
            break;
        }
    }
    Ok(best)
}

/// Average recovery score per `(r, ρ_s)` cell. Trials run in parallel with
/// seeds derived from `config.seed`, so the grid is reproducible.
pub fn phase_experiment(config: &PhaseConfig) -> Result<RecoveryGrid> {
    if config.trials == 0 || config.lambdas.is_empty() {
        return Err(Error::param("phase experiment needs at least one trial and one lambda"));
    }
    let jobs: Vec<(usize, usize, usize)> = (0..config.r_values.len())
        .flat_map(|i| (0..config.rho_values.len()).flat_map(move |j| (0..config.trials).map(move |t| (i, j, t))))
        .collect();
    let scores = jobs
        .par_iter()
        .map(|&(i, j, t)| {
            score_trial(
                &config.spec(config.r_values[i]),
                config.rho_values[j],
                trial_seed(config.seed, i, j, t),
                &config.lambdas,
                config.solver_tol,
                config.solver_max_iter,
            )
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut grid = vec![vec![0.0; config.rho_values.len()]; config.r_values.len()];
    for (&(i, j, _), s) in jobs.iter().zip(&scores) {
        grid[i][j] += s;
    }
    for row in &mut grid {
        for cell in row.iter_mut() {
            *cell /= config.trials as f64;
        }
    }
    Ok(RecoveryGrid {
        r_values: config.r_values.clone(),
        rho_values: config.rho_values.clone(),
        scores: grid,
        trials: config.trials,
    })
}
