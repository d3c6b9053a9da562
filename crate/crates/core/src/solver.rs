//! Alternating minimization for latent complete row space recovery.
//!
//! Given views `X_v` (`d_v x n`), the solver looks for an orthonormal
//! `V` (`n x r`) and sparse errors `S_v` minimizing
//!
//! ```text
//! λ Σ_v ‖S_v‖₁ + Σ_v ‖(X_v − S_v)(I − V Vᵀ)‖_F
//! ```
//!
//! The non-squared norm is handled by reweighting: with
//! `p_v = 1 / (2‖(X_v − S_v)(I − VVᵀ)‖_F + ε)` the problem becomes a weighted
//! squared one whose `V` block is a top-`r` eigenproblem of
//! `M = Σ_v p_v (X_v − S_v)ᵀ(X_v − S_v)` and whose `S_v` blocks take one
//! proximal gradient (shrinkage) step each. Every full iteration leaves the
//! objective no larger than before.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dataset::MultiViewDataset;
use crate::error::{Error, Result};
use crate::linalg::{
    frobenius_norm, l1_norm, shrink, soft_threshold_in_place, top_r_eigenvectors,
    top_r_eigenvectors_from, OrthonormalBasis,
};

/// Step size rule for the `S_v` proximal step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MuPolicy {
    /// `μ = 2 p_v`, the Lipschitz constant of the smooth term.
    #[default]
    FixedFromWeight,
    /// Start at `2 p_v / 8` and double until the quadratic upper bound holds.
    Backtracking,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub rank: usize,
    pub lambda: f64,
    pub epsilon: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub mu_policy: MuPolicy,
}

impl SolverConfig {
    pub const DEFAULT_EPSILON: f64 = 1e-12;
    pub const DEFAULT_TOL: f64 = 1e-4;
    pub const DEFAULT_MAX_ITER: usize = 200;

    pub fn new(rank: usize, lambda: f64) -> Self {
        SolverConfig {
            rank,
            lambda,
            epsilon: Self::DEFAULT_EPSILON,
            tol: Self::DEFAULT_TOL,
            max_iter: Self::DEFAULT_MAX_ITER,
            mu_policy: MuPolicy::default(),
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_mu_policy(mut self, mu_policy: MuPolicy) -> Self {
        self.mu_policy = mu_policy;
        self
    }

    /// Checks the configuration against a sample count `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.rank == 0 || self.rank >= n {
            return Err(Error::param(format!(
                "rank must satisfy 1 <= r < n, got r={} with n={n}",
                self.rank
            )));
        }
        if self.lambda.is_nan() || self.lambda < 0.0 {
            return Err(Error::param(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::param(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::param(format!("tol must be > 0, got {}", self.tol)));
        }
        Ok(())
    }
}

/// Iterates after a completed iteration.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub v: OrthonormalBasis,
    pub s: Vec<Array2<f64>>,
    pub p: Vec<f64>,
    pub objective: f64,
    pub iter: usize,
}

/// Per-iteration diagnostics, one row of the trace file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub objective: f64,
    /// `‖(X_v − S_v)(I − VVᵀ)‖_F` per view.
    pub residual_norms: Vec<f64>,
    /// `‖S_v‖₁` per view.
    pub l1_norms: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SolverResult {
    pub v_hat: OrthonormalBasis,
    pub s_hat: Vec<Array2<f64>>,
    pub weights: Vec<f64>,
    pub objective_trace: Vec<f64>,
    pub history: Vec<IterationRecord>,
    pub iterations: usize,
    pub converged: bool,
}

impl SolverResult {
    pub fn final_objective(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(0.0)
    }
}

fn check_shapes(data: &MultiViewDataset, s: &[Array2<f64>], v: Option<&OrthonormalBasis>) -> Result<()> {
    if s.len() != data.n_views() {
        return Err(Error::param(format!(
            "{} error matrices for {} views",
            s.len(),
            data.n_views()
        )));
    }
    for (idx, (x, sv)) in data.views().iter().zip(s).enumerate() {
        if x.dim() != sv.dim() {
            return Err(Error::param(format!(
                "error matrix {idx} is {:?}, view is {:?}",
                sv.dim(),
                x.dim()
            )));
        }
    }
    if let Some(v) = v {
        if v.dim() != data.n_samples() {
            return Err(Error::param(format!(
                "basis has {} rows, dataset has {} samples",
                v.dim(),
                data.n_samples()
            )));
        }
    }
    Ok(())
}

/// `λ ‖S‖₁` with the convention that an infinite `λ` times an all-zero `S`
/// contributes nothing.
fn penalty(lambda: f64, l1: f64) -> f64 {
    if l1 == 0.0 {
        0.0
    } else {
        lambda * l1
    }
}

/// `λ Σ_v ‖S_v‖₁ + Σ_v ‖(X_v − S_v)(I − VVᵀ)‖_F`.
pub fn eval_objective(
    data: &MultiViewDataset,
    s: &[Array2<f64>],
    v: &OrthonormalBasis,
    lambda: f64,
) -> Result<f64> {
    check_shapes(data, s, Some(v))?;
    let mut total = 0.0;
    for (x, sv) in data.views().iter().zip(s) {
        let resid = v.residual(&(x - sv));
        total += penalty(lambda, l1_norm(sv)) + frobenius_norm(&resid);
    }
    Ok(total)
}

/// `M = Σ_v p_v (X_v − S_v)ᵀ (X_v − S_v)`, an `n x n` PSD matrix.
pub fn build_gram(data: &MultiViewDataset, s: &[Array2<f64>], p: &[f64]) -> Result<Array2<f64>> {
    check_shapes(data, s, None)?;
    if p.len() != data.n_views() {
        return Err(Error::param(format!("{} weights for {} views", p.len(), data.n_views())));
    }
    if let Some(bad) = p.iter().find(|&&w| !(w > 0.0 && w.is_finite())) {
        return Err(Error::param(format!("view weights must be positive and finite, got {bad}")));
    }
    let residuals: Vec<Array2<f64>> = data.views().iter().zip(s).map(|(x, sv)| x - sv).collect();
    Ok(gram_from_residuals(&residuals, p))
}

fn gram_from_residuals(residuals: &[Array2<f64>], p: &[f64]) -> Array2<f64> {
    let n = residuals[0].ncols();
    let mut m = Array2::zeros((n, n));
    for (r, &w) in residuals.iter().zip(p) {
        ndarray::linalg::general_mat_mul(w, &r.t(), r, 1.0, &mut m);
    }
    // The products are symmetric up to rounding; make it exact.
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (m[[i, j]] + m[[j, i]]);
            m[[i, j]] = avg;
            m[[j, i]] = avg;
        }
    }
    m
}

/// Top-`r` eigenvectors of the weighted Gram matrix.
pub fn update_v(gram: &Array2<f64>, r: usize) -> Result<OrthonormalBasis> {
    Ok(top_r_eigenvectors(gram, r)?.vectors)
}

/// One proximal gradient step on `λ‖S‖₁ + p ‖(X − S)(I − VVᵀ)‖²`.
///
/// With [`MuPolicy::FixedFromWeight`] this is
/// `S⁺ = H_{λ/(2p)}[S + (X − S)(I − VVᵀ)]`.
pub fn update_s(
    x: &Array2<f64>,
    s: &Array2<f64>,
    v: &OrthonormalBasis,
    p: f64,
    lambda: f64,
    mu_policy: MuPolicy,
) -> Result<Array2<f64>> {
    if x.dim() != s.dim() {
        return Err(Error::param(format!("S is {:?} but X is {:?}", s.dim(), x.dim())));
    }
    if v.dim() != x.ncols() {
        return Err(Error::param(format!("basis has {} rows, X has {} columns", v.dim(), x.ncols())));
    }
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::param(format!("view weight must be positive and finite, got {p}")));
    }
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::param(format!("lambda must be >= 0, got {lambda}")));
    }
    let projected = v.residual(&(x - s));
    Ok(prox_step(x, s, &projected, v, p, lambda, mu_policy))
}

/// `projected` is `(X − S)(I − VVᵀ)`, i.e. minus the gradient over `2p`.
fn prox_step(
    x: &Array2<f64>,
    s: &Array2<f64>,
    projected: &Array2<f64>,
    v: &OrthonormalBasis,
    p: f64,
    lambda: f64,
    mu_policy: MuPolicy,
) -> Array2<f64> {
    let lipschitz = 2.0 * p;
    match mu_policy {
        MuPolicy::FixedFromWeight => {
            let mut out = s + projected;
            soft_threshold_in_place(&mut out, lambda / lipschitz);
            out
        }
        MuPolicy::Backtracking => {
            let smooth = |proj: &Array2<f64>| p * proj.iter().map(|a| a * a).sum::<f64>();
            let f0 = smooth(projected);
            let mut mu = lipschitz / 8.0;
            loop {
                let step = lipschitz / mu;
                let tau = lambda / mu;
                let mut cand = s.clone();
                ndarray::Zip::from(&mut cand)
                    .and(projected)
                    .for_each(|c, &g| *c = shrink(*c + step * g, tau));
                if mu >= lipschitz {
                    return cand;
                }
                // f(S⁺) ≤ f(S) + ⟨∇f(S), S⁺ − S⟩ + μ/2 ‖S⁺ − S‖²
                let diff = &cand - s;
                let linear = -lipschitz * (&diff * projected).sum();
                let quad = 0.5 * mu * diff.iter().map(|d| d * d).sum::<f64>();
                let f1 = smooth(&v.residual(&(x - &cand)));
                if f1 <= f0 + linear + quad + 1e-15 * f0.abs() {
                    return cand;
                }
                mu = (mu * 2.0).min(lipschitz);
            }
        }
    }
}

/// `p_v = 1 / (2 ‖(X_v − S_v)(I − VVᵀ)‖_F + ε)`.
pub fn update_p(
    data: &MultiViewDataset,
    s: &[Array2<f64>],
    v: &OrthonormalBasis,
    epsilon: f64,
) -> Result<Vec<f64>> {
    check_shapes(data, s, Some(v))?;
    if !(epsilon > 0.0) {
        return Err(Error::param(format!("epsilon must be > 0, got {epsilon}")));
    }
    Ok(data
        .views()
        .iter()
        .zip(s)
        .map(|(x, sv)| weight(frobenius_norm(&v.residual(&(x - sv))), epsilon))
        .collect())
}

#[inline]
fn weight(residual_norm: f64, epsilon: f64) -> f64 {
    1.0 / (2.0 * residual_norm + epsilon)
}

/// Stepwise driver. Use [`solve`] unless per-iteration control is needed.
pub struct Solver<'a> {
    data: &'a MultiViewDataset,
    config: SolverConfig,
    s: Vec<Array2<f64>>,
    p: Vec<f64>,
    v: Option<OrthonormalBasis>,
    history: Vec<IterationRecord>,
    converged: bool,
    /// Objective values below this are round-off; see [`OBJECTIVE_FLOOR`].
    floor: f64,
}

/// An objective at or below `OBJECTIVE_FLOOR · Σ_v ‖X_v‖_F` counts as
/// converged. On exactly low-rank data the objective falls to round-off and
/// then jitters, so its relative change never settles.
pub const OBJECTIVE_FLOOR: f64 = 1e-12;

impl<'a> Solver<'a> {
    /// Starts from `S_v = 0`, `p_v = 1`.
    pub fn new(data: &'a MultiViewDataset, config: SolverConfig) -> Result<Self> {
        config.validate(data.n_samples())?;
        let s = data.views().iter().map(|x| Array2::zeros(x.dim())).collect();
        Ok(Solver {
            data,
            config,
            s,
            p: vec![1.0; data.n_views()],
            v: None,
            history: Vec::new(),
            converged: false,
            floor: OBJECTIVE_FLOOR * data.views().iter().map(frobenius_norm).sum::<f64>(),
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn is_converged(&self) -> bool {
        self.converged
    }

    pub fn iterations(&self) -> usize {
        self.history.len()
    }

    pub fn history(&self) -> &[IterationRecord] {
        &self.history
    }

    /// Current iterates, or `None` before the first step.
    pub fn state(&self) -> Option<SolverState> {
        let v = self.v.clone()?;
        Some(SolverState {
            v,
            s: self.s.clone(),
            p: self.p.clone(),
            objective: self.history.last().map_or(0.0, |h| h.objective),
            iter: self.history.len(),
        })
    }

    /// Runs one full iteration: Gram matrix, `V`, every `S_v`, every `p_v`.
    pub fn step(&mut self) -> Result<&IterationRecord> {
        let iter = self.history.len() + 1;
        let numerical = |message: String| Error::Numerical { iteration: iter, message };
        let cfg = &self.config;

        let residuals: Vec<Array2<f64>> =
            self.data.views().iter().zip(&self.s).map(|(x, s)| x - s).collect();
        let gram = gram_from_residuals(&residuals, &self.p);
        if gram.iter().any(|x| !x.is_finite()) {
            return Err(numerical("Gram matrix has non-finite entries".into()));
        }

        let start = self.v.as_ref().map(|v| v.matrix().view());
        let v = top_r_eigenvectors_from(&gram, cfg.rank, start)
            .map_err(|e| numerical(format!("eigen step failed: {e}")))?
            .vectors;

        let mut residual_norms = Vec::with_capacity(self.s.len());
        let mut l1_norms = Vec::with_capacity(self.s.len());
        let mut objective = 0.0;
        for ((x, s), (resid, p)) in self
            .data
            .views()
            .iter()
            .zip(self.s.iter_mut())
            .zip(residuals.iter().zip(self.p.iter_mut()))
        {
            let projected = v.residual(resid);
            let s_next = prox_step(x, s, &projected, &v, *p, cfg.lambda, cfg.mu_policy);
            let norm = frobenius_norm(&v.residual(&(x - &s_next)));
            let l1 = l1_norm(&s_next);
            *s = s_next;
            *p = weight(norm, cfg.epsilon);
            objective += penalty(cfg.lambda, l1) + norm;
            residual_norms.push(norm);
            l1_norms.push(l1);
        }
        if !objective.is_finite() {
            return Err(numerical(format!("objective became {objective}")));
        }

        if objective <= self.floor {
            self.converged = true;
        } else if let Some(prev) = self.history.last() {
            let rel = (prev.objective - objective).abs() / prev.objective.max(1e-30);
            if rel < cfg.tol {
                self.converged = true;
            }
        }
        self.v = Some(v);
        self.history.push(IterationRecord {
            iter,
            objective,
            residual_norms,
            l1_norms,
        });
        Ok(self.history.last().expect("just pushed"))
    }

    /// Iterates until the relative objective change drops below `tol`, the
    /// objective reaches the round-off floor, or `max_iter` iterations have run.
    pub fn run(mut self) -> Result<SolverResult> {
        if self.data.views().iter().all(|x| x.iter().all(|&e| e == 0.0)) {
            let n = self.data.n_samples();
            self.v = Some(OrthonormalBasis::canonical(n, self.config.rank)?);
            self.converged = true;
            self.history.push(IterationRecord {
                iter: 0,
                objective: 0.0,
                residual_norms: vec![0.0; self.data.n_views()],
                l1_norms: vec![0.0; self.data.n_views()],
            });
            return Ok(self.finish());
        }
        while !self.converged && self.history.len() < self.config.max_iter {
            self.step()?;
        }
        Ok(self.finish())
    }

    pub fn finish(self) -> SolverResult {
        let v_hat = match self.v {
            Some(v) => v,
            None => OrthonormalBasis::canonical(self.data.n_samples(), self.config.rank)
                .expect("rank validated"),
        };
        let iterations = self.history.iter().filter(|h| h.iter > 0).count();
        SolverResult {
            v_hat,
            s_hat: self.s,
            weights: self.p,
            objective_trace: self.history.iter().map(|h| h.objective).collect(),
            history: self.history,
            iterations,
            converged: self.converged,
        }
    }
}

/// Runs the alternating minimization to convergence.
pub fn solve(data: &MultiViewDataset, config: &SolverConfig) -> Result<SolverResult> {
    Solver::new(data, config.clone())?.run()
}

/// Writes `iter,objective,residual_1..V,l1_1..V` rows.
pub fn write_trace_csv(path: &Path, history: &[IterationRecord]) -> Result<()> {
    let views = history.first().map_or(0, |h| h.residual_norms.len());
    let mut out = String::from("iter,objective");
    for v in 1..=views {
        write!(out, ",residual_{v}").unwrap();
    }
    for v in 1..=views {
        write!(out, ",l1_{v}").unwrap();
    }
    out.push('\n');
    for h in history {
        write!(out, "{},{:e}", h.iter, h.objective).unwrap();
        for x in h.residual_norms.iter().chain(&h.l1_norms) {
            write!(out, ",{x:e}").unwrap();
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
