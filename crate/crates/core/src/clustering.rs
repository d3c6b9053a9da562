//! K-Means on the rows of the recovered basis.

use ndarray::{Array2, ArrayView1, Axis};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::MultiViewDataset;
use crate::error::{Error, Result};
use crate::solver::{solve, SolverConfig, SolverResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KMeansInit {
    #[default]
    PlusPlus,
    Uniform,
}

/// Which per-sample vectors [`cluster_pipeline`] hands to K-Means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RowEmbedding {
    /// Rows of `V̂` (`n x r`).
    #[default]
    Basis,
    /// Rows of `|V̂V̂ᵀ|` (`n x n`), each scaled to unit length. Rows from one independent subspace share
    /// a nonnegative support, so groups separate even when the coefficients
    /// inside each subspace are centred at the origin, where rows of `V̂`
    /// form overlapping clouds around zero.
    ShapeInteraction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub k: usize,
    pub repeats: usize,
    pub max_iter: usize,
    pub seed: u64,
    pub init: KMeansInit,
    /// Used by [`cluster_pipeline`]; [`kmeans`] clusters the rows it is given.
    pub embedding: RowEmbedding,
}

impl KMeansConfig {
    pub const DEFAULT_REPEATS: usize = 50;
    pub const DEFAULT_MAX_ITER: usize = 300;

    pub fn new(k: usize, seed: u64) -> Self {
        KMeansConfig {
            k,
            repeats: Self::DEFAULT_REPEATS,
            max_iter: Self::DEFAULT_MAX_ITER,
            seed,
            init: KMeansInit::default(),
            embedding: RowEmbedding::default(),
        }
    }

    pub fn with_repeats(mut self, repeats: usize) -> Self {
        self.repeats = repeats;
        self
    }

    pub fn with_init(mut self, init: KMeansInit) -> Self {
        self.init = init;
        self
    }

    pub fn with_embedding(mut self, embedding: RowEmbedding) -> Self {
        self.embedding = embedding;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::param("k must be at least 1"));
        }
        if self.k > n {
            return Err(Error::param(format!("k = {} exceeds the number of samples {n}", self.k)));
        }
        if self.repeats == 0 {
            return Err(Error::param("repeats must be at least 1"));
        }
        Ok(())
    }
}

/// All restarts of one K-Means run.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringRun {
    pub labelings: Vec<Vec<usize>>,
    pub inertias: Vec<f64>,
    pub best_index: usize,
}

impl ClusteringRun {
    pub fn best_labels(&self) -> &[usize] {
        &self.labelings[self.best_index]
    }

    pub fn best_inertia(&self) -> f64 {
        self.inertias[self.best_index]
    }
}

/// Result of one Lloyd run from a fixed initialization.
#[derive(Debug, Clone, PartialEq)]
pub struct LloydOutcome {
    pub labels: Vec<usize>,
    pub centroids: Array2<f64>,
    pub inertia: f64,
    /// Inertia after every assignment step, starting with the initial one.
    pub inertia_history: Vec<f64>,
    pub converged: bool,
}

fn sq_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid per point (ties to the lowest index) and total inertia.
fn assign(points: &Array2<f64>, centroids: &Array2<f64>) -> (Vec<usize>, Vec<f64>) {
    points
        .rows()
        .into_iter()
        .map(|p| {
            let mut best = (0, f64::INFINITY);
            for (c, centroid) in centroids.rows().into_iter().enumerate() {
                let d = sq_dist(p, centroid);
                if d < best.1 {
                    best = (c, d);
                }
            }
            best
        })
        .unzip()
}

/// Recomputes centroids as cluster means. An empty cluster takes the point
/// of the largest cluster that lies farthest from that cluster's centroid.
fn update_centroids(points: &Array2<f64>, labels: &mut [usize], centroids: &mut Array2<f64>) {
    let k = centroids.nrows();
    loop {
        let mut counts = vec![0usize; k];
        for &l in labels.iter() {
            counts[l] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            break;
        };
        let largest = (0..k).max_by_key(|&c| (counts[c], std::cmp::Reverse(c))).unwrap();
        let centroid = centroids.row(largest).to_owned();
        let far = (0..labels.len())
            .filter(|&i| labels[i] == largest)
            .map(|i| (i, sq_dist(points.row(i), centroid.view())))
            .fold((usize::MAX, -1.0), |acc, (i, d)| if d > acc.1 { (i, d) } else { acc })
            .0;
        labels[far] = empty;
        centroids.row_mut(empty).assign(&points.row(far));
    }

    centroids.fill(0.0);
    let mut counts = vec![0usize; k];
    for (p, &l) in points.rows().into_iter().zip(labels.iter()) {
        let mut row = centroids.row_mut(l);
        row += &p;
        counts[l] += 1;
    }
    for (mut row, &c) in centroids.axis_iter_mut(Axis(0)).zip(&counts) {
        row /= c as f64;
    }
}

/// Lloyd iterations from the given initial centroids until the assignment
/// stops changing or `max_iter` centroid updates have run.
pub fn lloyd(points: &Array2<f64>, init: Array2<f64>, max_iter: usize) -> LloydOutcome {
    let mut centroids = init;
    let (mut labels, dists) = assign(points, &centroids);
    let mut history = vec![dists.iter().sum::<f64>()];
    let mut converged = false;
    for _ in 0..max_iter {
        update_centroids(points, &mut labels, &mut centroids);
        let (next, dists) = assign(points, &centroids);
        history.push(dists.iter().sum());
        if next == labels {
            converged = true;
            break;
        }
        labels = next;
    }
    LloydOutcome {
        inertia: *history.last().unwrap(),
        labels,
        centroids,
        inertia_history: history,
        converged,
    }
}

fn plus_plus_init(points: &Array2<f64>, k: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let n = points.nrows();
    let mut chosen = Vec::with_capacity(k);
    chosen.push(rng.random_range(0..n));
    let mut d2: Vec<f64> = points
        .rows()
        .into_iter()
        .map(|p| sq_dist(p, points.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 && target < d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        chosen.push(next);
        for (i, p) in points.rows().into_iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, points.row(next)));
        }
    }
    points.select(Axis(0), &chosen)
}

fn uniform_init(points: &Array2<f64>, k: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let idx = sample(rng, points.nrows(), k).into_vec();
    points.select(Axis(0), &idx)
}

/// Random generator for restart `repeat` of a run seeded with `seed`.
fn repeat_rng(seed: u64, repeat: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(repeat as u64);
    rng
}

/// K-Means with `repeats` independently seeded restarts over the rows of
/// `points`. Restarts run in parallel; results do not depend on scheduling.
pub fn kmeans(points: &Array2<f64>, config: &KMeansConfig) -> Result<ClusteringRun> {
    config.validate(points.nrows())?;
    if points.iter().any(|x| !x.is_finite()) {
        return Err(Error::input("K-Means input has non-finite entries"));
    }
    let outcomes: Vec<LloydOutcome> = (0..config.repeats)
        .into_par_iter()
        .map(|rep| {
            let mut rng = repeat_rng(config.seed, rep);
            let init = match config.init {
                KMeansInit::PlusPlus => plus_plus_init(points, config.k, &mut rng),
                KMeansInit::Uniform => uniform_init(points, config.k, &mut rng),
            };
            lloyd(points, init, config.max_iter)
        })
        .collect();

    let inertias: Vec<f64> = outcomes.iter().map(|o| o.inertia).collect();
    let best_index = inertias
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &x)| if x < acc.1 { (i, x) } else { acc })
        .0;
    Ok(ClusteringRun {
        labelings: outcomes.into_iter().map(|o| o.labels).collect(),
        inertias,
        best_index,
    })
}

/// The points K-Means sees for a given basis.
pub fn embed_rows(v: &Array2<f64>, embedding: RowEmbedding) -> Array2<f64> {
    match embedding {
        RowEmbedding::Basis => v.clone(),
        RowEmbedding::ShapeInteraction => {
            // Unit rows, so points with small coefficients are not pulled
            // toward whichever centroid sits nearest the origin.
            let mut q = v.dot(&v.t()).mapv(f64::abs);
            for mut row in q.rows_mut() {
                let norm = row.dot(&row).sqrt();
                if norm > 0.0 {
                    row /= norm;
                }
            }
            q
        }
    }
}

/// Recovers `V̂` and clusters its rows (or the rows of the chosen embedding).
pub fn cluster_pipeline(
    data: &MultiViewDataset,
    solver_config: &SolverConfig,
    kmeans_config: &KMeansConfig,
) -> Result<(ClusteringRun, SolverResult)> {
    kmeans_config.validate(data.n_samples())?;
    let result = solve(data, solver_config)?;
    let run = kmeans(&embed_rows(result.v_hat.matrix(), kmeans_config.embedding), kmeans_config)?;
    Ok((run, result))
}
