//! Clustering agreement scores: NMI, ACC, pairwise F and adjusted Rand index.
//!
//! Labels are arbitrary non-negative integers; they are compacted internally,
//! so all scores are invariant to renaming clusters.
//!
//! NMI is normalized by the geometric mean of the two entropies
//! (`I / sqrt(H_pred · H_true)`, natural logarithms). Other normalizers
//! (arithmetic mean, max) give different numbers on the same partitions.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::clustering::ClusteringRun;
use crate::error::{Error, Result};

/// Counts of samples per (predicted cluster, true cluster) pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    counts: Vec<Vec<usize>>,
    n: usize,
}

fn compact(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut ids = HashMap::new();
    let mapped = labels
        .iter()
        .map(|l| {
            let next = ids.len();
            *ids.entry(*l).or_insert(next)
        })
        .collect();
    (mapped, ids.len())
}

impl ContingencyTable {
    pub fn new(pred: &[usize], truth: &[usize]) -> Result<Self> {
        if pred.len() != truth.len() {
            return Err(Error::input(format!(
                "label length mismatch: {} predicted vs {} true",
                pred.len(),
                truth.len()
            )));
        }
        let (p, kp) = compact(pred);
        let (t, kt) = compact(truth);
        let mut counts = vec![vec![0usize; kt]; kp];
        for (&i, &j) in p.iter().zip(&t) {
            counts[i][j] += 1;
        }
        Ok(ContingencyTable {
            counts,
            n: pred.len(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of distinct predicted clusters (rows).
    pub fn k_pred(&self) -> usize {
        self.counts.len()
    }

    /// Number of distinct true clusters (columns).
    pub fn k_true(&self) -> usize {
        self.counts.first().map_or(0, Vec::len)
    }

    pub fn count(&self, pred: usize, truth: usize) -> usize {
        self.counts[pred][truth]
    }

    pub fn row_sums(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<usize> {
        let mut sums = vec![0; self.k_true()];
        for row in &self.counts {
            for (s, c) in sums.iter_mut().zip(row) {
                *s += c;
            }
        }
        sums
    }
}

fn entropy(sizes: &[usize], n: f64) -> f64 {
    sizes
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let q = c as f64 / n;
            -q * q.ln()
        })
        .sum()
}

pub fn nmi(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = ContingencyTable::new(pred, truth)?;
    if table.n() == 0 {
        return Ok(1.0);
    }
    let n = table.n() as f64;
    let a = table.row_sums();
    let b = table.col_sums();
    let (ha, hb) = (entropy(&a, n), entropy(&b, n));
    if ha == 0.0 && hb == 0.0 {
        return Ok(1.0);
    }
    if ha == 0.0 || hb == 0.0 {
        return Ok(0.0);
    }
    let mut mi = 0.0;
    for (i, row) in table.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mi += c / n * (n * c / (a[i] as f64 * b[j] as f64)).ln();
            }
        }
    }
    Ok((mi / (ha * hb).sqrt()).clamp(0.0, 1.0))
}

/// Best fraction of samples matched under a one-to-one map from predicted
/// to true clusters.
pub fn acc(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = ContingencyTable::new(pred, truth)?;
    if table.n() == 0 {
        return Ok(1.0);
    }
    let size = table.k_pred().max(table.k_true());
    let mut weights = vec![vec![0i64; size]; size];
    for (i, row) in table.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            weights[i][j] = c as i64;
        }
    }
    let matched = max_weight_assignment(&weights);
    Ok(matched as f64 / table.n() as f64)
}

/// Maximum total weight of a perfect matching on a square matrix
/// (Hungarian algorithm with potentials, `O(k³)`).
fn max_weight_assignment(weights: &[Vec<i64>]) -> i64 {
    let k = weights.len();
    if k == 0 {
        return 0;
    }
    let max = weights.iter().flatten().copied().max().unwrap_or(0);
    // cost[i][j] = max − w[i][j] ≥ 0, 1-based arrays below.
    let cost = |i: usize, j: usize| max - weights[i - 1][j - 1];
    let mut u = vec![0i64; k + 1];
    let mut v = vec![0i64; k + 1];
    let mut way = vec![0usize; k + 1];
    let mut matched_row = vec![0usize; k + 1];
    for i in 1..=k {
        matched_row[0] = i;
        let mut j0 = 0;
        let mut minv = vec![i64::MAX; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0;
            for j in 1..=k {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=k).map(|j| weights[matched_row[j] - 1][j - 1]).sum()
}

fn pairs(c: usize) -> f64 {
    let c = c as f64;
    c * (c - 1.0) / 2.0
}

/// Pairwise F score: precision and recall of "same cluster" decisions over
/// all unordered sample pairs.
pub fn pairwise_f(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = ContingencyTable::new(pred, truth)?;
    let tp: f64 = table.counts.iter().flatten().map(|&c| pairs(c)).sum();
    let pred_pairs: f64 = table.row_sums().into_iter().map(pairs).sum();
    let true_pairs: f64 = table.col_sums().into_iter().map(pairs).sum();
    if pred_pairs == 0.0 && true_pairs == 0.0 {
        return Ok(1.0);
    }
    if pred_pairs == 0.0 || true_pairs == 0.0 || tp == 0.0 {
        return Ok(0.0);
    }
    let precision = tp / pred_pairs;
    let recall = tp / true_pairs;
    Ok(2.0 * precision * recall / (precision + recall))
}

pub fn adjusted_rand_index(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = ContingencyTable::new(pred, truth)?;
    let index: f64 = table.counts.iter().flatten().map(|&c| pairs(c)).sum();
    let sum_a: f64 = table.row_sums().into_iter().map(pairs).sum();
    let sum_b: f64 = table.col_sums().into_iter().map(pairs).sum();
    let total = pairs(table.n());
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = sum_a * sum_b / total;
    let max_index = 0.5 * (sum_a + sum_b);
    let denom = max_index - expected;
    if denom == 0.0 {
        return Ok(1.0);
    }
    Ok((index - expected) / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scores {
    pub nmi: f64,
    pub acc: f64,
    pub f_score: f64,
    pub ari: f64,
}

impl Scores {
    pub fn compute(pred: &[usize], truth: &[usize]) -> Result<Self> {
        Ok(Scores {
            nmi: nmi(pred, truth)?,
            acc: acc(pred, truth)?,
            f_score: pairwise_f(pred, truth)?,
            ari: adjusted_rand_index(pred, truth)?,
        })
    }

    fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Nmi => self.nmi,
            Metric::Acc => self.acc,
            Metric::FScore => self.f_score,
            Metric::Ari => self.ari,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Nmi,
    Acc,
    #[serde(rename = "f_score")]
    FScore,
    Ari,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Nmi, Metric::Acc, Metric::FScore, Metric::Ari];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Nmi => "nmi",
            Metric::Acc => "acc",
            Metric::FScore => "f_score",
            Metric::Ari => "ari",
        }
    }
}

/// Mean and sample standard deviation over restarts, plus the score of the
/// lowest-inertia restart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricSummary {
    pub metric: Metric,
    pub mean: f64,
    pub std: f64,
    pub best: f64,
}

pub fn summarize_run(run: &ClusteringRun, truth: &[usize]) -> Result<Vec<MetricSummary>> {
    let per_repeat = run
        .labelings
        .iter()
        .map(|l| Scores::compute(l, truth))
        .collect::<Result<Vec<_>>>()?;
    let best = per_repeat[run.best_index];
    Ok(Metric::ALL
        .iter()
        .map(|&metric| {
            let values: Vec<f64> = per_repeat.iter().map(|s| s.get(metric)).collect();
            let (mean, std) = mean_std(&values);
            MetricSummary {
                metric,
                mean,
                std,
                best: best.get(metric),
            }
        })
        .collect())
}

pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// `metric,mean,std,best` rows.
pub fn write_metrics_csv(path: &Path, rows: &[MetricSummary]) -> Result<()> {
    let mut out = String::from("metric,mean,std,best\n");
    for r in rows {
        writeln!(out, "{},{},{},{}", r.metric.name(), r.mean, r.std, r.best).unwrap();
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
