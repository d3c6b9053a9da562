//! Independent reference implementations used by the integration tests.
//! None of these call into the crate's numeric kernels.

#![allow(dead_code)]

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.sample(StandardNormal))
}

pub fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let a = gaussian(n, n, rng);
    Array2::from_shape_fn((n, n), |(i, j)| 0.5 * (a[[i, j]] + a[[j, i]]))
}

/// Gram–Schmidt on the columns of a Gaussian matrix.
pub fn random_orthonormal(n: usize, r: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let mut q = gaussian(n, r, rng);
    for j in 0..r {
        for _ in 0..2 {
            for k in 0..j {
                let dot: f64 = (0..n).map(|i| q[[i, j]] * q[[i, k]]).sum();
                for i in 0..n {
                    q[[i, j]] -= dot * q[[i, k]];
                }
            }
        }
        let norm = (0..n).map(|i| q[[i, j]] * q[[i, j]]).sum::<f64>().sqrt();
        for i in 0..n {
            q[[i, j]] /= norm;
        }
    }
    q
}

/// Cyclic Jacobi eigendecomposition. Returns eigenvalues in descending order
/// with matching eigenvector columns.
pub fn jacobi_eigen(m: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = m.nrows();
    let mut a = m.clone();
    let mut v = Array2::<f64>::eye(n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[[i, j]] * a[[i, j]])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[[p, q]].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * a[[p, q]]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[[j, j]].partial_cmp(&a[[i, i]]).unwrap());
    let values = order.iter().map(|&i| a[[i, i]]).collect();
    let vectors = Array2::from_shape_fn((n, n), |(r, c)| v[[r, order[c]]]);
    (values, vectors)
}

pub fn projector_of_columns(v: &Array2<f64>, r: usize) -> Array2<f64> {
    let n = v.nrows();
    Array2::from_shape_fn((n, n), |(i, j)| (0..r).map(|k| v[[i, k]] * v[[j, k]]).sum())
}

pub fn fro_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// argmin_s  weight·|s| + ½ (s − y)², by comparing every stationary point of
/// the three smooth pieces and the kink.
pub fn scalar_l1_prox(y: f64, weight: f64) -> f64 {
    let objective = |s: f64| weight * s.abs() + 0.5 * (s - y) * (s - y);
    // Stationary point of the s > 0 piece, of the s < 0 piece, and the kink.
    let candidates = [Some(y - weight).filter(|&s| s > 0.0), Some(y + weight).filter(|&s| s < 0.0)];
    candidates
        .into_iter()
        .flatten()
        .fold(0.0, |best, s| if objective(s) < objective(best) { s } else { best })
}

/// `I − VVᵀ` assembled entry by entry.
pub fn complement_projector(v: &Array2<f64>) -> Array2<f64> {
    let n = v.nrows();
    Array2::from_shape_fn((n, n), |(i, j)| {
        let pij: f64 = (0..v.ncols()).map(|k| v[[i, k]] * v[[j, k]]).sum();
        if i == j {
            1.0 - pij
        } else {
            -pij
        }
    })
}

pub fn matmul(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let (n, k, m) = (a.nrows(), a.ncols(), b.ncols());
    assert_eq!(k, b.nrows());
    Array2::from_shape_fn((n, m), |(i, j)| (0..k).map(|t| a[[i, t]] * b[[t, j]]).sum())
}

/// Separable form of the S step: each entry independently minimizes
/// `λ|s| + p (s − y)²` with `y = S + (X − S)(I − VVᵀ)`.
pub fn separable_prox_update(x: &Array2<f64>, s: &Array2<f64>, v: &Array2<f64>, p: f64, lambda: f64) -> Array2<f64> {
    let residual = x - s;
    let y = s + &matmul(&residual, &complement_projector(v));
    // λ|s| + p(s − y)² = 2p · ( (λ/2p)|s| + ½(s − y)² )
    y.mapv(|yi| scalar_l1_prox(yi, lambda / (2.0 * p)))
}

/// `Σ_v p_v Σ_k R_v[k,i] R_v[k,j]` with `R_v = X_v − S_v`.
pub fn termwise_gram(xs: &[Array2<f64>], ss: &[Array2<f64>], p: &[f64]) -> Array2<f64> {
    let n = xs[0].ncols();
    let mut m = Array2::zeros((n, n));
    for ((x, s), &w) in xs.iter().zip(ss).zip(p) {
        let r = x - s;
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..r.nrows() {
                    acc += r[[k, i]] * r[[k, j]];
                }
                m[[i, j]] += w * acc;
            }
        }
    }
    m
}

/// The objective written out with explicit loops and an explicit projector.
pub fn straight_line_objective(xs: &[Array2<f64>], ss: &[Array2<f64>], v: &Array2<f64>, lambda: f64) -> f64 {
    let comp = complement_projector(v);
    let mut total = 0.0;
    for (x, s) in xs.iter().zip(ss) {
        let l1: f64 = s.iter().map(|e| e.abs()).sum();
        let r = matmul(&(x - s), &comp);
        let fro = r.iter().map(|e| e * e).sum::<f64>().sqrt();
        total += if l1 == 0.0 { 0.0 } else { lambda * l1 } + fro;
    }
    total
}

/// Plain Lloyd iterations from given centroids, written with loops.
pub fn reference_lloyd(points: &Array2<f64>, init: &Array2<f64>, max_iter: usize) -> (Vec<usize>, f64) {
    let (n, d) = points.dim();
    let k = init.nrows();
    let mut c = init.clone();
    let mut labels = vec![usize::MAX; n];
    for _ in 0..max_iter {
        let mut changed = false;
        for i in 0..n {
            let mut best = (0, f64::INFINITY);
            for j in 0..k {
                let dist: f64 = (0..d).map(|t| (points[[i, t]] - c[[j, t]]).powi(2)).sum();
                if dist < best.1 {
                    best = (j, dist);
                }
            }
            if labels[i] != best.0 {
                labels[i] = best.0;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        for j in 0..k {
            let members: Vec<usize> = (0..n).filter(|&i| labels[i] == j).collect();
            if members.is_empty() {
                continue;
            }
            for t in 0..d {
                c[[j, t]] = members.iter().map(|&i| points[[i, t]]).sum::<f64>() / members.len() as f64;
            }
        }
    }
    let inertia = (0..n)
        .map(|i| (0..d).map(|t| (points[[i, t]] - c[[labels[i], t]]).powi(2)).sum::<f64>())
        .sum();
    (labels, inertia)
}

/// Best accuracy over every injective relabeling of predicted clusters onto
/// true classes (padding with unmatched ids when counts differ).
pub fn exhaustive_acc(pred: &[usize], truth: &[usize]) -> f64 {
    let compact = |l: &[usize]| {
        let mut ids: Vec<usize> = l.to_vec();
        ids.sort_unstable();
        ids.dedup();
        l.iter().map(|x| ids.binary_search(x).unwrap()).collect::<Vec<_>>()
    };
    let p = compact(pred);
    let t = compact(truth);
    let kp = p.iter().max().map_or(0, |m| m + 1);
    let kt = t.iter().max().map_or(0, |m| m + 1);
    let size = kp.max(kt);
    let mut perm: Vec<usize> = (0..size).collect();
    let mut best = 0;
    permute(&mut perm, 0, &mut |map| {
        let hits = p.iter().zip(&t).filter(|(a, b)| map[**a] == **b).count();
        best = best.max(hits);
    });
    best as f64 / p.len() as f64
}

fn permute(v: &mut Vec<usize>, i: usize, f: &mut dyn FnMut(&[usize])) {
    if i == v.len() {
        f(v);
        return;
    }
    for j in i..v.len() {
        v.swap(i, j);
        permute(v, i + 1, f);
        v.swap(i, j);
    }
}
