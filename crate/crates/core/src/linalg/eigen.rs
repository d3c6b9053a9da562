//! Truncated symmetric eigendecomposition.
//!
//! Small problems, and problems where `r` is a sizeable fraction of `n`, go
//! straight to a dense symmetric decomposition followed by truncation. Larger
//! problems use a block Krylov (Davidson-type, no preconditioner) iteration
//! with Rayleigh-Ritz extraction and thick restarts, so that the cost per
//! call is dominated by `O(n² b)` products with a block of `b ≈ r` vectors.
//! If the iteration fails to reach the residual target the dense path is used
//! instead, so the result never depends on whether Krylov converged.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ensure_finite, symmetrize, OrthonormalBasis};
use crate::error::{Error, Result};

/// Top eigenpairs of a symmetric matrix, eigenvalues non-increasing.
#[derive(Debug, Clone)]
pub struct TopEigen {
    pub vectors: OrthonormalBasis,
    pub values: Vec<f64>,
}

const DENSE_CUTOFF: usize = 256;
const OVERSAMPLE: usize = 8;
const MAX_EXPANSIONS: usize = 400;
const RITZ_TOL: f64 = 1e-11;
const START_SEED: u64 = 0x4c43_5253_5221;

/// The `r` leading eigenvectors of the symmetric matrix `m`.
///
/// `m` is symmetrized as `(M + Mᵀ)/2` before use. Requires `1 ≤ r < n`.
pub fn top_r_eigenvectors(m: &Array2<f64>, r: usize) -> Result<TopEigen> {
    top_r_eigenvectors_from(m, r, None)
}

/// As [`top_r_eigenvectors`], seeding the iterative path with the columns of
/// `start` (typically the previous iterate). The returned subspace does not
/// depend on the start beyond the degeneracy of the spectrum.
pub fn top_r_eigenvectors_from(
    m: &Array2<f64>,
    r: usize,
    start: Option<ArrayView2<'_, f64>>,
) -> Result<TopEigen> {
    let (rows, cols) = m.dim();
    if rows != cols {
        return Err(Error::param(format!("eigensolver needs a square matrix, got {rows}x{cols}")));
    }
    let n = rows;
    if r == 0 || r >= n {
        return Err(Error::param(format!("need 1 <= r < n, got r={r}, n={n}")));
    }
    ensure_finite(m, "matrix")?;
    let m = symmetrize(m);

    let block = (r + OVERSAMPLE).min(n);
    let (values, mut vectors) = if n <= DENSE_CUTOFF || 3 * block >= n {
        dense_top(&m, r)
    } else {
        match krylov_top(&m, r, block, start) {
            Some(found) => found,
            None => dense_top(&m, r),
        }
    };
    fix_signs(&mut vectors);
    Ok(TopEigen {
        vectors: OrthonormalBasis::from_trusted(vectors),
        values,
    })
}

/// Full eigendecomposition of a symmetric matrix, eigenvalues non-increasing.
pub fn full_symmetric_eigen(m: &Array2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    if m.nrows() != m.ncols() {
        return Err(Error::param("eigensolver needs a square matrix"));
    }
    ensure_finite(m, "matrix")?;
    let (values, mut vectors) = dense_eigh_desc(&symmetrize(m));
    fix_signs(&mut vectors);
    Ok((values, vectors))
}

fn dense_top(m: &Array2<f64>, r: usize) -> (Vec<f64>, Array2<f64>) {
    let (mut values, vectors) = dense_eigh_desc(m);
    values.truncate(r);
    (values, vectors.slice(s![.., ..r]).to_owned())
}

fn dense_eigh_desc(m: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = m.nrows();
    let dm = DMatrix::from_fn(n, n, |i, j| m[[i, j]]);
    let eig = SymmetricEigen::new(dm);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = Array2::from_shape_fn((n, n), |(i, j)| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

fn krylov_top(
    m: &Array2<f64>,
    r: usize,
    block: usize,
    start: Option<ArrayView2<'_, f64>>,
) -> Option<(Vec<f64>, Array2<f64>)> {
    let n = m.nrows();
    let max_dim = (8 * block).min(3 * n / 4).max(2 * block);
    let keep = (max_dim - block).min(2 * block).max(block);
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);

    let mut init = Array2::zeros((n, block));
    let mut filled = 0;
    if let Some(start) = start {
        if start.nrows() == n {
            let take = start.ncols().min(block);
            init.slice_mut(s![.., ..take]).assign(&start.slice(s![.., ..take]));
            filled = take;
        }
    }
    for j in filled..block {
        for i in 0..n {
            init[[i, j]] = rng.random_range(-1.0..1.0);
        }
    }
    let mut basis = orthonormalize_block(None, init, &mut rng);
    let mut mb = m.dot(&basis);

    for _ in 0..MAX_EXPANSIONS {
        let h = symmetrize(&basis.t().dot(&mb));
        let (theta, y) = dense_eigh_desc(&h);
        let k = basis.ncols();
        let want = block.min(k);

        let y_top = y.slice(s![.., ..want]);
        let ritz = basis.dot(&y_top);
        let mut resid = mb.dot(&y_top);
        for (j, mut col) in resid.axis_iter_mut(Axis(1)).enumerate() {
            col.scaled_add(-theta[j], &ritz.column(j));
        }

        let scale = theta.iter().fold(0.0_f64, |acc, t| acc.max(t.abs()));
        let worst = (0..r)
            .map(|j| resid.column(j).dot(&resid.column(j)).sqrt())
            .fold(0.0_f64, f64::max);
        if worst <= RITZ_TOL * scale {
            let values = theta[..r].to_vec();
            return Some((values, ritz.slice(s![.., ..r]).to_owned()));
        }

        if k + block > max_dim {
            let y_keep = y.slice(s![.., ..keep.min(k)]);
            basis = basis.dot(&y_keep);
            mb = mb.dot(&y_keep);
        }

        let expansion = orthonormalize_block(Some(&basis), resid, &mut rng);
        let m_expansion = m.dot(&expansion);
        basis = ndarray::concatenate![Axis(1), basis, expansion];
        mb = ndarray::concatenate![Axis(1), mb, m_expansion];
        if basis.ncols() >= n {
            return None;
        }
    }
    None
}

/// Orthonormalizes the columns of `block` against `basis` and each other
/// (classical Gram-Schmidt, two passes). Columns that vanish are replaced by
/// random directions so the output always has `block.ncols()` columns.
fn orthonormalize_block(
    basis: Option<&Array2<f64>>,
    block: Array2<f64>,
    rng: &mut ChaCha8Rng,
) -> Array2<f64> {
    let n = block.nrows();
    let width = block.ncols();
    let mut out = Array2::zeros((n, width));
    for j in 0..width {
        let mut v = block.column(j).to_owned();
        let mut attempts = 0;
        loop {
            let before = v.dot(&v).sqrt();
            for _ in 0..2 {
                if let Some(b) = basis {
                    let coeff = b.t().dot(&v);
                    v -= &b.dot(&coeff);
                }
                if j > 0 {
                    let done = out.slice(s![.., ..j]);
                    let coeff = done.t().dot(&v);
                    v -= &done.dot(&coeff);
                }
            }
            let after = v.dot(&v).sqrt();
            if after.is_finite() && after > 0.0 && after > 1e-13 * before {
                v /= after;
                break;
            }
            attempts += 1;
            assert!(attempts < 16, "could not extend orthonormal basis");
            v = Array1::from_shape_fn(n, |_| rng.random_range(-1.0..1.0));
        }
        out.column_mut(j).assign(&v);
    }
    out
}

/// Makes the first entry of each column with magnitude above `1e-12` positive.
fn fix_signs(vectors: &mut Array2<f64>) {
    for mut col in vectors.axis_iter_mut(Axis(1)) {
        if let Some(&first) = col.iter().find(|x| x.abs() > 1e-12) {
            if first < 0.0 {
                col.mapv_inplace(|x| -x);
            }
        }
    }
}
