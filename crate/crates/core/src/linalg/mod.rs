//! Dense numeric kernels used by the solver.
//!
//! Matrices are plain [`ndarray::Array2<f64>`] values; [`OrthonormalBasis`]
//! wraps an `n x r` matrix whose columns are known to be orthonormal.

mod eigen;

use nalgebra::DMatrix;
use ndarray::{Array1, Array2, ArrayBase, Data, Ix2};

use crate::error::{Error, Result};

pub use eigen::{full_symmetric_eigen, top_r_eigenvectors, top_r_eigenvectors_from, TopEigen};

/// Row-major dense matrix of `f64`.
pub type DenseMatrix = Array2<f64>;

/// Largest allowed `‖VᵀV − I‖∞` for a basis to be accepted as orthonormal.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// An `n x r` matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis(Array2<f64>);

impl OrthonormalBasis {
    /// Wraps `m` after checking `‖mᵀm − I‖∞ ≤ 1e-10`.
    pub fn new(m: Array2<f64>) -> Result<Self> {
        if m.ncols() > m.nrows() {
            return Err(Error::param(format!(
                "basis has more columns ({}) than rows ({})",
                m.ncols(),
                m.nrows()
            )));
        }
        ensure_finite(&m, "basis")?;
        let err = orthonormality_error(&m);
        if err > ORTHONORMAL_TOL {
            return Err(Error::param(format!(
                "columns are not orthonormal: max |VᵀV - I| = {err:e}"
            )));
        }
        Ok(OrthonormalBasis(m))
    }

    pub(crate) fn from_trusted(m: Array2<f64>) -> Self {
        OrthonormalBasis(m)
    }

    /// The first `r` columns of the `n x n` identity.
    pub fn canonical(n: usize, r: usize) -> Result<Self> {
        if r > n {
            return Err(Error::param(format!("rank {r} exceeds dimension {n}")));
        }
        let mut m = Array2::zeros((n, r));
        for j in 0..r {
            m[[j, j]] = 1.0;
        }
        Ok(OrthonormalBasis(m))
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }

    /// Ambient dimension `n`.
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// Number of columns `r`.
    pub fn rank(&self) -> usize {
        self.0.ncols()
    }

    /// `V Vᵀ`, an `n x n` orthogonal projector.
    pub fn projector(&self) -> Array2<f64> {
        self.0.dot(&self.0.t())
    }

    pub fn orthonormality_error(&self) -> f64 {
        orthonormality_error(&self.0)
    }

    /// `a (I − V Vᵀ)` computed as `a − (a V) Vᵀ`, never forming the projector.
    pub fn residual<S: Data<Elem = f64>>(&self, a: &ArrayBase<S, Ix2>) -> Array2<f64> {
        let av = a.dot(&self.0);
        let mut out = a.to_owned();
        ndarray::linalg::general_mat_mul(-1.0, &av, &self.0.t(), 1.0, &mut out);
        out
    }
}

/// `‖VᵀV − I‖∞` (largest absolute entry).
pub fn orthonormality_error<S: Data<Elem = f64>>(v: &ArrayBase<S, Ix2>) -> f64 {
    let g = v.t().dot(v);
    let mut err = 0.0_f64;
    for ((i, j), x) in g.indexed_iter() {
        let target = if i == j { 1.0 } else { 0.0 };
        err = err.max((x - target).abs());
    }
    err
}

pub fn frobenius_norm<S: Data<Elem = f64>>(m: &ArrayBase<S, Ix2>) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Entry-wise ℓ1 norm.
pub fn l1_norm<S: Data<Elem = f64>>(m: &ArrayBase<S, Ix2>) -> f64 {
    m.iter().map(|x| x.abs()).sum()
}

pub fn max_abs<S: Data<Elem = f64>>(m: &ArrayBase<S, Ix2>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// `(M + Mᵀ) / 2`.
pub fn symmetrize<S: Data<Elem = f64>>(m: &ArrayBase<S, Ix2>) -> Array2<f64> {
    let mut out = m.to_owned();
    out += &m.t();
    out *= 0.5;
    out
}

pub(crate) fn ensure_finite<S: Data<Elem = f64>>(m: &ArrayBase<S, Ix2>, what: &str) -> Result<()> {
    if let Some(((i, j), x)) = m.indexed_iter().find(|(_, x)| !x.is_finite()) {
        return Err(Error::input(format!("{what} has non-finite entry {x} at ({i}, {j})")));
    }
    Ok(())
}

/// Element-wise shrinkage `sign(x) · max(0, |x| − tau)`.
pub fn soft_threshold<S: Data<Elem = f64>>(m: &ArrayBase<S, Ix2>, tau: f64) -> Result<Array2<f64>> {
    if tau.is_nan() || tau < 0.0 {
        return Err(Error::param(format!("shrinkage threshold must be >= 0, got {tau}")));
    }
    let mut out = m.to_owned();
    soft_threshold_in_place(&mut out, tau);
    Ok(out)
}

pub(crate) fn soft_threshold_in_place(m: &mut Array2<f64>, tau: f64) {
    m.mapv_inplace(|x| shrink(x, tau));
}

#[inline]
pub(crate) fn shrink(x: f64, tau: f64) -> f64 {
    let mag = x.abs() - tau;
    if mag > 0.0 {
        mag.copysign(x)
    } else {
        0.0
    }
}

/// Compact SVD `m = U diag(σ) Vᵀ` keeping singular values above `1e-10 · σ₁`.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub u: Array2<f64>,
    pub singular_values: Array1<f64>,
    pub vt: Array2<f64>,
}

impl ThinSvd {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    pub fn reconstruct(&self) -> Array2<f64> {
        let mut us = self.u.clone();
        for (mut col, s) in us.columns_mut().into_iter().zip(self.singular_values.iter()) {
            col *= *s;
        }
        us.dot(&self.vt)
    }

    /// Right singular vectors as an `ncols x rank` basis.
    pub fn row_space(&self) -> OrthonormalBasis {
        OrthonormalBasis::from_trusted(self.vt.t().to_owned())
    }
}

/// Relative cutoff on singular values for [`thin_svd`].
pub const SVD_RANK_TOL: f64 = 1e-10;

pub fn thin_svd<S: Data<Elem = f64>>(m: &ArrayBase<S, Ix2>) -> Result<ThinSvd> {
    ensure_finite(m, "matrix")?;
    let (rows, cols) = m.dim();
    if rows == 0 || cols == 0 {
        return Ok(ThinSvd {
            u: Array2::zeros((rows, 0)),
            singular_values: Array1::zeros(0),
            vt: Array2::zeros((0, cols)),
        });
    }
    let dm = DMatrix::from_fn(rows, cols, |i, j| m[[i, j]]);
    let svd = dm.svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested Vᵀ");

    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sigma_max = order.first().map_or(0.0, |&i| svd.singular_values[i]);
    let keep: Vec<usize> = if sigma_max > 0.0 {
        order
            .into_iter()
            .filter(|&i| svd.singular_values[i] > SVD_RANK_TOL * sigma_max)
            .collect()
    } else {
        Vec::new()
    };

    let k = keep.len();
    let u_out = Array2::from_shape_fn((rows, k), |(i, j)| u[(i, keep[j])]);
    let vt_out = Array2::from_shape_fn((k, cols), |(i, j)| vt[(keep[i], j)]);
    let s_out = Array1::from_iter(keep.iter().map(|&i| svd.singular_values[i]));
    Ok(ThinSvd {
        u: u_out,
        singular_values: s_out,
        vt: vt_out,
    })
}
