//! Small dense complex linear-algebra helpers shared by the estimators.

use nalgebra::linalg::Cholesky;
use nalgebra::Dyn;

use crate::{CMatrix, CVector, Complex64, Error, Result};

/// Gram matrices whose eigenvalue ratio falls below this are treated as singular.
pub const RANK_RATIO: f64 = 1e-12;

pub fn zeros(len: usize) -> CVector {
    CVector::from_element(len, Complex64::new(0.0, 0.0))
}

/// `lambda_min / lambda_max` of a Hermitian positive semidefinite matrix.
/// Returns 0 for an all-zero matrix.
pub fn eigen_ratio(gram: &CMatrix) -> f64 {
    let eig = gram.clone().symmetric_eigenvalues();
    let max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(max > 0.0) {
        return 0.0;
    }
    min.max(0.0) / max
}

/// Largest squared singular value of `x`.
pub fn operator_norm_sq(x: &CMatrix) -> f64 {
    let gram = if x.nrows() <= x.ncols() {
        x * x.adjoint()
    } else {
        x.ad_mul(x)
    };
    gram.symmetric_eigenvalues().iter().cloned().fold(0.0, f64::max)
}

fn checked_cholesky(gram: CMatrix, what: &'static str) -> Result<Cholesky<Complex64, Dyn>> {
    let ratio = eigen_ratio(&gram);
    if ratio < RANK_RATIO {
        return Err(Error::NumericalRank { what, ratio });
    }
    Cholesky::new(gram).ok_or(Error::NumericalRank { what, ratio })
}

/// Applies `X^H (X X^H)^{-1}` for a fixed full-row-rank `X`.
///
/// The Cholesky factor of `X X^H` is computed once; every application costs
/// two triangular solves and one adjoint product.
#[derive(Clone, Debug)]
pub struct RowProjector {
    x: CMatrix,
    chol: Cholesky<Complex64, Dyn>,
}

impl RowProjector {
    pub fn new(x: &CMatrix) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::invalid("empty training matrix"));
        }
        let chol = checked_cholesky(x * x.adjoint(), "training matrix X X^H")?;
        Ok(Self { x: x.clone(), chol })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.x
    }

    /// `X^H (X X^H)^{-1} r`, the minimum-norm preimage of `r`.
    pub fn pseudo_inverse_apply(&self, r: &CVector) -> CVector {
        self.x.ad_mul(&self.chol.solve(r))
    }

    /// Nearest point to `h` on `{h : X h = y}`.
    pub fn project(&self, h: &CVector, y: &CVector) -> CVector {
        let residual = &self.x * h - y;
        h - self.pseudo_inverse_apply(&residual)
    }
}

/// Least squares restricted to `support`: returns the full-length vector with
/// `(X_S^H X_S)^{-1} X_S^H y` on `support` and zeros elsewhere.
pub fn restricted_least_squares(x: &CMatrix, support: &[usize], y: &CVector) -> Result<CVector> {
    let mut full = zeros(x.ncols());
    if support.is_empty() {
        return Ok(full);
    }
    let sub = x.select_columns(support.iter());
    let chol = checked_cholesky(sub.ad_mul(&sub), "restricted Gram X_S^H X_S")?;
    let coef = chol.solve(&sub.ad_mul(y));
    for (k, &i) in support.iter().enumerate() {
        full[i] = coef[k];
    }
    Ok(full)
}

/// Minimum-norm least squares on `support` via SVD; tolerates rank deficiency
/// and supports wider than the number of rows.
pub fn restricted_min_norm_lstsq(x: &CMatrix, support: &[usize], y: &CVector) -> CVector {
    let mut full = zeros(x.ncols());
    if support.is_empty() {
        return full;
    }
    let sub = x.select_columns(support.iter());
    let svd = sub.svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = smax * 1e-12 * (x.nrows().max(support.len()) as f64);
    // solve() only fails when U/V were not requested.
    let coef = svd.solve(y, eps).expect("svd computed with U and V");
    for (k, &i) in support.iter().enumerate() {
        full[i] = coef[k];
    }
    full
}

/// Indices of the `k` largest-magnitude entries, returned in ascending index
/// order. Ties break towards the lower index.
pub fn top_k_by_magnitude(v: &CVector, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[b].norm_sqr().total_cmp(&v[a].norm_sqr()).then(a.cmp(&b)));
    idx.truncate(k.min(v.len()));
    idx.sort_unstable();
    idx
}

pub fn max_abs(v: &CVector) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn is_finite(v: &CVector) -> bool {
    v.iter().all(|c| c.re.is_finite() && c.im.is_finite())
}
