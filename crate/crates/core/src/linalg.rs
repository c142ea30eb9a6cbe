//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Column-stacking vectorization.
pub fn vec(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vec`].
pub fn unvec(v: &CVector, rows: usize, cols: usize) -> Result<CMatrix> {
    if v.len() != rows * cols {
        return Err(Error::Dimension(format!(
            "cannot reshape {} entries into {rows}x{cols}",
            v.len()
        )));
    }
    Ok(CMatrix::from_column_slice(rows, cols, v.as_slice()))
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Circularly symmetric complex Gaussian sample with `E|z|^2 = variance`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

pub fn random_complex_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    // Column-major fill keeps the draw order aligned with storage order.
    let data: Vec<Complex64> = (0..rows * cols).map(|_| complex_gaussian(rng, 1.0)).collect();
    CMatrix::from_vec(rows, cols, data)
}

/// Max absolute entry-wise difference.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Minimum-norm least-squares solution of `a x = rhs`.
///
/// Uses a truncated SVD pseudo-inverse: singular values below
/// `1e-10 · σ_max` are treated as zero, so a rank-deficient `a` yields the
/// bounded least-squares solution instead of an exploding one.
pub fn min_norm_solve(a: &CMatrix, rhs: &CVector) -> CVector {
    let svd = a.clone().svd(true, true);
    let eps = svd.singular_values.max() * 1e-10;
    svd.solve(rhs, eps).unwrap_or_else(|_| CVector::zeros(a.ncols()))
}

/// Full singular value decomposition with the singular triplets sorted in
/// descending order.
pub struct SortedSvd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    pub v_t: CMatrix,
}

pub fn sorted_svd(m: &CMatrix) -> Result<SortedSvd> {
    let svd = m.clone().svd(true, true);
    let u = svd
        .u
        .ok_or_else(|| Error::Numeric("SVD did not produce left vectors".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numeric("SVD did not produce right vectors".into()))?;
    let sv = svd.singular_values;
    if sv.iter().any(|s| !s.is_finite()) {
        return Err(Error::Numeric("SVD produced non-finite singular values".into()));
    }
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]).then(i.cmp(&j)));
    let k = sv.len();
    let u_sorted = CMatrix::from_fn(u.nrows(), k, |r, c| u[(r, order[c])]);
    let v_sorted = CMatrix::from_fn(k, v_t.ncols(), |r, c| v_t[(order[r], c)]);
    Ok(SortedSvd {
        u: u_sorted,
        singular_values: order.iter().map(|&i| sv[i]).collect(),
        v_t: v_sorted,
    })
}
