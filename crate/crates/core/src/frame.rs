//! Complex frames and their frame-theoretic diagnostics.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Column norms within this distance of 1 count as unit norm.
pub const DEFAULT_UNIT_NORM_TOL: f64 = 1e-8;

/// An `M x N` complex frame (`N >= M`), stored column-major with one frame
/// vector per column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "crate::io::MatrixJson", into = "crate::io::MatrixJson")]
pub struct Frame {
    matrix: CMatrix,
}

impl Frame {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let (m, n) = matrix.shape();
        if m == 0 || n == 0 {
            return Err(Error::InvalidFrame("empty matrix".into()));
        }
        if n < m {
            return Err(Error::InvalidFrame(format!(
                "{n} vectors cannot span a {m}-dimensional space"
            )));
        }
        if !linalg::is_finite(&matrix) {
            return Err(Error::InvalidFrame("non-finite entries".into()));
        }
        Ok(Frame { matrix })
    }

    /// Like [`Frame::new`], additionally requiring every column norm to be
    /// within `tol` of one.
    pub fn new_unit_norm(matrix: CMatrix, tol: f64) -> Result<Self> {
        let frame = Self::new(matrix)?;
        let dev = frame.unit_norm_deviation();
        if dev > tol {
            return Err(Error::InvalidFrame(format!(
                "column norms deviate from 1 by up to {dev:e} (tolerance {tol:e})"
            )));
        }
        Ok(frame)
    }

    /// Normalizes every column to unit norm.
    pub fn normalized(matrix: CMatrix) -> Result<Self> {
        let mut frame = Self::new(matrix)?;
        for mut col in frame.matrix.column_iter_mut() {
            let nrm = col.norm();
            if nrm == 0.0 {
                return Err(Error::Degenerate("zero column".into()));
            }
            col.unscale_mut(nrm);
        }
        Ok(frame)
    }

    /// Columns drawn as independent standard complex Gaussian vectors, then
    /// normalized.
    pub fn random_unit_norm<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Result<Self> {
        Self::normalized(linalg::random_complex_matrix(rng, m, n))
    }

    /// Harmonic frame: the first `m` rows of the unitary `n x n` DFT matrix with
    /// columns rescaled to unit norm. Tight with bounds `n/m`.
    pub fn harmonic(m: usize, n: usize) -> Result<Self> {
        let scale = 1.0 / (m as f64).sqrt();
        let mat = CMatrix::from_fn(m, n, |k, j| {
            let angle = -2.0 * std::f64::consts::PI * ((k * j) % n) as f64 / n as f64;
            Complex64::from_polar(scale, angle)
        });
        Self::new(mat)
    }

    /// Dimension `M` of the ambient space.
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Number of frame vectors `N`.
    pub fn len(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.is_empty()
    }

    pub fn redundancy(&self) -> f64 {
        self.len() as f64 / self.dim() as f64
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn column_norms(&self) -> Vec<f64> {
        self.matrix.column_iter().map(|c| c.norm()).collect()
    }

    /// Largest `| ||f_i|| - 1 |` over all columns.
    pub fn unit_norm_deviation(&self) -> f64 {
        self.column_norms().iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max)
    }
}

impl TryFrom<crate::io::MatrixJson> for Frame {
    type Error = Error;

    fn try_from(j: crate::io::MatrixJson) -> Result<Self> {
        Frame::new(CMatrix::try_from(&j)?)
    }
}

impl From<Frame> for crate::io::MatrixJson {
    fn from(f: Frame) -> Self {
        crate::io::MatrixJson::from(&f.matrix)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameDiagnostics {
    pub coherence: f64,
    pub welch_bound: f64,
    /// Lower and upper frame bounds `(alpha, beta)`.
    pub frame_bounds: (f64, f64),
    pub tightness_residual: f64,
    pub redundancy: f64,
    pub unit_norm_deviation: f64,
}

/// Gram matrix `FᴴF`.
pub fn gram(frame: &Frame) -> CMatrix {
    frame.matrix.ad_mul(&frame.matrix)
}

/// Normalized magnitudes `|g_ij| / (||f_i|| ||f_j||)` for every pair `i < j`,
/// in row-major pair order.
pub fn pair_magnitudes(frame: &Frame) -> Result<Vec<f64>> {
    let norms = frame.column_norms();
    if norms.contains(&0.0) {
        return Err(Error::Degenerate("frame has a zero-norm column".into()));
    }
    let g = gram(frame);
    let n = frame.len();
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            out.push(g[(i, j)].norm() / (norms[i] * norms[j]));
        }
    }
    Ok(out)
}

/// Mutual coherence: the largest normalized off-diagonal Gram magnitude.
/// Zero for a single-vector frame.
pub fn coherence(frame: &Frame) -> Result<f64> {
    Ok(pair_magnitudes(frame)?.into_iter().fold(0.0, f64::max))
}

/// Welch lower bound `sqrt((N - M) / (M (N - 1)))` on the coherence of `N`
/// unit vectors in `C^M`.
pub fn welch_bound(m: usize, n: usize) -> Result<f64> {
    if m == 0 || n < m {
        return Err(Error::InvalidFrame(format!("Welch bound needs N >= M >= 1, got M={m}, N={n}")));
    }
    if n < 2 {
        return Err(Error::InvalidFrame("Welch bound needs at least two vectors".into()));
    }
    Ok((((n - m) as f64) / ((m * (n - 1)) as f64)).sqrt())
}

/// Smallest and largest eigenvalues of `FFᴴ`.
pub fn frame_bounds(frame: &Frame) -> (f64, f64) {
    // The singular values of F are the square roots of the eigenvalues of FFᴴ
    // (N >= M, so there are exactly M of them).
    let sv = frame.matrix.singular_values();
    let lo = sv.iter().fold(f64::INFINITY, |a, &s| a.min(s * s));
    let hi = sv.iter().fold(0.0_f64, |a, &s| a.max(s * s));
    (lo, hi)
}

/// Relative distance of `FFᴴ` from the tight operator with the same trace:
/// `||FFᴴ - c I||_F / ||c I||_F` with `c = tr(FFᴴ) / M`. For unit-norm frames
/// `c = N / M`. Zero exactly when the frame is tight.
pub fn tightness_residual(frame: &Frame) -> f64 {
    let s = &frame.matrix * frame.matrix.adjoint();
    let m = frame.dim();
    let c = s.trace().re / m as f64;
    if c == 0.0 {
        return 0.0;
    }
    let target = CMatrix::identity(m, m) * Complex64::new(c, 0.0);
    (s - &target).norm() / target.norm()
}

pub fn diagnostics(frame: &Frame) -> Result<FrameDiagnostics> {
    Ok(FrameDiagnostics {
        coherence: coherence(frame)?,
        welch_bound: if frame.len() >= 2 { welch_bound(frame.dim(), frame.len())? } else { 0.0 },
        frame_bounds: frame_bounds(frame),
        tightness_residual: tightness_residual(frame),
        redundancy: frame.redundancy(),
        unit_norm_deviation: frame.unit_norm_deviation(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, random_complex_matrix};
    use crate::seed::rng_from_seed;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn two_by_three() -> Frame {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Frame::new(CMatrix::from_row_slice(2, 3, &[c(1.0), c(0.0), c(h), c(0.0), c(1.0), c(h)])).unwrap()
    }

    /// Independent DFT construction: F = S W with W the unitary DFT and S
    /// selecting the first M rows, then scaled by sqrt(N/M).
    fn dft_oracle(m: usize, n: usize) -> CMatrix {
        let w = CMatrix::from_fn(n, n, |k, j| {
            Complex64::from_polar(1.0 / (n as f64).sqrt(), -2.0 * std::f64::consts::PI * (k * j) as f64 / n as f64)
        });
        w.rows(0, m).into_owned() * c((n as f64 / m as f64).sqrt())
    }

    #[test]
    fn rejects_underspanning_and_nonfinite() {
        assert!(Frame::new(CMatrix::zeros(3, 2)).is_err());
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = Complex64::new(f64::NAN, 0.0);
        assert!(Frame::new(m).is_err());
        assert!(Frame::new(CMatrix::identity(2, 2)).is_ok());
    }

    #[test]
    fn unit_norm_constructor_checks_columns() {
        let mut m = CMatrix::identity(2, 3);
        m[(0, 2)] = c(2.0);
        assert!(Frame::new_unit_norm(m.clone(), 1e-8).is_err());
        m[(0, 2)] = c(0.6);
        m[(1, 2)] = c(0.8);
        assert!(Frame::new_unit_norm(m, 1e-8).is_ok());
    }

    #[test]
    fn gram_of_identity_is_identity() {
        let f = Frame::new(CMatrix::identity(2, 2)).unwrap();
        assert_eq!(gram(&f), CMatrix::identity(2, 2));
    }

    #[test]
    fn gram_of_two_by_three() {
        let g = gram(&two_by_three());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..3 {
            assert!((g[(i, i)] - c(1.0)).norm() < 1e-15);
        }
        assert!(g[(0, 1)].norm() < 1e-15);
        assert!((g[(0, 2)].norm() - h).abs() < 1e-15);
        assert!((g[(1, 2)].norm() - h).abs() < 1e-15);
    }

    #[test]
    fn harmonic_frame_matches_dft_oracle_and_is_tight() {
        let f = Frame::harmonic(2, 4).unwrap();
        let oracle = dft_oracle(2, 4);
        assert!(max_abs_diff(f.matrix(), &oracle) < 1e-14);
        let s = f.matrix() * f.matrix().adjoint();
        assert!(max_abs_diff(&s, &(CMatrix::identity(2, 2) * c(2.0))) < 1e-14);
        let (a, b) = frame_bounds(&f);
        assert!((a - 2.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12);

        let big = Frame::harmonic(16, 64).unwrap();
        assert!(tightness_residual(&big) <= 1e-10);
        assert!(big.unit_norm_deviation() < 1e-12);
    }

    #[test]
    fn coherence_examples() {
        assert_eq!(coherence(&Frame::new(CMatrix::identity(2, 2)).unwrap()).unwrap(), 0.0);
        let mu = coherence(&two_by_three()).unwrap();
        assert!((mu - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);

        let mut rng = rng_from_seed(1);
        let mut m = random_complex_matrix(&mut rng, 3, 5);
        let col = m.column(1).into_owned();
        m.set_column(4, &col);
        let dup = Frame::normalized(m).unwrap();
        assert!((coherence(&dup).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coherence_rejects_zero_column() {
        let f = Frame::new(CMatrix::from_row_slice(1, 2, &[c(1.0), c(0.0)])).unwrap();
        assert!(matches!(coherence(&f), Err(Error::Degenerate(_))));
    }

    #[test]
    fn welch_bound_examples() {
        assert!((welch_bound(16, 64).unwrap() - (48.0_f64 / 1008.0).sqrt()).abs() < 1e-15);
        assert!((welch_bound(16, 64).unwrap() - 0.218218).abs() < 1e-6);
        assert_eq!(welch_bound(4, 4).unwrap(), 0.0);
        assert!((welch_bound(2, 3).unwrap() - 0.5).abs() < 1e-15);
        assert!(welch_bound(3, 2).is_err());
    }

    #[test]
    fn frame_bounds_examples() {
        let (a, b) = frame_bounds(&Frame::new(CMatrix::identity(2, 2)).unwrap());
        assert!((a - 1.0).abs() < 1e-15 && (b - 1.0).abs() < 1e-15);
        let dup = Frame::new(CMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(0.0), c(0.0)])).unwrap();
        let (a, b) = frame_bounds(&dup);
        assert!(a.abs() < 1e-15);
        assert!((b - 2.0).abs() < 1e-12);
    }

    #[test]
    fn frame_bounds_agree_with_hermitian_eigenvalues() {
        let mut rng = rng_from_seed(11);
        let f = Frame::random_unit_norm(4, 9, &mut rng).unwrap();
        let s = f.matrix() * f.matrix().adjoint();
        let eig = s.symmetric_eigen().eigenvalues;
        let (a, b) = frame_bounds(&f);
        assert!((a - eig.min()).abs() < 1e-12);
        assert!((b - eig.max()).abs() < 1e-12);
    }

    #[test]
    fn tightness_residual_examples() {
        assert_eq!(tightness_residual(&Frame::new(CMatrix::identity(3, 3)).unwrap()), 0.0);
        // FFᴴ = [[1.5, 0.5], [0.5, 1.5]], target 1.5 I: off-diagonal mass only.
        let oracle = (2.0_f64 * 0.25).sqrt() / (2.0_f64 * 2.25).sqrt();
        let r = tightness_residual(&two_by_three());
        assert!(r > 0.0);
        assert!((r - oracle).abs() < 1e-14, "{r} vs {oracle}");
    }

    #[test]
    fn diagnostics_of_tight_harmonic() {
        let d = diagnostics(&Frame::harmonic(4, 8).unwrap()).unwrap();
        assert!(d.frame_bounds.0 <= d.frame_bounds.1);
        assert!((d.redundancy - 2.0).abs() < 1e-15);
        assert!(d.coherence >= d.welch_bound - 1e-12);
        assert!(d.tightness_residual < 1e-12);
    }

    #[test]
    fn frame_serializes_as_matrix_json() {
        let f = two_by_three();
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains("\"rows\":2"));
        let back: Frame = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<Frame>(r#"{"rows":3,"cols":1,"entries":[[1,0],[0,0],[0,0]]}"#).is_err());
    }
}
