//! Nearest tight frame by polar decomposition, and Frobenius normalization
//! into a measurement matrix.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::linalg::{sorted_svd, CMatrix};

/// Relative singular-value floor below which a frame counts as rank deficient.
pub const RANK_TOL: f64 = 1e-12;

/// Measurement matrix `Φ` of shape `M_T M_R x T R`, scaled to
/// `||Φ||_F = √(TR)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementMatrix {
    #[serde(with = "crate::io::matrix_serde")]
    pub matrix: CMatrix,
    pub target_frobenius: f64,
}

impl MeasurementMatrix {
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn as_frame(&self) -> Result<Frame> {
        Frame::new(self.matrix.clone())
    }
}

/// Replaces `F = U Σ Vᴴ` by `√(N/M) U Vᴴ`, the tight frame with frame bound
/// `N/M` closest to `F` in Frobenius norm.
pub fn polar_tighten(frame: &Frame) -> Result<Frame> {
    let (m, n) = (frame.dim(), frame.len());
    let svd = sorted_svd(frame.matrix())?;
    let s_max = svd.singular_values[0];
    let s_min = *svd.singular_values.last().expect("at least one singular value");
    if !(s_max > 0.0) || s_min < RANK_TOL * s_max {
        return Err(Error::Degenerate(format!(
            "frame is rank deficient (σ_min = {s_min:e}, σ_max = {s_max:e})"
        )));
    }
    // Thin factors: U is M x M, the first M rows of Vᴴ span the row space.
    let v_t = svd.v_t.rows(0, m);
    let scale = Complex64::new((n as f64 / m as f64).sqrt(), 0.0);
    Frame::new(&svd.u * v_t * scale)
}

/// `Φ = √(TR) F / ||F||_F`.
pub fn normalize_measurement(frame: &Frame, t: usize, r: usize) -> Result<MeasurementMatrix> {
    normalize_matrix(frame.matrix(), t, r)
}

pub fn normalize_matrix(m: &CMatrix, t: usize, r: usize) -> Result<MeasurementMatrix> {
    if m.ncols() != t * r {
        return Err(Error::Dimension(format!(
            "measurement matrix needs T·R = {} columns, got {}",
            t * r,
            m.ncols()
        )));
    }
    let nrm = m.norm();
    if nrm == 0.0 {
        return Err(Error::Degenerate("cannot normalize a zero matrix".into()));
    }
    let target = ((t * r) as f64).sqrt();
    Ok(MeasurementMatrix { matrix: m * Complex64::new(target / nrm, 0.0), target_frobenius: target })
}
