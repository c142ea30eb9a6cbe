//! Sparse recovery of `x` from `y = Ωx + n` and channel reconstruction.

mod bpdn;
mod omp;
mod reweighted;

pub use bpdn::{bpdn, noise_delta, BpdnConfig};
pub use omp::omp;
pub use reweighted::{reweighted_bpdn, update_weights, ReweightConfig};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dictionary::GridDictionary;
use crate::error::{Error, Result};
use crate::linalg::{unvec, CMatrix, CVector};

/// Relative magnitude below which recovered coefficients count as zero.
pub const SUPPORT_THRESHOLD: f64 = 1e-3;

/// Equivalent sensing matrix `Ω = ΦΨ` with cached column norms.
#[derive(Debug, Clone)]
pub struct SensingOperator {
    omega: CMatrix,
    column_norms: Vec<f64>,
}

impl SensingOperator {
    pub fn new(omega: CMatrix) -> Result<Self> {
        let column_norms: Vec<f64> = omega.column_iter().map(|c| c.norm()).collect();
        if let Some(j) = column_norms.iter().position(|&n| n == 0.0) {
            return Err(Error::Degenerate(format!("sensing matrix column {j} is zero")));
        }
        Ok(SensingOperator { omega, column_norms })
    }

    pub fn from_parts(phi: &CMatrix, dict: &GridDictionary) -> Result<Self> {
        if phi.ncols() != dict.matrix.nrows() {
            return Err(Error::Dimension(format!(
                "Φ has {} columns, Ψ has {} rows",
                phi.ncols(),
                dict.matrix.nrows()
            )));
        }
        Self::new(phi * &dict.matrix)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.omega
    }

    pub fn column_norms(&self) -> &[f64] {
        &self.column_norms
    }

    pub fn rows(&self) -> usize {
        self.omega.nrows()
    }

    pub fn atoms(&self) -> usize {
        self.omega.ncols()
    }

    pub fn residual_norm(&self, y: &CVector, x: &CVector) -> f64 {
        (y - &self.omega * x).norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolverId {
    #[serde(rename = "OMP")]
    Omp,
    #[serde(rename = "BPDN")]
    Bpdn,
    #[serde(rename = "RW-BPDN")]
    RwBpdn,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecoveryResult {
    #[serde(with = "crate::io::vector_serde")]
    pub x_hat: CVector,
    pub support: Vec<usize>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub solver_id: SolverId,
    /// False when an iterative solver hit its iteration cap.
    pub converged: bool,
}

impl RecoveryResult {
    fn new(x_hat: CVector, y: &CVector, op: &SensingOperator, iterations: usize, solver_id: SolverId, converged: bool) -> Self {
        let support = thresholded_support(&x_hat, SUPPORT_THRESHOLD);
        let residual_norm = op.residual_norm(y, &x_hat);
        RecoveryResult { x_hat, support, residual_norm, iterations, solver_id, converged }
    }

    /// Number of coefficients above `SUPPORT_THRESHOLD · ||x̂||_∞`.
    pub fn sparsity(&self) -> usize {
        self.support.len()
    }
}

/// Indices with `|x_i| > rel · ||x||_∞`.
pub fn thresholded_support(x: &CVector, rel: f64) -> Vec<usize> {
    let peak = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Vec::new();
    }
    x.iter()
        .enumerate()
        .filter(|(_, z)| z.norm() > rel * peak)
        .map(|(i, _)| i)
        .collect()
}

/// `unvec(Ψ x̂)` as an `R x T` channel estimate.
pub fn reconstruct_channel(x_hat: &CVector, dict: &GridDictionary) -> Result<CMatrix> {
    if x_hat.len() != dict.num_atoms() {
        return Err(Error::Dimension(format!(
            "x̂ has {} entries, dictionary has {} atoms",
            x_hat.len(),
            dict.num_atoms()
        )));
    }
    unvec(&(&dict.matrix * x_hat), dict.r, dict.t)
}

/// `||H − Ĥ||_F / ||H||_F`.
pub fn nmse(h_true: &CMatrix, h_hat: &CMatrix) -> Result<f64> {
    if h_true.shape() != h_hat.shape() {
        return Err(Error::Dimension("channel shapes differ".into()));
    }
    let den = h_true.norm();
    if den == 0.0 {
        return Err(Error::Numeric("NMSE undefined for a zero channel".into()));
    }
    Ok((h_true - h_hat).norm() / den)
}

fn soft_threshold(z: Complex64, kappa: f64) -> Complex64 {
    let mag = z.norm();
    if mag <= kappa {
        Complex64::new(0.0, 0.0)
    } else {
        z * ((mag - kappa) / mag)
    }
}
