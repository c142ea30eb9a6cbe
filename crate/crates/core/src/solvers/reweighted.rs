//! Iteratively reweighted ℓ1 BPDN.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bpdn::{check_dims, solve};
use super::{BpdnConfig, RecoveryResult, SensingOperator, SolverId};
use crate::error::{Error, Result};
use crate::linalg::CVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReweightConfig {
    /// Number of weighted BPDN solves.
    pub t_max: usize,
    pub epsilon: f64,
}

impl Default for ReweightConfig {
    fn default() -> Self {
        ReweightConfig { t_max: 4, epsilon: 0.1 }
    }
}

/// `w_i = 1 / (|x_i| + ε)`.
pub fn update_weights(x: &CVector, epsilon: f64) -> Vec<f64> {
    x.iter().map(|z| 1.0 / (z.norm() + epsilon)).collect()
}

/// Solves `min ||W x||₁ s.t. ||y − Ωx|| ≤ δ` `t_max` times, starting from
/// unit weights and updating `W` from each solution.
///
/// Each weighted problem is solved as plain BPDN in `z = W x` with the
/// columns of `Ω` divided by the weights. Weights are rescaled to a maximum
/// of one first, which leaves the minimizer unchanged.
pub fn reweighted_bpdn(
    y: &CVector,
    op: &SensingOperator,
    bpdn_cfg: &BpdnConfig,
    rw_cfg: &ReweightConfig,
) -> Result<RecoveryResult> {
    bpdn_cfg.validate()?;
    check_dims(y, op)?;
    if rw_cfg.t_max == 0 || !(rw_cfg.epsilon > 0.0) {
        return Err(Error::Config("reweighting needs t_max ≥ 1 and ε > 0".into()));
    }
    let n = op.atoms();
    let mut weights = vec![1.0; n];
    let mut x = CVector::zeros(n);
    let mut total_iters = 0;
    let mut converged = true;

    for _ in 0..rw_cfg.t_max {
        let peak = weights.iter().copied().fold(0.0, f64::max);
        let w: Vec<f64> = weights.iter().map(|v| v / peak).collect();
        let mut scaled = op.matrix().clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col.unscale_mut(w[j]);
        }
        let (z, iters, ok) = solve(&scaled, y, bpdn_cfg)?;
        total_iters += iters;
        converged &= ok;
        x = CVector::from_fn(n, |j, _| z[j] / Complex64::new(w[j], 0.0));
        weights = update_weights(&x, rw_cfg.epsilon);
    }

    Ok(RecoveryResult::new(x, y, op, total_iters, SolverId::RwBpdn, converged))
}
