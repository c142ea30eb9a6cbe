use super::{RecoveryResult, SensingOperator, SolverId};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};

/// Orthogonal matching pursuit.
///
/// Atoms are chosen by the largest correlation with the residual against
/// unit-normalized columns; coefficients are refit by least squares on the
/// raw columns of the accumulated support. Stops after `sparsity` atoms or
/// once `||r|| <= residual_stop`.
pub fn omp(y: &CVector, op: &SensingOperator, sparsity: usize, residual_stop: f64) -> Result<RecoveryResult> {
    let (m, n) = (op.rows(), op.atoms());
    if y.len() != m {
        return Err(Error::Dimension(format!("y has {} entries, Ω has {m} rows", y.len())));
    }
    if sparsity == 0 {
        return Err(Error::Config("OMP sparsity must be at least 1".into()));
    }
    if sparsity > m {
        return Err(Error::Config(format!(
            "OMP sparsity {sparsity} exceeds the {m} measurements (least squares underdetermined)"
        )));
    }
    let omega = op.matrix();
    let norms = op.column_norms();
    let y_norm = y.norm();

    let mut support: Vec<usize> = Vec::with_capacity(sparsity);
    let mut selected = vec![false; n];
    let mut coefs = CVector::zeros(0);
    let mut residual = y.clone();

    while support.len() < sparsity.min(n) && residual.norm() > residual_stop {
        let corr = omega.ad_mul(&residual);
        let mut best = None;
        let mut best_val = 0.0;
        for j in 0..n {
            if selected[j] {
                continue;
            }
            let v = corr[j].norm() / norms[j];
            if v > best_val {
                best_val = v;
                best = Some(j);
            }
        }
        // Nothing left that the residual is measurably correlated with.
        let Some(j) = best.filter(|_| best_val > 1e-13 * y_norm) else { break };
        selected[j] = true;
        support.push(j);

        let sub = omega.select_columns(&support);
        coefs = least_squares(&sub, y)?;
        residual = y - &sub * &coefs;
    }

    let mut x = CVector::zeros(n);
    for (k, &j) in support.iter().enumerate() {
        x[j] = coefs[k];
    }
    let iterations = support.len();
    let mut res = RecoveryResult::new(x, y, op, iterations, SolverId::Omp, true);
    // OMP's support is the selected atom set, in selection order.
    res.support = support;
    Ok(res)
}

fn least_squares(a: &CMatrix, y: &CVector) -> Result<CVector> {
    let svd = a.clone().svd(true, true);
    let eps = svd.singular_values.max() * 1e-13;
    svd.solve(y, eps)
        .map_err(|e| Error::Numeric(format!("least-squares refit failed: {e}")))
}
