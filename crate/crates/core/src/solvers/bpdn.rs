//! Basis pursuit denoising, `min ||x||₁ s.t. ||y − Ωx||₂ ≤ δ`, by
//! alternating-direction splitting.
//!
//! The problem is split as `min ||u₁||₁ + ι_B(u₂)` subject to `u₁ = x`,
//! `u₂ = Ωx`, where `B` is the `δ`-ball around `y`. The `x`-update solves
//! with `I + ΩᴴΩ` through the `m x m` matrix `I + ΩΩᴴ`; the `u`-updates are
//! soft-thresholding and projection onto the ball. Data are scaled to
//! `||y|| = 1` internally so the penalty and tolerance are scale free.
//!
//! The returned iterate is the sparse `u₁`, pulled back onto the ball by a
//! minimum-norm correction when it lands outside, so results always satisfy
//! the residual budget.

use nalgebra::Cholesky;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{soft_threshold, RecoveryResult, SensingOperator, SolverId};
use crate::error::{Error, Result};
use crate::linalg::{min_norm_solve, CMatrix, CVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BpdnConfig {
    /// Residual budget `δ`.
    pub delta: f64,
    pub max_iter: usize,
    /// Bound on the primal and dual residuals (relative to `||y||`).
    pub tol: f64,
    /// Splitting penalty.
    pub rho: f64,
}

impl Default for BpdnConfig {
    fn default() -> Self {
        BpdnConfig { delta: 0.0, max_iter: 2000, tol: 1e-6, rho: 1.0 }
    }
}

impl BpdnConfig {
    pub fn with_delta(delta: f64) -> Self {
        BpdnConfig { delta, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta >= 0.0) || !self.delta.is_finite() {
            return Err(Error::Config("BPDN δ must be finite and nonnegative".into()));
        }
        if self.max_iter == 0 || !(self.tol > 0.0) || !(self.rho > 0.0) {
            return Err(Error::Config("BPDN max_iter, tol and rho must be positive".into()));
        }
        Ok(())
    }
}

/// Residual budget for complex Gaussian noise with `E|n_k|² = σ²` over `m`
/// entries: `σ √(m + 2√(2m))`.
pub fn noise_delta(sigma: f64, m: usize) -> f64 {
    let m = m as f64;
    sigma * (m + 2.0 * (2.0 * m).sqrt()).sqrt()
}

pub fn bpdn(y: &CVector, op: &SensingOperator, cfg: &BpdnConfig) -> Result<RecoveryResult> {
    cfg.validate()?;
    check_dims(y, op)?;
    let (x, iters, converged) = solve(op.matrix(), y, cfg)?;
    Ok(RecoveryResult::new(x, y, op, iters, SolverId::Bpdn, converged))
}

pub(super) fn check_dims(y: &CVector, op: &SensingOperator) -> Result<()> {
    if y.len() != op.rows() {
        return Err(Error::Dimension(format!("y has {} entries, Ω has {} rows", y.len(), op.rows())));
    }
    Ok(())
}

/// Core solver on a raw matrix. Returns `(x, iterations, converged)`.
pub(super) fn solve(omega: &CMatrix, y: &CVector, cfg: &BpdnConfig) -> Result<(CVector, usize, bool)> {
    let (m, n) = omega.shape();
    let scale = y.norm();
    if scale == 0.0 || cfg.delta >= scale {
        // x = 0 is feasible, hence optimal.
        return Ok((CVector::zeros(n), 0, true));
    }
    let yn = y.unscale(scale);
    let dn = cfg.delta / scale;
    let kappa = 1.0 / cfg.rho;

    let gram = CMatrix::identity(m, m) + omega * omega.adjoint();
    let chol = Cholesky::new(gram).ok_or_else(|| Error::Numeric("I + ΩΩᴴ is not positive definite".into()))?;

    let mut u1 = CVector::zeros(n);
    let mut u2 = CVector::zeros(m);
    let mut d1 = CVector::zeros(n);
    let mut d2 = CVector::zeros(m);
    let mut iterations = 0;
    let mut converged = false;

    for it in 1..=cfg.max_iter {
        iterations = it;
        let rhs = &u1 + &d1 + omega.ad_mul(&(&u2 + &d2));
        let x = &rhs - omega.ad_mul(&chol.solve(&(omega * &rhs)));
        let ox = omega * &x;

        let v1 = &x - &d1;
        let u1_new = v1.map(|z| soft_threshold(z, kappa));
        let v2 = &ox - &d2 - &yn;
        let v2n = v2.norm();
        let u2_new = if v2n <= dn { &yn + v2 } else { &yn + v2 * Complex64::new(dn / v2n, 0.0) };

        let r1 = &x - &u1_new;
        let r2 = &ox - &u2_new;
        let primal = (r1.norm_squared() + r2.norm_squared()).sqrt();
        let dual = cfg.rho * ((&u1_new - &u1).norm_squared() + (&u2_new - &u2).norm_squared()).sqrt();
        d1 -= r1;
        d2 -= r2;
        u1 = u1_new;
        u2 = u2_new;
        if primal <= cfg.tol && dual <= cfg.tol {
            converged = true;
            break;
        }
    }

    let mut x = u1;
    let r = &yn - omega * &x;
    let rn = r.norm();
    if rn > dn {
        x += min_norm_solve(omega, &(r * Complex64::new(1.0 - dn / rn, 0.0)));
    }
    Ok((x * Complex64::new(scale, 0.0), iterations, converged))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_complex_matrix;
    use crate::seed::rng_from_seed;

    fn op(seed: u64, m: usize, n: usize) -> SensingOperator {
        let mut rng = rng_from_seed(seed);
        SensingOperator::new(random_complex_matrix(&mut rng, m, n)).unwrap()
    }

    fn rvec(seed: u64, n: usize) -> CVector {
        let mut rng = rng_from_seed(seed);
        random_complex_matrix(&mut rng, n, 1).column(0).into_owned()
    }

    #[test]
    fn large_delta_gives_zero() {
        let o = op(1, 8, 20);
        let y = rvec(2, 8);
        let res = bpdn(&y, &o, &BpdnConfig::with_delta(y.norm())).unwrap();
        assert_eq!(res.x_hat, CVector::zeros(20));
        assert!(res.support.is_empty());
    }

    #[test]
    fn square_invertible_equality_limit() {
        let o = op(3, 6, 6);
        let y = rvec(4, 6);
        let res = bpdn(&y, &o, &BpdnConfig::with_delta(0.0)).unwrap();
        let exact = o.matrix().clone().lu().solve(&y).unwrap();
        assert!((&res.x_hat - exact).norm() < 1e-6);
    }

    #[test]
    fn recovers_single_atom() {
        let o = op(5, 16, 40);
        let c = Complex64::new(-0.4, 1.1);
        let y = o.matrix().column(17) * c;
        let res = bpdn(&y, &o, &BpdnConfig::with_delta(0.0)).unwrap();
        // Oracle: among single-atom representations only atom 17 is exact.
        let exact: Vec<usize> = (0..40)
            .filter(|&j| {
                let col = o.matrix().column(j);
                let coef = col.dotc(&y) / col.norm_squared();
                (&y - col * coef).norm() < 1e-9
            })
            .collect();
        assert_eq!(exact, vec![17]);
        let mut expect = CVector::zeros(40);
        expect[17] = c;
        assert!((&res.x_hat - &expect).norm() < 1e-4, "{}", (&res.x_hat - &expect).norm());
    }

    #[test]
    fn residual_within_budget() {
        let o = op(6, 16, 64);
        for s in 0..10 {
            let y = rvec(100 + s, 16);
            let delta = 0.2 * y.norm();
            let res = bpdn(&y, &o, &BpdnConfig::with_delta(delta)).unwrap();
            assert!(res.residual_norm <= delta * (1.0 + 1e-3));
            assert!((res.residual_norm - o.residual_norm(&y, &res.x_hat)).abs() < 1e-10);
        }
    }

    /// Real-valued 4x8 instances with a planted 2-sparse solution at δ = 0:
    /// compare the ℓ1 objective with the best over all supports of size ≤ 4
    /// (basic solutions of the equality-constrained problem).
    #[test]
    fn objective_matches_support_enumeration() {
        for s in 0..10u64 {
            let mut rng = rng_from_seed(200 + s);
            let a = random_complex_matrix(&mut rng, 4, 8).map(|z| Complex64::new(z.re, 0.0));
            let o = SensingOperator::new(a.clone()).unwrap();
            let mut x0 = CVector::zeros(8);
            x0[1] = Complex64::new(1.5, 0.0);
            x0[6] = Complex64::new(-0.8, 0.0);
            let y = &a * &x0;
            let cfg = BpdnConfig { tol: 1e-9, max_iter: 20000, ..BpdnConfig::with_delta(0.0) };
            let res = bpdn(&y, &o, &cfg).unwrap();
            let obj: f64 = res.x_hat.iter().map(|z| z.norm()).sum();

            let mut best = f64::INFINITY;
            for mask in 1u32..256 {
                if mask.count_ones() > 4 {
                    continue;
                }
                let cols: Vec<usize> = (0..8).filter(|j| mask & (1 << j) != 0).collect();
                let sub = a.select_columns(&cols);
                let svd = sub.clone().svd(true, true);
                if let Ok(c) = svd.solve(&y, 1e-12) {
                    if (&y - &sub * &c).norm() < 1e-9 {
                        best = best.min(c.iter().map(|z| z.norm()).sum());
                    }
                }
            }
            assert!((obj - best).abs() < 1e-4, "seed {s}: {obj} vs {best}");
        }
    }

    #[test]
    fn noise_delta_formula() {
        assert!((noise_delta(1.0, 16) - (16.0 + 2.0 * 32f64.sqrt()).sqrt()).abs() < 1e-15);
        assert_eq!(noise_delta(0.0, 16), 0.0);
    }

    #[test]
    fn rejects_bad_config() {
        let o = op(7, 4, 8);
        let y = rvec(8, 4);
        assert!(bpdn(&y, &o, &BpdnConfig::with_delta(-1.0)).is_err());
        assert!(bpdn(&rvec(8, 5), &o, &BpdnConfig::default()).is_err());
    }
}
