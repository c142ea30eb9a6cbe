//! Log-barrier interior-point method for the per-column program
//!
//! ```text
//! minimize    t_R² + t_I²
//! subject to  |P f| ≤ t_R,  |Q f| ≤ t_I   (entrywise)
//!             ||f − b||² ≤ r
//! ```
//!
//! over `x = [f; t_R; t_I]`. This is a convex QCQP with `4k` linear rows
//! (each row of `P` and `Q` with both signs) and one ball. Each centering
//! step is a damped Newton method with backtracking; the barrier weight
//! grows by [`BarrierOptions::mu`] until the duality gap bound `m / t`
//! drops below the tolerance.
//!
//! The paired rows share their `f` part, so the Hessian's `f` block is
//! `Pᵀ D_P P + Qᵀ D_Q Q` plus the ball term, with half the work of the
//! stacked form.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub struct BarrierOptions {
    pub mu: f64,
    /// Stops once `m / t` is below this.
    pub gap_tol: f64,
    /// Centering stops once `λ² / 2` is below this.
    pub newton_tol: f64,
    /// Cap on the total number of Newton steps.
    pub max_newton: usize,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        BarrierOptions { mu: 10.0, gap_tol: 1e-8, newton_tol: 1e-8, max_newton: 200 }
    }
}

/// Problem data. `re_rows` and `im_rows` are `k x p`, `center` has `p`
/// entries.
pub struct EpigraphProgram<'a> {
    pub re_rows: &'a DMatrix<f64>,
    pub im_rows: &'a DMatrix<f64>,
    pub center: &'a DVector<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BarrierError {
    InfeasibleStart,
    IterationCap { newton_steps: usize },
    Singular,
}

#[derive(Debug, Clone)]
pub struct BarrierSolution {
    pub x: DVector<f64>,
    pub objective: f64,
    pub newton_steps: usize,
    pub gap: f64,
}

impl EpigraphProgram<'_> {
    fn dims(&self) -> (usize, usize) {
        (self.re_rows.nrows(), self.re_rows.ncols())
    }

    /// Total number of inequality constraints.
    pub fn num_constraints(&self) -> usize {
        4 * self.re_rows.nrows() + 1
    }

    pub fn objective(x: &DVector<f64>) -> f64 {
        let p = x.len() - 2;
        x[p] * x[p] + x[p + 1] * x[p + 1]
    }

    pub fn is_strictly_feasible(&self, x: &DVector<f64>) -> bool {
        let (_, p) = self.dims();
        let f = x.rows(0, p);
        let ball = self.radius - (f - self.center).norm_squared();
        let fits = |rows: &DMatrix<f64>, t: f64| (rows * f).iter().all(|w| w.abs() < t);
        ball > 0.0 && fits(self.re_rows, x[p]) && fits(self.im_rows, x[p + 1])
    }

    pub fn solve(&self, x0: DVector<f64>, opts: &BarrierOptions) -> Result<BarrierSolution, BarrierError> {
        let (k, p) = self.dims();
        let n = p + 2;
        let m = self.num_constraints() as f64;
        let mut x = x0;
        if !self.is_strictly_feasible(&x) {
            return Err(BarrierError::InfeasibleStart);
        }

        // Rows of [P; Q] pair with t_R for the first k and t_I for the rest.
        // Slacks are `t − w` ("lo") and `t + w` ("hi") with `w = [P; Q] f`.
        let mut stacked = DMatrix::zeros(2 * k, p);
        stacked.view_mut((0, 0), (k, p)).copy_from(self.re_rows);
        stacked.view_mut((k, 0), (k, p)).copy_from(self.im_rows);
        let stacked_t = stacked.transpose();
        let mut scaled = stacked.clone();
        let mut scaled_t = stacked_t.clone();
        let t_of = |x: &DVector<f64>, j: usize| if j < k { x[p] } else { x[p + 1] };

        let mut w = DVector::zeros(2 * k);
        let mut dw = DVector::zeros(2 * k);
        let mut lo = vec![0.0; 2 * k];
        let mut hi = vec![0.0; 2 * k];
        let mut rate_lo = vec![0.0; 2 * k];
        let mut rate_hi = vec![0.0; 2 * k];
        let mut diff = DVector::zeros(2 * k);
        let mut root = DVector::zeros(2 * k);
        let mut cross = DVector::zeros(2 * k);
        let mut grad = DVector::zeros(n);
        let mut hess = DMatrix::zeros(n, n);

        let mut t = m / Self::objective(&x).max(1e-12);
        let mut steps = 0usize;

        loop {
            loop {
                let f = x.rows(0, p);
                w.gemv(1.0, &stacked, &f, 0.0);
                let off = f - self.center;
                let ball = self.radius - off.norm_squared();
                let (mut sum_re, mut sum_im, mut weight_re, mut weight_im) = (0.0, 0.0, 0.0, 0.0);
                for j in 0..2 * k {
                    let tj = t_of(&x, j);
                    lo[j] = tj - w[j];
                    hi[j] = tj + w[j];
                    let (il, ih) = (1.0 / lo[j], 1.0 / hi[j]);
                    diff[j] = il - ih;
                    let (ql, qh) = (il * il, ih * ih);
                    root[j] = (ql + qh).sqrt();
                    cross[j] = qh - ql;
                    if j < k {
                        sum_re += il + ih;
                        weight_re += ql + qh;
                    } else {
                        sum_im += il + ih;
                        weight_im += ql + qh;
                    }
                }

                let mut grad_f = grad.rows_mut(0, p);
                grad_f.gemv(1.0, &stacked_t, &diff, 0.0);
                grad_f.axpy(2.0 / ball, &off, 1.0);
                grad[p] = 2.0 * t * x[p] - sum_re;
                grad[p + 1] = 2.0 * t * x[p + 1] - sum_im;

                // The f block is Σ weight_j a_j a_jᵀ plus the ball terms.
                scaled.copy_from(&stacked);
                for mut col in scaled.column_iter_mut() {
                    col.component_mul_assign(&root);
                }
                scaled_t.copy_from(&stacked_t);
                for (mut col, r) in scaled_t.column_iter_mut().zip(root.iter()) {
                    col *= *r;
                }
                hess.fill(0.0);
                {
                    let mut ff = hess.view_mut((0, 0), (p, p));
                    ff.gemm(1.0, &scaled_t, &scaled, 0.0);
                    ff.ger(4.0 / (ball * ball), &off, &off, 1.0);
                    for j in 0..p {
                        ff[(j, j)] += 2.0 / ball;
                    }
                }
                let c_re = stacked_t.columns(0, k) * cross.rows(0, k);
                let c_im = stacked_t.columns(k, k) * cross.rows(k, k);
                for j in 0..p {
                    hess[(j, p)] = c_re[j];
                    hess[(p, j)] = c_re[j];
                    hess[(j, p + 1)] = c_im[j];
                    hess[(p + 1, j)] = c_im[j];
                }
                hess[(p, p)] = 2.0 * t + weight_re;
                hess[(p + 1, p + 1)] = 2.0 * t + weight_im;

                let chol = match hess.clone().cholesky() {
                    Some(c) => c,
                    None => {
                        let reg = 1e-12 * hess.diagonal().amax().max(1.0);
                        (&hess + DMatrix::identity(n, n) * reg).cholesky().ok_or(BarrierError::Singular)?
                    }
                };
                let neg_grad = -&grad;
                let dx = chol.solve(&neg_grad);
                let lambda2 = neg_grad.dot(&dx);
                if lambda2 / 2.0 <= opts.newton_tol {
                    break;
                }
                if steps >= opts.max_newton {
                    return Err(BarrierError::IterationCap { newton_steps: steps });
                }
                steps += 1;

                // Along x + a·dx each slack falls at a fixed rate and the
                // ball slack is quadratic in a.
                let df = dx.rows(0, p);
                dw.gemv(1.0, &stacked, &df, 0.0);
                for j in 0..2 * k {
                    let dt = t_of(&dx, j);
                    rate_lo[j] = dw[j] - dt;
                    rate_hi[j] = -dw[j] - dt;
                }
                let ball1 = -2.0 * off.dot(&df);
                let ball2 = -df.norm_squared();
                let (tr, ti, dtr, dti) = (x[p], x[p + 1], dx[p], dx[p + 1]);
                let phi_at = |a: f64| -> Option<f64> {
                    let b = ball + a * ball1 + a * a * ball2;
                    if b <= 0.0 {
                        return None;
                    }
                    let log_sum = b.ln() + sum_log(&lo, &rate_lo, a)? + sum_log(&hi, &rate_hi, a)?;
                    let (nr, ni) = (tr + a * dtr, ti + a * dti);
                    Some(t * (nr * nr + ni * ni) - log_sum)
                };

                let mut step = max_step(&[(&lo, &rate_lo), (&hi, &rate_hi)], ball, ball1, ball2);
                let phi0 = phi_at(0.0).ok_or(BarrierError::InfeasibleStart)?;
                let mut moved = false;
                for _ in 0..80 {
                    if let Some(phi) = phi_at(step) {
                        if phi <= phi0 - 0.01 * step * lambda2 {
                            x.axpy(step, &dx, 1.0);
                            moved = true;
                            break;
                        }
                    }
                    step *= 0.5;
                }
                if !moved {
                    break;
                }
            }

            let gap = m / t;
            if gap < opts.gap_tol {
                return Ok(BarrierSolution { objective: Self::objective(&x), x, newton_steps: steps, gap });
            }
            t *= opts.mu;
        }
    }
}

/// `Σ ln(s_j − a r_j)`, or `None` once a slack leaves the interior. Logs are
/// taken of short products to save work; the factors stay far from the
/// floating-point limits because steps keep a margin to the boundary.
fn sum_log(slack: &[f64], rate: &[f64], a: f64) -> Option<f64> {
    let mut total = 0.0;
    for (s, r) in slack.chunks(8).zip(rate.chunks(8)) {
        let mut prod = 1.0;
        for (si, ri) in s.iter().zip(r) {
            let v = si - a * ri;
            if v <= 0.0 {
                return None;
            }
            prod *= v;
        }
        if prod.is_normal() && prod.is_finite() {
            total += prod.ln();
        } else {
            total += s.iter().zip(r).map(|(si, ri)| (si - a * ri).ln()).sum::<f64>();
        }
    }
    Some(total)
}

/// Largest step in `(0, 1]` that keeps a margin inside every constraint,
/// given slacks with their rates of decrease, and the ball slack as a
/// quadratic `q0 + q1 a + q2 a²` along the direction.
fn max_step(rates: &[(&[f64], &[f64])], q0: f64, q1: f64, q2: f64) -> f64 {
    let mut limit = f64::INFINITY;
    for (slack, rate) in rates {
        for (si, ri) in slack.iter().zip(rate.iter()) {
            if *ri > 0.0 {
                limit = limit.min(si / ri);
            }
        }
    }
    // Positive root of q2 a² + q1 a + q0 = 0, with q0 > 0 and q2 ≤ 0.
    let root = if q2 < 0.0 {
        (-q1 - (q1 * q1 - 4.0 * q2 * q0).sqrt()) / (2.0 * q2)
    } else if q1 < 0.0 {
        -q0 / q1
    } else {
        f64::INFINITY
    };
    limit = limit.min(root);
    if limit.is_finite() {
        (0.99 * limit).min(1.0)
    } else {
        1.0
    }
}
