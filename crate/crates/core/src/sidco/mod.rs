//! Mutual-coherence minimization by cyclic per-column decorrelation.
//!
//! Each column `f̃_i` of a unit-norm frame is replaced by the solution of
//!
//! ```text
//! minimize    t_R² + t_I²
//! subject to  |Re(f̃_jᴴ f)| ≤ t_R,  |Im(f̃_jᴴ f)| ≤ t_I   for all j ≠ i
//!             ||f − f̃_i||² ≤ T_i
//! ```
//!
//! posed over `x = [Re f; Im f; t_R; t_I] ∈ R^{2M+2}`. The ball radius
//! `T_i < 1 − max_j |g_ij|²` keeps `f` from becoming collinear with any other
//! column. Solutions are renormalized and kept only if they do not raise the
//! column's largest normalized inner product, so the frame coherence never
//! increases from one sweep to the next.

pub mod barrier;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{self, Frame, DEFAULT_UNIT_NORM_TOL};
use crate::linalg::{CMatrix, CVector};
use barrier::{BarrierError, BarrierOptions, EpigraphProgram};

/// `f ∈ C^M` as `[Re f; Im f] ∈ R^{2M}`.
pub fn realify(f: &CVector) -> DVector<f64> {
    let m = f.len();
    DVector::from_fn(2 * m, |k, _| if k < m { f[k].re } else { f[k - m].im })
}

/// Inverse of [`realify`].
pub fn complexify(x: &DVector<f64>) -> CVector {
    assert!(x.len().is_multiple_of(2), "realified vectors have even length");
    let m = x.len() / 2;
    CVector::from_fn(m, |k, _| Complex64::new(x[k], x[k + m]))
}

/// `D_M = [[0, −1], [1, 0]] ⊗ I_M`, the real representation of multiplying
/// by `j`.
pub fn multiply_by_j_matrix(m: usize) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(2 * m, 2 * m);
    for k in 0..m {
        d[(k, m + k)] = -1.0;
        d[(m + k, k)] = 1.0;
    }
    d
}

/// `1 − max_j |g_ij|²`, clamped at zero. The flag is set when the row holds
/// a collinear column (`max |g_ij| ≥ 1`), in which case the radius is zero.
pub fn ball_radius(gram_row: &[Complex64]) -> (f64, bool) {
    let max = gram_row.iter().map(|g| g.norm()).fold(0.0, f64::max);
    if max >= 1.0 {
        (0.0, true)
    } else {
        (1.0 - max * max, false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SidcoConfig {
    pub max_sweeps: usize,
    /// Stop when a full sweep lowers the coherence by less than this.
    pub coherence_tol: f64,
    /// Duality-gap and Newton tolerance of the per-column solver.
    pub qp_tol: f64,
    /// Fraction of the collinearity radius used as the ball radius `T_i`.
    pub ball_shrink_guard: f64,
    /// Seed for the random unit-norm initialization.
    pub seed: u64,
}

impl Default for SidcoConfig {
    fn default() -> Self {
        SidcoConfig { max_sweeps: 100, coherence_tol: 1e-6, qp_tol: 1e-8, ball_shrink_guard: 0.999, seed: 0 }
    }
}

impl SidcoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_sweeps == 0 {
            return Err(Error::Config("max_sweeps must be positive".into()));
        }
        if !(self.coherence_tol > 0.0) || !(self.qp_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if !(self.ball_shrink_guard > 0.0 && self.ball_shrink_guard <= 1.0) {
            return Err(Error::Config("ball_shrink_guard must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// The explicit quadratic program for one column.
#[derive(Debug, Clone)]
pub struct SubproblemData {
    pub column: usize,
    /// The frame with column `column` removed, `M x (N−1)`.
    pub pruned: CMatrix,
    pub anchor: CVector,
    pub ball_radius: f64,
    /// The pruned frame held a column collinear with the anchor.
    pub degenerate: bool,
    pub q: DMatrix<f64>,
    pub a_r1: DMatrix<f64>,
    pub a_r2: DMatrix<f64>,
    pub a_i1: DMatrix<f64>,
    pub a_i2: DMatrix<f64>,
    pub b_mat: DMatrix<f64>,
    pub b_vec: DVector<f64>,
}

impl SubproblemData {
    pub fn dim(&self) -> usize {
        self.anchor.len()
    }

    /// Constant term `1 − T_i` of the ball constraint.
    pub fn ball_constant(&self) -> f64 {
        1.0 - self.ball_radius
    }

    /// All linear constraint rows stacked `[A_R1; A_R2; A_I1; A_I2]`.
    pub fn stacked_constraints(&self) -> DMatrix<f64> {
        let rows = self.a_r1.nrows();
        let cols = self.a_r1.ncols();
        let mut a = DMatrix::zeros(4 * rows, cols);
        for (k, blk) in [&self.a_r1, &self.a_r2, &self.a_i1, &self.a_i2].into_iter().enumerate() {
            a.view_mut((k * rows, 0), (rows, cols)).copy_from(blk);
        }
        a
    }

    /// `max_j |Re(f̃_jᴴ f)|` and `max_j |Im(f̃_jᴴ f)|`: the smallest feasible
    /// epigraph variables for `f`.
    pub fn epigraph(&self, f: &CVector) -> (f64, f64) {
        let g = self.pruned.ad_mul(f);
        let tr = g.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
        let ti = g.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        (tr, ti)
    }

    /// `t_R² + t_I²` at the tightest epigraph point for `f`.
    pub fn objective_at(&self, f: &CVector) -> f64 {
        let (tr, ti) = self.epigraph(f);
        tr * tr + ti * ti
    }
}

/// Builds the quadratic program for column `i` of a unit-norm frame, with
/// ball radius `guard · (1 − max_j |g_ij|²)`.
pub fn assemble_subproblem(frame: &Frame, i: usize, guard: f64) -> Result<SubproblemData> {
    let (m, n) = (frame.dim(), frame.len());
    if i >= n {
        return Err(Error::Dimension(format!("column {i} out of range for {n} columns")));
    }
    if n < 2 {
        return Err(Error::InvalidFrame("need at least two columns".into()));
    }
    let mat = frame.matrix();
    let anchor = mat.column(i).into_owned();
    let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
    let pruned = mat.select_columns(&others);

    let gram_row: Vec<Complex64> = pruned.ad_mul(&anchor).iter().copied().collect();
    let (radius, degenerate) = ball_radius(&gram_row);
    let ball_radius = guard * radius;

    // Rows realify(f̃_j)ᵀ give Re(f̃_jᴴ f); times D_M they give −Im(f̃_jᴴ f).
    let d = multiply_by_j_matrix(m);
    let mut ft = DMatrix::zeros(n - 1, 2 * m);
    for (r, col) in pruned.column_iter().enumerate() {
        let rv = realify(&col.into_owned());
        ft.row_mut(r).copy_from(&rv.transpose());
    }
    let ftd = &ft * &d;
    let w = 2 * m + 2;
    let block = |lin: &DMatrix<f64>, sign: f64, slot: usize| {
        let mut a = DMatrix::zeros(n - 1, w);
        a.view_mut((0, 0), (n - 1, 2 * m)).copy_from(&(lin * sign));
        a.column_mut(2 * m + slot).fill(-1.0);
        a
    };

    let mut q = DMatrix::zeros(w, w);
    q[(2 * m, 2 * m)] = 1.0;
    q[(2 * m + 1, 2 * m + 1)] = 1.0;
    let mut b_mat = DMatrix::zeros(w, w);
    b_mat.view_mut((0, 0), (2 * m, 2 * m)).fill_with_identity();
    let mut b_vec = DVector::zeros(w);
    b_vec.rows_mut(0, 2 * m).copy_from(&realify(&anchor));

    Ok(SubproblemData {
        column: i,
        a_r1: block(&ft, 1.0, 0),
        a_r2: block(&ft, -1.0, 0),
        a_i1: block(&ftd, 1.0, 1),
        a_i2: block(&ftd, -1.0, 1),
        pruned,
        anchor,
        ball_radius,
        degenerate,
        q,
        b_mat,
        b_vec,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubproblemStatus {
    Solved,
    /// Empty ball (collinear neighbour); the anchor is returned.
    Degenerate,
    /// Solver failure; the anchor is returned.
    NotConverged,
}

#[derive(Debug, Clone)]
pub struct SubproblemOutcome {
    /// Unit-norm replacement column (the anchor unless `Solved`).
    pub f: CVector,
    /// Raw program solution before renormalization.
    pub raw: CVector,
    pub status: SubproblemStatus,
    pub objective_anchor: f64,
    pub objective_solution: f64,
    pub newton_steps: usize,
}

impl SubproblemOutcome {
    pub fn flagged(&self) -> bool {
        self.status != SubproblemStatus::Solved
    }
}

/// Solves one column program with the log-barrier method and returns the
/// renormalized solution.
pub fn solve_subproblem(sub: &SubproblemData, tol: f64) -> SubproblemOutcome {
    let objective_anchor = sub.objective_at(&sub.anchor);
    let fallback = |status, steps| SubproblemOutcome {
        f: sub.anchor.clone(),
        raw: sub.anchor.clone(),
        status,
        objective_anchor,
        objective_solution: objective_anchor,
        newton_steps: steps,
    };
    if sub.degenerate || sub.ball_radius <= 0.0 {
        return fallback(SubproblemStatus::Degenerate, 0);
    }

    let m = sub.dim();
    let (tr, ti) = sub.epigraph(&sub.anchor);
    let mut x0 = DVector::zeros(2 * m + 2);
    x0.rows_mut(0, 2 * m).copy_from(&realify(&sub.anchor));
    // Strictly inside the epigraph.
    x0[2 * m] = tr * 1.1 + 1e-3;
    x0[2 * m + 1] = ti * 1.1 + 1e-3;

    let re_rows = sub.a_r1.columns(0, 2 * m).into_owned();
    let im_rows = sub.a_i1.columns(0, 2 * m).into_owned();
    let center = realify(&sub.anchor);
    let prog = EpigraphProgram { re_rows: &re_rows, im_rows: &im_rows, center: &center, radius: sub.ball_radius };
    let opts = BarrierOptions { gap_tol: tol, newton_tol: tol, ..BarrierOptions::default() };
    match prog.solve(x0, &opts) {
        Ok(sol) => {
            let raw = complexify(&sol.x.rows(0, 2 * m).into_owned());
            let nrm = raw.norm();
            if !(nrm > 0.0) || !nrm.is_finite() {
                return fallback(SubproblemStatus::NotConverged, sol.newton_steps);
            }
            SubproblemOutcome {
                f: raw.unscale(nrm),
                objective_solution: sub.objective_at(&raw),
                raw,
                status: SubproblemStatus::Solved,
                objective_anchor,
                newton_steps: sol.newton_steps,
            }
        }
        Err(BarrierError::IterationCap { newton_steps }) => fallback(SubproblemStatus::NotConverged, newton_steps),
        Err(_) => fallback(SubproblemStatus::NotConverged, 0),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// Number of completed sweeps.
    pub sweeps: usize,
    /// Coherence of the initial frame followed by the coherence after each sweep.
    pub coherence_trace: Vec<f64>,
    /// Columns whose program failed or had an empty ball at least once.
    pub flagged_columns: Vec<usize>,
    /// Columns still collinear with a neighbour in the final sweep.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub degenerate_columns: Vec<usize>,
}

impl ConvergenceReport {
    pub fn final_coherence(&self) -> f64 {
        *self.coherence_trace.last().expect("trace holds the initial coherence")
    }

    pub fn is_degenerate(&self) -> bool {
        !self.degenerate_columns.is_empty()
    }
}

/// Largest normalized inner product between `f` and the columns of `frame`
/// other than `skip`.
fn row_coherence(frame: &CMatrix, f: &CVector, skip: usize, norms: &[f64]) -> f64 {
    let fn_ = f.norm();
    let g = frame.ad_mul(f);
    g.iter()
        .enumerate()
        .filter(|&(j, _)| j != skip)
        .map(|(j, z)| z.norm() / (norms[j] * fn_))
        .fold(0.0, f64::max)
}

/// The seeded random unit-norm frame that coherence minimization starts from.
pub fn random_start(m: usize, n: usize, cfg: &SidcoConfig) -> Result<Frame> {
    Frame::random_unit_norm(m, n, &mut crate::seed::rng_from_seed(cfg.seed))
}

/// Runs cyclic sweeps over all columns until the coherence stalls.
///
/// Requires a unit-norm frame with more columns than rows.
pub fn minimize_coherence(initial: &Frame, cfg: &SidcoConfig) -> Result<(Frame, ConvergenceReport)> {
    if initial.len() <= initial.dim() {
        return Err(Error::InvalidFrame(format!(
            "coherence minimization needs N > M, got {}x{}",
            initial.dim(),
            initial.len()
        )));
    }
    run_sweeps(initial, cfg)
}

#[allow(clippy::needless_range_loop)] // `i` drives the subproblem, not just `flagged`.
fn run_sweeps(initial: &Frame, cfg: &SidcoConfig) -> Result<(Frame, ConvergenceReport)> {
    cfg.validate()?;
    let current = Frame::new_unit_norm(initial.matrix().clone(), DEFAULT_UNIT_NORM_TOL)?;
    let n = current.len();
    let mut mat = current.into_matrix();
    // Exact unit norms from here on.
    for mut c in mat.column_iter_mut() {
        let nrm = c.norm();
        c.unscale_mut(nrm);
    }

    let mut report = ConvergenceReport {
        coherence_trace: vec![frame::coherence(&Frame::new(mat.clone())?)?],
        ..Default::default()
    };
    let mut flagged = vec![false; n];

    for _ in 0..cfg.max_sweeps {
        let mut degenerate_now = Vec::new();
        for i in 0..n {
            let snapshot = Frame::new(mat.clone())?;
            let sub = assemble_subproblem(&snapshot, i, cfg.ball_shrink_guard)?;
            let out = solve_subproblem(&sub, cfg.qp_tol);
            match out.status {
                SubproblemStatus::Solved => {
                    let norms: Vec<f64> = mat.column_iter().map(|c| c.norm()).collect();
                    let old = row_coherence(&mat, &sub.anchor, i, &norms);
                    let new = row_coherence(&mat, &out.f, i, &norms);
                    if new <= old {
                        mat.set_column(i, &out.f);
                    }
                }
                SubproblemStatus::Degenerate => {
                    flagged[i] = true;
                    degenerate_now.push(i);
                }
                SubproblemStatus::NotConverged => flagged[i] = true,
            }
        }
        let mu = frame::coherence(&Frame::new(mat.clone())?)?;
        let prev = report.final_coherence();
        report.coherence_trace.push(mu);
        report.sweeps += 1;
        report.degenerate_columns = degenerate_now;
        if prev - mu < cfg.coherence_tol {
            break;
        }
    }
    report.flagged_columns = (0..n).filter(|&i| flagged[i]).collect();
    Ok((Frame::new(mat)?, report))
}
