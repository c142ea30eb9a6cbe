use std::collections::btree_map::{BTreeMap, Entry};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::pipeline::{design_stage, finish_pipeline, run_pipeline, PipelineOutput};
use super::{ExperimentConfig, FrameDesign, SolverKind};
use crate::channel::{draw_channel, observe, ChannelConfig};
use crate::dictionary::GridDictionary;
use crate::error::{Error, Result};
use crate::io::fmt_float;
use crate::linalg::CMatrix;
use crate::seed::{derive_seed, STREAM_CHANNEL, STREAM_NOISE, STREAM_TRIAL};
use crate::solvers::{
    bpdn, noise_delta, nmse, omp, reconstruct_channel, reweighted_bpdn, RecoveryResult, SensingOperator,
};

pub const CSV_HEADER: &str = "config_hash,frame_design,m_t,m_r,solver,snr_db,mean_nmse,std_nmse,trials";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverOutcome {
    pub solver: SolverKind,
    pub nmse: f64,
    /// Every nearest-grid atom of the true channel was recovered.
    pub support_hit: bool,
    pub converged: bool,
    pub time_ms: f64,
}

/// One trial at one SNR point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub derived_seed: u64,
    /// `null` in JSON for a noiseless point.
    pub snr_db: f64,
    pub outcomes: Vec<SolverOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub config_hash: String,
    pub frame_design: FrameDesign,
    pub m_t: usize,
    pub m_r: usize,
    pub solver: SolverKind,
    pub snr_db: f64,
    pub mean_nmse: f64,
    pub std_nmse: f64,
    pub trials: usize,
}

impl SweepRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.config_hash,
            self.frame_design.label(),
            self.m_t,
            self.m_r,
            self.solver.label(),
            fmt_float(self.snr_db),
            fmt_float(self.mean_nmse),
            fmt_float(self.std_nmse),
            self.trials
        )
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        self.std_nmse / (self.trials as f64).sqrt()
    }
}

#[derive(Debug, Clone, Default)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    /// Per-trial details, ordered by trial then SNR point. Timings vary
    /// between runs; everything else is reproducible.
    pub records: Vec<TrialRecord>,
}

impl SweepOutput {
    pub fn row(&self, solver: SolverKind, snr_db: f64) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.solver == solver && r.snr_db == snr_db)
    }
}

pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

pub fn records_to_jsonl(records: &[TrialRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

/// Parses `"4x4,2x8,8x2"` into `(M_T, M_R)` pairs.
pub fn parse_pairs(spec: &str) -> Result<Vec<(usize, usize)>> {
    spec.split(',')
        .map(|p| {
            let (a, b) = p
                .trim()
                .split_once(['x', 'X'])
                .ok_or_else(|| Error::Config(format!("pair `{p}` is not of the form MTxMR")))?;
            let parse = |s: &str| s.trim().parse::<usize>().map_err(|_| Error::Config(format!("bad pair `{p}`")));
            Ok((parse(a)?, parse(b)?))
        })
        .collect()
}

struct TrialContext<'a> {
    cfg: &'a ExperimentConfig,
    op: SensingOperator,
    dict: GridDictionary,
    phi: &'a CMatrix,
    snr_points: Vec<f64>,
}

impl TrialContext<'_> {
    fn run(&self, k: usize) -> Result<Vec<TrialRecord>> {
        let cfg = self.cfg;
        let trial_seed = derive_seed(cfg.master_seed, &[STREAM_TRIAL, k as u64]);
        let channel = draw_channel(&ChannelConfig {
            t: cfg.t,
            r: cfg.r,
            l: cfg.l,
            sigma_gamma2: cfg.sigma_gamma2,
            d_over_lambda: cfg.d_over_lambda,
            on_grid: cfg.on_grid,
            g_t: cfg.g_t,
            g_r: cfg.g_r,
            seed: derive_seed(trial_seed, &[STREAM_CHANNEL]),
        })?;
        let truth = channel.support();
        let m = self.op.rows();

        let mut records = Vec::with_capacity(self.snr_points.len());
        for (s, &snr) in self.snr_points.iter().enumerate() {
            let noise_seed = derive_seed(trial_seed, &[STREAM_NOISE, s as u64]);
            let obs = observe(&channel, self.phi, snr, noise_seed)?;
            let y = obs.y_vector();
            let delta = noise_delta(obs.noise_sigma, m);
            let mut outcomes = Vec::with_capacity(cfg.solvers.len());
            for &solver in &cfg.solvers {
                let start = Instant::now();
                let res: RecoveryResult = match solver {
                    SolverKind::Omp => omp(&y, &self.op, cfg.omp_sparsity(), delta)?,
                    SolverKind::Bpdn => bpdn(&y, &self.op, &cfg.bpdn.with_delta(delta))?,
                    SolverKind::RwBpdn => reweighted_bpdn(&y, &self.op, &cfg.bpdn.with_delta(delta), &cfg.reweight)?,
                };
                let time_ms = start.elapsed().as_secs_f64() * 1e3;
                let h_hat = reconstruct_channel(&res.x_hat, &self.dict)?;
                outcomes.push(SolverOutcome {
                    solver,
                    nmse: nmse(&channel.h, &h_hat)?,
                    support_hit: truth.iter().all(|j| res.support.contains(j)),
                    converged: res.converged,
                    time_ms,
                });
            }
            records.push(TrialRecord { trial_index: k, derived_seed: trial_seed, snr_db: snr, outcomes });
        }
        Ok(records)
    }
}

/// Runs the pipeline, then the Monte-Carlo trials. `workers = 0` uses one
/// thread per core.
pub fn nmse_sweep(cfg: &ExperimentConfig, workers: usize) -> Result<SweepOutput> {
    let pipeline = run_pipeline(cfg)?;
    nmse_sweep_with(cfg, &pipeline, workers)
}

/// Monte-Carlo trials with an already designed measurement matrix.
///
/// Trial `k` draws its channel and noise from seeds derived from
/// `master_seed` and `k` alone, so designs and solvers see identical
/// channels, and results do not depend on scheduling. Means are reduced in
/// trial order.
pub fn nmse_sweep_with(cfg: &ExperimentConfig, pipeline: &PipelineOutput, workers: usize) -> Result<SweepOutput> {
    cfg.validate()?;
    let dict = GridDictionary::build_with_spacing(cfg.t, cfg.r, cfg.g_t, cfg.g_r, cfg.d_over_lambda)?;
    let op = SensingOperator::from_parts(&pipeline.sensing, &dict)?;
    let ctx = TrialContext { cfg, op, dict, phi: &pipeline.sensing, snr_points: cfg.snr_points() };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let per_trial: Vec<Vec<TrialRecord>> =
        pool.install(|| (0..cfg.trials).into_par_iter().map(|k| ctx.run(k)).collect::<Result<_>>())?;

    let hash = cfg.hash();
    let mut rows = Vec::with_capacity(cfg.solvers.len() * ctx.snr_points.len());
    for (j, &solver) in cfg.solvers.iter().enumerate() {
        for (s, &snr) in ctx.snr_points.iter().enumerate() {
            let values: Vec<f64> = per_trial.iter().map(|recs| recs[s].outcomes[j].nmse).collect();
            let (mean, std) = mean_std(&values);
            rows.push(SweepRow {
                config_hash: hash.clone(),
                frame_design: cfg.frame_design,
                m_t: cfg.m_t,
                m_r: cfg.m_r,
                solver,
                snr_db: snr,
                mean_nmse: mean,
                std_nmse: std,
                trials: values.len(),
            });
        }
    }
    Ok(SweepOutput { rows, records: per_trial.into_iter().flatten().collect() })
}

/// Sample mean and standard deviation (zero for a single value).
fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// One sweep per `(M_T, M_R)` pair at fixed `T R`. The frame is designed
/// once per distinct `M_T M_R` and only refactored per pair.
pub fn aspect_sweep(cfg: &ExperimentConfig, pairs: &[(usize, usize)], workers: usize) -> Result<SweepOutput> {
    if pairs.is_empty() {
        return Err(Error::Config("no (M_T, M_R) pairs given".into()));
    }
    let configs: Vec<ExperimentConfig> = pairs.iter().map(|&(a, b)| cfg.with_pair(a, b)).collect();
    for c in &configs {
        c.validate()?;
    }
    let mut designs = BTreeMap::new();
    let mut out = SweepOutput::default();
    for c in &configs {
        let designed = match designs.entry(c.measurements()) {
            Entry::Occupied(e) => e.into_mut(),
            Entry::Vacant(e) => e.insert(design_stage(c)?),
        };
        let pipeline = finish_pipeline(c, designed)?;
        let part = nmse_sweep_with(c, &pipeline, workers)?;
        out.rows.extend(part.rows);
        out.records.extend(part.records);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ExperimentConfig {
        ExperimentConfig {
            t: 4,
            r: 4,
            m_t: 2,
            m_r: 4,
            g_t: 6,
            g_r: 6,
            l: 1,
            trials: 6,
            snr_grid_db: vec![0.0, 20.0],
            frame_design: FrameDesign::Harmonic,
            ..ExperimentConfig::reference()
        }
    }

    #[test]
    fn rows_cover_solvers_and_snr_points() {
        let out = nmse_sweep(&tiny(), 1).unwrap();
        assert_eq!(out.rows.len(), 3 * 2);
        assert_eq!(out.records.len(), 6 * 2);
        assert!(out.rows.iter().all(|r| r.trials == 6 && r.mean_nmse >= 0.0));
        let csv = rows_to_csv(&out.rows);
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(csv.lines().count(), 7);
    }

    #[test]
    fn result_is_independent_of_worker_count() {
        let a = nmse_sweep(&tiny(), 1).unwrap();
        let b = nmse_sweep(&tiny(), 3).unwrap();
        assert_eq!(rows_to_csv(&a.rows), rows_to_csv(&b.rows));
    }

    #[test]
    fn noiseless_on_grid_omp_is_exact() {
        let cfg = ExperimentConfig {
            on_grid: true,
            noiseless: true,
            solvers: vec![SolverKind::Omp],
            frame_design: FrameDesign::RandomUnitNorm,
            t: 8,
            r: 8,
            m_t: 4,
            m_r: 4,
            g_t: 10,
            g_r: 10,
            trials: 10,
            ..tiny()
        };
        let out = nmse_sweep(&cfg, 1).unwrap();
        assert_eq!(out.rows.len(), 1);
        assert!(out.rows[0].mean_nmse <= 1e-6, "{}", out.rows[0].mean_nmse);
        assert!(out.rows[0].csv_line().contains(",inf,"));
    }

    #[test]
    fn zero_trials_is_a_config_error() {
        let err = nmse_sweep(&ExperimentConfig { trials: 0, ..tiny() }, 1).unwrap_err();
        assert!(err.is_validation());
    }

    #[test]
    fn aspect_rows_per_pair() {
        let cfg = ExperimentConfig { trials: 2, solvers: vec![SolverKind::Omp], ..tiny() };
        let out = aspect_sweep(&cfg, &[(2, 4), (4, 2), (1, 8)], 1).unwrap();
        assert_eq!(out.rows.len(), 3 * 2);
        let pairs: Vec<(usize, usize)> = out.rows.iter().map(|r| (r.m_t, r.m_r)).collect();
        assert_eq!(pairs, vec![(2, 4), (2, 4), (4, 2), (4, 2), (1, 8), (1, 8)]);
    }

    #[test]
    fn pair_parsing() {
        assert_eq!(parse_pairs("4x4,2x8, 8X2").unwrap(), vec![(4, 4), (2, 8), (8, 2)]);
        assert!(parse_pairs("4-4").is_err());
        assert!(parse_pairs("4xa").is_err());
    }

    #[test]
    fn mean_std_examples() {
        assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
    }
}
