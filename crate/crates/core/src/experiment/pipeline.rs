use serde::Serialize;

use super::{ExperimentConfig, FrameDesign};
use crate::error::Result;
use crate::frame::{self, Frame};
use crate::kron::{self, BeamformerPair};
use crate::linalg::CMatrix;
use crate::polar::{self, MeasurementMatrix};
use crate::seed::{derive_seed, rng_from_seed, STREAM_FRAME};
use crate::sidco::{self, ConvergenceReport, SidcoConfig};

/// Coherence and tightness around one pipeline stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageDiagnostics {
    pub stage: &'static str,
    pub skipped: bool,
    /// `None` when the matrix has a zero column.
    pub coherence_before: Option<f64>,
    pub coherence_after: Option<f64>,
    /// Tightness residual of the stage output.
    pub tightness_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub approx_error: Option<f64>,
}

impl StageDiagnostics {
    fn measure(stage: &'static str, skipped: bool, before: &Frame, after: &Frame) -> Result<Self> {
        Ok(StageDiagnostics {
            stage,
            skipped,
            coherence_before: frame::coherence(before).ok(),
            coherence_after: frame::coherence(after).ok(),
            tightness_residual: frame::tightness_residual(after),
            approx_error: None,
        })
    }
}

/// Output of the first two stages, which depend only on `M_T M_R` and
/// `T R`, not on how the rows split between the two ends.
#[derive(Debug, Clone)]
pub struct DesignedFrame {
    pub design: FrameDesign,
    /// Unit-norm frame after coherence minimization (or the baseline).
    pub frame: Frame,
    pub tightened: Frame,
    pub report: Option<ConvergenceReport>,
    stages: [StageDiagnostics; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineOutput {
    pub config_hash: String,
    pub frame_design: FrameDesign,
    #[serde(skip)]
    pub frame: Frame,
    /// The designed measurement matrix.
    pub measurement: MeasurementMatrix,
    pub beamformers: BeamformerPair,
    /// `Uᵀ ⊗ Vᴴ`, renormalized when configured.
    #[serde(skip)]
    pub realized: CMatrix,
    /// Matrix the observations are taken with.
    #[serde(skip)]
    pub sensing: CMatrix,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceReport>,
    pub stages: Vec<StageDiagnostics>,
}

/// Stages 1 and 2: coherence minimization from the seeded random start,
/// then projection onto the nearest tight frame. The random baseline is
/// that same starting frame, untouched; the harmonic frame is already tight.
pub fn design_stage(cfg: &ExperimentConfig) -> Result<DesignedFrame> {
    cfg.validate()?;
    let (m, n) = (cfg.measurements(), cfg.t * cfg.r);
    let seed = derive_seed(cfg.master_seed, &[STREAM_FRAME]);
    let (start, optimized, report) = match cfg.frame_design {
        FrameDesign::QcSidco => {
            let sidco_cfg = SidcoConfig { seed, ..cfg.sidco };
            let start = sidco::random_start(m, n, &sidco_cfg)?;
            let (out, report) = sidco::minimize_coherence(&start, &sidco_cfg)?;
            (start, out, Some(report))
        }
        FrameDesign::RandomUnitNorm => {
            let f = Frame::random_unit_norm(m, n, &mut rng_from_seed(seed))?;
            (f.clone(), f, None)
        }
        FrameDesign::Harmonic => {
            let f = Frame::harmonic(m, n)?;
            (f.clone(), f, None)
        }
    };
    let minimize = cfg.frame_design == FrameDesign::QcSidco;
    let tightened = if minimize { polar::polar_tighten(&optimized)? } else { optimized.clone() };
    let stages = [
        StageDiagnostics::measure("coherence_minimization", !minimize, &start, &optimized)?,
        StageDiagnostics::measure("polar_tightening", !minimize, &optimized, &tightened)?,
    ];
    Ok(DesignedFrame { design: cfg.frame_design, frame: optimized, tightened, report, stages })
}

/// Stages 3 and 4: Frobenius normalization and Kronecker factorization
/// for the configured `(M_T, M_R)` split.
pub fn finish_pipeline(cfg: &ExperimentConfig, designed: &DesignedFrame) -> Result<PipelineOutput> {
    cfg.validate()?;
    let measurement = polar::normalize_measurement(&designed.tightened, cfg.t, cfg.r)?;
    let phi_frame = measurement.as_frame()?;
    let normalize = StageDiagnostics::measure("normalization", false, &designed.tightened, &phi_frame)?;

    let beamformers = kron::factor(&measurement.matrix, cfg.dims())?;
    let raw = kron::realize(&beamformers);
    let realized =
        if cfg.renormalize_realized { polar::normalize_matrix(&raw, cfg.t, cfg.r)?.matrix } else { raw };
    let realized_frame = Frame::new(realized.clone())?;
    let mut factor = StageDiagnostics::measure("kronecker_factorization", false, &phi_frame, &realized_frame)?;
    factor.approx_error = Some(beamformers.approx_error);

    let sensing = if cfg.use_realized_kron { realized.clone() } else { measurement.matrix.clone() };
    let [design, tighten] = designed.stages.clone();
    Ok(PipelineOutput {
        config_hash: cfg.hash(),
        frame_design: designed.design,
        frame: designed.frame.clone(),
        measurement,
        beamformers,
        realized,
        sensing,
        convergence: designed.report.clone(),
        stages: vec![design, tighten, normalize, factor],
    })
}

/// Design, tighten, normalize and factor.
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<PipelineOutput> {
    finish_pipeline(cfg, &design_stage(cfg)?)
}
