//! End-to-end experiments: frame design pipeline, coherence profiles and
//! seeded Monte-Carlo NMSE sweeps.

mod pipeline;
mod profile;
mod sweep;

pub use pipeline::{design_stage, finish_pipeline, run_pipeline, DesignedFrame, PipelineOutput, StageDiagnostics};
pub use profile::{coherence_profile, profile_to_csv, ProfileBin};
pub use sweep::{
    aspect_sweep, nmse_sweep, nmse_sweep_with, parse_pairs, records_to_jsonl, rows_to_csv, SolverOutcome, SweepOutput,
    SweepRow, TrialRecord, CSV_HEADER,
};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::DEFAULT_D_OVER_LAMBDA;
use crate::error::{Error, Result};
use crate::kron::KronDims;
use crate::sidco::SidcoConfig;
use crate::solvers::{BpdnConfig, ReweightConfig};

pub use crate::solvers::SolverId as SolverKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FrameDesign {
    #[serde(rename = "QCSIDCO")]
    QcSidco,
    /// Normalized complex Gaussian columns.
    #[serde(rename = "RANDOM_UNITNORM")]
    RandomUnitNorm,
    /// First rows of the DFT matrix, already a unit-norm tight frame.
    #[serde(rename = "HARMONIC")]
    Harmonic,
}

impl FrameDesign {
    pub fn label(self) -> &'static str {
        match self {
            FrameDesign::QcSidco => "QCSIDCO",
            FrameDesign::RandomUnitNorm => "RANDOM_UNITNORM",
            FrameDesign::Harmonic => "HARMONIC",
        }
    }
}

impl SolverKind {
    pub fn label(self) -> &'static str {
        match self {
            SolverKind::Omp => "OMP",
            SolverKind::Bpdn => "BPDN",
            SolverKind::RwBpdn => "RW-BPDN",
        }
    }
}

/// Iteration controls of the BPDN solvers; the residual budget is set per
/// observation from its noise level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BpdnSettings {
    pub max_iter: usize,
    pub tol: f64,
    pub rho: f64,
}

impl Default for BpdnSettings {
    fn default() -> Self {
        let d = BpdnConfig::default();
        BpdnSettings { max_iter: d.max_iter, tol: d.tol, rho: d.rho }
    }
}

impl BpdnSettings {
    pub fn with_delta(&self, delta: f64) -> BpdnConfig {
        BpdnConfig { delta, max_iter: self.max_iter, tol: self.tol, rho: self.rho }
    }
}

fn default_snr_grid() -> Vec<f64> {
    vec![-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0]
}

fn default_trials() -> usize {
    200
}

fn default_solvers() -> Vec<SolverKind> {
    vec![SolverKind::Omp, SolverKind::Bpdn, SolverKind::RwBpdn]
}

fn default_design() -> FrameDesign {
    FrameDesign::QcSidco
}

fn default_true() -> bool {
    true
}

fn default_sigma_gamma2() -> f64 {
    1.0
}

fn default_d_over_lambda() -> f64 {
    DEFAULT_D_OVER_LAMBDA
}

/// One experiment. Field names in JSON follow the system symbols (`T`,
/// `M_T`, ...); everything after `L` has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Transmit antennas.
    #[serde(rename = "T")]
    pub t: usize,
    /// Receive antennas.
    #[serde(rename = "R")]
    pub r: usize,
    /// Transmit RF chains.
    #[serde(rename = "M_T")]
    pub m_t: usize,
    /// Receive RF chains.
    #[serde(rename = "M_R")]
    pub m_r: usize,
    #[serde(rename = "G_T")]
    pub g_t: usize,
    #[serde(rename = "G_R")]
    pub g_r: usize,
    /// Number of propagation paths.
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(default = "default_snr_grid")]
    pub snr_grid_db: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_solvers")]
    pub solvers: Vec<SolverKind>,
    #[serde(default = "default_design")]
    pub frame_design: FrameDesign,
    /// Sense with the factored `Uᵀ ⊗ Vᴴ` instead of the designed `Φ`.
    #[serde(default)]
    pub use_realized_kron: bool,
    /// Rescale the realized matrix to `||Φ||_F = √(TR)`.
    #[serde(default = "default_true")]
    pub renormalize_realized: bool,
    #[serde(default)]
    pub master_seed: u64,
    /// Draw path angles on the dictionary grid.
    #[serde(default)]
    pub on_grid: bool,
    /// Replace the SNR grid by a single noiseless point.
    #[serde(default)]
    pub noiseless: bool,
    #[serde(default = "default_sigma_gamma2")]
    pub sigma_gamma2: f64,
    #[serde(default = "default_d_over_lambda")]
    pub d_over_lambda: f64,
    /// OMP iteration count; defaults to `L`.
    #[serde(default)]
    pub sparsity: Option<usize>,
    /// Coherence minimization controls. Its `seed` is replaced by one
    /// derived from `master_seed`, so the random baseline and the starting
    /// frame of the minimization coincide.
    #[serde(default)]
    pub sidco: SidcoConfig,
    #[serde(default)]
    pub bpdn: BpdnSettings,
    #[serde(default)]
    pub reweight: ReweightConfig,
}

impl ExperimentConfig {
    /// The evaluation setup: 8x8 arrays, 4x4 RF chains, a 10x10 grid, three
    /// off-grid paths.
    pub fn reference() -> Self {
        ExperimentConfig {
            t: 8,
            r: 8,
            m_t: 4,
            m_r: 4,
            g_t: 10,
            g_r: 10,
            l: 3,
            snr_grid_db: default_snr_grid(),
            trials: default_trials(),
            solvers: default_solvers(),
            frame_design: FrameDesign::QcSidco,
            use_realized_kron: false,
            renormalize_realized: true,
            master_seed: 0,
            on_grid: false,
            noiseless: false,
            sigma_gamma2: 1.0,
            d_over_lambda: DEFAULT_D_OVER_LAMBDA,
            sparsity: None,
            sidco: SidcoConfig::default(),
            bpdn: BpdnSettings::default(),
            reweight: ReweightConfig::default(),
        }
    }

    pub fn dims(&self) -> KronDims {
        KronDims::new(self.t, self.r, self.m_t, self.m_r)
    }

    /// Rows `M_T M_R` of the measurement matrix.
    pub fn measurements(&self) -> usize {
        self.m_t * self.m_r
    }

    pub fn omp_sparsity(&self) -> usize {
        self.sparsity.unwrap_or(self.l)
    }

    /// SNR points of the sweep; a single `+∞` when noiseless.
    pub fn snr_points(&self) -> Vec<f64> {
        if self.noiseless {
            vec![f64::INFINITY]
        } else {
            self.snr_grid_db.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("T", self.t),
            ("R", self.r),
            ("M_T", self.m_t),
            ("M_R", self.m_r),
            ("G_T", self.g_t),
            ("G_R", self.g_r),
            ("L", self.l),
            ("trials", self.trials),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{name} must be positive")));
        }
        let (m, n) = (self.measurements(), self.t * self.r);
        if m > n {
            return Err(Error::Config(format!("M_T·M_R = {m} exceeds T·R = {n}")));
        }
        if self.frame_design == FrameDesign::QcSidco && m == n {
            return Err(Error::Config("coherence minimization needs M_T·M_R < T·R".into()));
        }
        if self.solvers.is_empty() {
            return Err(Error::Config("no solvers selected".into()));
        }
        if !self.noiseless && self.snr_grid_db.is_empty() {
            return Err(Error::Config("empty SNR grid".into()));
        }
        if self.snr_grid_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("SNR values must be finite; use noiseless instead".into()));
        }
        let k = self.omp_sparsity();
        if k == 0 || k > m {
            return Err(Error::Config(format!("OMP sparsity {k} must lie in 1..={m}")));
        }
        if self.on_grid && self.l > self.g_t * self.g_r {
            return Err(Error::Config("more on-grid paths than grid cells".into()));
        }
        if !(self.d_over_lambda > 0.0) || !(self.sigma_gamma2 > 0.0) {
            return Err(Error::Config("d/λ and σ_γ² must be positive".into()));
        }
        if self.reweight.t_max == 0 || !(self.reweight.epsilon > 0.0) {
            return Err(Error::Config("reweighting needs t_max ≥ 1 and ε > 0".into()));
        }
        self.bpdn.with_delta(0.0).validate()?;
        self.sidco.validate()
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Same experiment with a different RF chain split.
    pub fn with_pair(&self, m_t: usize, m_r: usize) -> Self {
        ExperimentConfig { m_t, m_r, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_json_takes_defaults() {
        let cfg: ExperimentConfig =
            serde_json::from_str(r#"{"T":8,"R":8,"M_T":4,"M_R":4,"G_T":10,"G_R":10,"L":3}"#).unwrap();
        assert_eq!(cfg, ExperimentConfig::reference());
        cfg.validate().unwrap();
    }

    #[test]
    fn enum_spellings() {
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"T":8,"R":8,"M_T":4,"M_R":4,"G_T":10,"G_R":10,"L":3,
                "solvers":["OMP","RW-BPDN"],"frame_design":"RANDOM_UNITNORM"}"#,
        )
        .unwrap();
        assert_eq!(cfg.solvers, vec![SolverKind::Omp, SolverKind::RwBpdn]);
        assert_eq!(cfg.frame_design, FrameDesign::RandomUnitNorm);
        assert!(serde_json::from_str::<FrameDesign>(r#""PTF""#).is_err());
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let base = ExperimentConfig::reference();
        let bad = [
            ExperimentConfig { trials: 0, ..base.clone() },
            ExperimentConfig { m_t: 8, m_r: 16, ..base.clone() },
            ExperimentConfig { m_t: 8, m_r: 8, ..base.clone() },
            ExperimentConfig { solvers: vec![], ..base.clone() },
            ExperimentConfig { snr_grid_db: vec![], ..base.clone() },
            ExperimentConfig { sparsity: Some(17), ..base.clone() },
            ExperimentConfig { l: 0, ..base.clone() },
        ];
        for cfg in bad {
            let err = cfg.validate().unwrap_err();
            assert!(err.is_validation(), "{err}");
        }
        // A square frame is fine when nothing needs minimizing.
        ExperimentConfig { m_t: 8, m_r: 8, frame_design: FrameDesign::Harmonic, ..base }.validate().unwrap();
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = ExperimentConfig::reference();
        assert_eq!(a.hash(), a.clone().hash());
        assert_eq!(a.hash().len(), 16);
        assert_ne!(a.hash(), ExperimentConfig { master_seed: 1, ..a.clone() }.hash());
    }

    #[test]
    fn noiseless_has_one_point() {
        let cfg = ExperimentConfig { noiseless: true, ..ExperimentConfig::reference() };
        assert_eq!(cfg.snr_points(), vec![f64::INFINITY]);
    }
}
