//! Fixtures shared by the kernel benchmarks, at the reference problem size:
//! eight-antenna arrays, sixteen measurements and a 10x10 angular grid.

use mmframe::channel::{draw_channel, observe, ChannelConfig};
use mmframe::polar::{normalize_measurement, polar_tighten};
use mmframe::seed::rng_from_seed;
use mmframe::{CVector, ExperimentConfig, Frame, GridDictionary, MeasurementMatrix, SensingOperator};

pub const SEED: u64 = 7;

/// Seeded random unit-norm frame with the reference shape.
pub fn reference_frame() -> Frame {
    let cfg = ExperimentConfig::reference();
    Frame::random_unit_norm(cfg.measurements(), cfg.t * cfg.r, &mut rng_from_seed(SEED)).expect("valid shape")
}

pub fn reference_measurement() -> MeasurementMatrix {
    let cfg = ExperimentConfig::reference();
    let tight = polar_tighten(&reference_frame()).expect("full rank");
    normalize_measurement(&tight, cfg.t, cfg.r).expect("valid shape")
}

/// Sensing operator and one noisy off-grid observation at 10 dB.
pub struct RecoveryFixture {
    pub op: SensingOperator,
    pub y: CVector,
    pub sigma: f64,
    pub sparsity: usize,
}

pub fn recovery_fixture() -> RecoveryFixture {
    let cfg = ExperimentConfig::reference();
    let phi = reference_measurement().matrix;
    let dict = GridDictionary::build(cfg.t, cfg.r, cfg.g_t, cfg.g_r).expect("valid grid");
    let op = SensingOperator::from_parts(&phi, &dict).expect("matching shapes");
    let h = draw_channel(&ChannelConfig::reference(SEED)).expect("valid channel config");
    let obs = observe(&h, &phi, 10.0, SEED + 1).expect("matching shapes");
    RecoveryFixture { op, y: obs.y_vector(), sigma: obs.noise_sigma, sparsity: cfg.l }
}
