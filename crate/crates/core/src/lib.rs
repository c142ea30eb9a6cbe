//! Low-coherence tight measurement frames for sparse mmWave MIMO channel
//! estimation.
//!
//! The crate covers the whole chain:
//!
//! - [`frame`]: complex frames and their diagnostics (Gram, coherence,
//!   frame bounds, Welch bound, tightness), plus the angular grid
//!   dictionary in [`dictionary`].
//! - [`sidco`]: cyclic mutual-coherence minimization, one quadratically
//!   constrained program per column.
//! - [`polar`]: projection onto the nearest tight frame and Frobenius
//!   normalization into a measurement matrix.
//! - [`kron`]: nearest Kronecker product factorization into transmit and
//!   receive beamformers.
//! - [`channel`]: ULA steering vectors, sparse multipath channels and noisy
//!   observations.
//! - [`solvers`]: OMP, BPDN and reweighted-ℓ1 BPDN recovery.
//! - [`experiment`]: the end-to-end pipeline and seeded Monte-Carlo sweeps.
//!
//! All matrices are column-major, so `vec(X)` is the storage order of `X`.

// Parameter checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod dictionary;
pub mod error;
pub mod experiment;
pub mod frame;
pub mod io;
pub mod kron;
pub mod linalg;
pub mod polar;
pub mod seed;
pub mod sidco;
pub mod solvers;

pub use channel::{ChannelConfig, ChannelRealization, Observation};
pub use dictionary::GridDictionary;
pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, FrameDesign, SolverKind};
pub use frame::{Frame, FrameDiagnostics};
pub use kron::{BeamformerPair, KronDims};
pub use linalg::{CMatrix, CVector};
pub use polar::MeasurementMatrix;
pub use sidco::{ConvergenceReport, SidcoConfig};
pub use solvers::{RecoveryResult, SensingOperator};

pub use num_complex::Complex64;
