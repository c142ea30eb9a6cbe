//! Sparse multipath mmWave MIMO channels between uniform linear arrays.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dictionary::grid_angles;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::seed::rng_from_seed;

pub const DEFAULT_D_OVER_LAMBDA: f64 = 0.5;

/// ULA response `(1/√n) [1, e^{j2π(d/λ) sin φ}, …, e^{j2π(d/λ)(n-1) sin φ}]ᵀ`.
pub fn steering_vector(phi: f64, n: usize, d_over_lambda: f64) -> CVector {
    let scale = 1.0 / (n as f64).sqrt();
    let step = 2.0 * PI * d_over_lambda * phi.sin();
    CVector::from_fn(n, |k, _| Complex64::from_polar(scale, step * k as f64))
}

/// Receive array response for an angle of arrival.
pub fn steering_rx(phi: f64, r: usize, d_over_lambda: f64) -> CVector {
    steering_vector(phi, r, d_over_lambda)
}

/// Transmit array response for an angle of departure.
pub fn steering_tx(phi: f64, t: usize, d_over_lambda: f64) -> CVector {
    steering_vector(phi, t, d_over_lambda)
}

/// Index of the grid angle `2πg/G` closest to `phi`, measuring distance on
/// the circle. Exact ties go to the lower index.
pub fn nearest_grid_index(phi: f64, g: usize) -> usize {
    assert!(g >= 1, "grid must have at least one point");
    let two_pi = 2.0 * PI;
    let mut best = 0;
    let mut best_dist = f64::INFINITY;
    for (k, theta) in grid_angles(g).into_iter().enumerate() {
        let d = (phi - theta).rem_euclid(two_pi);
        let d = d.min(two_pi - d);
        if d < best_dist {
            best = k;
            best_dist = d;
        }
    }
    best
}

fn default_sigma_gamma2() -> f64 {
    1.0
}

fn default_d_over_lambda() -> f64 {
    DEFAULT_D_OVER_LAMBDA
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub t: usize,
    pub r: usize,
    pub l: usize,
    #[serde(default = "default_sigma_gamma2")]
    pub sigma_gamma2: f64,
    #[serde(default = "default_d_over_lambda")]
    pub d_over_lambda: f64,
    #[serde(default)]
    pub on_grid: bool,
    pub g_t: usize,
    pub g_r: usize,
    #[serde(default)]
    pub seed: u64,
}

impl ChannelConfig {
    /// Eight-antenna arrays, three paths, a 10x10 grid and off-grid angles.
    pub fn reference(seed: u64) -> Self {
        ChannelConfig {
            t: 8,
            r: 8,
            l: 3,
            sigma_gamma2: 1.0,
            d_over_lambda: DEFAULT_D_OVER_LAMBDA,
            on_grid: false,
            g_t: 10,
            g_r: 10,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t == 0 || self.r == 0 {
            return Err(Error::Config("antenna counts must be positive".into()));
        }
        if self.l == 0 {
            return Err(Error::Config("at least one path is required".into()));
        }
        if self.g_t == 0 || self.g_r == 0 {
            return Err(Error::Config("grid sizes must be positive".into()));
        }
        if !(self.d_over_lambda > 0.0) || !(self.sigma_gamma2 >= 0.0) {
            return Err(Error::Config("d/λ must be positive and σ_γ² nonnegative".into()));
        }
        if self.on_grid && self.l > self.g_t * self.g_r {
            return Err(Error::Config(format!(
                "cannot place {} on-grid paths on {} grid cells",
                self.l,
                self.g_t * self.g_r
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelRealization {
    pub gains: Vec<Complex64>,
    /// Angles of arrival, radians.
    pub aoa: Vec<f64>,
    /// Angles of departure, radians.
    pub aod: Vec<f64>,
    /// `R x T` channel matrix.
    #[serde(with = "crate::io::matrix_serde")]
    pub h: CMatrix,
    /// Nearest-grid coefficients, indexed `g_t * G_R + g_r`. Exact for
    /// on-grid channels; a support oracle otherwise.
    pub sparse_x: Vec<Complex64>,
    pub on_grid: bool,
}

impl ChannelRealization {
    /// Path-loss scale `√(TR/L)`.
    pub fn path_scale(t: usize, r: usize, l: usize) -> f64 {
        ((t * r) as f64 / l as f64).sqrt()
    }

    /// Indices of the nonzero entries of `sparse_x`, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.sparse_x
            .iter()
            .enumerate()
            .filter(|(_, z)| z.norm() > 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn vec_h(&self) -> CVector {
        linalg::vec(&self.h)
    }
}

/// Channel as a sum of rank-one path contributions.
pub fn assemble_channel(gains: &[Complex64], aoa: &[f64], aod: &[f64], t: usize, r: usize, d: f64) -> CMatrix {
    let scale = ChannelRealization::path_scale(t, r, gains.len());
    let mut h = CMatrix::zeros(r, t);
    for ((g, &pr), &pt) in gains.iter().zip(aoa).zip(aod) {
        let ar = steering_rx(pr, r, d);
        let at = steering_tx(pt, t, d);
        h += (ar * at.adjoint()) * (g * scale);
    }
    h
}

pub fn draw_channel(cfg: &ChannelConfig) -> Result<ChannelRealization> {
    cfg.validate()?;
    let mut rng = rng_from_seed(cfg.seed);
    let l = cfg.l;
    let gains: Vec<Complex64> = (0..l).map(|_| linalg::complex_gaussian(&mut rng, cfg.sigma_gamma2)).collect();

    let (aoa, aod) = if cfg.on_grid {
        let theta_t = grid_angles(cfg.g_t);
        let theta_r = grid_angles(cfg.g_r);
        let cells = rand::seq::index::sample(&mut rng, cfg.g_t * cfg.g_r, l);
        cells
            .into_iter()
            .map(|atom| (theta_r[atom % cfg.g_r], theta_t[atom / cfg.g_r]))
            .unzip()
    } else {
        let two_pi = 2.0 * PI;
        let aoa: Vec<f64> = (0..l).map(|_| rng.random_range(0.0..two_pi)).collect();
        let aod: Vec<f64> = (0..l).map(|_| rng.random_range(0.0..two_pi)).collect();
        (aoa, aod)
    };

    let h = assemble_channel(&gains, &aoa, &aod, cfg.t, cfg.r, cfg.d_over_lambda);

    let scale = ChannelRealization::path_scale(cfg.t, cfg.r, l);
    let mut sparse_x = vec![Complex64::new(0.0, 0.0); cfg.g_t * cfg.g_r];
    for k in 0..l {
        let gt = nearest_grid_index(aod[k], cfg.g_t);
        let gr = nearest_grid_index(aoa[k], cfg.g_r);
        sparse_x[gt * cfg.g_r + gr] += gains[k] * scale;
    }

    Ok(ChannelRealization { gains, aoa, aod, h, sparse_x, on_grid: cfg.on_grid })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Observation {
    pub y: Vec<Complex64>,
    /// Per-entry noise standard deviation, `E|n_k|² = noise_sigma²`.
    pub noise_sigma: f64,
    pub snr_db: f64,
}

impl Observation {
    pub fn y_vector(&self) -> CVector {
        CVector::from_column_slice(&self.y)
    }
}

/// `y = Φ vec(H) + n`, with the noise level set so that
/// `||Φ vec(H)||² / (m σ²) = 10^{snr_db/10}`. An infinite SNR gives a
/// noiseless observation.
pub fn observe(h: &ChannelRealization, phi: &CMatrix, snr_db: f64, seed: u64) -> Result<Observation> {
    let signal = sensed_signal(h, phi)?;
    let sigma = if snr_db == f64::INFINITY {
        0.0
    } else {
        let m = signal.len() as f64;
        (signal.norm_squared() / (m * 10f64.powf(snr_db / 10.0))).sqrt()
    };
    Ok(add_noise(signal, sigma, snr_db, seed))
}

/// Like [`observe`] but with an explicit noise standard deviation.
pub fn observe_with_sigma(h: &ChannelRealization, phi: &CMatrix, sigma: f64, seed: u64) -> Result<Observation> {
    let signal = sensed_signal(h, phi)?;
    let m = signal.len() as f64;
    let snr_db = if sigma == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (signal.norm_squared() / (m * sigma * sigma)).log10()
    };
    Ok(add_noise(signal, sigma, snr_db, seed))
}

fn sensed_signal(h: &ChannelRealization, phi: &CMatrix) -> Result<CVector> {
    if phi.ncols() != h.h.len() {
        return Err(Error::Dimension(format!(
            "measurement matrix has {} columns but vec(H) has {} entries",
            phi.ncols(),
            h.h.len()
        )));
    }
    Ok(phi * h.vec_h())
}

fn add_noise(signal: CVector, sigma: f64, snr_db: f64, seed: u64) -> Observation {
    let mut rng = rng_from_seed(seed);
    let y = if sigma == 0.0 {
        signal.as_slice().to_vec()
    } else {
        signal
            .iter()
            .map(|s| s + linalg::complex_gaussian(&mut rng, sigma * sigma))
            .collect()
    };
    Observation { y, noise_sigma: sigma, snr_db }
}
