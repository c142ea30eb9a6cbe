//! Angular grid dictionary `Ψ = conj(Â_T) ⊗ Â_R`.

use serde::{Deserialize, Serialize};

use crate::channel::{steering_vector, DEFAULT_D_OVER_LAMBDA};
use crate::error::{Error, Result};
use crate::linalg::{kron, CMatrix};

/// Grid angles `2πg/G` for `g = 0..G-1`.
pub fn grid_angles(g: usize) -> Vec<f64> {
    (0..g).map(|k| 2.0 * std::f64::consts::PI * k as f64 / g as f64).collect()
}

/// Steering vectors of an `n`-element array stacked for every grid angle.
pub fn steering_dictionary(n: usize, angles: &[f64], d_over_lambda: f64) -> CMatrix {
    let mut out = CMatrix::zeros(n, angles.len());
    for (j, &a) in angles.iter().enumerate() {
        out.set_column(j, &steering_vector(a, n, d_over_lambda));
    }
    out
}

/// The sparsifying dictionary. Column `g_t * G_R + g_r` is
/// `conj(a_t(θ_{g_t})) ⊗ a_r(θ_{g_r})`, i.e. the column-major vec of an
/// on-grid `G_R x G_T` coefficient matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridDictionary {
    pub g_t: usize,
    pub g_r: usize,
    pub t: usize,
    pub r: usize,
    pub d_over_lambda: f64,
    #[serde(with = "crate::io::matrix_serde")]
    pub matrix: CMatrix,
    pub grid_angles_tx: Vec<f64>,
    pub grid_angles_rx: Vec<f64>,
}

impl GridDictionary {
    pub fn build(t: usize, r: usize, g_t: usize, g_r: usize) -> Result<Self> {
        Self::build_with_spacing(t, r, g_t, g_r, DEFAULT_D_OVER_LAMBDA)
    }

    pub fn build_with_spacing(t: usize, r: usize, g_t: usize, g_r: usize, d_over_lambda: f64) -> Result<Self> {
        if t == 0 || r == 0 || g_t == 0 || g_r == 0 {
            return Err(Error::Config("antenna counts and grid sizes must be positive".into()));
        }
        let grid_angles_tx = grid_angles(g_t);
        let grid_angles_rx = grid_angles(g_r);
        let a_t = steering_dictionary(t, &grid_angles_tx, d_over_lambda);
        let a_r = steering_dictionary(r, &grid_angles_rx, d_over_lambda);
        let matrix = kron(&a_t.map(|z| z.conj()), &a_r);
        Ok(GridDictionary { g_t, g_r, t, r, d_over_lambda, matrix, grid_angles_tx, grid_angles_rx })
    }

    pub fn num_atoms(&self) -> usize {
        self.g_t * self.g_r
    }

    /// Flattened atom index of the grid cell `(g_t, g_r)`.
    pub fn atom_index(&self, g_t: usize, g_r: usize) -> usize {
        g_t * self.g_r + g_r
    }

    /// Inverse of [`GridDictionary::atom_index`].
    pub fn cell_of(&self, atom: usize) -> (usize, usize) {
        (atom / self.g_r, atom % self.g_r)
    }
}
