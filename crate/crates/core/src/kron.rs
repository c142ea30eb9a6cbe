//! Nearest Kronecker factorization `Φ ≈ Uᵀ ⊗ Vᴴ`.
//!
//! `Φ` is cut into an `M_T x T` grid of `M_R x R` blocks `Φ_pq`. Stacking
//! `vec(Φ_pq)ᵀ` as rows in column-major block order (`q` outer, `p` inner)
//! gives the rearranged matrix, which equals `vec(Uᵀ) vec(Vᴴ)ᵀ` when `Φ` is
//! an exact Kronecker product. The best Kronecker approximation is therefore
//! its dominant singular triplet.

use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sorted_svd, CMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KronDims {
    pub t: usize,
    pub r: usize,
    pub m_t: usize,
    pub m_r: usize,
}

impl KronDims {
    pub fn new(t: usize, r: usize, m_t: usize, m_r: usize) -> Self {
        KronDims { t, r, m_t, m_r }
    }

    pub fn phi_shape(&self) -> (usize, usize) {
        (self.m_t * self.m_r, self.t * self.r)
    }

    pub fn rearranged_shape(&self) -> (usize, usize) {
        (self.m_t * self.t, self.m_r * self.r)
    }

    fn check(&self, phi: &CMatrix) -> Result<()> {
        if [self.t, self.r, self.m_t, self.m_r].contains(&0) {
            return Err(Error::Config("Kronecker dimensions must be positive".into()));
        }
        if phi.shape() != self.phi_shape() {
            return Err(Error::Dimension(format!(
                "expected a {:?} measurement matrix, got {:?}",
                self.phi_shape(),
                phi.shape()
            )));
        }
        Ok(())
    }
}

/// Parses `"T,R,MT,MR"`.
impl FromStr for KronDims {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<usize> = s
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Config(format!("bad dims {s:?}: {e}")))?;
        match parts.as_slice() {
            &[t, r, m_t, m_r] => Ok(KronDims::new(t, r, m_t, m_r)),
            _ => Err(Error::Config(format!("dims must be T,R,MT,MR, got {s:?}"))),
        }
    }
}

pub fn rearrange(phi: &CMatrix, dims: KronDims) -> Result<CMatrix> {
    dims.check(phi)?;
    let KronDims { t, r, m_t, m_r } = dims;
    let mut out = CMatrix::zeros(m_t * t, m_r * r);
    for q in 0..t {
        for p in 0..m_t {
            let row = q * m_t + p;
            for b in 0..r {
                for a in 0..m_r {
                    out[(row, b * m_r + a)] = phi[(p * m_r + a, q * r + b)];
                }
            }
        }
    }
    Ok(out)
}

/// Inverse of [`rearrange`].
pub fn unrearrange(re: &CMatrix, dims: KronDims) -> Result<CMatrix> {
    let KronDims { t, r, m_t, m_r } = dims;
    if re.shape() != dims.rearranged_shape() {
        return Err(Error::Dimension(format!(
            "expected a {:?} rearranged matrix, got {:?}",
            dims.rearranged_shape(),
            re.shape()
        )));
    }
    let mut phi = CMatrix::zeros(m_t * m_r, t * r);
    for q in 0..t {
        for p in 0..m_t {
            let row = q * m_t + p;
            for b in 0..r {
                for a in 0..m_r {
                    phi[(p * m_r + a, q * r + b)] = re[(row, b * m_r + a)];
                }
            }
        }
    }
    Ok(phi)
}

/// Transmit precoder `U` (`T x M_T`) and receive combiner `V` (`R x M_R`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamformerPair {
    #[serde(rename = "U", with = "crate::io::matrix_serde")]
    pub u: CMatrix,
    #[serde(rename = "V", with = "crate::io::matrix_serde")]
    pub v: CMatrix,
    /// Dominant singular value of the rearranged matrix.
    pub sigma: f64,
    /// `||Φ − Uᵀ ⊗ Vᴴ||_F`.
    pub approx_error: f64,
    /// Set when the two leading singular values tie.
    #[serde(default, skip_serializing)]
    pub degenerate: bool,
}

impl BeamformerPair {
    pub fn dims(&self) -> KronDims {
        KronDims::new(self.u.nrows(), self.v.nrows(), self.u.ncols(), self.v.ncols())
    }

    /// `vec(Uᵀ)`.
    pub fn vec_ut(&self) -> Vec<Complex64> {
        self.u.transpose().as_slice().to_vec()
    }

    /// `vec(Vᴴ)`.
    pub fn vec_vh(&self) -> Vec<Complex64> {
        self.v.adjoint().as_slice().to_vec()
    }
}

/// Best Kronecker approximation of `phi` with the given factor shapes.
///
/// The singular value is split evenly: `||vec(Uᵀ)|| = ||vec(Vᴴ)|| = √σ`.
/// The dominant left singular vector is rotated so its largest-magnitude
/// entry is real and positive.
pub fn factor(phi: &CMatrix, dims: KronDims) -> Result<BeamformerPair> {
    let re = rearrange(phi, dims)?;
    let svd = sorted_svd(&re)?;
    let sigma = svd.singular_values[0];
    let degenerate = svd.singular_values.len() > 1 && svd.singular_values[1] >= sigma * (1.0 - 1e-12) && sigma > 0.0;

    let mut u = svd.u.column(0).into_owned();
    // Row of Vᴴ in the SVD: re ≈ σ u w with w = v_t.row(0).
    let mut w = svd.v_t.row(0).transpose();
    let pivot = u
        .iter()
        .enumerate()
        .fold((0, -1.0), |best, (k, z)| if z.norm() > best.1 { (k, z.norm()) } else { best })
        .0;
    let phase = Complex64::from_polar(1.0, -u[pivot].arg());
    u *= phase;
    w *= phase.conj();
    u[pivot] = Complex64::new(u[pivot].norm(), 0.0);

    let root = Complex64::new(sigma.sqrt(), 0.0);
    let vec_ut = u * root;
    let vec_vh = w * root;
    let ut = CMatrix::from_column_slice(dims.m_t, dims.t, vec_ut.as_slice());
    let vh = CMatrix::from_column_slice(dims.m_r, dims.r, vec_vh.as_slice());
    let approx = ut.kronecker(&vh);
    Ok(BeamformerPair {
        u: ut.transpose(),
        v: vh.adjoint(),
        sigma,
        approx_error: (phi - approx).norm(),
        degenerate,
    })
}

/// `Uᵀ ⊗ Vᴴ`.
pub fn realize(pair: &BeamformerPair) -> CMatrix {
    pair.u.transpose().kronecker(&pair.v.adjoint())
}
