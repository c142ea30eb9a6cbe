//! Matrix file formats.
//!
//! JSON: `{ "rows": r, "cols": c, "entries": [[re, im], ...] }` with the
//! entries in column-major order. CSV: one line per entry with the columns
//! `row_idx,col_idx,re,im`.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        MatrixJson {
            rows: m.nrows(),
            cols: m.ncols(),
            entries: m.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<&MatrixJson> for CMatrix {
    type Error = Error;

    fn try_from(j: &MatrixJson) -> Result<Self> {
        if j.rows == 0 || j.cols == 0 {
            return Err(Error::Format("rows and cols must be positive".into()));
        }
        if j.entries.len() != j.rows * j.cols {
            return Err(Error::Format(format!(
                "expected {} entries for a {}x{} matrix, found {}",
                j.rows * j.cols,
                j.rows,
                j.cols,
                j.entries.len()
            )));
        }
        if j.entries.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Format("entries must be finite".into()));
        }
        let data = j.entries.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        Ok(CMatrix::from_vec(j.rows, j.cols, data))
    }
}

/// Serde adapter so structs can hold a `CMatrix` field in the JSON matrix format.
pub mod matrix_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMatrix, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        CMatrix::try_from(&j).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter storing a complex vector as a list of `[re, im]` pairs.
pub mod vector_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::linalg::CVector;
    use num_complex::Complex64;

    pub fn serialize<S: Serializer>(v: &CVector, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CVector, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(CVector::from_iterator(pairs.len(), pairs.iter().map(|p| Complex64::new(p[0], p[1]))))
    }
}

pub fn matrix_to_json(m: &CMatrix) -> Result<String> {
    Ok(serde_json::to_string_pretty(&MatrixJson::from(m))?)
}

pub fn matrix_from_json(s: &str) -> Result<CMatrix> {
    let j: MatrixJson = serde_json::from_str(s)?;
    CMatrix::try_from(&j)
}

pub fn read_matrix(path: &Path) -> Result<CMatrix> {
    matrix_from_json(&fs::read_to_string(path)?)
}

pub fn write_matrix(path: &Path, m: &CMatrix) -> Result<()> {
    write_string(path, &matrix_to_json(m)?)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_string(path, &serde_json::to_string_pretty(value)?)
}

pub fn write_string(path: &Path, contents: &str) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(contents.as_bytes())?;
    if !contents.ends_with('\n') {
        f.write_all(b"\n")?;
    }
    Ok(())
}

pub fn matrix_to_csv(m: &CMatrix) -> String {
    let mut out = String::from("row_idx,col_idx,re,im\n");
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            let z = m[(r, c)];
            out.push_str(&format!("{r},{c},{},{}\n", fmt_float(z.re), fmt_float(z.im)));
        }
    }
    out
}

/// Floats in exported tables carry 9 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.8e}")
}
