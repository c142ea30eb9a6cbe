use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::{self, Frame};
use crate::io::fmt_float;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileBin {
    pub bin_center: f64,
    pub count: usize,
    pub empirical_cdf: f64,
}

/// Histogram of the normalized magnitudes `|g_ij|` over all distinct
/// column pairs, on `bins` equal bins covering `[0, 1]`.
pub fn coherence_profile(frame: &Frame, bins: usize) -> Result<Vec<ProfileBin>> {
    if bins < 2 {
        return Err(Error::Config(format!("need at least 2 bins, got {bins}")));
    }
    let mags = frame::pair_magnitudes(frame)?;
    let mut counts = vec![0usize; bins];
    for g in &mags {
        // Rounding can push a duplicated pair a hair above 1.
        let idx = ((g * bins as f64) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let total = mags.len().max(1) as f64;
    let mut seen = 0;
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| {
            seen += count;
            ProfileBin { bin_center: (i as f64 + 0.5) / bins as f64, count, empirical_cdf: seen as f64 / total }
        })
        .collect())
}

pub fn profile_to_csv(profile: &[ProfileBin]) -> String {
    let mut out = String::from("bin_center,count,empirical_cdf\n");
    for b in profile {
        out.push_str(&format!("{},{},{}\n", fmt_float(b.bin_center), b.count, fmt_float(b.empirical_cdf)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;
    use crate::Complex64;

    #[test]
    fn identity_puts_all_mass_in_first_bin() {
        let p = coherence_profile(&Frame::new(CMatrix::identity(4, 4)).unwrap(), 8).unwrap();
        assert_eq!(p[0].count, 6);
        assert!(p.iter().skip(1).all(|b| b.count == 0));
        assert_eq!(p[7].empirical_cdf, 1.0);
    }

    #[test]
    fn duplicated_column_lands_in_top_bin() {
        let mut m = CMatrix::identity(3, 4);
        m[(0, 3)] = Complex64::new(1.0, 0.0);
        let p = coherence_profile(&Frame::new(m).unwrap(), 10).unwrap();
        assert_eq!(p[9].count, 1);
        assert_eq!(p.iter().map(|b| b.count).sum::<usize>(), 6);
    }

    #[test]
    fn csv_layout() {
        let p = coherence_profile(&Frame::new(CMatrix::identity(2, 2)).unwrap(), 2).unwrap();
        let csv = profile_to_csv(&p);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "bin_center,count,empirical_cdf");
        assert_eq!(lines.len(), 3);
        assert!(csv.ends_with('\n'));
        assert!(coherence_profile(&Frame::new(CMatrix::identity(2, 2)).unwrap(), 1).is_err());
    }
}
