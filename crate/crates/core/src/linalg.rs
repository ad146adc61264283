//! Dense symmetric positive-definite helpers for small matrices.

use crate::error::{Error, Result};

/// Smallest pivot accepted by [`cholesky`].
pub const PIVOT_TOLERANCE: f64 = 1e-12;

/// Lower-triangular Cholesky factor `L` (row-major, `n×n`) with `A = L Lᵀ`.
///
/// Fails with the index of the first pivot `≤ PIVOT_TOLERANCE`.
pub fn cholesky(a: &[f64], n: usize) -> Result<Vec<f64>> {
    if a.len() != n * n {
        return Err(Error::Config(format!(
            "cholesky: expected {} entries for n = {n}, got {}",
            n * n,
            a.len()
        )));
    }
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > PIVOT_TOLERANCE) {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let djj = d.sqrt();
        l[j * n + j] = djj;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / djj;
        }
    }
    Ok(l)
}

/// `ln det A` as `2 Σ ln Lᵢᵢ`.
pub fn log_det_spd(a: &[f64], n: usize) -> Result<f64> {
    let l = cholesky(a, n)?;
    Ok(2.0 * (0..n).map(|i| l[i * n + i].ln()).sum::<f64>())
}

/// `y = L v` for a row-major lower-triangular `L`.
pub fn lower_mul(l: &[f64], n: usize, v: &[f64], out: &mut [f64]) {
    for i in 0..n {
        out[i] = (0..=i).map(|k| l[i * n + k] * v[k]).sum();
    }
}
