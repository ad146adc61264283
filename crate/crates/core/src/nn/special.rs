use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

/// `½ ln(2π)`.
pub const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

const ONE_MINUS_HALF_EPS: f64 = 1.0 - f64::EPSILON / 2.0;

pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub fn ln_std_normal_pdf(x: f64) -> f64 {
    -0.5 * x * x - HALF_LN_2PI
}

/// Standard normal CDF, `Φ(x) = ½ erfc(−x/√2)`.
///
/// The result is kept inside the open interval (0, 1) even where the exact
/// value rounds to 0 or 1 in double precision.
pub fn std_normal_cdf(x: f64) -> f64 {
    (0.5 * libm::erfc(-x * FRAC_1_SQRT_2)).clamp(f64::MIN_POSITIVE, ONE_MINUS_HALF_EPS)
}

/// `ln Φ(x)`, accurate far into the lower tail.
pub fn log_std_normal_cdf(x: f64) -> f64 {
    if x > -30.0 {
        (0.5 * libm::erfc(-x * FRAC_1_SQRT_2)).ln()
    } else {
        // Mills ratio asymptotics: Φ(x) ≈ φ(x)/|x| · (1 − 1/x² + 3/x⁴).
        let x2 = x * x;
        ln_std_normal_pdf(x) - (-x).ln() + (1.0 - 1.0 / x2 + 3.0 / (x2 * x2)).ln()
    }
}

/// Inverse of the standard normal CDF.
///
/// Acklam's rational approximation followed by one Newton step on the
/// lower-tail branch; the upper tail uses `Φ⁻¹(p) = −Φ⁻¹(1 − p)`, which is
/// exact in floating point for `p ≥ ½`.
pub fn std_normal_icdf(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "normal quantile requires p in (0, 1), got {p}"
        )));
    }
    Ok(if p > 0.5 {
        -lower_icdf(1.0 - p)
    } else {
        lower_icdf(p)
    })
}

fn lower_icdf(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_690e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    let err = 0.5 * libm::erfc(-x * FRAC_1_SQRT_2) - p;
    x - err / std_normal_pdf(x)
}

/// Numerically stable `ln Σ exp(tᵢ)`.
pub fn log_sum_exp(terms: &[f64]) -> Result<f64> {
    if terms.is_empty() {
        return Err(Error::Domain("log-sum-exp of an empty vector".into()));
    }
    Ok(lse(terms))
}

/// Unchecked variant for hot loops; `terms` must be nonempty.
#[inline]
pub(crate) fn lse(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}
