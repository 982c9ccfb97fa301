//! Exact evaluation of the sample-complexity bounds. Results are
//! arbitrary-precision integers because the right-hand sides overflow a
//! double well inside the interesting parameter range.

use num_bigint::BigUint;

use crate::error::{Error, Result};

/// `ceil(factor · 2^pow2)` exactly, for finite positive `factor`. The f64
/// mantissa is decomposed bit-exactly so the only rounding is the one already
/// present in `factor`.
fn big_ceil_pow2(factor: f64, pow2: i64) -> Result<BigUint> {
    if !factor.is_finite() || factor <= 0.0 {
        return Err(Error::Precondition(format!(
            "bound evaluation produced a non-positive or non-finite factor ({factor})"
        )));
    }
    let bits = factor.to_bits();
    let raw_exponent = ((bits >> 52) & 0x7ff) as i64;
    let (mantissa, exponent) = if raw_exponent == 0 {
        (bits & ((1u64 << 52) - 1), -1074i64)
    } else {
        ((bits & ((1u64 << 52) - 1)) | (1u64 << 52), raw_exponent - 1075)
    };
    let shift = exponent + pow2;
    let m = BigUint::from(mantissa);
    if shift >= 0 {
        Ok(m << shift as usize)
    } else {
        let s = (-shift) as usize;
        let floor = &m >> s;
        let rem = m - (&floor << s);
        if rem.bits() == 0 {
            Ok(floor)
        } else {
            Ok(floor + 1u32)
        }
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Precondition(format!("target error δ = {delta} must be positive")));
    }
    Ok(())
}

fn check_confidence(confidence: f64) -> Result<()> {
    if !(0.0 < confidence && confidence < 1.0) {
        return Err(Error::Precondition(format!(
            "confidence level γ = {confidence} must lie in (0, 1)"
        )));
    }
    Ok(())
}

/// Measurements per region sufficient for relative purity error `δ`:
/// `ceil(max{2^{8k}, L²·2^{4k+10}/(k²δ²)})`.
pub fn required_m_purity_fdqc(k: u32, l: u32, delta: f64) -> Result<BigUint> {
    check_delta(delta)?;
    if k == 0 || l == 0 {
        return Err(Error::Precondition("need k ≥ 1 and L ≥ 1".into()));
    }
    let first = BigUint::from(1u32) << (8 * k as usize);
    let factor = (l as f64 * l as f64) / (k as f64 * k as f64 * delta * delta);
    let second = big_ceil_pow2(factor, 4 * k as i64 + 10)?;
    Ok(first.max(second))
}

/// Measurements per region for confidence level `γ`:
/// `ceil(2^{4k+11}·L³/(δ²k³(1-γ)))`.
pub fn confidence_m_purity_fdqc(k: u32, l: u32, delta: f64, confidence: f64) -> Result<BigUint> {
    check_delta(delta)?;
    check_confidence(confidence)?;
    if k == 0 || l == 0 {
        return Err(Error::Precondition("need k ≥ 1 and L ≥ 1".into()));
    }
    let factor = (l as f64).powi(3) / (delta * delta * (k as f64).powi(3) * (1.0 - confidence));
    big_ceil_pow2(factor, 4 * k as i64 + 11)
}

/// Measurements for the third-PT-moment protocol, independent of `L`:
/// `ceil(max{27·2^{11k+9}/δ², 81·2^{11k+9}/((1-γ)δ²)})`.
pub fn required_m_pt3_fdqc(k: u32, delta: f64, confidence: f64) -> Result<BigUint> {
    check_delta(delta)?;
    check_confidence(confidence)?;
    if k == 0 {
        return Err(Error::Precondition("need k ≥ 1".into()));
    }
    let pow = 11 * k as i64 + 9;
    let first = big_ceil_pow2(27.0 / (delta * delta), pow)?;
    let second = big_ceil_pow2(81.0 / ((1.0 - confidence) * delta * delta), pow)?;
    Ok(first.max(second))
}

/// Interval size for the AFC purity protocol: `ceil(ξ₂·log(7α₂L/δ))`, at
/// least 1.
pub fn afc_required_k(alpha2: f64, xi2: f64, l: u32, delta: f64) -> Result<usize> {
    check_delta(delta)?;
    if !(alpha2 > 0.0 && xi2 > 0.0) {
        return Err(Error::Precondition("AFC parameters α₂, ξ₂ must be positive".into()));
    }
    let arg = 7.0 * alpha2 * l as f64 / delta;
    if arg <= 1.0 {
        return Ok(1);
    }
    Ok((xi2 * arg.ln()).ceil().max(1.0) as usize)
}

/// Measurements per region for the AFC purity protocol at confidence `γ`:
/// `ceil(7²·2¹¹·L³/(δ²(1-γ)) · (7α₂L/δ)^{4ξ₂·log 2})`.
pub fn afc_required_m(alpha2: f64, xi2: f64, l: u32, delta: f64, confidence: f64) -> Result<BigUint> {
    check_delta(delta)?;
    check_confidence(confidence)?;
    if !(alpha2 > 0.0 && xi2 > 0.0) {
        return Err(Error::Precondition("AFC parameters α₂, ξ₂ must be positive".into()));
    }
    let base = 7.0 * alpha2 * l as f64 / delta;
    let exponent = 4.0 * xi2 * std::f64::consts::LN_2;
    // split the power into an exact power of two and an f64 remainder so the
    // big result keeps its leading digits honest
    let log2_total = exponent * base.log2() + (49.0 * (l as f64).powi(3)
        / (delta * delta * (1.0 - confidence)))
        .log2();
    let pow2 = log2_total.floor() as i64 + 11;
    let factor = (log2_total - log2_total.floor()).exp2();
    big_ceil_pow2(factor, pow2)
}
