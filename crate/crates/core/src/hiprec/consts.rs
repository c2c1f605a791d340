//! Exact rational approximations of the stored constants.
//!
//! The working-precision constants are extracted from these rationals at
//! startup, so no hand-transcribed digit strings enter the build.  Tests
//! cross-check against structurally different formulas.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// atan(1/k) as a rational with error below 2^-bits (alternating series,
/// truncation bounded by the first omitted term).
pub fn atan_inv_rational(k: i64, bits: u32) -> BigRational {
    let ksq = BigInt::from(k) * BigInt::from(k);
    let mut term = BigRational::new(BigInt::one(), BigInt::from(k));
    let mut acc = BigRational::zero();
    let mut n: i64 = 0;
    let tol = BigRational::new(BigInt::one(), BigInt::one() << (bits + 4));
    loop {
        let contrib = &term / BigRational::from_integer(BigInt::from(2 * n + 1));
        if contrib.abs() < tol {
            break;
        }
        if n % 2 == 0 {
            acc += contrib;
        } else {
            acc -= contrib;
        }
        term /= BigRational::from_integer(ksq.clone());
        n += 1;
    }
    acc
}

/// atanh(1/k) as a rational with error below 2^-bits.
pub fn atanh_inv_rational(k: i64, bits: u32) -> BigRational {
    let ksq = BigInt::from(k) * BigInt::from(k);
    let mut term = BigRational::new(BigInt::one(), BigInt::from(k));
    let mut acc = BigRational::zero();
    let mut n: i64 = 0;
    let tol = BigRational::new(BigInt::one(), BigInt::one() << (bits + 4));
    loop {
        let contrib = &term / BigRational::from_integer(BigInt::from(2 * n + 1));
        if contrib < tol {
            break;
        }
        acc += contrib;
        term /= BigRational::from_integer(ksq.clone());
        n += 1;
    }
    // Geometric tail of the series is under twice the first omitted term.
    acc
}

/// pi via Machin's formula, error below 2^-bits.
pub fn pi_rational(bits: u32) -> BigRational {
    let b = bits + 8;
    atan_inv_rational(5, b) * BigRational::from_integer(BigInt::from(16))
        - atan_inv_rational(239, b) * BigRational::from_integer(BigInt::from(4))
}

/// ln 2 = 2 atanh(1/3), error below 2^-bits.
pub fn ln2_rational(bits: u32) -> BigRational {
    atanh_inv_rational(3, bits + 4) * BigRational::from_integer(BigInt::from(2))
}

/// Splits a rational constant into parts whose top `keep_bits` bits carry all
/// the information (trailing mantissa bits zero), so that products with small
/// integers stay exact (Cody-Waite style argument reduction).
pub fn cody_waite_parts(r: &BigRational, keep_bits: u32, n_parts: usize) -> Vec<f64> {
    let mut rem = r.clone();
    let mut parts = Vec::with_capacity(n_parts);
    for i in 0..n_parts {
        let approx = super::convert::rational_to_f64_nearest(&rem);
        let p = if i + 1 == n_parts {
            approx
        } else {
            truncate_mantissa(approx, keep_bits)
        };
        parts.push(p);
        if p != 0.0 {
            rem -= BigRational::from_float(p).expect("finite part");
        }
    }
    parts
}

fn truncate_mantissa(x: f64, keep_bits: u32) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let drop = 52 - keep_bits.min(52);
    let mask = !((1u64 << drop) - 1);
    f64::from_bits(x.to_bits() & mask)
}
