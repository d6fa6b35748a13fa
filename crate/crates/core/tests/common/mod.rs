//! Test-only oracles, independent of the library's evaluation paths.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

const FRACTION_BITS: u32 = 640;

/// `Ein(z)` from the first 200 terms of its power series, summed in
/// 640-bit fixed point. `z` is converted exactly from its binary representation.
pub fn ein_oracle(z: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    let (mant, exp) = decompose(z);
    // A_k = (-1)^{k+1} z^k / k!, scaled by 2^FRACTION_BITS
    let mut a = shift(BigInt::from(mant) << FRACTION_BITS, exp);
    let mut sum = a.clone();
    for k in 2..=200u32 {
        a = shift(a * BigInt::from(-mant), exp) / BigInt::from(k);
        sum += &a / BigInt::from(k);
    }
    to_f64(&sum)
}

fn decompose(z: f64) -> (i64, i32) {
    let bits = z.to_bits();
    let sign = if bits >> 63 == 1 { -1 } else { 1 };
    let raw_exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & ((1u64 << 52) - 1)) as i64;
    let (m, e) = if raw_exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1 << 52), raw_exp - 1075)
    };
    (sign * m, e)
}

fn shift(x: BigInt, exp: i32) -> BigInt {
    if exp >= 0 {
        x << exp as u32
    } else {
        x >> (-exp) as u32
    }
}

fn to_f64(x: &BigInt) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    // keep 64 significant bits before converting
    let bits = x.abs().bits() as i64;
    let drop = (bits - 64).max(0);
    let top = (x >> drop as u32).to_f64().unwrap();
    top * 2f64.powi((drop - FRACTION_BITS as i64) as i32)
}
