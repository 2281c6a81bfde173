//! Independent reference implementations shared by the integration tests.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};

const FRACTION_BITS: u32 = 640;

fn to_fixed(v: f64) -> BigInt {
    if v == 0.0 {
        return BigInt::zero();
    }
    let bits = v.to_bits();
    let exponent = ((bits >> 52) & 0x7ff) as i64;
    let mantissa = if exponent == 0 { (bits & ((1u64 << 52) - 1)) << 1 } else { (bits & ((1u64 << 52) - 1)) | (1u64 << 52) };
    let shift = exponent - 1075 + FRACTION_BITS as i64;
    let m = BigInt::from(mantissa);
    let m = if shift >= 0 { m << shift as usize } else { m >> (-shift) as usize };
    if v < 0.0 {
        -m
    } else {
        m
    }
}

fn to_f64(v: &BigInt) -> f64 {
    let bits = v.bits() as i64;
    let keep = 62i64;
    let (scaled, shift) = if bits > keep { (v >> (bits - keep) as usize, bits - keep) } else { (v.clone(), 0) };
    scaled.to_f64().unwrap() * 2f64.powi((shift - FRACTION_BITS as i64) as i32)
}

fn mul(a: &BigInt, b: &BigInt) -> BigInt {
    (a * b) >> FRACTION_BITS as usize
}

/// `erf(z)` from the Maclaurin series `(2/√π) Σ (−1)ⁿ z^{2n+1} / (n!(2n+1))`
/// summed in 640-bit fixed point until terms drop below 2⁻⁶⁰⁰.
pub fn erf_series(z: Complex64) -> Complex64 {
    let (x, y) = (to_fixed(z.re), to_fixed(z.im));
    // −z² = (y² − x²) − 2ixy
    let (mre, mim) = (mul(&y, &y) - mul(&x, &x), -(mul(&x, &y) << 1usize));
    let (mut tre, mut tim) = (x, y);
    let (mut sre, mut sim) = (tre.clone(), tim.clone());
    let cutoff = BigInt::one() << 40usize;
    let mut n: u64 = 0;
    loop {
        n += 1;
        let nre = mul(&tre, &mre) - mul(&tim, &mim);
        let nim = mul(&tre, &mim) + mul(&tim, &mre);
        tre = nre / BigInt::from(n);
        tim = nim / BigInt::from(n);
        let d = BigInt::from(2 * n + 1);
        sre += &tre / &d;
        sim += &tim / &d;
        if n > 20 && tre.abs() < cutoff && tim.abs() < cutoff {
            break;
        }
        assert!(n < 10_000, "series did not terminate");
    }
    let scale = std::f64::consts::FRAC_2_SQRT_PI;
    Complex64::new(to_f64(&sre) * scale, to_f64(&sim) * scale)
}

/// Relative distance `|a − b| / |b|`.
pub fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

/// Root of `(x² − 1) sin x + x cos x` between `lo` and `hi` by bisection.
pub fn mandel_zero(mut lo: f64, mut hi: f64) -> f64 {
    let f = |x: f64| (x * x - 1.0) * x.sin() + x * x.cos();
    assert!(f(lo) * f(hi) < 0.0);
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if f(lo) * f(m) <= 0.0 {
            hi = m;
        } else {
            lo = m;
        }
    }
    0.5 * (lo + hi)
}

/// `(3/2x)[(1 − 1/x²) sin x + cos x / x]` evaluated literally.
pub fn mandel_literal(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    1.5 / x * ((1.0 - 1.0 / (x * x)) * x.sin() + x.cos() / x)
}
