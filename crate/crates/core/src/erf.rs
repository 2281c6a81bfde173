//! Error function of complex argument.
//!
//! Small arguments use the Maclaurin series. Elsewhere `erf` is obtained from
//! the Faddeeva function `w(z) = e^{−z²}erfc(−iz)` through
//! `erf(z) = 1 − e^{−z²}w(iz)`, with `w` evaluated by Weideman's rational
//! expansion at moderate `|z|` and by the Laplace continued fraction far out.

use std::f64::consts::{FRAC_2_SQRT_PI, PI};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{domain, Result};

const SERIES_RADIUS: f64 = 2.0;
const CONTINUED_FRACTION_RADIUS: f64 = 8.0;
const CONTINUED_FRACTION_TERMS: usize = 90;
const WEIDEMAN_N: usize = 48;
/// Largest `|Im z|` accepted by [`complex_erf`].
pub const MAX_IMAG: f64 = 30.0;
/// Largest `Im(z)² − Re(z)²` accepted by [`complex_erf`].
pub const MAX_GROWTH_EXPONENT: f64 = 700.0;

/// `erf(z)` for complex `z`.
///
/// Inputs with `|Im z| > 30` or `Im(z)² − Re(z)² > 700` overflow and are
/// rejected.
pub fn complex_erf(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(domain(format!("erf argument {z} is not finite")));
    }
    if z.im.abs() > MAX_IMAG || z.im * z.im - z.re * z.re > MAX_GROWTH_EXPONENT {
        return Err(domain(format!("erf argument {z} lies in the overflow region")));
    }
    let q = erf_first_quadrant(Complex64::new(z.re.abs(), z.im.abs()));
    Ok(match (z.re.is_sign_negative(), z.im.is_sign_negative()) {
        (false, false) => q,
        (true, false) => -q.conj(),
        (true, true) => -q,
        (false, true) => q.conj(),
    })
}

/// `erf(x)` for real `x`.
pub fn real_erf(x: f64) -> f64 {
    complex_erf(Complex64::new(x, 0.0)).map(|v| v.re).unwrap_or(f64::NAN)
}

fn erf_first_quadrant(z: Complex64) -> Complex64 {
    if z.norm() <= SERIES_RADIUS {
        return maclaurin(z);
    }
    let iz = Complex64::new(-z.im, z.re);
    let v = Complex64::new(1.0, 0.0) - (-z * z).exp() * faddeeva_upper(iz);
    match (z.re == 0.0, z.im == 0.0) {
        (true, _) => Complex64::new(0.0, v.im),
        (_, true) => Complex64::new(v.re, 0.0),
        _ => v,
    }
}

fn maclaurin(z: Complex64) -> Complex64 {
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    for n in 1..200 {
        term *= -z2 / n as f64;
        let c = term / (2 * n + 1) as f64;
        sum += c;
        if c.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    sum * FRAC_2_SQRT_PI
}

/// Faddeeva function `w(z) = e^{−z²}erfc(−iz)` on the whole plane.
pub fn faddeeva_w(z: Complex64) -> Complex64 {
    if z.im >= 0.0 {
        faddeeva_upper(z)
    } else {
        let mz = -z;
        2.0 * (-z * z).exp() - faddeeva_upper(mz)
    }
}

/// `w(z)` for `Im z ≥ 0`.
fn faddeeva_upper(z: Complex64) -> Complex64 {
    if z.norm() >= CONTINUED_FRACTION_RADIUS {
        laplace_continued_fraction(z)
    } else {
        weideman(z)
    }
}

fn laplace_continued_fraction(z: Complex64) -> Complex64 {
    let mut tail = Complex64::new(0.0, 0.0);
    for n in (1..=CONTINUED_FRACTION_TERMS).rev() {
        tail = (0.5 * n as f64) / (z - tail);
    }
    Complex64::new(0.0, 1.0 / PI.sqrt()) / (z - tail)
}

struct WeidemanTable {
    l: f64,
    /// Polynomial coefficients, highest degree first.
    coeffs: Vec<f64>,
}

fn weideman_table() -> &'static WeidemanTable {
    static TABLE: OnceLock<WeidemanTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = WEIDEMAN_N;
        let m = 2 * n;
        let l = (n as f64 / 2f64.sqrt()).sqrt();
        let f: Vec<(f64, f64)> = (1 - m as i64..m as i64)
            .map(|k| {
                let theta = k as f64 * PI / m as f64;
                let t = l * (0.5 * theta).tan();
                (theta, (-t * t).exp() * (l * l + t * t))
            })
            .collect();
        let mut a: Vec<f64> = (1..=n)
            .map(|j| f.iter().map(|&(theta, v)| v * (j as f64 * theta).cos()).sum::<f64>() / (2 * m) as f64)
            .collect();
        a.reverse();
        WeidemanTable { l, coeffs: a }
    })
}

fn weideman(z: Complex64) -> Complex64 {
    let t = weideman_table();
    let iz = Complex64::new(-z.im, z.re);
    let denom = Complex64::new(t.l, 0.0) - iz;
    let zz = (Complex64::new(t.l, 0.0) + iz) / denom;
    let mut p = Complex64::new(0.0, 0.0);
    for &c in &t.coeffs {
        p = p * zz + c;
    }
    2.0 * p / (denom * denom) + 1.0 / (PI.sqrt() * denom)
}
