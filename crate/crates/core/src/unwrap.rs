//! Phase wrapping and unwrapping along a sweep.

use std::f64::consts::PI;

/// Maps `phase` into `(−π, π]`.
pub fn wrap_phase(phase: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut p = phase % two_pi;
    if p <= -PI {
        p += two_pi;
    } else if p > PI {
        p -= two_pi;
    }
    p
}

/// Nearest-branch continuation: each sample is moved by a multiple of 2π so
/// that it lies within π of its predecessor. Undefined (NaN) samples are
/// passed through and skipped.
pub fn unwrap_phases(phases: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phases.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for &p in phases {
        if p.is_nan() {
            out.push(p);
            continue;
        }
        if let Some(q) = prev {
            let jump = p - q;
            if jump > PI {
                offset -= 2.0 * PI * ((jump + PI) / (2.0 * PI)).floor();
            } else if jump < -PI {
                offset += 2.0 * PI * ((-jump + PI) / (2.0 * PI)).floor();
            }
        }
        prev = Some(p);
        out.push(p + offset);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wrap_range() {
        assert_eq!(wrap_phase(PI), PI);
        assert!((wrap_phase(-PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_phase(7.0) - (7.0 - 2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn recovers_linear_ramp() {
        let ramp: Vec<f64> = (0..200).map(|i| 0.3 * i as f64).collect();
        let wrapped: Vec<f64> = ramp.iter().map(|&p| wrap_phase(p)).collect();
        let un = unwrap_phases(&wrapped);
        for (a, b) in un.iter().zip(&ramp) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn undefined_samples_skipped() {
        let un = unwrap_phases(&[3.0, f64::NAN, -3.0]);
        assert!(un[1].is_nan());
        assert!((un[2] - (2.0 * PI - 3.0)).abs() < 1e-12);
    }

    #[test]
    fn empty_input() {
        assert!(unwrap_phases(&[]).is_empty());
    }

    proptest! {
        #[test]
        fn unwrapped_steps_stay_within_pi(ps in proptest::collection::vec(-10.0f64..10.0, 1..50)) {
            let un = unwrap_phases(&ps);
            for w in un.windows(2) {
                prop_assert!((w[1] - w[0]).abs() <= PI + 1e-9);
            }
            for (u, p) in un.iter().zip(&ps) {
                let k = (u - p) / (2.0 * PI);
                prop_assert!((k - k.round()).abs() < 1e-9);
            }
        }
    }
}
