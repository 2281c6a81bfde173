use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use recoil_core::grating::talbot_length;
use recoil_core::*;
use rustfft::FftPlanner;

const K: f64 = 5.09067e11;
const KI: f64 = 2.0 * PI / 589e-9;

fn beam() -> BeamSpec {
    BeamSpec::from_wavenumber(K, SODIUM_MASS).unwrap()
}

fn ronchi_exit(n: usize, spacing: f64, len: usize) -> TransverseState {
    let g = GratingSpec::new(200e-9, 100e-9, n).unwrap();
    let grid = SpatialGrid::with_len(spacing, len).unwrap();
    let t = build_transmission(&g, &grid).unwrap();
    exit_state(&t, &IncidentEnvelope::TopHat.sample(&g, &grid)).unwrap()
}

fn gaussian(sigma: f64, spacing: f64, len: usize) -> TransverseState {
    let grid = SpatialGrid::with_len(spacing, len).unwrap();
    let psi = grid.positions().iter().map(|&x| Complex64::new((-x * x / (4.0 * sigma * sigma)).exp(), 0.0)).collect();
    TransverseState::new(grid, psi, 0.0).unwrap()
}

fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let peak = a.iter().cloned().fold(0.0, f64::max);
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / peak
}

#[test]
fn spectrum_round_trip() {
    let s = ronchi_exit(24, 6.25e-9, 8192);
    let spec = s.spectrum();
    let grid = *spec.grid();
    let n = grid.len();
    let (dx, x0) = (grid.spacing(), grid.origin());
    // Undo the ascending reordering, the origin phase and the unitary scale.
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (m, (&a, &k)) in spec.amplitudes().iter().zip(&spec.wavenumbers()).enumerate() {
        buf[(m + n - n / 2) % n] = a * Complex64::cis(k * x0) * (2.0 * PI).sqrt() / dx;
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let err = buf.iter().zip(s.psi()).map(|(a, b)| (a / n as f64 - b).norm()).fold(0.0, f64::max);
    assert!(err < 1e-10, "{err}");
}

#[test]
fn parseval() {
    let s = ronchi_exit(24, 6.25e-9, 1 << 14);
    let rel = (s.spectrum().norm() / s.norm() - 1.0).abs();
    assert!(rel < 1e-9, "{rel}");
}

#[test]
fn even_orders_are_suppressed() {
    let s = ronchi_exit(64, 6.25e-9, 1 << 14);
    let spec = s.spectrum();
    let order = |j: f64| spec.amplitude_at(2.0 * PI * j / 200e-9).norm_sqr();
    let first = order(1.0);
    assert!(order(2.0) < 1e-6 * first);
    assert!(order(4.0) < 1e-6 * first);
    assert!(order(3.0) > 0.05 * first);
    // Square wave: |c_3/c_1|² = 1/9.
    assert!((order(3.0) / first - 1.0 / 9.0).abs() < 0.01);
}

/// `(1/√2π)∫T(x)e^{−iqx}dx` summed in closed form over the slit windows.
fn slit_sum(q: f64, n: usize, period: f64, width: f64) -> Complex64 {
    let sinc = if q == 0.0 { width } else { 2.0 * (q * width / 2.0).sin() / q };
    let centers = (0..n).map(|j| (j as f64 - (n - 1) as f64 / 2.0) * period);
    centers.map(|c| Complex64::cis(-q * c)).sum::<Complex64>() * sinc / (2.0 * PI).sqrt()
}

#[test]
fn zeroth_order_lobe_against_slit_sum() {
    let n = 64;
    let s = ronchi_exit(n, 200e-9 / 64.0, 1 << 15);
    let spec = s.spectrum();
    let lobe = PI / 200e-9;
    let fft_fraction = spec
        .wavenumbers()
        .iter()
        .zip(spec.amplitudes())
        .filter(|(k, _)| k.abs() < lobe)
        .map(|(_, a)| a.norm_sqr())
        .sum::<f64>()
        * spec.k_spacing()
        / spec.norm();
    let nodes = 20001;
    let h = 2.0 * lobe / (nodes - 1) as f64;
    let oracle = (0..nodes)
        .map(|j| {
            let w = if j == 0 || j == nodes - 1 { 0.5 } else { 1.0 };
            w * slit_sum(-lobe + j as f64 * h, n, 200e-9, 100e-9).norm_sqr()
        })
        .sum::<f64>()
        * h
        / (n as f64 * 100e-9);
    assert!((fft_fraction - oracle).abs() < 2e-3, "fft {fft_fraction}, oracle {oracle}");
    // Relative to the incident power the transmitted fraction adds one more factor δ/d_g.
    assert!((0.5 * oracle - 0.25).abs() < 0.01, "{oracle}");
}

#[test]
fn kick_keeps_density() {
    let s = ronchi_exit(24, 6.25e-9, 1 << 14);
    let k = apply_kick(&s, 1.7 * KI, &beam()).unwrap();
    let d = s.intensity().iter().zip(k.intensity()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(d < 1e-10, "{d}");
}

#[test]
fn plane_wave_moves_along_its_ray() {
    let q = 3.0e6;
    let s = apply_kick(&gaussian(300e-9, 50e-9, 4096), q, &beam()).unwrap();
    let out = propagate_free(&s, 0.05, &beam()).unwrap();
    let moved = out.centroid().unwrap() - s.centroid().unwrap();
    assert!((moved - q / K * 0.05).abs() < 1e-3 * 50e-9, "{moved}");
}

#[test]
fn example_envelope_shift_at_far_plane() {
    let b = beam();
    let s = gaussian(200e-9, 50e-9, 4096);
    let kicked = propagate_free(&apply_kick(&s, 1.06675e7, &b).unwrap(), 0.65, &b).unwrap();
    let free = propagate_free(&s, 0.65, &b).unwrap();
    let shift = envelope_shift_at(&kicked, &free, 0.65).unwrap();
    assert!((shift - 1.362e-5).abs() < 0.0005e-5, "{shift}");
}

#[test]
fn far_field_matches_propagation_for_two_slits() {
    let b = beam();
    let s = ronchi_exit(2, 6.25e-9, 1 << 18);
    let y = 100.0 * talbot_length(&b, &GratingSpec::new(200e-9, 100e-9, 2).unwrap());
    let far = far_field_form(&s.spectrum(), None, y, &b).unwrap();
    assert!(far.warning().is_none());
    let numeric = propagate_free(&s, y, &b).unwrap();
    let dev = max_rel_diff(&numeric.intensity(), &far.state.intensity());
    assert!(dev < 0.02, "{dev}");
}

#[test]
fn far_field_warns_for_wide_source() {
    let b = beam();
    let s = ronchi_exit(24, 6.25e-9, 1 << 12);
    let far = far_field_form(&s.spectrum(), None, 0.65, &b).unwrap();
    assert!(far.fraunhofer_ratio > 1.0);
    assert!(far.warning().unwrap().contains("Fraunhofer"));
}

#[test]
fn kicked_far_field_is_translated() {
    let b = beam();
    let s = ronchi_exit(2, 6.25e-9, 1 << 16);
    let y = 0.3;
    let free = far_field_form(&s.spectrum(), None, y, &b).unwrap().state;
    let kick = KickRecord::new(KI, 0.0, &b);
    let kicked = far_field_form(&s.spectrum(), Some(&kick), y, &b).unwrap().state;
    let expect = KI / K * y;
    // The Nyquist band overfills the grid here; centroids are windowed.
    let shift = kicked.windowed_centroid(expect, 0.1e-3).unwrap() - free.windowed_centroid(0.0, 0.1e-3).unwrap();
    assert!((shift - expect).abs() < 6.25e-9, "{shift}");
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn kick_covariance(m in 0.0f64..2.0, dy in 1e-3f64..0.2) {
        let b = beam();
        let s = gaussian(250e-9, 50e-9, 4096);
        let q = m * KI;
        let kicked = propagate_free(&apply_kick(&s, q, &b).unwrap(), dy, &b).unwrap();
        let free = propagate_free(&s, dy, &b).unwrap();
        let shift = envelope_shift_at(&kicked, &free, dy).unwrap();
        prop_assert!((shift - q / K * dy).abs() < 50e-9);
        let peak = |v: Vec<f64>| v.into_iter().fold(0.0, f64::max);
        prop_assert!((peak(kicked.intensity()) / peak(free.intensity()) - 1.0).abs() < 0.05);
    }

    #[test]
    fn propagation_conserves_norm(dy in 0.0f64..0.7) {
        let s = ronchi_exit(24, 6.25e-9, 1 << 13);
        let out = propagate_free(&s, dy, &beam()).unwrap();
        prop_assert!((out.norm() / s.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn grating_is_idempotent(n in 1usize..40) {
        let g = GratingSpec::new(200e-9, 100e-9, n).unwrap();
        let grid = SpatialGrid::with_len(6.25e-9, 4096).unwrap();
        let t = build_transmission(&g, &grid).unwrap();
        prop_assert!(t.samples().iter().all(|&v| v * v == v));
    }
}
