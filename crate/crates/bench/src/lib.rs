//! Shared inputs for the benchmarks.

use num_complex::Complex64;
use recoil_core::{
    build_transmission, exit_state, Apparatus, FluxWindow, IncidentEnvelope, RonchiMask, SpatialGrid, TransverseState,
};

/// Points on a polar grid covering `|z| ≤ 6` in the upper half plane.
pub fn erf_points() -> Vec<Complex64> {
    let mut out = Vec::new();
    for r in 1..=12 {
        for a in 0..16 {
            let theta = std::f64::consts::PI * a as f64 / 15.0;
            out.push(Complex64::from_polar(0.5 * r as f64, theta));
        }
    }
    out
}

/// Exit wave of the reference G1 on a grid of `2^log2_len` cells at `δ/16`.
pub fn reference_exit(log2_len: u32) -> TransverseState {
    let app = Apparatus::reference();
    let grid = SpatialGrid::with_len(app.grating.open_width_delta / 16.0, 1 << log2_len).expect("valid grid");
    let g1 = build_transmission(&app.grating, &grid).expect("grid resolves the grating");
    exit_state(&g1, &IncidentEnvelope::TopHat.sample(&app.grating, &grid)).expect("nonempty exit")
}

/// Window over the central 24 slits with the G3 mask aligned to G1.
pub fn reference_window() -> FluxWindow {
    let app = Apparatus::reference();
    FluxWindow { center: 0.0, halfwidth: 0.5 * app.grating.illuminated_width(), mask: RonchiMask::aligned_with(&app.grating) }
}
