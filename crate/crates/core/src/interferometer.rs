//! End-to-end numerical model of the three-grating interferometer.
//!
//! G1 is illuminated over `n` slits; the exit wave propagates to the kick
//! plane `y′₁₂`, receives the photon recoil, reaches G2 (a Ronchi grating
//! spanning the whole grid on the G1 lattice), and propagates `y₂₃` to G3,
//! where the transmitted flux is scanned over the G3 displacement.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::distributions::{DistributionKind, MomentumTransferDistribution, VisibilityCurve, VisibilityPhase};
use crate::error::{config, contract, Result};
use crate::fringe::{ensemble_fringe, fit_fringe, flux_scan, EnsembleInput, FluxScan, FluxWindow, FringeResult, KickSample, RonchiMask};
use crate::grating::{
    build_transmission, exit_state, kick_distance_for, Apparatus, IncidentEnvelope, TransmissionProfile,
};
use crate::grid::SpatialGrid;
use crate::propagation::{apply_grating, apply_kick, PropagationKernel, Propagator, TransverseState};
use crate::quadrature::{simpson_rule, trapezoid_weights};

/// Numerical settings of the pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineSettings {
    pub grid_spacing: f64,
    pub grid_extent: f64,
    pub envelope: IncidentEnvelope,
    /// Half-width of the G3 integration window; defaults to 1.5 port spacings.
    pub window_halfwidth: Option<f64>,
    pub points_per_period: usize,
    pub periods: usize,
    /// Simpson nodes over the support of `P(Δk_x)`.
    pub kick_nodes: usize,
}

impl Default for PipelineSettings {
    /// `δ/16` spacing on 2¹⁹ cells for the reference gratings.
    fn default() -> Self {
        let spacing = 100e-9 / 16.0;
        Self {
            grid_spacing: spacing,
            grid_extent: spacing * (1u64 << 19) as f64,
            envelope: IncidentEnvelope::TopHat,
            window_halfwidth: None,
            points_per_period: 32,
            periods: 2,
            kick_nodes: 65,
        }
    }
}

/// Fringe and diagnostics for one arm separation.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericPoint {
    pub dp_over_lambda_i: f64,
    pub y_prime_12: f64,
    /// Ensemble fringe relative to the laser-off reference.
    pub fringe: FringeResult,
    pub samples: Vec<KickSample>,
}

impl NumericPoint {
    /// Complex relative fringe factor `𝒞/𝒞₀·e^{iφ}`; zero if the phase is undefined.
    pub fn relative_factor(&self) -> Complex64 {
        match self.fringe.phase_rad {
            Some(p) => Complex64::from_polar(self.fringe.relative_contrast, p),
            None => Complex64::new(0.0, 0.0),
        }
    }
}

/// Curve produced by the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NumericSweep {
    pub curve: VisibilityCurve,
    pub residual: Vec<f64>,
    pub points: Vec<NumericPoint>,
}

#[derive(Debug, Clone)]
pub struct Interferometer {
    apparatus: Apparatus,
    settings: PipelineSettings,
    grid: SpatialGrid,
    g1: TransmissionProfile,
    g2: TransmissionProfile,
    g3: RonchiMask,
    propagator: Propagator,
    to_g3: PropagationKernel,
    exit: TransverseState,
    reference: FringeResult,
}

impl Interferometer {
    pub fn new(apparatus: Apparatus, settings: PipelineSettings) -> Result<Self> {
        let grid = SpatialGrid::new(settings.grid_spacing, settings.grid_extent)?;
        let a = &apparatus;
        let k = a.beam.wavenumber_k;
        let flight = a.geometry.y12 + a.geometry.y23;
        let spread = 2.0 * (grid.nyquist() + 2.0 * a.photon.wavenumber_i) / k * flight;
        let needed = spread + a.grating.illuminated_width();
        if grid.extent() < needed {
            return Err(config(format!(
                "grid_extent {} m is too small: free spread over {flight} m needs at least {needed} m",
                grid.extent()
            )));
        }
        let g1 = build_transmission(&a.grating, &grid)?;
        let g2 = build_transmission(&a.grating.covering(grid.extent())?, &grid)?;
        let g3 = RonchiMask::aligned_with(&a.grating);
        let incident = settings.envelope.sample(&a.grating, &grid);
        let exit = exit_state(&g1, &incident)?;
        let propagator = Propagator::new(&grid);
        let to_g3 = propagator.kernel(a.geometry.y23, &a.beam)?;
        let mut me = Self {
            apparatus,
            settings,
            grid,
            g1,
            g2,
            g3,
            propagator,
            to_g3,
            exit,
            reference: FringeResult {
                offset_a: 1.0,
                amplitude_b: 0.0,
                visibility: 0.0,
                phase_rad: None,
                relative_contrast: 0.0,
                residual: 0.0,
            },
        };
        let max_center = 2.0 * a.photon.wavenumber_i / k * flight;
        if max_center + me.window_halfwidth() > 0.5 * grid.extent() {
            return Err(config("flux window leaves the grid for the largest momentum transfer"));
        }
        let at_kick = me.state_at(0.0)?;
        me.reference = me.scan_kick(&at_kick, 0.0)?.1;
        Ok(me)
    }

    pub fn apparatus(&self) -> &Apparatus {
        &self.apparatus
    }

    pub fn settings(&self) -> &PipelineSettings {
        &self.settings
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn g1(&self) -> &TransmissionProfile {
        &self.g1
    }

    pub fn g2(&self) -> &TransmissionProfile {
        &self.g2
    }

    pub fn propagator(&self) -> &Propagator {
        &self.propagator
    }

    pub fn exit_state(&self) -> &TransverseState {
        &self.exit
    }

    /// Laser-off fringe used to normalise contrast and phase.
    pub fn reference(&self) -> &FringeResult {
        &self.reference
    }

    /// Separation at G3 of neighbouring diffraction orders of G2, `λ y₂₃ / d_g`.
    pub fn port_spacing(&self) -> f64 {
        let a = &self.apparatus;
        2.0 * PI * a.geometry.y23 / (a.beam.wavenumber_k * a.grating.period_dg)
    }

    pub fn window_halfwidth(&self) -> f64 {
        self.settings.window_halfwidth.unwrap_or(1.5 * self.port_spacing())
    }

    /// Lateral displacement at G3 of the pattern of a state kicked at `y_prime`,
    /// `(Δk_x/k)(y₁₂ + y₂₃ − y′₁₂)`.
    pub fn g3_shift(&self, delta_kx: f64, y_prime: f64) -> f64 {
        let g = &self.apparatus.geometry;
        delta_kx / self.apparatus.beam.wavenumber_k * (g.y12 + g.y23 - y_prime)
    }

    /// G3 window centred on the displaced pattern.
    pub fn window_for(&self, delta_kx: f64, y_prime: f64) -> FluxWindow {
        FluxWindow { center: self.g3_shift(delta_kx, y_prime), halfwidth: self.window_halfwidth(), mask: self.g3 }
    }

    /// Free (unkicked) wave at distance `y ≤ y₁₂` behind G1.
    pub fn state_at(&self, y: f64) -> Result<TransverseState> {
        if y > self.apparatus.geometry.y12 {
            return Err(contract(format!("y = {y} lies beyond G2")));
        }
        self.propagator.propagate(&self.exit, y, &self.apparatus.beam)
    }

    /// Kicks `at_kick` by `delta_kx` and carries it to the entrance of G2.
    pub fn kicked_before_g2(&self, at_kick: &TransverseState, delta_kx: f64) -> Result<TransverseState> {
        let kernel = self.kernel_to_g2(at_kick)?;
        self.kicked_with(at_kick, delta_kx, &kernel)
    }

    fn kernel_to_g2(&self, at_kick: &TransverseState) -> Result<PropagationKernel> {
        let dy = self.apparatus.geometry.y12 - at_kick.y_position();
        self.propagator.kernel(dy, &self.apparatus.beam)
    }

    fn kicked_with(&self, at_kick: &TransverseState, delta_kx: f64, to_g2: &PropagationKernel) -> Result<TransverseState> {
        let mut state = apply_kick(at_kick, delta_kx, &self.apparatus.beam)?;
        self.propagator.apply_in_place(&mut state, to_g2)?;
        Ok(state)
    }

    fn through_g3(&self, before_g2: &TransverseState) -> Result<TransverseState> {
        let mut state = apply_grating(before_g2, &self.g2)?;
        self.propagator.apply_in_place(&mut state, &self.to_g3)?;
        Ok(state)
    }

    /// Kicks `at_kick` by `delta_kx` and carries it through G2 to G3.
    pub fn kicked_at_g3(&self, at_kick: &TransverseState, delta_kx: f64) -> Result<TransverseState> {
        self.through_g3(&self.kicked_before_g2(at_kick, delta_kx)?)
    }

    /// Flux scan and cosine fit for one momentum transfer.
    pub fn scan_kick(&self, at_kick: &TransverseState, delta_kx: f64) -> Result<(FluxScan, FringeResult)> {
        let kernel = self.kernel_to_g2(at_kick)?;
        self.scan_with(at_kick, delta_kx, &kernel)
    }

    fn scan_with(
        &self,
        at_kick: &TransverseState,
        delta_kx: f64,
        to_g2: &PropagationKernel,
    ) -> Result<(FluxScan, FringeResult)> {
        let at_g3 = self.through_g3(&self.kicked_with(at_kick, delta_kx, to_g2)?)?;
        let window = self.window_for(delta_kx, at_kick.y_position());
        let scan = flux_scan(&at_g3, &window, self.settings.points_per_period, self.settings.periods)?;
        let fit = fit_fringe(&scan, self.apparatus.grating.period_dg)?;
        Ok((scan, fit))
    }

    /// Centroid shift at G2 of the kicked density relative to the free one.
    ///
    /// Each centroid is taken over a window that follows the pattern, with a
    /// half-width of half the distance Nyquist-band content drifts from G1 to
    /// G2. Spectral content the kick pushes past Nyquist wraps to the opposite
    /// band edge and lands outside that window.
    pub fn envelope_shift_at_g2(&self, y_prime: f64, delta_kx: f64) -> Result<f64> {
        let a = &self.apparatus;
        let y12 = a.geometry.y12;
        let kicked = self.kicked_before_g2(&self.state_at(y_prime)?, delta_kx)?;
        let free = self.state_at(y12)?;
        let halfwidth = 0.5 * self.grid.nyquist() / a.beam.wavenumber_k * y12;
        let shift = delta_kx / a.beam.wavenumber_k * (y12 - y_prime);
        Ok(kicked.windowed_centroid(shift, halfwidth)? - free.windowed_centroid(0.0, halfwidth)?)
    }

    /// Shift at G3 of the diffraction port `port` (…, −1, 0, 1, …): centroid of
    /// the kicked density around `port·s + shift` minus the free one around `port·s`,
    /// each over one port spacing `s`.
    pub fn port_shift_at_g3(&self, y_prime: f64, delta_kx: f64, port: i32) -> Result<f64> {
        let s = self.port_spacing();
        let free = self.kicked_at_g3(&self.state_at(0.0)?, 0.0)?;
        let kicked = self.kicked_at_g3(&self.state_at(y_prime)?, delta_kx)?;
        let c = port as f64 * s;
        let shift = self.g3_shift(delta_kx, y_prime);
        Ok(kicked.windowed_centroid(c + shift, 0.5 * s)? - free.windowed_centroid(c, 0.5 * s)?)
    }

    /// Momentum transfers (1/m) and quadrature weights covering `dist`.
    pub fn kick_nodes(&self, dist: &MomentumTransferDistribution) -> Result<Vec<(f64, f64)>> {
        let ki = dist.k_i();
        match dist.kind() {
            DistributionKind::Delta { k_delta } => Ok(vec![(k_delta * ki, 1.0)]),
            DistributionKind::Tabulated(t) => {
                let w = trapezoid_weights(t.nodes());
                Ok(t.nodes().iter().zip(w).map(|(&s, w)| (s * ki, w * ki)).collect())
            }
            _ => {
                let (lo, hi) = dist.support();
                simpson_rule(self.settings.kick_nodes, lo * ki, hi * ki)
            }
        }
    }

    /// Ensemble fringe at one arm separation, relative to the laser-off reference.
    pub fn relative_fringe(&self, dist: &MomentumTransferDistribution, dp_over_lambda_i: f64) -> Result<NumericPoint> {
        let a = &self.apparatus;
        if (dist.k_i() / a.photon.wavenumber_i - 1.0).abs() > 1e-12 {
            return Err(config("distribution and photon wavenumbers differ"));
        }
        if !(dp_over_lambda_i >= 0.0) {
            return Err(contract(format!("d_p / lambda_i must be >= 0, got {dp_over_lambda_i}")));
        }
        let y_prime = kick_distance_for(dp_over_lambda_i, &a.beam, &a.photon, &a.grating);
        if y_prime > a.geometry.y12 {
            return Err(config(format!(
                "d_p / lambda_i = {dp_over_lambda_i} needs a kick {y_prime} m behind G1, beyond y12"
            )));
        }
        let at_kick = self.state_at(y_prime)?;
        let to_g2 = self.kernel_to_g2(&at_kick)?;
        let samples: Vec<KickSample> = self
            .kick_nodes(dist)?
            .into_par_iter()
            .map(|(dk, w)| Ok(KickSample { delta_kx: dk, weight: w, fit: self.scan_with(&at_kick, dk, &to_g2)?.1 }))
            .collect::<Result<_>>()?;
        let d_p = dp_over_lambda_i * a.photon.wavelength_i;
        let fringe = ensemble_fringe(EnsembleInput::Scans { samples: &samples, reference: &self.reference }, dist, d_p)?;
        Ok(NumericPoint { dp_over_lambda_i, y_prime_12: y_prime, fringe, samples })
    }

    /// Numerical visibility curve over the given ratios `d_p/λ_i` (ascending).
    pub fn sweep(&self, dist: &MomentumTransferDistribution, ratios: &[f64]) -> Result<NumericSweep> {
        if ratios.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(contract("sweep grid must be sorted ascending"));
        }
        let points: Vec<NumericPoint> = ratios.iter().map(|&r| self.relative_fringe(dist, r)).collect::<Result<_>>()?;
        let vp: Vec<VisibilityPhase> = points
            .iter()
            .map(|p| VisibilityPhase {
                visibility: p.fringe.relative_contrast,
                phase_rad: p.fringe.phase_rad.unwrap_or(f64::NAN),
                amplitude: p.fringe.relative_contrast,
            })
            .collect();
        let curve = VisibilityCurve::from_points(ratios.to_vec(), &vp);
        Ok(NumericSweep { residual: points.iter().map(|p| p.fringe.residual).collect(), curve, points })
    }

    /// First sign change of the relative fringe factor in `[lo, hi]`, located by
    /// scanning `coarse` equal steps and bisecting to `tolerance` in `d_p/λ_i`.
    ///
    /// A sign change shows up as a phase jump of π between neighbours, detected
    /// through `Re(Ĩ_a·conj(Ĩ_b)) < 0`.
    pub fn first_zero(
        &self,
        dist: &MomentumTransferDistribution,
        lo: f64,
        hi: f64,
        coarse: usize,
        tolerance: f64,
    ) -> Result<Option<f64>> {
        let factor = |r: f64| -> Result<Complex64> { Ok(self.relative_fringe(dist, r)?.relative_factor()) };
        let flips = |a: Complex64, b: Complex64| (a * b.conj()).re < 0.0;
        let step = (hi - lo) / coarse.max(1) as f64;
        let mut left = (lo, factor(lo)?);
        for j in 1..=coarse.max(1) {
            let r = lo + j as f64 * step;
            let right = (r, factor(r)?);
            if flips(left.1, right.1) {
                let (mut a, mut b) = (left, right);
                while b.0 - a.0 > tolerance {
                    let m = 0.5 * (a.0 + b.0);
                    let mid = (m, factor(m)?);
                    if flips(a.1, mid.1) {
                        b = mid;
                    } else {
                        a = mid;
                    }
                }
                return Ok(Some(0.5 * (a.0 + b.0)));
            }
            left = right;
        }
        Ok(None)
    }
}

/// Intensity `|ψ(x, y)|²` on a rectangular grid of positions and distances.
#[derive(Debug, Clone, PartialEq)]
pub struct Carpet {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// `intensity[j][i]` at `(xs[i], ys[j])`.
    pub intensity: Vec<Vec<f64>>,
}

/// Propagates `exit` to each of `ys` and keeps the samples with `x_min ≤ x ≤ x_max`.
pub fn talbot_carpet(
    exit: &TransverseState,
    ys: &[f64],
    x_min: f64,
    x_max: f64,
    beam: &crate::grating::BeamSpec,
) -> Result<Carpet> {
    if ys.iter().any(|&y| y < exit.y_position()) {
        return Err(contract("carpet distances must not precede the source plane"));
    }
    let grid = exit.grid();
    let keep: Vec<usize> = (0..grid.len()).filter(|&i| (x_min..=x_max).contains(&grid.x(i))).collect();
    let slices = Propagator::new(grid).intensity_slices(exit, ys, beam)?;
    Ok(Carpet {
        xs: keep.iter().map(|&i| grid.x(i)).collect(),
        ys: ys.to_vec(),
        intensity: slices.into_iter().map(|s| keep.iter().map(|&i| s[i]).collect()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_grid_rejected() {
        let settings = PipelineSettings { grid_extent: 1e-3, ..PipelineSettings::default() };
        assert!(Interferometer::new(Apparatus::reference(), settings).is_err());
    }

    #[test]
    fn coarse_grid_rejected() {
        let settings = PipelineSettings { grid_spacing: 100e-9 / 8.0, grid_extent: 6e-3, ..PipelineSettings::default() };
        assert!(Interferometer::new(Apparatus::reference(), settings).is_err());
    }

    #[test]
    fn default_grid_is_power_of_two() {
        let s = PipelineSettings::default();
        let g = SpatialGrid::new(s.grid_spacing, s.grid_extent).unwrap();
        assert_eq!(g.len(), 1 << 19);
    }
}
