//! Paraxial free propagation, photon-recoil kicks, grating passage and the
//! far-field closed form.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{config, contract, domain, Error, Result};
use crate::grating::{BeamSpec, TransmissionProfile};
use crate::grid::SpatialGrid;

/// Record of the single photon scattering event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KickRecord {
    pub delta_kx: f64,
    pub y_prime_12: f64,
    /// `Δx₀ = (Δk_x / k)·y′₁₂`.
    pub delta_x0: f64,
}

impl KickRecord {
    pub fn new(delta_kx: f64, y_prime_12: f64, beam: &BeamSpec) -> Self {
        Self { delta_kx, y_prime_12, delta_x0: delta_kx / beam.wavenumber_k * y_prime_12 }
    }
}

/// Transverse wavefunction `ψ(x)` at a given distance `y` behind G1.
#[derive(Debug, Clone, PartialEq)]
pub struct TransverseState {
    psi: Vec<Complex64>,
    grid: SpatialGrid,
    y_position: f64,
    kick: Option<KickRecord>,
    recorded_norm: f64,
}

impl TransverseState {
    pub fn new(grid: SpatialGrid, psi: Vec<Complex64>, y_position: f64) -> Result<Self> {
        if psi.len() != grid.len() {
            return Err(config(format!("state has {} samples, grid has {}", psi.len(), grid.len())));
        }
        let mut s = Self { psi, grid, y_position, kick: None, recorded_norm: 0.0 };
        s.recorded_norm = s.norm();
        Ok(s)
    }

    pub fn psi(&self) -> &[Complex64] {
        &self.psi
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn y_position(&self) -> f64 {
        self.y_position
    }

    pub fn kick(&self) -> Option<&KickRecord> {
        self.kick.as_ref()
    }

    /// `∫|ψ|²dx` as recorded when the state was produced.
    pub fn recorded_norm(&self) -> f64 {
        self.recorded_norm
    }

    /// `∫|ψ|²dx` recomputed from the samples.
    pub fn norm(&self) -> f64 {
        self.psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.psi.iter().map(|c| c.norm_sqr()).collect()
    }

    /// True when no probability survives (for instance behind a closed grating).
    pub fn is_degenerate(&self) -> bool {
        self.recorded_norm == 0.0
    }

    /// First moment of `|ψ|²` over the whole grid.
    pub fn centroid(&self) -> Result<f64> {
        let (lo, hi) = self.grid.bounds();
        self.windowed_centroid(0.5 * (lo + hi), 0.5 * (hi - lo))
    }

    /// First moment of `|ψ|²` restricted to `[center − halfwidth, center + halfwidth]`.
    pub fn windowed_centroid(&self, center: f64, halfwidth: f64) -> Result<f64> {
        let (mut m0, mut m1) = (0.0, 0.0);
        for (i, c) in self.psi.iter().enumerate() {
            let x = self.grid.x(i);
            if (x - center).abs() <= halfwidth {
                let p = c.norm_sqr();
                m0 += p;
                m1 += p * x;
            }
        }
        if m0 == 0.0 {
            return Err(Error::Degenerate("no intensity inside the centroid window".into()));
        }
        Ok(m1 / m0)
    }

    /// Momentum representation `C(k_x) = (1/√2π)∫ψ(x)e^{−ik_x x}dx`.
    pub fn spectrum(&self) -> MomentumSpectrum {
        MomentumSpectrum::from_samples(&self.grid, &self.psi)
    }
}

/// Amplitudes `c(k_x)` on the conjugate grid, in ascending `k_x` order.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumSpectrum {
    amplitudes: Vec<Complex64>,
    k_spacing: f64,
    k_min: f64,
    grid: SpatialGrid,
    support_first: usize,
    support: Vec<Complex64>,
}

impl MomentumSpectrum {
    fn from_samples(grid: &SpatialGrid, psi: &[Complex64]) -> Self {
        let n = grid.len();
        let mut buf = psi.to_vec();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let dx = grid.spacing();
        let x0 = grid.origin();
        let scale = dx / (2.0 * PI).sqrt();
        let k_fft = grid.fft_wavenumbers();
        let half = n / 2;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n];
        for (m, (&a, &k)) in buf.iter().zip(&k_fft).enumerate() {
            amplitudes[(m + half) % n] = a * Complex64::cis(-k * x0) * scale;
        }
        let first = psi.iter().position(|c| c.norm_sqr() > 0.0).unwrap_or(0);
        let last = psi.iter().rposition(|c| c.norm_sqr() > 0.0).unwrap_or(0);
        Self {
            amplitudes,
            k_spacing: grid.k_spacing(),
            k_min: k_fft[(n - half) % n],
            grid: *grid,
            support_first: first,
            support: psi[first..=last].to_vec(),
        }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn k_spacing(&self) -> f64 {
        self.k_spacing
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.amplitudes.len()).map(|m| self.k_min + m as f64 * self.k_spacing).collect()
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    /// `∫|c|²dk_x`.
    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.k_spacing
    }

    /// Largest `|x|` reached by the nonzero part of the source wave.
    pub fn support_half_width(&self) -> f64 {
        if self.support.is_empty() {
            return 0.0;
        }
        let a = self.grid.x(self.support_first).abs();
        let b = self.grid.x(self.support_first + self.support.len() - 1).abs();
        a.max(b) + 0.5 * self.grid.spacing()
    }

    /// `c(q)` at an arbitrary wavenumber, summed directly over the source
    /// samples; zero beyond the Nyquist wavenumber.
    pub fn amplitude_at(&self, q: f64) -> Complex64 {
        if q.abs() > self.grid.nyquist() {
            return Complex64::new(0.0, 0.0);
        }
        let dx = self.grid.spacing();
        let step = Complex64::cis(-q * dx);
        let mut phasor = Complex64::cis(-q * self.grid.x(self.support_first));
        let mut acc = Complex64::new(0.0, 0.0);
        for &v in &self.support {
            acc += v * phasor;
            phasor *= step;
        }
        acc * (dx / (2.0 * PI).sqrt())
    }
}

/// Spectral factors `e^{−ik_x² dy/2k}/N` for one distance, in FFT order.
#[derive(Debug, Clone)]
pub struct PropagationKernel {
    dy: f64,
    wavenumber_k: f64,
    factors: Vec<Complex64>,
}

impl PropagationKernel {
    pub fn distance(&self) -> f64 {
        self.dy
    }
}

/// Free-space propagator with cached transforms for one grid.
#[derive(Clone)]
pub struct Propagator {
    grid: SpatialGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    k_fft: Vec<f64>,
}

impl std::fmt::Debug for Propagator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Propagator").field("grid", &self.grid).finish()
    }
}

impl Propagator {
    pub fn new(grid: &SpatialGrid) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid: *grid,
            forward: planner.plan_fft_forward(grid.len()),
            inverse: planner.plan_fft_inverse(grid.len()),
            k_fft: grid.fft_wavenumbers(),
        }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    /// Advances `state` by `dy`, multiplying each spectral amplitude by
    /// `e^{−ik_x² dy/2k}`. A kicked state also picks up the global phase
    /// `e^{−iΔk_x² dy/2k}` of the closed-form kicked wavefunction.
    pub fn propagate(&self, state: &TransverseState, dy: f64, beam: &BeamSpec) -> Result<TransverseState> {
        let kernel = self.kernel(dy, beam)?;
        self.apply(state, &kernel)
    }

    /// Precomputes the spectral factors for a fixed distance.
    pub fn kernel(&self, dy: f64, beam: &BeamSpec) -> Result<PropagationKernel> {
        if !(dy >= 0.0) || !dy.is_finite() {
            return Err(contract(format!("propagation distance must be >= 0, got {dy}")));
        }
        let k = beam.wavenumber_k;
        let scale = 1.0 / self.grid.len() as f64;
        let factors = if dy == 0.0 {
            Vec::new()
        } else {
            self.k_fft.iter().map(|&kx| Complex64::from_polar(scale, -kx * kx * dy / (2.0 * k))).collect()
        };
        Ok(PropagationKernel { dy, wavenumber_k: k, factors })
    }

    pub fn apply(&self, state: &TransverseState, kernel: &PropagationKernel) -> Result<TransverseState> {
        let mut out = state.clone();
        self.apply_in_place(&mut out, kernel)?;
        Ok(out)
    }

    /// [`Propagator::apply`] without copying the wavefunction.
    pub fn apply_in_place(&self, state: &mut TransverseState, kernel: &PropagationKernel) -> Result<()> {
        if !state.grid.same_as(&self.grid) {
            return Err(config("state grid does not match the propagator grid"));
        }
        state.y_position += kernel.dy;
        if kernel.dy == 0.0 {
            return Ok(());
        }
        self.forward.process(&mut state.psi);
        match state.kick {
            Some(kick) => {
                let global = Complex64::cis(-kick.delta_kx * kick.delta_kx * kernel.dy / (2.0 * kernel.wavenumber_k));
                for (a, f) in state.psi.iter_mut().zip(&kernel.factors) {
                    *a *= f * global;
                }
            }
            None => {
                for (a, f) in state.psi.iter_mut().zip(&kernel.factors) {
                    *a *= f;
                }
            }
        }
        self.inverse.process(&mut state.psi);
        Ok(())
    }

    /// `|ψ(x, y)|²` at each requested distance, computed from `state` in parallel.
    pub fn intensity_slices(&self, state: &TransverseState, ys: &[f64], beam: &BeamSpec) -> Result<Vec<Vec<f64>>> {
        ys.par_iter()
            .map(|&y| {
                let dy = y - state.y_position;
                Ok(self.propagate(state, dy, beam)?.intensity())
            })
            .collect()
    }
}

/// One-shot free propagation (plans a transform for the state's grid).
pub fn propagate_free(state: &TransverseState, dy: f64, beam: &BeamSpec) -> Result<TransverseState> {
    Propagator::new(&state.grid).propagate(state, dy, beam)
}

/// Samples between exact re-evaluations of the kick phase.
const KICK_BLOCK: usize = 128;

/// Photon recoil: shifts the spectrum by `Δk_x` via `ψ ← e^{iΔk_x x}ψ`,
/// leaving `|ψ|²` at the kick plane untouched.
pub fn apply_kick(state: &TransverseState, delta_kx: f64, beam: &BeamSpec) -> Result<TransverseState> {
    if state.kick.is_some() {
        return Err(contract("state has already been kicked"));
    }
    if !(delta_kx.is_finite() && delta_kx >= 0.0) {
        return Err(domain(format!("momentum transfer must be finite and >= 0, got {delta_kx}")));
    }
    let mut out = state.clone();
    if delta_kx != 0.0 {
        let grid = &state.grid;
        let step = Complex64::cis(delta_kx * grid.spacing());
        for (block, chunk) in out.psi.chunks_mut(KICK_BLOCK).enumerate() {
            let mut phase = Complex64::cis(delta_kx * grid.x(block * KICK_BLOCK));
            for v in chunk {
                *v *= phase;
                phase *= step;
            }
        }
    }
    out.kick = Some(KickRecord::new(delta_kx, state.y_position, beam));
    Ok(out)
}

/// Centroid displacement of the kicked density relative to the unkicked one.
pub fn envelope_shift_at(kicked: &TransverseState, unkicked: &TransverseState, y: f64) -> Result<f64> {
    let tol = 1e-12 * y.abs().max(1e-9);
    if (kicked.y_position - y).abs() > tol || (unkicked.y_position - y).abs() > tol {
        return Err(contract(format!(
            "states sit at y = {} and {}, expected both at {y}",
            kicked.y_position, unkicked.y_position
        )));
    }
    if let Some(kick) = kicked.kick {
        if y < kick.y_prime_12 {
            return Err(contract(format!("y = {y} lies before the kick plane {}", kick.y_prime_12)));
        }
    }
    Ok(kicked.centroid()? - unkicked.centroid()?)
}

/// Pointwise transmission `ψ ← T·ψ`. A fully closed profile yields a zero,
/// degenerate state.
pub fn apply_grating(state: &TransverseState, profile: &TransmissionProfile) -> Result<TransverseState> {
    if !state.grid.same_as(profile.grid()) {
        return Err(config("transmission profile grid does not match the state grid"));
    }
    let mut out = state.clone();
    for (v, &t) in out.psi.iter_mut().zip(profile.samples()) {
        *v *= t;
    }
    out.recorded_norm = out.norm();
    Ok(out)
}

/// Closed-form far-field wavefunction and the Fraunhofer ratio `k x′²/y`
/// under which it was evaluated.
#[derive(Debug, Clone)]
pub struct FarField {
    pub state: TransverseState,
    pub fraunhofer_ratio: f64,
}

impl FarField {
    pub const RATIO_LIMIT: f64 = 0.1;

    pub fn warning(&self) -> Option<String> {
        (self.fraunhofer_ratio > Self::RATIO_LIMIT).then(|| {
            format!(
                "Fraunhofer ratio {:.3} exceeds {}; far-field form is not reliable",
                self.fraunhofer_ratio,
                Self::RATIO_LIMIT
            )
        })
    }
}

/// `ψ(x) = √(k/iy)·e^{ik(x+Δx₀)²/2y − iΔk_x²y/2k}·c(k(x+Δx₀)/y − Δk_x)`.
///
/// `c` is the unitary transform `(1/√2π)∫ψe^{−ikx}dx`, for which the
/// stationary-phase prefactor is `√(k/iy)`.
pub fn far_field_form(
    spectrum: &MomentumSpectrum,
    kick: Option<&KickRecord>,
    y: f64,
    beam: &BeamSpec,
) -> Result<FarField> {
    if !(y > 0.0 && y.is_finite()) {
        return Err(contract(format!("far-field distance must be positive, got {y}")));
    }
    let k = beam.wavenumber_k;
    let (dk, dx0) = kick.map_or((0.0, 0.0), |r| (r.delta_kx, r.delta_x0));
    let prefactor = (Complex64::new(k, 0.0) / Complex64::new(0.0, y)).sqrt();
    let grid = *spectrum.grid();
    let psi: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let xs = grid.x(i) + dx0;
            let phase = k * xs * xs / (2.0 * y) - dk * dk * y / (2.0 * k);
            prefactor * Complex64::cis(phase) * spectrum.amplitude_at(k * xs / y - dk)
        })
        .collect();
    let half = spectrum.support_half_width();
    let mut state = TransverseState::new(grid, psi, y)?;
    if let Some(r) = kick {
        state.kick = Some(*r);
    }
    Ok(FarField { state, fraunhofer_ratio: k * half * half / y })
}
