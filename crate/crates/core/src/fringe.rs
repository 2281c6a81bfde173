//! Flux behind the third grating, cosine fits, and ensemble averaging over
//! the momentum-transfer distribution.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::distributions::MomentumTransferDistribution;
use crate::error::{config, contract, Error, Result};
use crate::grating::GratingSpec;
use crate::propagation::TransverseState;
use crate::unwrap::wrap_phase;

/// Infinite Ronchi mask: open on `[c − w/2, c + w/2]` around every lattice
/// site `c = offset + j·period`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RonchiMask {
    pub period: f64,
    pub open_width: f64,
    pub offset: f64,
}

impl RonchiMask {
    /// Mask on the same lattice as `grating`.
    pub fn aligned_with(grating: &GratingSpec) -> Self {
        Self { period: grating.period_dg, open_width: grating.open_width_delta, offset: grating.lattice_offset() }
    }

    pub fn fully_open(period: f64) -> Self {
        Self { period, open_width: period, offset: 0.0 }
    }

    /// Open length inside `(−∞, x]` measured from an arbitrary lattice origin.
    fn cumulative(&self, x: f64) -> f64 {
        let u = x - (self.offset - 0.5 * self.open_width);
        let cells = (u / self.period).floor();
        cells * self.open_width + (u - cells * self.period).clamp(0.0, self.open_width)
    }

    /// Open length inside `[a, b]`.
    pub fn open_length(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            0.0
        } else {
            (self.cumulative(b) - self.cumulative(a)).max(0.0)
        }
    }
}

/// Region over which the flux is integrated, together with the G3 mask.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxWindow {
    pub center: f64,
    pub halfwidth: f64,
    pub mask: RonchiMask,
}

/// Probability transmitted through the window when G3 is displaced by `dx3`.
///
/// A positive `dx3` moves the open slits towards `−x`. Cells straddling a
/// window or slit edge contribute their open fraction.
pub fn transmitted_flux(state: &TransverseState, window: &FluxWindow, dx3: f64) -> Result<f64> {
    Ok(WindowDensity::new(state, window)?.flux(window, dx3))
}

/// Running integral of the cell-wise constant density `|ψ|²` over the window.
struct WindowDensity {
    left: f64,
    spacing: f64,
    density: Vec<f64>,
    cumulative: Vec<f64>,
}

impl WindowDensity {
    fn new(state: &TransverseState, window: &FluxWindow) -> Result<Self> {
        let grid = state.grid();
        let (lo, hi) = grid.bounds();
        let (wl, wr) = (window.center - window.halfwidth, window.center + window.halfwidth);
        if !(window.halfwidth > 0.0) || wl < lo - 1e-12 * grid.extent() || wr > hi + 1e-12 * grid.extent() {
            return Err(config(format!("flux window [{wl}, {wr}] is not inside the grid [{lo}, {hi}]")));
        }
        let dx = grid.spacing();
        let first = grid.cell_of(wl.max(lo)).unwrap_or(0);
        let last = grid.cell_of(wr.min(hi - 0.5 * dx)).unwrap_or(grid.len() - 1);
        let density: Vec<f64> = state.psi()[first..=last].iter().map(|v| v.norm_sqr()).collect();
        let mut cumulative = Vec::with_capacity(density.len() + 1);
        let mut acc = 0.0;
        cumulative.push(acc);
        for &d in &density {
            acc += d * dx;
            cumulative.push(acc);
        }
        Ok(Self { left: grid.x(first) - 0.5 * dx, spacing: dx, density, cumulative })
    }

    /// `∫ |ψ|²` from the left edge of the covered cells to `x`.
    fn integral_to(&self, x: f64) -> f64 {
        let u = ((x - self.left) / self.spacing).max(0.0);
        let j = u.floor() as usize;
        if j >= self.density.len() {
            return self.cumulative[self.density.len()];
        }
        self.cumulative[j] + self.density[j] * (x - self.left - j as f64 * self.spacing)
    }

    fn flux(&self, window: &FluxWindow, dx3: f64) -> f64 {
        let m = &window.mask;
        let (wl, wr) = (window.center - window.halfwidth, window.center + window.halfwidth);
        // Open intervals in x are [c − w/2 − dx3, c + w/2 − dx3] for lattice sites c.
        let first = ((wl + dx3 - m.offset - 0.5 * m.open_width) / m.period).floor() as i64;
        let last = ((wr + dx3 - m.offset + 0.5 * m.open_width) / m.period).ceil() as i64;
        (first..=last)
            .map(|j| {
                let c = m.offset + j as f64 * m.period - dx3;
                let a = (c - 0.5 * m.open_width).max(wl);
                let b = (c + 0.5 * m.open_width).min(wr);
                if b > a {
                    self.integral_to(b) - self.integral_to(a)
                } else {
                    0.0
                }
            })
            .sum()
    }
}

/// Transmitted flux sampled over the G3 displacement.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxScan {
    pub dx3_values: Vec<f64>,
    pub flux_values: Vec<f64>,
}

/// Scans `periods` whole periods of G3 with `points_per_period` samples each.
pub fn flux_scan(
    state: &TransverseState,
    window: &FluxWindow,
    points_per_period: usize,
    periods: usize,
) -> Result<FluxScan> {
    if points_per_period < 16 || periods < 2 {
        return Err(config(format!(
            "a flux scan needs >= 2 periods of >= 16 points, got {periods} x {points_per_period}"
        )));
    }
    let step = window.mask.period / points_per_period as f64;
    let dx3_values: Vec<f64> = (0..points_per_period * periods).map(|j| j as f64 * step).collect();
    let density = WindowDensity::new(state, window)?;
    let flux_values = dx3_values.iter().map(|&d| density.flux(window, d)).collect();
    Ok(FluxScan { dx3_values, flux_values })
}

/// Parameters of `T(Δx₃) = a + b·cos(2πΔx₃/d_g + φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeResult {
    pub offset_a: f64,
    pub amplitude_b: f64,
    /// Contrast relative to the laser-off reference once normalised; the raw
    /// contrast `b/a` for a plain fit.
    pub visibility: f64,
    /// `None` when the fringe amplitude vanishes.
    pub phase_rad: Option<f64>,
    pub relative_contrast: f64,
    /// RMS deviation of the data from the fitted cosine, divided by `|b|`.
    pub residual: f64,
}

impl FringeResult {
    /// Contrast `𝒞 = |b|/a`.
    pub fn contrast(&self) -> f64 {
        self.amplitude_b.abs() / self.offset_a
    }

    /// Visibility and phase relative to the laser-off reference `reference`.
    pub fn normalized_by(&self, reference: &FringeResult) -> Result<FringeResult> {
        let c0 = reference.contrast();
        if !(c0 > 0.0) {
            return Err(Error::Degenerate("reference fringe has zero contrast".into()));
        }
        let rel = self.contrast() / c0;
        let phase = match (self.phase_rad, reference.phase_rad) {
            (Some(p), Some(p0)) => Some(wrap_phase(p - p0)),
            _ => None,
        };
        Ok(FringeResult { visibility: rel, relative_contrast: rel, phase_rad: phase, ..*self })
    }
}

/// Least-squares cosine at the grating frequency: `a` is the mean and
/// `b·e^{iφ}` the complex Fourier projection.
pub fn fit_fringe(scan: &FluxScan, period: f64) -> Result<FringeResult> {
    let n = scan.dx3_values.len();
    if n != scan.flux_values.len() || n < 4 {
        return Err(contract("flux scan arrays are too short or differ in length"));
    }
    let step = scan.dx3_values[1] - scan.dx3_values[0];
    if !(step > 0.0) || scan.dx3_values.windows(2).any(|w| ((w[1] - w[0]) - step).abs() > 1e-9 * step) {
        return Err(contract("flux scan must be uniformly spaced"));
    }
    let span = step * n as f64 / period;
    if (span - span.round()).abs() > 1e-6 || span.round() < 2.0 {
        return Err(contract(format!("flux scan spans {span} periods; need an integer >= 2")));
    }
    let a = scan.flux_values.iter().sum::<f64>() / n as f64;
    if !(a.abs() > 0.0) {
        return Err(Error::Degenerate("flux scan has zero mean".into()));
    }
    let z: Complex64 = scan
        .dx3_values
        .iter()
        .zip(&scan.flux_values)
        .map(|(&x, &f)| Complex64::cis(-2.0 * PI * x / period) * f)
        .sum::<Complex64>()
        * (2.0 / n as f64);
    let b = if z.norm() > 1e-12 * a.abs() { z.norm() } else { 0.0 };
    let phase = (b > 0.0).then(|| z.arg());
    let rms = (scan
        .dx3_values
        .iter()
        .zip(&scan.flux_values)
        .map(|(&x, &f)| {
            let fit = a + b * (2.0 * PI * x / period + phase.unwrap_or(0.0)).cos();
            (f - fit) * (f - fit)
        })
        .sum::<f64>()
        / n as f64)
        .sqrt();
    let contrast = b / a;
    Ok(FringeResult {
        offset_a: a,
        amplitude_b: b,
        visibility: contrast,
        phase_rad: phase,
        relative_contrast: contrast,
        residual: if b > 0.0 { rms / b } else { 0.0 },
    })
}

/// Fit obtained for one momentum transfer `Δk_x` with its quadrature weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KickSample {
    pub delta_kx: f64,
    pub weight: f64,
    pub fit: FringeResult,
}

/// What the ensemble average is built from.
#[derive(Debug, Clone, Copy)]
pub enum EnsembleInput<'a> {
    /// Fringe constants `(a, b)` shared by every `Δk_x`; `I` comes from quadrature.
    Analytic { offset_a: f64, amplitude_b: f64 },
    /// Per-`Δk_x` fits and the laser-off reference they are measured against.
    Scans { samples: &'a [KickSample], reference: &'a FringeResult },
}

/// Averages the fringe over `P(Δk_x)`.
///
/// For scans the combined fringe is `Σ w P a_j + Σ w P b_j cos(θ + φ_j)`,
/// reported relative to the reference. The weights `w` are the quadrature
/// weights attached to the samples; a point mass picks its own node.
pub fn ensemble_fringe(
    input: EnsembleInput<'_>,
    dist: &MomentumTransferDistribution,
    d_p: f64,
) -> Result<FringeResult> {
    let mass = dist.total_mass()?;
    if (mass - 1.0).abs() > 1e-6 {
        return Err(contract(format!("distribution integrates to {mass}, not 1")));
    }
    match input {
        EnsembleInput::Analytic { offset_a, amplitude_b } => {
            let vp = dist.numeric_visibility_phase(d_p)?;
            Ok(FringeResult {
                offset_a,
                amplitude_b: amplitude_b * vp.visibility,
                visibility: vp.visibility,
                phase_rad: Some(vp.phase_rad),
                relative_contrast: vp.visibility,
                residual: 0.0,
            })
        }
        EnsembleInput::Scans { samples, reference } => {
            let weighted = ensemble_weights(samples, dist)?;
            let mut a = 0.0;
            let mut b = Complex64::new(0.0, 0.0);
            let mut residual = 0.0;
            for (s, w) in samples.iter().zip(&weighted) {
                a += w * s.fit.offset_a;
                b += Complex64::from_polar(w * s.fit.amplitude_b, s.fit.phase_rad.unwrap_or(0.0));
                residual += w * s.fit.residual;
            }
            let raw = FringeResult {
                offset_a: a,
                amplitude_b: b.norm(),
                visibility: b.norm() / a,
                phase_rad: (b.norm() > 1e-12 * a.abs()).then(|| b.arg()),
                relative_contrast: b.norm() / a,
                residual,
            };
            raw.normalized_by(reference)
        }
    }
}

/// Normalised `w_j P(Δk_j)` for scanned samples.
fn ensemble_weights(samples: &[KickSample], dist: &MomentumTransferDistribution) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(contract("no kick samples to average"));
    }
    if let crate::distributions::DistributionKind::Delta { k_delta } = dist.kind() {
        let target = k_delta * dist.k_i();
        let hit = samples
            .iter()
            .position(|s| (s.delta_kx - target).abs() <= 1e-9 * dist.k_i())
            .ok_or_else(|| contract("no kick sample at the point-mass position"))?;
        return Ok((0..samples.len()).map(|j| if j == hit { 1.0 } else { 0.0 }).collect());
    }
    let raw: Vec<f64> = samples
        .iter()
        .map(|s| Ok(s.weight * dist.pdf(s.delta_kx)?))
        .collect::<Result<_>>()?;
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Degenerate("kick samples carry no probability".into()));
    }
    Ok(raw.into_iter().map(|w| w / total).collect())
}
