//! Momentum-transfer distributions `P(Δk_x)` on `[0, 2k_i]` and the
//! visibility/phase they imprint on the fringes.
//!
//! Every distribution is parametrised in units of the photon wavenumber
//! `k_i`: with `s = Δk_x / k_i ∈ [0, 2]` and `x = k_i d_p`, the complex
//! fringe factor is `I = ∫ P e^{iΔk_x d_p} dΔk_x = ∫₀² ρ(s) e^{isx} ds`
//! where `ρ(s) = k_i P(s k_i)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::erf::{complex_erf, faddeeva_w, real_erf};
use crate::error::{config, contract, domain, Error, Result};
use crate::quadrature::{trapezoid_weights, AdaptiveSimpson};
use crate::unwrap::{unwrap_phases, wrap_phase};

/// Sampled density on an arbitrary ascending grid of `Δk_x / k_i`,
/// renormalised so that its trapezoid integral is one.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedDensity {
    nodes: Vec<f64>,
    density: Vec<f64>,
    weights: Vec<f64>,
}

impl TabulatedDensity {
    pub fn new(nodes: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        if nodes.len() != density.len() {
            return Err(config("tabulated density: node and value counts differ"));
        }
        if nodes.len() < 2 {
            return Err(config("tabulated density needs at least two samples"));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(config("tabulated density nodes must be strictly ascending"));
        }
        if nodes[0] < 0.0 || nodes[nodes.len() - 1] > 2.0 || nodes.iter().any(|v| !v.is_finite()) {
            return Err(config("tabulated density nodes must lie in [0, 2]"));
        }
        if density.iter().any(|&d| !(d.is_finite() && d >= 0.0)) {
            return Err(config("tabulated density values must be finite and >= 0"));
        }
        let weights = trapezoid_weights(&nodes);
        let mass: f64 = weights.iter().zip(&density).map(|(w, d)| w * d).sum();
        if !(mass > 0.0) {
            return Err(config("tabulated density has zero mass"));
        }
        let density = density.into_iter().map(|d| d / mass).collect();
        Ok(Self { nodes, density, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    /// Linear interpolation in `s`; zero outside the tabulated range.
    pub fn value(&self, s: f64) -> f64 {
        let n = self.nodes.len();
        if s < self.nodes[0] || s > self.nodes[n - 1] {
            return 0.0;
        }
        let j = self.nodes.partition_point(|&v| v <= s).clamp(1, n - 1);
        let (x0, x1) = (self.nodes[j - 1], self.nodes[j]);
        let t = (s - x0) / (x1 - x0);
        self.density[j - 1] * (1.0 - t) + self.density[j] * t
    }

    fn integral(&self, x: f64) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.density)
            .zip(&self.weights)
            .map(|((&s, &d), &w)| Complex64::cis(s * x) * (d * w))
            .sum()
    }
}

/// Functional form of the distribution. Positions and widths are in units of `k_i`.
#[derive(Debug, Clone, PartialEq)]
pub enum DistributionKind {
    /// `P₀ = (3/8k_i)[1 + (1 − Δk_x/k_i)²]`.
    Mandel,
    /// Gaussian of width `n` peaked at the edge `η = 0`, or mirrored to `η = 2`.
    HalfGaussian { n: f64, eta: f64 },
    /// Gaussian of width `n` centred at `η = 3/2`.
    DisplacedGaussian { n: f64 },
    /// Gaussian of width `n` centred at `η ∈ [0, 2]`.
    GeneralGaussian { n: f64, eta: f64 },
    /// `∝ e^{ε(Δk_x/k_i − 2)}`.
    Exponential { epsilon: f64 },
    /// Flat on `[k1, k2] ⊂ [0, 2]`.
    Uniform { k1: f64, k2: f64 },
    /// Point mass at `k_delta ∈ [0, 2]`.
    Delta { k_delta: f64 },
    Tabulated(TabulatedDensity),
}

/// A normalised momentum-transfer distribution for photons of wavenumber `k_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumTransferDistribution {
    kind: DistributionKind,
    k_i: f64,
}

/// Visibility and phase of the fringe factor `I = amplitude·e^{i·phase}`.
///
/// `amplitude` carries the sign of closed forms that are real up to a
/// linear phase (Mandel, uniform); `visibility = |amplitude|` clamped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilityPhase {
    pub visibility: f64,
    pub phase_rad: f64,
    pub amplitude: f64,
}

impl VisibilityPhase {
    fn from_amplitude(amplitude: f64, phase: f64) -> Self {
        Self { visibility: clamp_visibility(amplitude.abs()), phase_rad: wrap_phase(phase), amplitude }
    }

    fn from_integral(i: Complex64) -> Self {
        let v = i.norm();
        Self { visibility: clamp_visibility(v), phase_rad: wrap_phase(i.arg()), amplitude: v }
    }

    /// The complex fringe factor `I`.
    pub fn integral(&self) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.phase_rad)
    }
}

fn clamp_visibility(v: f64) -> f64 {
    if v > 1.0 && v <= 1.0 + 1e-9 {
        1.0
    } else {
        v
    }
}

/// Closed-form or quadrature evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvaluationMode {
    Analytic,
    Numeric,
}

fn check_width(n: f64) -> Result<()> {
    if n.is_finite() && n > 0.0 {
        Ok(())
    } else {
        Err(config(format!("Gaussian width N must be positive, got {n}")))
    }
}

fn check_position(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && (0.0..=2.0).contains(&v) {
        Ok(())
    } else {
        Err(config(format!("{name} must lie in [0, 2] (units of k_i), got {v}")))
    }
}

impl MomentumTransferDistribution {
    pub fn new(kind: DistributionKind, k_i: f64) -> Result<Self> {
        if !(k_i.is_finite() && k_i > 0.0) {
            return Err(config(format!("photon wavenumber must be positive, got {k_i}")));
        }
        match &kind {
            DistributionKind::Mandel | DistributionKind::Tabulated(_) => {}
            DistributionKind::HalfGaussian { n, eta } => {
                check_width(*n)?;
                if *eta != 0.0 && *eta != 2.0 {
                    return Err(config(format!("half-Gaussian eta must be 0 or 2, got {eta}")));
                }
            }
            DistributionKind::DisplacedGaussian { n } => check_width(*n)?,
            DistributionKind::GeneralGaussian { n, eta } => {
                check_width(*n)?;
                check_position("eta", *eta)?;
            }
            DistributionKind::Exponential { epsilon } => {
                if !(epsilon.is_finite() && *epsilon > 0.0) {
                    return Err(config(format!("epsilon must be positive, got {epsilon}")));
                }
            }
            DistributionKind::Uniform { k1, k2 } => {
                check_position("k1", *k1)?;
                check_position("k2", *k2)?;
                if !(k2 > k1) {
                    return Err(config(format!("uniform range needs k1 < k2, got [{k1}, {k2}]")));
                }
            }
            DistributionKind::Delta { k_delta } => check_position("k_delta", *k_delta)?,
        }
        Ok(Self { kind, k_i })
    }

    pub fn mandel(k_i: f64) -> Result<Self> {
        Self::new(DistributionKind::Mandel, k_i)
    }

    pub fn half_gaussian(n: f64, eta: f64, k_i: f64) -> Result<Self> {
        Self::new(DistributionKind::HalfGaussian { n, eta }, k_i)
    }

    pub fn displaced_gaussian(n: f64, k_i: f64) -> Result<Self> {
        Self::new(DistributionKind::DisplacedGaussian { n }, k_i)
    }

    pub fn general_gaussian(n: f64, eta: f64, k_i: f64) -> Result<Self> {
        Self::new(DistributionKind::GeneralGaussian { n, eta }, k_i)
    }

    pub fn exponential(epsilon: f64, k_i: f64) -> Result<Self> {
        Self::new(DistributionKind::Exponential { epsilon }, k_i)
    }

    pub fn uniform(k1: f64, k2: f64, k_i: f64) -> Result<Self> {
        Self::new(DistributionKind::Uniform { k1, k2 }, k_i)
    }

    pub fn delta(k_delta: f64, k_i: f64) -> Result<Self> {
        Self::new(DistributionKind::Delta { k_delta }, k_i)
    }

    pub fn tabulated(table: TabulatedDensity, k_i: f64) -> Result<Self> {
        Self::new(DistributionKind::Tabulated(table), k_i)
    }

    pub fn kind(&self) -> &DistributionKind {
        &self.kind
    }

    pub fn k_i(&self) -> f64 {
        self.k_i
    }

    pub fn is_point_mass(&self) -> bool {
        matches!(self.kind, DistributionKind::Delta { .. })
    }

    /// Interval in `s = Δk_x / k_i` outside which the density vanishes.
    pub fn support(&self) -> (f64, f64) {
        match &self.kind {
            DistributionKind::Uniform { k1, k2 } => (*k1, *k2),
            DistributionKind::Delta { k_delta } => (*k_delta, *k_delta),
            DistributionKind::Tabulated(t) => (t.nodes[0], t.nodes[t.nodes.len() - 1]),
            _ => (0.0, 2.0),
        }
    }

    /// Centre `η` and width `N` of the Gaussian variants.
    fn gaussian_parameters(&self) -> Option<(f64, f64)> {
        match self.kind {
            DistributionKind::HalfGaussian { n, eta } | DistributionKind::GeneralGaussian { n, eta } => Some((eta, n)),
            DistributionKind::DisplacedGaussian { n } => Some((1.5, n)),
            _ => None,
        }
    }

    /// Dimensionless density `ρ(s) = k_i P(s k_i)`; the point mass has none.
    pub fn scaled_density(&self, s: f64) -> Result<f64> {
        if !(s.is_finite() && (-1e-12..=2.0 + 1e-12).contains(&s)) {
            return Err(domain(format!("delta_kx / k_i = {s} lies outside [0, 2]")));
        }
        if let Some((eta, n)) = self.gaussian_parameters() {
            let (pp, pm) = ((2.0 - eta) / n, eta / n);
            let gamma = 2.0 / (PI.sqrt() * n) / (real_erf(pp) + real_erf(pm));
            let u = (s - eta) / n;
            return Ok(gamma * (-u * u).exp());
        }
        Ok(match &self.kind {
            DistributionKind::Mandel => 0.375 * (1.0 + (1.0 - s) * (1.0 - s)),
            DistributionKind::Exponential { epsilon } => {
                epsilon / -(-2.0 * epsilon).exp_m1() * (epsilon * (s - 2.0)).exp()
            }
            DistributionKind::Uniform { k1, k2 } => {
                if s >= *k1 && s <= *k2 {
                    1.0 / (k2 - k1)
                } else {
                    0.0
                }
            }
            DistributionKind::Delta { .. } => {
                return Err(Error::Unsupported("a point mass has no density value".into()))
            }
            DistributionKind::Tabulated(t) => t.value(s),
            _ => unreachable!("Gaussian variants handled above"),
        })
    }

    /// `P(Δk_x)` in m (density per unit wavenumber).
    pub fn pdf(&self, delta_kx: f64) -> Result<f64> {
        let s = delta_kx / self.k_i;
        if !(s.is_finite() && (0.0..=2.0).contains(&s)) {
            return Err(domain(format!(
                "delta_kx = {delta_kx} lies outside [0, 2k_i] = [0, {}]",
                2.0 * self.k_i
            )));
        }
        Ok(self.scaled_density(s)? / self.k_i)
    }

    /// `∫P dΔk_x` over `[0, 2k_i]`.
    pub fn total_mass(&self) -> Result<f64> {
        match &self.kind {
            DistributionKind::Delta { .. } => Ok(1.0),
            DistributionKind::Tabulated(t) => Ok(t.weights.iter().zip(&t.density).map(|(w, d)| w * d).sum()),
            _ => Ok(self.quadrature_integral(0.0)?.re),
        }
    }

    fn quadrature_integral(&self, x: f64) -> Result<Complex64> {
        let (lo, hi) = self.support();
        let q = AdaptiveSimpson::default().integrate(
            |s| Complex64::cis(s * x) * self.scaled_density(s).unwrap_or(0.0),
            lo,
            hi,
        )?;
        Ok(q.value)
    }

    /// Closed-form visibility and phase.
    pub fn analytic_visibility_phase(&self, d_p: f64) -> Result<VisibilityPhase> {
        check_separation(d_p)?;
        let x = self.k_i * d_p;
        match &self.kind {
            DistributionKind::Mandel => Ok(VisibilityPhase::from_amplitude(mandel_amplitude(x), x)),
            DistributionKind::Uniform { k1, k2 } => {
                Ok(VisibilityPhase::from_amplitude(sinc(0.5 * (k2 - k1) * x), 0.5 * (k1 + k2) * x))
            }
            DistributionKind::Delta { k_delta } => Ok(VisibilityPhase::from_amplitude(1.0, k_delta * x)),
            DistributionKind::Exponential { epsilon } => {
                let (v, phi) = exponential_closed_form(*epsilon, x);
                Ok(VisibilityPhase::from_amplitude(v, phi))
            }
            DistributionKind::HalfGaussian { n, eta } => {
                Ok(VisibilityPhase::from_integral(gaussian_integral_erf(*n, *eta, x)?))
            }
            DistributionKind::DisplacedGaussian { n } => {
                Ok(VisibilityPhase::from_integral(gaussian_integral_erf(*n, 1.5, x)?))
            }
            DistributionKind::GeneralGaussian { n, eta } => {
                Ok(VisibilityPhase::from_integral(gaussian_integral(*n, *eta, x)))
            }
            DistributionKind::Tabulated(_) => Err(Error::Unsupported(
                "tabulated distributions have no closed form; use the numeric path".into(),
            )),
        }
    }

    /// Visibility and phase from `I` evaluated by quadrature (symbolically for
    /// the point mass, by the trapezoid rule for tabulated data).
    pub fn numeric_visibility_phase(&self, d_p: f64) -> Result<VisibilityPhase> {
        check_separation(d_p)?;
        let x = self.k_i * d_p;
        let i = match &self.kind {
            DistributionKind::Delta { k_delta } => Complex64::cis(k_delta * x),
            DistributionKind::Tabulated(t) => t.integral(x),
            _ => self.quadrature_integral(x)?,
        };
        Ok(VisibilityPhase::from_integral(i))
    }

    pub fn visibility_phase(&self, d_p: f64, mode: EvaluationMode) -> Result<VisibilityPhase> {
        match mode {
            EvaluationMode::Analytic => self.analytic_visibility_phase(d_p),
            EvaluationMode::Numeric => self.numeric_visibility_phase(d_p),
        }
    }
}

fn check_separation(d_p: f64) -> Result<()> {
    if d_p.is_finite() && d_p >= 0.0 {
        Ok(())
    } else {
        Err(contract(format!("arm separation must be >= 0, got {d_p}")))
    }
}

pub fn evaluate_pdf(dist: &MomentumTransferDistribution, delta_kx: f64) -> Result<f64> {
    dist.pdf(delta_kx)
}

pub fn analytic_visibility_phase(dist: &MomentumTransferDistribution, d_p: f64) -> Result<VisibilityPhase> {
    dist.analytic_visibility_phase(d_p)
}

pub fn numeric_visibility_phase(dist: &MomentumTransferDistribution, d_p: f64) -> Result<VisibilityPhase> {
    dist.numeric_visibility_phase(d_p)
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `(3/2x)[(1 − 1/x²) sin x + cos x / x]`, written as
/// `(3/2)[sin x / x − (sin x − x cos x)/x³]` with a series for small `x`.
fn mandel_amplitude(x: f64) -> f64 {
    let g = if x.abs() < 0.5 {
        // (sin x − x cos x)/x³ = Σ_{n≥1} (−1)^{n+1} 2n x^{2n−2} / (2n+1)!
        let x2 = x * x;
        let mut term = 1.0 / 3.0;
        let mut sum = term;
        for n in 2..12 {
            let nf = n as f64;
            term *= -x2 * nf / ((nf - 1.0) * (2.0 * nf) * (2.0 * nf + 1.0));
            sum += term;
        }
        sum
    } else {
        (x.sin() - x * x.cos()) / (x * x * x)
    };
    1.5 * (sinc(x) - g)
}

/// Visibility and phase of the increasing exponential.
fn exponential_closed_form(epsilon: f64, x: f64) -> (f64, f64) {
    let e2 = (-2.0 * epsilon).exp();
    let pref = epsilon / -(-2.0 * epsilon).exp_m1();
    let num = (1.0 + e2 * e2 - 2.0 * e2 * (2.0 * x).cos()).max(0.0).sqrt();
    let v = pref * num / (epsilon * epsilon + x * x).sqrt();
    let phi = ((2.0 * x).sin()).atan2((2.0 * x).cos() - e2) - x.atan2(epsilon);
    (v, phi)
}

/// Gaussian fringe factor from the error functions of `u± `:
/// `I = [erf(u₊) + erf(u₋)] / [erf(φ₊) + erf(φ₋)] · e^{−α²/4 + iηx}`.
pub fn gaussian_integral_erf(n: f64, eta: f64, x: f64) -> Result<Complex64> {
    let alpha = n * x;
    let (pp, pm) = ((2.0 - eta) / n, eta / n);
    let up = Complex64::new(pp, -0.5 * alpha);
    let um = Complex64::new(pm, 0.5 * alpha);
    let num = complex_erf(up)? + complex_erf(um)?;
    let den = real_erf(pp) + real_erf(pm);
    Ok(num / den * Complex64::from_polar((-0.25 * alpha * alpha).exp(), eta * x))
}

/// The same fringe factor rearranged through `erfc(u) = e^{−u²}w(iu)` so
/// that only bounded Faddeeva values in the upper half plane appear:
/// `I·D = e^{iηx}[2e^{−α²/4} − e^{−φ₊² + iφ₊α}w(iu₊) − e^{−φ₋² − iφ₋α}w(iu₋)]`.
pub fn gaussian_integral(n: f64, eta: f64, x: f64) -> Complex64 {
    let alpha = n * x;
    let (pp, pm) = ((2.0 - eta) / n, eta / n);
    let wp = faddeeva_w(Complex64::new(0.5 * alpha, pp));
    let wm = faddeeva_w(Complex64::new(-0.5 * alpha, pm));
    let bracket = Complex64::new(2.0 * (-0.25 * alpha * alpha).exp(), 0.0)
        - Complex64::from_polar((-pp * pp).exp(), pp * alpha) * wp
        - Complex64::from_polar((-pm * pm).exp(), -pm * alpha) * wm;
    let den = real_erf(pp) + real_erf(pm);
    bracket / den * Complex64::cis(eta * x)
}

/// Visibility and phase along a sweep of arm separations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VisibilityCurve {
    pub dp_over_lambda_i: Vec<f64>,
    pub visibility: Vec<f64>,
    pub phase_rad: Vec<f64>,
    pub phase_unwrapped: Vec<f64>,
}

impl VisibilityCurve {
    pub fn len(&self) -> usize {
        self.dp_over_lambda_i.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dp_over_lambda_i.is_empty()
    }

    /// Assembles a curve from per-point results, unwrapping the phase.
    pub fn from_points(dp_over_lambda_i: Vec<f64>, points: &[VisibilityPhase]) -> Self {
        let phase_rad: Vec<f64> = points.iter().map(|p| p.phase_rad).collect();
        Self {
            dp_over_lambda_i,
            visibility: points.iter().map(|p| p.visibility).collect(),
            phase_unwrapped: unwrap_phases(&phase_rad),
            phase_rad,
        }
    }
}

/// `points` equally spaced arm separations (in metres) covering
/// `[min, max]·λ_i`.
pub fn dp_grid(min_ratio: f64, max_ratio: f64, points: usize, k_i: f64) -> Vec<f64> {
    let lambda_i = 2.0 * PI / k_i;
    match points {
        0 => Vec::new(),
        1 => vec![min_ratio * lambda_i],
        _ => (0..points)
            .map(|j| {
                let t = j as f64 / (points - 1) as f64;
                (min_ratio + t * (max_ratio - min_ratio)) * lambda_i
            })
            .collect(),
    }
}

/// Evaluates the distribution at every separation in `dp_grid` (ascending,
/// metres) in parallel and unwraps the phase along the sweep.
pub fn sweep_curve(
    dist: &MomentumTransferDistribution,
    dp_grid: &[f64],
    mode: EvaluationMode,
) -> Result<VisibilityCurve> {
    if dp_grid.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(contract("sweep grid must be sorted ascending"));
    }
    let points: Vec<VisibilityPhase> = dp_grid
        .par_iter()
        .map(|&d| dist.visibility_phase(d, mode))
        .collect::<Result<_>>()?;
    let lambda_i = 2.0 * PI / dist.k_i;
    Ok(VisibilityCurve::from_points(dp_grid.iter().map(|d| d / lambda_i).collect(), &points))
}
