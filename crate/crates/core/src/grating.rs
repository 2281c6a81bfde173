//! Beam, photon and grating configuration, derived lengths, and the G1
//! transmission profile.

use std::f64::consts::PI;

use crate::error::{config, Result};
use crate::grid::SpatialGrid;
use crate::propagation::{MomentumSpectrum, TransverseState};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Mass of a sodium-23 atom, kg.
pub const SODIUM_MASS: f64 = 22.989_769_28 * 1.660_539_066_60e-27;

/// Longitudinal atomic plane wave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSpec {
    pub speed: f64,
    pub wavenumber_k: f64,
    pub de_broglie_wavelength: f64,
}

impl BeamSpec {
    /// Beam of atoms of mass `mass` moving at `speed`.
    pub fn from_speed(speed: f64, mass: f64) -> Result<Self> {
        if !(speed.is_finite() && speed > 0.0) {
            return Err(config(format!("speed must be positive, got {speed}")));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(config(format!("atomic mass must be positive, got {mass}")));
        }
        Self::from_wavenumber(mass * speed / HBAR, mass)
    }

    /// Beam with a prescribed longitudinal wavenumber.
    pub fn from_wavenumber(wavenumber_k: f64, mass: f64) -> Result<Self> {
        if !(wavenumber_k.is_finite() && wavenumber_k > 0.0) {
            return Err(config(format!("wavenumber k must be positive, got {wavenumber_k}")));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(config(format!("atomic mass must be positive, got {mass}")));
        }
        Ok(Self {
            speed: HBAR * wavenumber_k / mass,
            wavenumber_k,
            de_broglie_wavelength: 2.0 * PI / wavenumber_k,
        })
    }
}

/// The scattered photon, characterised by its wavelength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonSpec {
    pub wavelength_i: f64,
    pub wavenumber_i: f64,
}

impl PhotonSpec {
    pub fn from_wavelength(wavelength_i: f64) -> Result<Self> {
        if !(wavelength_i.is_finite() && wavelength_i > 0.0) {
            return Err(config(format!("photon wavelength must be positive, got {wavelength_i}")));
        }
        Ok(Self { wavelength_i, wavenumber_i: 2.0 * PI / wavelength_i })
    }
}

/// A Ronchi grating: `illuminated_slits_n` windows of width `open_width_delta`
/// repeated with period `period_dg`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GratingSpec {
    pub period_dg: f64,
    pub open_width_delta: f64,
    pub illuminated_slits_n: usize,
}

impl GratingSpec {
    pub fn new(period_dg: f64, open_width_delta: f64, illuminated_slits_n: usize) -> Result<Self> {
        if !(period_dg.is_finite() && period_dg > 0.0) {
            return Err(config(format!("grating period must be positive, got {period_dg}")));
        }
        if !(open_width_delta.is_finite() && open_width_delta > 0.0 && open_width_delta <= period_dg) {
            return Err(config(format!(
                "slit width must lie in (0, period], got {open_width_delta} for period {period_dg}"
            )));
        }
        if illuminated_slits_n == 0 {
            return Err(config("at least one illuminated slit is required"));
        }
        Ok(Self { period_dg, open_width_delta, illuminated_slits_n })
    }

    /// Same period and slit width, with as many slits as fit in `extent` while
    /// keeping the slit lattice of `self`.
    pub fn covering(&self, extent: f64) -> Result<Self> {
        let mut n = (extent / self.period_dg * (1.0 + 1e-12)).floor() as usize;
        if n % 2 != self.illuminated_slits_n % 2 {
            n = n.saturating_sub(1);
        }
        Self::new(self.period_dg, self.open_width_delta, n)
    }

    pub fn duty_cycle(&self) -> f64 {
        self.open_width_delta / self.period_dg
    }

    pub fn illuminated_width(&self) -> f64 {
        self.illuminated_slits_n as f64 * self.period_dg
    }

    /// Centre of slit `j`, for `j` in `0..n`.
    pub fn slit_center(&self, j: usize) -> f64 {
        (j as f64 - 0.5 * (self.illuminated_slits_n as f64 - 1.0)) * self.period_dg
    }

    /// Position of one slit centre of the (infinite) lattice this grating
    /// belongs to: `0` for odd slit counts, `d_g/2` for even ones.
    pub fn lattice_offset(&self) -> f64 {
        if self.illuminated_slits_n % 2 == 0 {
            0.5 * self.period_dg
        } else {
            0.0
        }
    }
}

/// Distances along the beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub y12: f64,
    pub y23: f64,
    pub y_prime_12: f64,
}

impl Geometry {
    pub fn new(y12: f64, y23: f64, y_prime_12: f64) -> Result<Self> {
        if !(y12.is_finite() && y12 > 0.0) {
            return Err(config(format!("y12 must be positive, got {y12}")));
        }
        if !(y23.is_finite() && y23 > 0.0) {
            return Err(config(format!("y23 must be positive, got {y23}")));
        }
        if !(y_prime_12.is_finite() && (0.0..=y12).contains(&y_prime_12)) {
            return Err(config(format!("y_prime_12 must lie in [0, y12], got {y_prime_12}")));
        }
        Ok(Self { y12, y23, y_prime_12 })
    }

    pub fn with_kick_at(&self, y_prime_12: f64) -> Result<Self> {
        Self::new(self.y12, self.y23, y_prime_12)
    }
}

/// Lengths that follow from a configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedQuantities {
    /// Relative displacement of the two arms at the kick plane.
    pub d_p: f64,
    pub talbot_length: f64,
    pub dp_over_lambda_i: f64,
}

pub fn derived_quantities(
    beam: &BeamSpec,
    photon: &PhotonSpec,
    grating: &GratingSpec,
    geom: &Geometry,
) -> DerivedQuantities {
    let d_p = arm_separation(beam, grating, geom.y_prime_12);
    DerivedQuantities {
        d_p,
        talbot_length: talbot_length(beam, grating),
        dp_over_lambda_i: d_p / photon.wavelength_i,
    }
}

/// `d_p = 2π y′ / (k d_g)`.
pub fn arm_separation(beam: &BeamSpec, grating: &GratingSpec, y_prime_12: f64) -> f64 {
    2.0 * PI / (beam.wavenumber_k * grating.period_dg) * y_prime_12
}

/// Kick distance `y′` giving the arm separation `dp_over_lambda_i · λ_i`.
pub fn kick_distance_for(
    dp_over_lambda_i: f64,
    beam: &BeamSpec,
    photon: &PhotonSpec,
    grating: &GratingSpec,
) -> f64 {
    dp_over_lambda_i * photon.wavelength_i * beam.wavenumber_k * grating.period_dg / (2.0 * PI)
}

pub fn talbot_length(beam: &BeamSpec, grating: &GratingSpec) -> f64 {
    2.0 * grating.period_dg * grating.period_dg / beam.de_broglie_wavelength
}

/// A complete apparatus description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Apparatus {
    pub beam: BeamSpec,
    pub photon: PhotonSpec,
    pub grating: GratingSpec,
    pub geometry: Geometry,
}

impl Apparatus {
    /// Sodium beam with `k = 5.09067e11 m⁻¹`, 589 nm photons, 200 nm gratings
    /// with 100 nm slits, 24 illuminated slits, 0.65 m between gratings.
    pub fn reference() -> Self {
        Self {
            beam: BeamSpec::from_wavenumber(5.09067e11, SODIUM_MASS).expect("valid beam"),
            photon: PhotonSpec::from_wavelength(589e-9).expect("valid photon"),
            grating: GratingSpec::new(200e-9, 100e-9, 24).expect("valid grating"),
            geometry: Geometry::new(0.65, 0.65, 0.0).expect("valid geometry"),
        }
    }

    pub fn derived(&self) -> DerivedQuantities {
        derived_quantities(&self.beam, &self.photon, &self.grating, &self.geometry)
    }
}

/// Binary transmission sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionProfile {
    samples: Vec<f64>,
    grid: SpatialGrid,
    grating: Option<GratingSpec>,
}

impl TransmissionProfile {
    /// Profile that is fully open (`true`) or fully closed everywhere.
    pub fn uniform(grid: SpatialGrid, open: bool) -> Self {
        let v = if open { 1.0 } else { 0.0 };
        Self { samples: vec![v; grid.len()], grid, grating: None }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn grid_spacing(&self) -> f64 {
        self.grid.spacing()
    }

    pub fn grid_origin(&self) -> f64 {
        self.grid.origin()
    }

    pub fn grating(&self) -> Option<&GratingSpec> {
        self.grating.as_ref()
    }

    /// Mean transmission over the illuminated span `|x| < n·d_g/2`.
    pub fn open_fraction(&self) -> f64 {
        let half = match &self.grating {
            Some(g) => 0.5 * g.illuminated_width(),
            None => 0.5 * self.grid.extent(),
        };
        let (mut open, mut total) = (0.0, 0.0);
        for (i, &t) in self.samples.iter().enumerate() {
            if self.grid.x(i).abs() < half {
                open += t;
                total += 1.0;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            open / total
        }
    }
}

/// Samples a Ronchi profile: open on `[c_j − δ/2, c_j + δ/2)` around each of
/// the `n` slit centres, closed elsewhere.
pub fn build_transmission(grating: &GratingSpec, grid: &SpatialGrid) -> Result<TransmissionProfile> {
    let dx = grid.spacing();
    if dx > grating.open_width_delta / 16.0 * (1.0 + 1e-9) {
        return Err(config(format!(
            "grid spacing {dx} exceeds delta/16 = {}",
            grating.open_width_delta / 16.0
        )));
    }
    if grid.extent() < grating.illuminated_width() * (1.0 - 1e-9) {
        return Err(config(format!(
            "grid extent {} does not cover the {} illuminated slits ({} m)",
            grid.extent(),
            grating.illuminated_slits_n,
            grating.illuminated_width()
        )));
    }
    let n = grating.illuminated_slits_n;
    let half_open = 0.5 * grating.open_width_delta;
    let tol = 1e-9 * dx;
    let first = grating.slit_center(0);
    let samples = (0..grid.len())
        .map(|i| {
            let x = grid.x(i);
            let j = ((x - first) / grating.period_dg).round();
            if j < 0.0 || j > (n - 1) as f64 {
                return 0.0;
            }
            let rel = x - grating.slit_center(j as usize);
            if rel >= -half_open - tol && rel < half_open - tol {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Ok(TransmissionProfile { samples, grid: *grid, grating: Some(*grating) })
}

/// Transverse shape of the beam arriving at G1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IncidentEnvelope {
    /// Uniform over the `n` illuminated slits.
    #[default]
    TopHat,
    /// Uniform core with cosine-squared edges one period wide.
    RaisedCosine,
}

impl IncidentEnvelope {
    pub fn sample(&self, grating: &GratingSpec, grid: &SpatialGrid) -> Vec<f64> {
        let half = 0.5 * grating.illuminated_width();
        let d = grating.period_dg;
        grid.positions()
            .into_iter()
            .map(|x| match self {
                IncidentEnvelope::TopHat => {
                    if x.abs() <= half {
                        1.0
                    } else {
                        0.0
                    }
                }
                IncidentEnvelope::RaisedCosine => {
                    let r = x.abs() - (half - 0.5 * d);
                    if r <= 0.0 {
                        1.0
                    } else if r < d {
                        0.5 * (1.0 + (PI * r / d).cos())
                    } else {
                        0.0
                    }
                }
            })
            .collect()
    }
}

/// Wavefunction just behind G1: `T(x)·ψ_inc(x)` at `y = 0`.
pub fn exit_state(profile: &TransmissionProfile, incident: &[f64]) -> Result<TransverseState> {
    if incident.len() != profile.samples.len() {
        return Err(config(format!(
            "incident envelope has {} samples, grid has {}",
            incident.len(),
            profile.samples.len()
        )));
    }
    let psi = profile
        .samples
        .iter()
        .zip(incident)
        .map(|(&t, &e)| num_complex::Complex64::new(t * e, 0.0))
        .collect();
    TransverseState::new(profile.grid, psi, 0.0)
}

/// Momentum spectrum of the G1 exit wave.
pub fn initial_spectrum(profile: &TransmissionProfile, incident: &[f64]) -> Result<MomentumSpectrum> {
    Ok(exit_state(profile, incident)?.spectrum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_grid(extent: f64) -> SpatialGrid {
        SpatialGrid::new(200e-9 / 32.0, extent).unwrap()
    }

    #[test]
    fn paper_grating_has_24_windows_at_half_duty() {
        let g = GratingSpec::new(200e-9, 100e-9, 24).unwrap();
        let grid = reference_grid(19.2e-6);
        let t = build_transmission(&g, &grid).unwrap();
        let s = t.samples();
        let rising = (1..s.len()).filter(|&i| s[i] == 1.0 && s[i - 1] == 0.0).count();
        assert_eq!(rising, 24);
        assert_eq!(s.iter().sum::<f64>(), 24.0 * 16.0);
        assert!((t.open_fraction() - 0.5).abs() < 1.0 / 32.0);
    }

    #[test]
    fn single_fully_open_slit() {
        let g = GratingSpec::new(200e-9, 200e-9, 1).unwrap();
        let grid = SpatialGrid::new(200e-9 / 16.0, 200e-9).unwrap();
        let t = build_transmission(&g, &grid).unwrap();
        assert!(t.samples().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn profile_is_symmetric() {
        for n in [1usize, 2, 7, 24] {
            let g = GratingSpec::new(200e-9, 100e-9, n).unwrap();
            let grid = reference_grid(40e-6);
            let s = build_transmission(&g, &grid).unwrap().samples().to_vec();
            let len = s.len();
            for i in 0..len {
                assert_eq!(s[i], s[len - 1 - i], "n = {n}, i = {i}");
            }
        }
    }

    #[test]
    fn resolution_and_coverage_are_checked() {
        let g = GratingSpec::new(200e-9, 100e-9, 24).unwrap();
        let coarse = SpatialGrid::new(100e-9 / 8.0, 20e-6).unwrap();
        assert!(build_transmission(&g, &coarse).is_err());
        let narrow = reference_grid(4.0e-6);
        assert!(build_transmission(&g, &narrow).is_err());
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(GratingSpec::new(200e-9, 300e-9, 2).is_err());
        assert!(GratingSpec::new(200e-9, 100e-9, 0).is_err());
        assert!(Geometry::new(0.65, 0.65, 0.7).is_err());
        assert!(Geometry::new(0.0, 0.65, 0.0).is_err());
        assert!(BeamSpec::from_speed(-1.0, SODIUM_MASS).is_err());
        assert!(PhotonSpec::from_wavelength(0.0).is_err());
    }

    #[test]
    fn reference_talbot_length() {
        let a = Apparatus::reference();
        let d = a.derived();
        assert!((d.talbot_length - 6.48e-3).abs() < 0.005e-3);
        assert_eq!(d.d_p, 0.0);
    }

    #[test]
    fn reference_kick_distance_for_two_wavelengths() {
        let a = Apparatus::reference();
        let geom = a.geometry.with_kick_at(19.09e-3).unwrap();
        let d = derived_quantities(&a.beam, &a.photon, &a.grating, &geom);
        assert!((d.dp_over_lambda_i - 2.0).abs() < 0.01);
        let y = kick_distance_for(2.0, &a.beam, &a.photon, &a.grating);
        assert!((y - 19.09e-3).abs() < 0.01e-3);
    }

    #[test]
    fn beam_wavelength_consistent() {
        let b = BeamSpec::from_speed(1400.0, SODIUM_MASS).unwrap();
        let rel = (b.wavenumber_k * b.de_broglie_wavelength / (2.0 * PI) - 1.0).abs();
        assert!(rel < 1e-12);
        let p = PhotonSpec::from_wavelength(589e-9).unwrap();
        assert!((p.wavenumber_i * p.wavelength_i / (2.0 * PI) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn covering_keeps_lattice() {
        let g = GratingSpec::new(200e-9, 100e-9, 24).unwrap();
        let c = g.covering(3.2768e-3).unwrap();
        assert_eq!(c.illuminated_slits_n % 2, 0);
        assert!(c.illuminated_width() <= 3.2768e-3);
        assert_eq!(c.lattice_offset(), g.lattice_offset());
        let odd = GratingSpec::new(200e-9, 100e-9, 3).unwrap().covering(1e-6).unwrap();
        assert_eq!(odd.illuminated_slits_n, 5);
    }

    #[test]
    fn envelope_shapes() {
        let g = GratingSpec::new(200e-9, 100e-9, 4).unwrap();
        let grid = reference_grid(2e-6);
        let top = IncidentEnvelope::TopHat.sample(&g, &grid);
        let soft = IncidentEnvelope::RaisedCosine.sample(&g, &grid);
        assert_eq!(top.iter().sum::<f64>(), 128.0);
        assert!(soft.iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert_eq!(soft[grid.len() / 2], 1.0);
    }
}
