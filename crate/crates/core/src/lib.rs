//! Simulation of coherence loss and regain in a three-grating atom
//! interferometer in which each atom scatters one photon between the first
//! two gratings.
//!
//! The crate offers two independent routes to the fringe visibility and
//! phase:
//!
//! * closed forms `I = ∫P(Δk_x)e^{iΔk_x d_p}dΔk_x` for a family of
//!   momentum-transfer distributions ([`distributions`]), and
//! * a wave-propagation pipeline that carries the transverse wavefunction
//!   through the gratings, scans the third grating and fits the fringe
//!   ([`interferometer`]).

pub mod distributions;
pub mod erf;
pub mod error;
pub mod fringe;
pub mod grating;
pub mod grid;
pub mod interferometer;
pub mod propagation;
pub mod quadrature;
pub mod unwrap;

pub use distributions::{
    analytic_visibility_phase, dp_grid, evaluate_pdf, numeric_visibility_phase, sweep_curve, DistributionKind,
    EvaluationMode, MomentumTransferDistribution, TabulatedDensity, VisibilityCurve, VisibilityPhase,
};
pub use erf::{complex_erf, faddeeva_w};
pub use error::{Error, Result};
pub use fringe::{
    ensemble_fringe, fit_fringe, flux_scan, transmitted_flux, EnsembleInput, FluxScan, FluxWindow, FringeResult,
    KickSample, RonchiMask,
};
pub use grating::{
    build_transmission, derived_quantities, exit_state, initial_spectrum, kick_distance_for, Apparatus, BeamSpec,
    DerivedQuantities, Geometry, GratingSpec, IncidentEnvelope, PhotonSpec, TransmissionProfile, HBAR, SODIUM_MASS,
};
pub use grid::SpatialGrid;
pub use interferometer::{talbot_carpet, Carpet, Interferometer, NumericPoint, NumericSweep, PipelineSettings};
pub use propagation::{
    apply_grating, apply_kick, envelope_shift_at, far_field_form, propagate_free, FarField, KickRecord,
    MomentumSpectrum, PropagationKernel, Propagator, TransverseState,
};
pub use unwrap::{unwrap_phases, wrap_phase};
