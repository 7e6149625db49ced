//! Stochastic Ginzburg-Landau dynamics of a thin superconducting ring.
//!
//! The library simulates the order parameter ψ̃(φ, t) of a one-dimensional
//! superconducting ring threaded by the vector potential of a solenoid,
//! in the standard normalized units (length in penetration depths λ, time
//! in ξ²/D, flux in flux quanta Φ_Q = πħ/e). It provides:
//!
//! - [`analytic`]: closed-form single-mode solutions — per-mode rates,
//!   Cooper-pair density ρₙ(t), supercurrent, winding selection — used as
//!   exact oracles for the field engine and for SI-unit estimates.
//! - [`engine`]: the spectral field solver. Exponential time differencing
//!   with an exact per-mode linear propagator, explicit cubic term, and
//!   interpolated additive complex noise.
//! - [`ensemble`]: seeded multi-run orchestration — equilibration times,
//!   ensemble-averaged ring current, radius/flux sweeps, zero-flux
//!   controls, and deliberately under-resolved coarse-grid runs.
//! - [`causal`]: light-travel-time bookkeeping that decides how large the
//!   ring must be for the organized current to form before any signal
//!   from the solenoid could arrive, and where a detector may sit.
//! - [`units`]: physical constants, material presets, and SI ↔ normalized
//!   conversions.
//!
//! Determinism is a hard contract throughout: every stochastic run is
//! driven by a ChaCha8 stream seeded from an explicit 64-bit seed, and
//! ensembles derive per-run seeds with a documented mix so that results
//! are reproducible bit-for-bit across platforms and thread counts.

use thiserror::Error as ThisError;

pub mod analytic;
pub mod causal;
pub mod engine;
pub mod ensemble;
pub mod units;

pub use analytic::{
    classify_mode, from_normalized, lambda_n, london_current, rho_asymptotic, rho_closed_form,
    rho_short_time, supercurrent, winding_selector, AnalyticParams, LondonParams, ModeRegime,
};
pub use causal::{
    detector_window, feasibility_report, light_time_per_lambda, min_radius_for_window,
    CausalScenario, FeasibilityReport,
};
pub use engine::{
    current_profile, init_metastable, mode_amplitude, noise_field, winding_number, CurrentProfile,
    FieldState, Interpolation, NoiseScaling, NoiseSpec, RingConfig, Stepper,
};
pub use ensemble::{
    control_run, coarse_grid_run, derive_point_seed, derive_run_seed, equilibration_time,
    run_ensemble, run_trajectory, sweep, EnsembleStats, EquilibrationResult, JSeriesPoint,
    RunMode, RunRecord, SweepPoint, SweepSpec, Trajectory,
};
pub use units::{
    builtin_materials, find_material, flux_quantum, length_to_normalized, load_materials_json,
    time_to_normalized, MaterialProps, PhysicalConstants, UnitSystem,
};

/// Errors produced by the library.
#[derive(Debug, ThisError)]
pub enum Error {
    /// A material preset has nonpositive or non-finite fields.
    #[error("invalid material: {0}")]
    InvalidMaterial(String),
    /// A material name was not found in the available presets.
    #[error("material not found: {0}")]
    MaterialNotFound(String),
    /// Closed-form parameters violate their domain (signs, magnitudes).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    /// A simulation configuration violates its invariants.
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    /// A formula was evaluated outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// The field left the sane amplitude range or became non-finite.
    #[error("numerical blowup at step {step}")]
    Blowup { step: u64 },
    /// The grid resolves fewer than eight points per flux winding.
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    /// A causal-timing scenario has inconsistent geometry.
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    /// JSON (de)serialization failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
