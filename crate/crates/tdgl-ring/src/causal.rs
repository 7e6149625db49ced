//! Causal-separation feasibility: can a ring be made large enough that
//! light cannot cross it before the order parameter has already
//! organized?
//!
//! All times here are in units of ξ²/D (the relaxation-time unit) and
//! all lengths in units of λ, so the single conversion factor is the
//! light-crossing time of one λ expressed in relaxation units:
//! Dλ/(cξ²). Dirty materials make this factor small — relaxation is
//! slow, light is not — which is exactly what pushes the minimum radius
//! into the regime of centimeters-to-meters rather than light-years.

use serde::{Deserialize, Serialize};

use crate::units::MaterialProps;
use crate::{Error, Result};

/// Light-crossing time of one penetration depth λ, expressed in units
/// of the relaxation time ξ²/D: Dλ/(cξ²).
pub fn light_time_per_lambda(material: &MaterialProps) -> f64 {
    let c = crate::units::SI_CONSTANTS.speed_of_light;
    material.diffusion * material.lambda / (c * material.xi * material.xi)
}

/// Smallest ring radius (in λ) whose light-crossing time exceeds the
/// given equilibration time (in ξ²/D units).
pub fn min_radius_for_window(t_eq_norm: f64, material: &MaterialProps) -> f64 {
    t_eq_norm / light_time_per_lambda(material)
}

/// Geometry of one causal-window experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalScenario {
    pub material: MaterialProps,
    /// Ring radius in λ.
    pub ring_radius_norm: f64,
    /// Ring-to-detector separation in λ.
    pub ring_solenoid_gap_norm: f64,
    /// Organization time in ξ²/D units.
    pub equilibration_time_norm: f64,
}

impl CausalScenario {
    pub fn validate(&self) -> Result<()> {
        self.material.validate()?;
        for (name, v) in [
            ("ring_radius_norm", self.ring_radius_norm),
            ("ring_solenoid_gap_norm", self.ring_solenoid_gap_norm),
            ("equilibration_time_norm", self.equilibration_time_norm),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidGeometry(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Time window (in ξ²/D units) during which a detector at distance `x`
/// (in λ) from the ring is causally isolated from the far side of the
/// gap: the window opens when the ring's own front arrives and closes
/// when a front that bounced off the far end could.
///
/// Requires 0 < x < gap.
pub fn detector_window(scenario: &CausalScenario, x_norm: f64) -> Result<(f64, f64)> {
    scenario.validate()?;
    let d = scenario.ring_solenoid_gap_norm;
    if !(x_norm > 0.0 && x_norm < d) {
        return Err(Error::InvalidGeometry(format!(
            "detector position {x_norm} must lie strictly inside the gap (0, {d})"
        )));
    }
    let ltpl = light_time_per_lambda(&scenario.material);
    Ok((x_norm * ltpl, (2.0 * d - x_norm) * ltpl))
}

/// Verdict of the feasibility analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub material: String,
    /// Mean equilibration time over the supplied measurements, ξ²/D units.
    pub t_eq_norm: Option<f64>,
    /// Minimum causally isolating ring radius, in λ.
    pub r_min_lambda: Option<f64>,
    /// The same radius in meters.
    pub d_min_m: Option<f64>,
    /// Whether that radius fits on a table (≤ 1 m).
    pub plausible: bool,
    /// False when no equilibration data was supplied.
    pub conclusive: bool,
    pub assumptions: Vec<String>,
}

fn standing_assumptions() -> Vec<String> {
    vec![
        "causal front propagates at the vacuum speed of light from the transition instant".into(),
        "quench is instantaneous: the whole ring crosses the transition at t = 0".into(),
        "ring treated as a one-dimensional loop; radial structure ignored".into(),
        "equilibration time taken as the mean over the supplied sweep points".into(),
    ]
}

/// Builds the feasibility verdict from measured mean equilibration
/// times (ξ²/D units, e.g. the `mean_t99` column of a sweep).
///
/// An empty measurement list produces an inconclusive report rather
/// than an error: the geometry can still be tabulated per assumed t_eq.
pub fn feasibility_report(
    material: &MaterialProps,
    mean_t99_norm: &[f64],
) -> Result<FeasibilityReport> {
    material.validate()?;
    for &t in mean_t99_norm {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!(
                "equilibration times must be positive and finite, got {t}"
            )));
        }
    }
    if mean_t99_norm.is_empty() {
        return Ok(FeasibilityReport {
            material: material.name.clone(),
            t_eq_norm: None,
            r_min_lambda: None,
            d_min_m: None,
            plausible: false,
            conclusive: false,
            assumptions: standing_assumptions(),
        });
    }
    let t_eq = mean_t99_norm.iter().sum::<f64>() / mean_t99_norm.len() as f64;
    let r_min = min_radius_for_window(t_eq, material);
    let d_min = r_min * material.lambda;
    Ok(FeasibilityReport {
        material: material.name.clone(),
        t_eq_norm: Some(t_eq),
        r_min_lambda: Some(r_min),
        d_min_m: Some(d_min),
        plausible: d_min <= 1.0,
        conclusive: true,
        assumptions: standing_assumptions(),
    })
}
