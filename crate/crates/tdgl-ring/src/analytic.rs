//! Closed-form single-mode solutions for the ring order parameter.
//!
//! For a thin ring, an ansatz ψ ∝ √ρₙ(t)·e^{inφ} with an integer winding
//! number n reduces the field dynamics to an ODE for the Cooper-pair
//! density: dρ/dt = 2Γ(−λₙ − βρ)ρ, where the per-mode rate coefficient
//!
//! λₙ = α + (ħ²/2m*R²)(n − Φ/Φ_Q)²
//!
//! combines the condensation energy α < 0 with the gauge-shifted kinetic
//! energy of the winding. Modes with λₙ < 0 grow (supported), λₙ > 0
//! decay (suppressed), and λₙ = 0 is marginal. Everything here is exact,
//! works in SI units, and serves as the oracle for the field engine; a
//! thin adapter translates normalized ring parameters into SI.

use serde::{Deserialize, Serialize};

use crate::units::{flux_quantum, MaterialProps, SI_CONSTANTS};
use crate::{Error, Result};

/// Cooper pairs weigh two electron masses; used by [`from_normalized`].
pub const ELECTRON_MASS: f64 = 9.109_383_7015e-31;

/// Largest admissible seed density ε; beyond this the "small initial
/// density" premise of the closed forms is not credible.
pub const EPSILON_MAX: f64 = 1e-2;

/// Dimensionful parameters of the single-mode dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticParams {
    /// Relaxation coefficient Γ, 1/(J·s).
    pub gamma: f64,
    /// Condensation coefficient α, J. Negative below the transition.
    pub alpha: f64,
    /// Quartic coefficient β > 0, J per density unit.
    pub beta: f64,
    /// Effective carrier mass m*, kg.
    pub mass_eff: f64,
    /// Ring radius R, m.
    pub radius: f64,
    /// Magnetic flux through the ring Φ, Wb.
    pub flux: f64,
    /// Initial density ρₙ(0) = ε, dimensionless; must satisfy 0 < ε < 1e-2.
    pub epsilon: f64,
}

impl AnalyticParams {
    /// Validating constructor.
    pub fn new(
        gamma: f64,
        alpha: f64,
        beta: f64,
        mass_eff: f64,
        radius: f64,
        flux: f64,
        epsilon: f64,
    ) -> Result<Self> {
        let p = Self {
            gamma,
            alpha,
            beta,
            mass_eff,
            radius,
            flux,
            epsilon,
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks signs and magnitudes of all fields.
    pub fn validate(&self) -> Result<()> {
        let pos = |x: f64| x.is_finite() && x > 0.0;
        if !pos(self.gamma) {
            return Err(Error::InvalidParams(format!("gamma must be > 0, got {}", self.gamma)));
        }
        if !pos(self.beta) {
            return Err(Error::InvalidParams(format!("beta must be > 0, got {}", self.beta)));
        }
        if !pos(self.mass_eff) {
            return Err(Error::InvalidParams(format!(
                "mass_eff must be > 0, got {}",
                self.mass_eff
            )));
        }
        if !pos(self.radius) {
            return Err(Error::InvalidParams(format!(
                "radius must be > 0, got {}",
                self.radius
            )));
        }
        if !self.alpha.is_finite() || !self.flux.is_finite() {
            return Err(Error::InvalidParams("alpha and flux must be finite".into()));
        }
        if !(self.epsilon > 0.0) || self.epsilon >= EPSILON_MAX {
            return Err(Error::InvalidParams(format!(
                "epsilon must lie in (0, {EPSILON_MAX}), got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// Flux in units of the flux quantum, Φ/Φ_Q.
    pub fn flux_ratio(&self) -> f64 {
        self.flux / flux_quantum(&SI_CONSTANTS)
    }

    /// Winding mismatch n − Φ/Φ_Q, computed as (nΦ_Q − Φ)/Φ_Q.
    ///
    /// This form is exactly zero whenever `flux` was produced as n·Φ_Q in
    /// floating point — the plain `n - flux/Φ_Q` is off by an ulp for
    /// many integers, which would break the exact-quantization identities.
    pub fn winding_mismatch(&self, n: i64) -> f64 {
        let q = flux_quantum(&SI_CONSTANTS);
        (n as f64 * q - self.flux) / q
    }
}

/// Growth/suppression regime of a single winding mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeRegime {
    /// λₙ > 0: the mode relaxes back to zero density.
    Suppressed,
    /// λₙ < 0: the mode grows toward the plateau −λₙ/β.
    Supported,
    /// λₙ = 0 exactly: algebraic, not exponential, dynamics.
    Marginal,
}

/// Parameters of the screening-current response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LondonParams {
    /// Superconducting carrier density n_s, 1/m³.
    pub carrier_density: f64,
    /// Carrier charge e*, C.
    pub carrier_charge: f64,
    /// Carrier mass m*, kg.
    pub carrier_mass: f64,
}

impl LondonParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_density.is_finite() && self.carrier_density > 0.0)
            || !(self.carrier_mass.is_finite() && self.carrier_mass > 0.0)
            || !(self.carrier_charge.is_finite() && self.carrier_charge != 0.0)
        {
            return Err(Error::InvalidParams(
                "carrier density and mass must be > 0 and charge nonzero".into(),
            ));
        }
        Ok(())
    }
}

/// Per-mode rate coefficient λₙ = α + (ħ²/2m*R²)(n − Φ/Φ_Q)², in J.
///
/// Negative values mean the winding-n condensate grows. Exactly equals α
/// when the flux sits at n flux quanta.
pub fn lambda_n(params: &AnalyticParams, n: i64) -> f64 {
    let hbar = SI_CONSTANTS.hbar;
    let kinetic_scale = hbar * hbar / (2.0 * params.mass_eff * params.radius * params.radius);
    let mismatch = params.winding_mismatch(n);
    params.alpha + kinetic_scale * mismatch * mismatch
}

/// The integer winding that minimizes (n − flux_ratio)².
///
/// Exact half-integer ties are broken toward the even integer; the two
/// windings are physically degenerate there, and a fixed deterministic
/// choice keeps outputs reproducible.
pub fn winding_selector(flux_ratio: f64) -> i64 {
    debug_assert!(flux_ratio.is_finite());
    flux_ratio.round_ties_even() as i64
}

/// Closed-form mode density ρₙ(t) = λₙε / (−βε + e^{2Γλₙt}(βε + λₙ)).
///
/// At t = 0 this returns ε exactly. For a supported mode it rises to the
/// plateau −λₙ/β; for a suppressed mode it decays to zero; the marginal
/// case uses the exact algebraic solution ε/(1 + 2Γβεt) rather than a
/// discontinuous limit, so the function is continuous in its parameters.
///
/// Errors: `t < 0`, or a supported mode seeded at or above its plateau
/// (βε ≥ −λₙ, where the closed form stops describing relaxation from a
/// small seed).
pub fn rho_closed_form(params: &AnalyticParams, n: i64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("t must be >= 0, got {t}")));
    }
    let lam = lambda_n(params, n);
    let (beta, eps, gamma) = (params.beta, params.epsilon, params.gamma);
    if lam == 0.0 {
        return Ok(eps / (1.0 + 2.0 * gamma * beta * eps * t));
    }
    if lam < 0.0 && beta * eps >= -lam {
        return Err(Error::Domain(format!(
            "seed density epsilon={eps} at or above the steady plateau {}",
            -lam / beta
        )));
    }
    if t == 0.0 {
        return Ok(eps);
    }
    let deno = -beta * eps + (2.0 * gamma * lam * t).exp() * (beta * eps + lam);
    if deno == 0.0 {
        return Err(Error::Domain("closed-form denominator vanished".into()));
    }
    Ok(lam * eps / deno)
}

/// Short-time exponential regime ρₙ(t) ≈ ε·e^{−2Γλₙt}.
pub fn rho_short_time(params: &AnalyticParams, n: i64, t: f64) -> f64 {
    params.epsilon * (-2.0 * params.gamma * lambda_n(params, n) * t).exp()
}

/// Steady-state density: 0 when suppressed, −λₙ/β when supported, and the
/// frozen seed ε in the marginal case (the algebraic decay never leaves
/// the seed scale on any finite horizon).
pub fn rho_asymptotic(params: &AnalyticParams, n: i64) -> f64 {
    let lam = lambda_n(params, n);
    if lam > 0.0 {
        0.0
    } else if lam < 0.0 {
        -lam / params.beta
    } else {
        params.epsilon
    }
}

/// Supercurrent density of mode n at time t:
/// j = (2eħ/m*R)·ρₙ(t)·(n − Φ/Φ_Q).
///
/// Exactly zero at exact flux quantization Φ = nΦ_Q, for all t.
pub fn supercurrent(params: &AnalyticParams, n: i64, t: f64) -> Result<f64> {
    let rho = rho_closed_form(params, n, t)?;
    let prefactor = 2.0 * SI_CONSTANTS.elementary_charge * SI_CONSTANTS.hbar
        / (params.mass_eff * params.radius);
    Ok(prefactor * rho * params.winding_mismatch(n))
}

/// Classifies mode n by the sign of λₙ.
pub fn classify_mode(params: &AnalyticParams, n: i64) -> ModeRegime {
    let lam = lambda_n(params, n);
    if lam > 0.0 {
        ModeRegime::Suppressed
    } else if lam < 0.0 {
        ModeRegime::Supported
    } else {
        ModeRegime::Marginal
    }
}

/// Screening current density j = −(n_s e*²/m*)·A for a vector potential
/// of magnitude A in the transverse gauge.
pub fn london_current(lp: &LondonParams, vector_potential_magnitude: f64) -> f64 {
    -(lp.carrier_density * lp.carrier_charge * lp.carrier_charge / lp.carrier_mass)
        * vector_potential_magnitude
}

/// Builds SI parameters equivalent to a normalized ring configuration.
///
/// The translation fixes m* = 2mₑ, reads ξ, λ, D from the material, and
/// chooses the post-transition depth |α| = ħ²/(2m*ξ²) together with
/// β = |α| and Γ = 2m*D/ħ². With these choices the normalized per-mode
/// growth rate q of a ring of radius `radius_norm`·λ satisfies
/// λₙ = −|α|·q and 2Γ|α| maps one unit of ξ²/D time onto the normalized
/// clock, so densities and rates agree numerically with the field engine.
pub fn from_normalized(
    material: &MaterialProps,
    radius_norm: f64,
    flux_norm: f64,
    epsilon: f64,
) -> Result<AnalyticParams> {
    material.validate()?;
    if !(radius_norm.is_finite() && radius_norm > 0.0) || !flux_norm.is_finite() {
        return Err(Error::InvalidParams(format!(
            "radius_norm must be > 0 and flux_norm finite, got {radius_norm}, {flux_norm}"
        )));
    }
    let hbar = SI_CONSTANTS.hbar;
    let mass = 2.0 * ELECTRON_MASS;
    let alpha_mag = hbar * hbar / (2.0 * mass * material.xi * material.xi);
    AnalyticParams::new(
        2.0 * mass * material.diffusion / (hbar * hbar),
        -alpha_mag,
        alpha_mag,
        mass,
        radius_norm * material.lambda,
        flux_norm * flux_quantum(&SI_CONSTANTS),
        epsilon,
    )
}
