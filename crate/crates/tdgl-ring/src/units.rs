//! Physical constants, material presets, and SI ↔ normalized conversions.
//!
//! The normalized unit system measures length in penetration depths λ,
//! time in ξ²/D, and magnetic flux in flux quanta Φ_Q = πħ/e. Constants
//! are compiled in; results depend only on ratios, and fixing the values
//! keeps outputs reproducible.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Fundamental constants used by the conversions (SI).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Elementary charge, C.
    pub elementary_charge: f64,
    /// Speed of light, m/s.
    pub speed_of_light: f64,
}

/// Compiled-in constant values; not user-configurable.
pub const SI_CONSTANTS: PhysicalConstants = PhysicalConstants {
    hbar: 1.054_571_8e-34,
    elementary_charge: 1.602_177e-19,
    speed_of_light: 2.997_924_58e8,
};

impl Default for PhysicalConstants {
    fn default() -> Self {
        SI_CONSTANTS
    }
}

/// Superconductor parameters needed by the normalized unit system.
///
/// Loadable from JSON as `{"name": ..., "xi_m": ..., "lambda_m": ...,
/// "diffusion_m2s": ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialProps {
    /// Preset name, e.g. `"niobium-impure"`.
    pub name: String,
    /// Coherence length ξ, m.
    #[serde(rename = "xi_m")]
    pub xi: f64,
    /// Penetration depth λ, m.
    #[serde(rename = "lambda_m")]
    pub lambda: f64,
    /// Normal-state diffusion coefficient D, m²/s.
    #[serde(rename = "diffusion_m2s")]
    pub diffusion: f64,
}

impl MaterialProps {
    /// Ginzburg-Landau parameter κ = λ/ξ.
    pub fn kappa(&self) -> f64 {
        self.lambda / self.xi
    }

    /// Checks that all lengths and the diffusion coefficient are positive
    /// and finite.
    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(self.xi) || !ok(self.lambda) || !ok(self.diffusion) {
            return Err(Error::InvalidMaterial(format!(
                "{}: xi, lambda, diffusion must be positive and finite (got {}, {}, {})",
                self.name, self.xi, self.lambda, self.diffusion
            )));
        }
        Ok(())
    }
}

/// A material together with the constants: the full conversion context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    pub material: MaterialProps,
    pub constants: PhysicalConstants,
}

impl UnitSystem {
    pub fn new(material: MaterialProps) -> Result<Self> {
        material.validate()?;
        Ok(Self {
            material,
            constants: SI_CONSTANTS,
        })
    }

    /// Seconds → ξ²/D units.
    pub fn time_to_normalized(&self, t_si: f64) -> f64 {
        t_si * self.material.diffusion / (self.material.xi * self.material.xi)
    }

    /// ξ²/D units → seconds.
    pub fn time_from_normalized(&self, t_norm: f64) -> f64 {
        t_norm * self.material.xi * self.material.xi / self.material.diffusion
    }

    /// Meters → penetration depths.
    pub fn length_to_normalized(&self, x_si: f64) -> f64 {
        x_si / self.material.lambda
    }

    /// Penetration depths → meters.
    pub fn length_from_normalized(&self, x_norm: f64) -> f64 {
        x_norm * self.material.lambda
    }

    /// Webers → flux quanta.
    pub fn flux_to_normalized(&self, phi_si: f64) -> f64 {
        phi_si / flux_quantum(&self.constants)
    }

    /// Flux quanta → webers.
    pub fn flux_from_normalized(&self, phi_norm: f64) -> f64 {
        phi_norm * flux_quantum(&self.constants)
    }
}

/// Flux quantum Φ_Q = πħ/e for pairs of elementary charges, Wb.
pub fn flux_quantum(constants: &PhysicalConstants) -> f64 {
    std::f64::consts::PI * constants.hbar / constants.elementary_charge
}

/// Seconds → ξ²/D units for the given material.
pub fn time_to_normalized(t_si: f64, material: &MaterialProps) -> Result<f64> {
    material.validate()?;
    Ok(t_si * material.diffusion / (material.xi * material.xi))
}

/// Meters → penetration depths for the given material.
pub fn length_to_normalized(x_si: f64, material: &MaterialProps) -> Result<f64> {
    material.validate()?;
    Ok(x_si / material.lambda)
}

/// The built-in material table.
///
/// `niobium-impure` uses the dirty-limit diffusion coefficient, and
/// `niobium-pure` the clean-limit one; both use ξ = λ = 40 nm.
pub fn builtin_materials() -> Vec<MaterialProps> {
    vec![
        MaterialProps {
            name: "niobium-impure".to_owned(),
            xi: 4e-8,
            lambda: 4e-8,
            diffusion: 1e-4,
        },
        MaterialProps {
            name: "niobium-pure".to_owned(),
            xi: 4e-8,
            lambda: 4e-8,
            diffusion: 1e-1,
        },
    ]
}

/// Looks up a material by name.
pub fn find_material<'a>(name: &str, materials: &'a [MaterialProps]) -> Result<&'a MaterialProps> {
    materials
        .iter()
        .find(|m| m.name == name)
        .ok_or_else(|| Error::MaterialNotFound(name.to_owned()))
}

/// Parses a JSON array of material definitions and validates each entry.
pub fn load_materials_json(json: &str) -> Result<Vec<MaterialProps>> {
    let mats: Vec<MaterialProps> = serde_json::from_str(json)?;
    for m in &mats {
        m.validate()?;
    }
    Ok(mats)
}
