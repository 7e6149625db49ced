//! Layered run configuration: built-in defaults, then the JSON config
//! file, then command-line flags. Later layers win field by field.
//!
//! The file payload mirrors the library's `RingConfig`/`SweepSpec` field
//! names exactly, so a manifest's resolved `config` object is itself a
//! valid config file.

use serde::{Deserialize, Serialize};
use std::path::Path;
use tdgl_ring::{Interpolation, NoiseScaling, NoiseSpec, RingConfig};

/// Optional-field mirror of the noise block.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileNoise {
    pub sigma: Option<f64>,
    pub sample_points: Option<usize>,
    pub interpolation: Option<Interpolation>,
    pub scaling: Option<NoiseScaling>,
}

/// JSON config file payload; every field optional so files patch only
/// what they need. Unknown keys are rejected rather than ignored.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub radius_norm: Option<f64>,
    pub kappa: Option<f64>,
    pub flux_norm: Option<f64>,
    pub grid_points: Option<usize>,
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    pub noise: Option<FileNoise>,
    pub seed: Option<u64>,
    pub snapshot_stride: Option<usize>,
    /// Ensemble size (`ensemble` subcommand).
    pub runs: Option<usize>,
    /// Sweep indices (`sweep` subcommand).
    pub indices: Option<Vec<i32>>,
    /// Runs per sweep point (`sweep` subcommand).
    pub runs_per_point: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config file {}: {e}", path.display()))?;
        serde_json::from_str(&text)
            .map_err(|e| format!("config file {} is not valid: {e}", path.display()))
    }
}

/// Physics overrides shared by `simulate`, `ensemble`, and `sweep`.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct PhysicsFlags {
    /// Ring radius in units of the penetration depth
    #[arg(long)]
    pub radius: Option<f64>,
    /// Ginzburg-Landau parameter
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Applied flux in flux quanta
    #[arg(long)]
    pub flux: Option<f64>,
    /// Spatial grid points
    #[arg(long)]
    pub grid: Option<usize>,
    /// Time step
    #[arg(long)]
    pub dt: Option<f64>,
    /// Simulated horizon
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,
    /// Noise amplitude per anchor component
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Number of noise anchor points
    #[arg(long)]
    pub anchors: Option<usize>,
    /// Steps between trajectory snapshots
    #[arg(long)]
    pub stride: Option<usize>,
}

/// Resolves one `RingConfig` through the three layers.
pub fn resolve_ring(
    file: &FileConfig,
    flags: &PhysicsFlags,
    seed_flag: Option<u64>,
) -> RingConfig {
    let defaults = NoiseSpec::default();
    let file_noise = file.noise.clone().unwrap_or_default();
    let flux_norm = flags.flux.or(file.flux_norm).unwrap_or(0.0);
    RingConfig {
        radius_norm: flags.radius.or(file.radius_norm).unwrap_or(10.0),
        kappa: flags.kappa.or(file.kappa).unwrap_or(0.8),
        flux_norm,
        grid_points: flags
            .grid
            .or(file.grid_points)
            .unwrap_or_else(|| RingConfig::default_grid_points(flux_norm)),
        dt: flags.dt.or(file.dt).unwrap_or(1e-2),
        t_max: flags.t_max.or(file.t_max).unwrap_or(50.0),
        noise: NoiseSpec {
            sigma: flags.sigma.or(file_noise.sigma).unwrap_or(defaults.sigma),
            sample_points: flags
                .anchors
                .or(file_noise.sample_points)
                .unwrap_or(defaults.sample_points),
            interpolation: file_noise.interpolation.unwrap_or(Interpolation::Linear),
            scaling: file_noise.scaling.unwrap_or(NoiseScaling::PerStep),
        },
        seed: seed_flag.or(file.seed).unwrap_or(42),
        snapshot_stride: flags.stride.or(file.snapshot_stride).unwrap_or(10),
    }
}

/// The fully explicit mirror of a resolved config, for the manifest.
pub fn explicit(
    cfg: &RingConfig,
    runs: Option<usize>,
    indices: Option<Vec<i32>>,
    runs_per_point: Option<usize>,
) -> FileConfig {
    FileConfig {
        radius_norm: Some(cfg.radius_norm),
        kappa: Some(cfg.kappa),
        flux_norm: Some(cfg.flux_norm),
        grid_points: Some(cfg.grid_points),
        dt: Some(cfg.dt),
        t_max: Some(cfg.t_max),
        noise: Some(FileNoise {
            sigma: Some(cfg.noise.sigma),
            sample_points: Some(cfg.noise.sample_points),
            interpolation: Some(cfg.noise.interpolation),
            scaling: Some(cfg.noise.scaling),
        }),
        seed: Some(cfg.seed),
        snapshot_stride: Some(cfg.snapshot_stride),
        runs,
        indices,
        runs_per_point,
    }
}
