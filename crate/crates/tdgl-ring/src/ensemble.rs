//! Seeded multi-run orchestration: equilibration times, ensemble-averaged
//! ring current, radius/flux sweeps, zero-flux controls, and deliberately
//! under-resolved coarse-grid runs.
//!
//! Determinism contract: every public entry point is a pure function of
//! its inputs. Run r of an ensemble uses the seed `derive_run_seed(master,
//! r)` — a SplitMix64 finalizer over `master ^ (r+1)·golden-ratio` — so
//! adding runs never perturbs earlier trajectories. Runs execute in
//! parallel, but aggregation always walks results in run-index order, so
//! thread count and scheduling cannot change any output bit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{
    current_profile, init_metastable, mode_amplitude, winding_number, RingConfig, Stepper,
};
use crate::{Error, Result};

/// SplitMix64 finalizer; the documented mixing behind all derived seeds.
fn splitmix64(x: u64) -> u64 {
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of run `r` in an ensemble with the given master seed.
pub fn derive_run_seed(master_seed: u64, run_index: u64) -> u64 {
    splitmix64(master_seed ^ (run_index.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Master seed of sweep point `i`, derived from the sweep's master seed.
pub fn derive_point_seed(master_seed: u64, index: i32) -> u64 {
    let ix = index as i64 as u64;
    splitmix64(master_seed ^ 0xA076_1D64_78BD_642F ^ ix.wrapping_mul(0xE703_7ED1_A0B4_28DB))
}

/// How far a single trajectory runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    /// Run to t_max regardless of equilibration.
    Full,
    /// Stop at the first equilibration-threshold crossing (or t_max).
    UntilEquilibrated,
}

/// Snapshots and summary readings of one seeded trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Snapshot times (every `snapshot_stride` steps, starting at t=0).
    pub times: Vec<f64>,
    /// |c_{n₀}| at each snapshot, for the clamped target mode n₀.
    pub mode_amp: Vec<f64>,
    /// Integrated ring current at each snapshot.
    pub current: Vec<f64>,
    /// Winding at each snapshot (`None` while the amplitude floor is
    /// undercut).
    pub winding: Vec<Option<i64>>,
    /// The mode the flux selects, clamped to the representable range.
    pub target_mode: i64,
    /// First time the spatial rms amplitude reached 99% of the dominant
    /// mode's steady amplitude √q, if it did.
    pub t99: Option<f64>,
    /// Winding of the last computed state.
    pub final_winding: Option<i64>,
    /// Time of the last computed state.
    pub final_time: f64,
    /// Set when the run died; snapshots up to the failure are kept.
    pub blowup_step: Option<u64>,
}

/// Runs one seeded trajectory from the metastable start.
///
/// Equilibration is detected from the spatial rms amplitude reaching
/// 0.99·√q*, where q* is the linear rate of the selected mode: this is
/// the amplitude of the order parameter itself. A mode-projection
/// criterion is deliberately not used for timing — when several modes
/// grow at nearly the same rate the winner's projection approaches its
/// plateau only through slow sideband healing, which measures grid
/// crowding rather than condensate formation. When no mode grows
/// (q* ≤ 0) no threshold exists and `t99` stays `None`.
pub fn run_trajectory(config: &RingConfig, mode: RunMode) -> Result<Trajectory> {
    let mut stepper = Stepper::new(config)?;
    let mut state = init_metastable(config)?;
    let target = config.target_mode();
    let q_star = config.linear_symbol(target);
    let threshold = if q_star > 0.0 {
        0.99 * q_star.sqrt()
    } else {
        f64::INFINITY
    };

    let n_steps = config.n_steps();
    let stride = config.snapshot_stride as u64;
    let mut traj = Trajectory {
        times: Vec::new(),
        mode_amp: Vec::new(),
        current: Vec::new(),
        winding: Vec::new(),
        target_mode: target,
        t99: None,
        final_winding: None,
        final_time: 0.0,
        blowup_step: None,
    };
    let snapshot = |state: &crate::engine::FieldState, traj: &mut Trajectory| {
        traj.times.push(state.time);
        traj.mode_amp.push(mode_amplitude(state, target));
        traj.current.push(current_profile(state, config).integrated);
        traj.winding.push(winding_number(state, config));
    };
    snapshot(&state, &mut traj);

    for step in 1..=n_steps {
        match stepper.step(&mut state) {
            Ok(()) => {}
            Err(Error::Blowup { step }) => {
                traj.blowup_step = Some(step);
                break;
            }
            Err(e) => return Err(e),
        }
        if traj.t99.is_none() && state.rms_amplitude() >= threshold {
            traj.t99 = Some(state.time);
            if mode == RunMode::UntilEquilibrated {
                snapshot(&state, &mut traj);
                break;
            }
        }
        if step % stride == 0 {
            snapshot(&state, &mut traj);
        }
    }
    traj.final_winding = winding_number(&state, config);
    traj.final_time = state.time;
    Ok(traj)
}

/// Outcome of a single equilibration measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibrationResult {
    /// First 99%-threshold crossing, if reached within t_max.
    pub t99: Option<f64>,
    pub reached: bool,
    pub final_winding: Option<i64>,
}

/// Measures the equilibration time of one noisy trajectory.
///
/// Errors when no growing mode exists (the threshold would be
/// meaningless) and propagates numerical blowup.
pub fn equilibration_time(config: &RingConfig) -> Result<EquilibrationResult> {
    config.validate()?;
    let target = config.target_mode();
    if config.linear_symbol(target) <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "no growing mode: linear rate of mode {target} is {} <= 0",
            config.linear_symbol(target)
        )));
    }
    let traj = run_trajectory(config, RunMode::UntilEquilibrated)?;
    if let Some(step) = traj.blowup_step {
        return Err(Error::Blowup { step });
    }
    Ok(EquilibrationResult {
        t99: traj.t99,
        reached: traj.t99.is_some(),
        final_winding: traj.final_winding,
    })
}

/// Per-run bookkeeping inside an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_index: usize,
    pub seed: u64,
    pub t99: Option<f64>,
    pub final_winding: Option<i64>,
    /// Time average of the run's integrated current over the second half
    /// of the horizon (`None` for runs that failed or stopped early).
    pub mean_j_second_half: Option<f64>,
    /// Failure description for runs excluded from the statistics.
    pub error: Option<String>,
}

/// One point of the ensemble-averaged current series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JSeriesPoint {
    pub time: f64,
    pub mean_j: f64,
    /// Sample standard deviation across runs; `None` below two runs.
    pub std_j: Option<f64>,
}

/// Aggregate statistics of a seeded ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    /// Mean equilibration time over runs that reached the threshold.
    pub mean_t99: Option<f64>,
    /// Sample standard deviation ((n−1) convention) of those times;
    /// `None` below two reaching runs.
    pub std_t99: Option<f64>,
    /// Run-averaged integrated current on the common snapshot grid.
    pub mean_j_series: Vec<JSeriesPoint>,
    pub n_runs: usize,
    /// Number of runs whose rms amplitude crossed the 99% threshold.
    pub n_reached: usize,
    /// The clamped target mode of the configuration.
    pub target_mode: i64,
    pub runs: Vec<RunRecord>,
}

impl EnsembleStats {
    /// Runs that failed (blowup), excluded from all statistics.
    pub fn failures(&self) -> Vec<&RunRecord> {
        self.runs.iter().filter(|r| r.error.is_some()).collect()
    }

    /// Final windings of the successful runs.
    pub fn final_windings(&self) -> Vec<Option<i64>> {
        self.runs
            .iter()
            .filter(|r| r.error.is_none())
            .map(|r| r.final_winding)
            .collect()
    }

    /// Time average of ⟨J⟩ over the second half of the series.
    pub fn second_half_mean_j(&self) -> Option<f64> {
        let last = self.mean_j_series.last()?.time;
        let half: Vec<f64> = self
            .mean_j_series
            .iter()
            .filter(|p| p.time >= 0.5 * last)
            .map(|p| p.mean_j)
            .collect();
        if half.is_empty() {
            None
        } else {
            Some(half.iter().sum::<f64>() / half.len() as f64)
        }
    }

    /// Standard error of the second-half time average: run-to-run sample
    /// std of the per-run averages divided by √n. `None` below two
    /// successful runs.
    pub fn second_half_standard_error(&self) -> Option<f64> {
        let means: Vec<f64> = self
            .runs
            .iter()
            .filter_map(|r| r.mean_j_second_half)
            .collect();
        let std = sample_std(&means)?;
        Some(std / (means.len() as f64).sqrt())
    }
}

/// Sample standard deviation with the (n−1) convention; `None` for n < 2.
fn sample_std(xs: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0);
    Some(var.sqrt())
}

fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        None
    } else {
        Some(xs.iter().sum::<f64>() / xs.len() as f64)
    }
}

fn run_ensemble_impl(
    config: &RingConfig,
    n_runs: usize,
    master_seed: u64,
    allow_coarse: bool,
    mode: RunMode,
) -> Result<EnsembleStats> {
    config.validate()?;
    if n_runs < 1 {
        return Err(Error::InvalidParams("n_runs must be >= 1".into()));
    }
    if !allow_coarse && !config.meets_resolution_rule() {
        return Err(Error::GridTooCoarse(format!(
            "grid_points {} is below the floor {} for flux {}; use a coarse-grid run if the \
             under-resolved envelope regime is intended",
            config.grid_points,
            config.resolution_floor(),
            config.flux_norm
        )));
    }

    let outcomes: Vec<(u64, Result<Trajectory>)> = (0..n_runs)
        .into_par_iter()
        .map(|r| {
            let seed = derive_run_seed(master_seed, r as u64);
            let mut cfg = config.clone();
            cfg.seed = seed;
            (seed, run_trajectory(&cfg, mode))
        })
        .collect();

    // Aggregation in run-index order; `collect` preserves it.
    let mut runs = Vec::with_capacity(n_runs);
    let mut t99s = Vec::new();
    let mut series_acc: Vec<(f64, Vec<f64>)> = Vec::new();
    for (r, (seed, outcome)) in outcomes.into_iter().enumerate() {
        let record = match outcome {
            Err(e) => RunRecord {
                run_index: r,
                seed,
                t99: None,
                final_winding: None,
                mean_j_second_half: None,
                error: Some(e.to_string()),
            },
            Ok(traj) => {
                if let Some(step) = traj.blowup_step {
                    RunRecord {
                        run_index: r,
                        seed,
                        t99: None,
                        final_winding: None,
                        mean_j_second_half: None,
                        error: Some(Error::Blowup { step }.to_string()),
                    }
                } else {
                    if let Some(t) = traj.t99 {
                        t99s.push(t);
                    }
                    let mean_j_second_half = if mode == RunMode::Full {
                        let second_half: Vec<f64> = traj
                            .times
                            .iter()
                            .zip(traj.current.iter())
                            .filter(|(t, _)| **t >= 0.5 * config.t_max)
                            .map(|(_, j)| *j)
                            .collect();
                        mean(&second_half)
                    } else {
                        None
                    };
                    if mode == RunMode::Full {
                        for (idx, (&t, &j)) in
                            traj.times.iter().zip(traj.current.iter()).enumerate()
                        {
                            if series_acc.len() <= idx {
                                series_acc.push((t, Vec::new()));
                            }
                            series_acc[idx].1.push(j);
                        }
                    }
                    RunRecord {
                        run_index: r,
                        seed,
                        t99: traj.t99,
                        final_winding: traj.final_winding,
                        mean_j_second_half,
                        error: None,
                    }
                }
            }
        };
        runs.push(record);
    }

    let mean_j_series = series_acc
        .into_iter()
        .map(|(time, js)| JSeriesPoint {
            time,
            mean_j: mean(&js).unwrap_or(0.0),
            std_j: sample_std(&js),
        })
        .collect();

    Ok(EnsembleStats {
        mean_t99: mean(&t99s),
        std_t99: sample_std(&t99s),
        mean_j_series,
        n_runs,
        n_reached: t99s.len(),
        target_mode: config.target_mode(),
        runs,
    })
}

/// Runs `n_runs` independent trajectories with derived seeds and
/// aggregates their statistics.
///
/// `config.seed` is ignored; per-run seeds derive from `master_seed`.
/// Individual blowups are recorded in the run records and excluded from
/// every aggregate. Refuses grids below the resolution floor — see
/// [`coarse_grid_run`] for the deliberate exception.
pub fn run_ensemble(config: &RingConfig, n_runs: usize, master_seed: u64) -> Result<EnsembleStats> {
    run_ensemble_impl(config, n_runs, master_seed, false, RunMode::Full)
}

/// Zero-flux control ensemble: identical pipeline, but insists Φ̃ = 0 so
/// the result is interpretable as the no-organized-current baseline.
pub fn control_run(config: &RingConfig, n_runs: usize, master_seed: u64) -> Result<EnsembleStats> {
    if config.flux_norm != 0.0 {
        return Err(Error::InvalidConfig(format!(
            "control run requires flux_norm = 0, got {}",
            config.flux_norm
        )));
    }
    run_ensemble_impl(config, n_runs, master_seed, false, RunMode::Full)
}

/// Ensemble on a deliberately under-resolved grid (M below the
/// resolution floor): the computed field is then the slowly oscillating
/// envelope of the true solution. Identical pipeline with the resolution
/// guard disabled.
pub fn coarse_grid_run(
    config: &RingConfig,
    n_runs: usize,
    master_seed: u64,
) -> Result<EnsembleStats> {
    run_ensemble_impl(config, n_runs, master_seed, true, RunMode::Full)
}

/// Radius/flux sweep plan.
///
/// Point i of the sweep uses R̃ = 1.5·(√10)^i and Φ̃ = ⌈(√10)^i⌉ + 0.2 —
/// half-order-of-magnitude geometric steps with the flux-to-radius ratio
/// held near 2/3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub indices: Vec<i32>,
    pub runs_per_point: usize,
    /// Template whose κ, dt, t_max, noise, stride, and seed all points
    /// inherit; radius, flux, and grid are re-derived per point.
    pub base_config: RingConfig,
}

impl SweepSpec {
    /// R̃(i) = 1.5·(√10)^i, evaluated as 1.5·10^{i/2} so that even
    /// indices hit exact powers of ten.
    pub fn radius_rule(i: i32) -> f64 {
        1.5 * 10f64.powf(0.5 * i as f64)
    }

    /// Φ̃(i) = ⌈(√10)^i⌉ + 0.2, with the same exact-power evaluation —
    /// squaring √10 first would round ⌈10.000…2⌉ up to 11.
    pub fn flux_rule(i: i32) -> f64 {
        10f64.powf(0.5 * i as f64).ceil() + 0.2
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs_per_point < 1 {
            return Err(Error::InvalidParams("runs_per_point must be >= 1".into()));
        }
        self.base_config.validate()?;
        for &i in &self.indices {
            // The rules approach Φ̃/R̃ = 2/3 from above (0.89 at i = 1);
            // outside [0.5, 1] the ceil offset dominates and the points
            // stop being comparable, so reject such indices.
            let ratio = Self::flux_rule(i) / Self::radius_rule(i);
            if !(0.5..=1.0).contains(&ratio) {
                return Err(Error::InvalidParams(format!(
                    "sweep index {i} breaks the near-constant flux-to-radius ratio: {ratio}"
                )));
            }
        }
        Ok(())
    }

    /// The resolved configuration of sweep point i.
    pub fn point_config(&self, i: i32) -> RingConfig {
        let flux = Self::flux_rule(i);
        let mut cfg = self.base_config.clone();
        cfg.radius_norm = Self::radius_rule(i);
        cfg.flux_norm = flux;
        cfg.grid_points = RingConfig::default_grid_points(flux);
        cfg.seed = derive_point_seed(self.base_config.seed, i);
        cfg
    }
}

/// One evaluated sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub i: i32,
    pub radius_norm: f64,
    pub flux_norm: f64,
    /// `None` when the whole point failed; see `error`.
    pub stats: Option<EnsembleStats>,
    pub error: Option<String>,
}

/// Runs the ensemble at every index of the plan. Point failures are
/// recorded and the sweep continues. Sweep points run in the
/// equilibration-timing mode (each trajectory stops at its threshold
/// crossing), so the per-point J series is not populated.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepPoint>> {
    spec.validate()?;
    let mut points = Vec::with_capacity(spec.indices.len());
    for &i in &spec.indices {
        let cfg = spec.point_config(i);
        let outcome = run_ensemble_impl(
            &cfg,
            spec.runs_per_point,
            cfg.seed,
            false,
            RunMode::UntilEquilibrated,
        );
        let (stats, error) = match outcome {
            Ok(s) => (Some(s), None),
            Err(e) => (None, Some(e.to_string())),
        };
        points.push(SweepPoint {
            i,
            radius_norm: cfg.radius_norm,
            flux_norm: cfg.flux_norm,
            stats,
            error,
        });
    }
    Ok(points)
}
