//! Command-line front end for the tdgl-ring library.
//!
//! Every subcommand writes its artifacts into `--out` together with a
//! `<command>_manifest.json` recording the fully resolved configuration,
//! the master seed, and a SHA-256 digest of each output file. Re-running
//! a command with the manifest's config and seed reproduces the outputs
//! byte for byte.
//!
//! Exit codes: 0 success, 1 runtime or domain failure, 2 usage error.

mod config;
mod output;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::path::PathBuf;

use config::{explicit, resolve_ring, FileConfig, PhysicsFlags};
use output::{fmt_f, fmt_opt_f, fmt_opt_i, OutputSet};
use tdgl_ring::{
    builtin_materials, classify_mode, control_run, detector_window, feasibility_report,
    find_material, from_normalized, lambda_n, light_time_per_lambda, load_materials_json,
    rho_asymptotic, rho_closed_form, run_ensemble, run_trajectory, supercurrent, sweep,
    winding_selector, CausalScenario, MaterialProps, ModeRegime, RunMode, SweepSpec,
};

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Parser, Debug)]
#[command(
    name = "tdgl-ring",
    version,
    about = "Stochastic Ginzburg-Landau dynamics of a flux-threaded superconducting ring"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Debug)]
struct Global {
    /// JSON config file; command-line flags override its values
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Directory for output files and the run manifest
    #[arg(long, global = true, default_value = ".", value_name = "DIR")]
    out: PathBuf,
    /// Master seed; overrides the config file's seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Format of tabular artifacts
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads (fallback: TDGL_RING_THREADS, then all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Closed-form single-mode theory on a time grid
    Analytic(AnalyticArgs),
    /// One seeded stochastic trajectory
    Simulate(SimulateArgs),
    /// Seeded ensemble at fixed parameters
    Ensemble(EnsembleArgs),
    /// Radius/flux sweep of equilibration times
    Sweep(SweepArgs),
    /// Causal-window feasibility analysis
    Causal(CausalArgs),
    /// List material presets and their derived scales
    Materials(MaterialsArgs),
}

#[derive(Args, Debug)]
struct AnalyticArgs {
    /// Applied flux in flux quanta
    #[arg(long = "flux-ratio", allow_negative_numbers = true)]
    flux_ratio: f64,
    /// Winding mode to evaluate (default: the selected winding)
    #[arg(long, allow_negative_numbers = true)]
    n: Option<i64>,
    /// Material preset name
    #[arg(long, default_value = "niobium-impure")]
    material: String,
    /// Extra material presets, JSON array
    #[arg(long = "materials-file", value_name = "PATH")]
    materials_file: Option<PathBuf>,
    /// Ring radius in penetration depths
    #[arg(long = "radius-norm", default_value_t = 10.0)]
    radius_norm: f64,
    /// Initial mode density
    #[arg(long, default_value_t = 1e-8)]
    epsilon: f64,
    /// Sample horizon in relaxation units
    #[arg(long = "t-max-norm", default_value_t = 50.0)]
    t_max_norm: f64,
    /// Number of time samples
    #[arg(long, default_value_t = 11)]
    samples: usize,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    physics: PhysicsFlags,
}

#[derive(Args, Debug)]
struct EnsembleArgs {
    #[command(flatten)]
    physics: PhysicsFlags,
    /// Number of seeded runs
    #[arg(long)]
    runs: Option<usize>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    physics: PhysicsFlags,
    /// Sweep indices (radius and flux rules are applied per index)
    #[arg(long = "i", num_args = 1.., allow_negative_numbers = true, value_name = "INDEX")]
    i: Option<Vec<i32>>,
    /// Seeded runs per sweep point
    #[arg(long = "runs-per-point")]
    runs_per_point: Option<usize>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("t_eq_source").required(true).args(["t_eq", "sweep_csv"])))]
struct CausalArgs {
    /// Material preset name
    #[arg(long, default_value = "niobium-impure")]
    material: String,
    /// Extra material presets, JSON array
    #[arg(long = "materials-file", value_name = "PATH")]
    materials_file: Option<PathBuf>,
    /// Equilibration time in relaxation units
    #[arg(long = "t-eq")]
    t_eq: Option<f64>,
    /// Sweep CSV whose mean_t99 column supplies equilibration times
    #[arg(long = "sweep-csv", value_name = "PATH")]
    sweep_csv: Option<PathBuf>,
    /// Ring-to-detector gap in penetration depths
    #[arg(long, requires = "detector")]
    gap: Option<f64>,
    /// Detector position inside the gap, in penetration depths
    #[arg(long, requires = "gap")]
    detector: Option<f64>,
}

#[derive(Args, Debug)]
struct MaterialsArgs {
    /// Extra material presets, JSON array
    #[arg(long = "materials-file", value_name = "PATH")]
    materials_file: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();

    let threads = match resolve_threads(cli.global.threads) {
        Ok(t) => t,
        Err(msg) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
    };
    if let Some(n) = threads {
        // A second call in the same process cannot succeed; that's fine.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }

    let file = match &cli.global.config {
        Some(path) => match FileConfig::load(path) {
            Ok(f) => f,
            Err(msg) => {
                eprintln!("error: {msg}");
                std::process::exit(2);
            }
        },
        None => FileConfig::default(),
    };

    let outcome = match &cli.command {
        Cmd::Analytic(a) => cmd_analytic(a, &cli.global, &file),
        Cmd::Simulate(a) => cmd_simulate(a, &cli.global, &file),
        Cmd::Ensemble(a) => cmd_ensemble(a, &cli.global, &file),
        Cmd::Sweep(a) => cmd_sweep(a, &cli.global, &file),
        Cmd::Causal(a) => cmd_causal(a, &cli.global, &file),
        Cmd::Materials(a) => cmd_materials(a, &cli.global, &file),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            std::process::exit(1);
        }
    }
}

fn resolve_threads(flag: Option<usize>) -> Result<Option<usize>, String> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("TDGL_RING_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| format!("TDGL_RING_THREADS must be an integer, got {v:?}")),
        Err(_) => Ok(None),
    }
}

fn load_materials(extra: &Option<PathBuf>) -> Result<Vec<MaterialProps>, String> {
    let mut mats = Vec::new();
    if let Some(path) = extra {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read materials file {}: {e}", path.display()))?;
        mats.extend(load_materials_json(&text).map_err(|e| e.to_string())?);
    }
    mats.extend(builtin_materials());
    Ok(mats)
}

fn regime_label(regime: ModeRegime) -> &'static str {
    match regime {
        ModeRegime::Supported => "supported",
        ModeRegime::Suppressed => "suppressed",
        ModeRegime::Marginal => "marginal",
    }
}

fn resolved_seed(global: &Global, file: &FileConfig) -> u64 {
    global.seed.or(file.seed).unwrap_or(42)
}

fn cmd_analytic(a: &AnalyticArgs, g: &Global, file: &FileConfig) -> Result<i32, String> {
    if a.samples == 0 {
        eprintln!("error: --samples must be >= 1");
        return Ok(2);
    }
    let mats = load_materials(&a.materials_file)?;
    let mat = find_material(&a.material, &mats).map_err(|e| e.to_string())?;
    let params =
        from_normalized(mat, a.radius_norm, a.flux_ratio, a.epsilon).map_err(|e| e.to_string())?;
    let n0 = winding_selector(a.flux_ratio);
    let n = a.n.unwrap_or(n0);
    let lam = lambda_n(&params, n);
    let regime = classify_mode(&params, n);
    let t_unit = mat.xi * mat.xi / mat.diffusion;

    println!("material = {}", mat.name);
    println!("n0 = {n0}");
    println!(
        "mode n = {n}: lambda_n = {} J ({}), normalized rate q = {}",
        fmt_f(lam),
        regime_label(regime),
        fmt_f(-lam / params.beta)
    );
    println!("steady rho = {}", fmt_f(rho_asymptotic(&params, n)));

    let mut rows = Vec::with_capacity(a.samples);
    for s in 0..a.samples {
        let t_norm = if a.samples == 1 {
            0.0
        } else {
            a.t_max_norm * s as f64 / (a.samples - 1) as f64
        };
        let rho = rho_closed_form(&params, n, t_norm * t_unit).map_err(|e| e.to_string())?;
        let j = supercurrent(&params, n, t_norm * t_unit).map_err(|e| e.to_string())?;
        rows.push((t_norm, rho, j));
    }

    println!("t_norm,rho,supercurrent");
    for (t, rho, j) in &rows {
        println!("{},{},{}", fmt_f(*t), fmt_f(*rho), fmt_f(*j));
    }

    let mut out = OutputSet::create(&g.out)?;
    match g.format {
        Format::Csv => {
            let mut csv = String::from("t_norm,rho,supercurrent\n");
            for (t, rho, j) in &rows {
                csv.push_str(&format!("{},{},{}\n", fmt_f(*t), fmt_f(*rho), fmt_f(*j)));
            }
            out.write_text("analytic.csv", &csv)?;
        }
        Format::Json => {
            let doc: Vec<_> = rows
                .iter()
                .map(|(t, rho, j)| json!({"t_norm": t, "rho": rho, "supercurrent": j}))
                .collect();
            out.write_json("analytic.json", &doc)?;
        }
    }
    let cfg = json!({
        "flux_ratio": a.flux_ratio,
        "n": n,
        "material": mat.name,
        "radius_norm": a.radius_norm,
        "epsilon": a.epsilon,
        "t_max_norm": a.t_max_norm,
        "samples": a.samples,
    });
    out.finish("analytic", resolved_seed(g, file), &cfg)?;
    Ok(0)
}

fn cmd_simulate(a: &SimulateArgs, g: &Global, file: &FileConfig) -> Result<i32, String> {
    let cfg = resolve_ring(file, &a.physics, g.seed);
    cfg.validate().map_err(|e| e.to_string())?;
    let traj = run_trajectory(&cfg, RunMode::Full).map_err(|e| e.to_string())?;

    let mut out = OutputSet::create(&g.out)?;
    match g.format {
        Format::Csv => {
            let mut csv = String::from("time,mode_amp_n0,J,winding\n");
            for i in 0..traj.times.len() {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt_f(traj.times[i]),
                    fmt_f(traj.mode_amp[i]),
                    fmt_f(traj.current[i]),
                    fmt_opt_i(traj.winding[i])
                ));
            }
            if let Some(step) = traj.blowup_step {
                csv.push_str(&format!("# truncated: numerical blowup at step {step}\n"));
            }
            out.write_text("trajectory.csv", &csv)?;
        }
        Format::Json => {
            out.write_json("trajectory.json", &traj)?;
        }
    }
    if let Some(step) = traj.blowup_step {
        out.failures
            .push(format!("numerical blowup at step {step}"));
    }

    println!("target mode = {}", traj.target_mode);
    match traj.t99 {
        Some(t) => println!("t99 = {}", fmt_f(t)),
        None => println!("t99 not reached within t_max = {}", fmt_f(cfg.t_max)),
    }
    println!("final winding = {}", fmt_opt_i(traj.final_winding));
    let blew_up = traj.blowup_step.is_some();
    if blew_up {
        eprintln!(
            "error: numerical blowup at step {} (t = {}); partial output retained",
            traj.blowup_step.unwrap(),
            fmt_f(traj.final_time)
        );
    }
    let config_doc = serde_json::to_value(explicit(&cfg, None, None, None))
        .map_err(|e| e.to_string())?;
    out.finish("simulate", cfg.seed, &config_doc)?;
    Ok(if blew_up { 1 } else { 0 })
}

fn cmd_ensemble(a: &EnsembleArgs, g: &Global, file: &FileConfig) -> Result<i32, String> {
    let cfg = resolve_ring(file, &a.physics, g.seed);
    let runs = a.runs.or(file.runs).unwrap_or(50);
    let stats = if cfg.flux_norm == 0.0 {
        control_run(&cfg, runs, cfg.seed).map_err(|e| e.to_string())?
    } else {
        run_ensemble(&cfg, runs, cfg.seed).map_err(|e| e.to_string())?
    };

    let mut out = OutputSet::create(&g.out)?;
    match g.format {
        Format::Csv => {
            let mut csv = String::from("time,mean_J,std_J\n");
            for p in &stats.mean_j_series {
                csv.push_str(&format!(
                    "{},{},{}\n",
                    fmt_f(p.time),
                    fmt_f(p.mean_j),
                    fmt_opt_f(p.std_j)
                ));
            }
            out.write_text("ensemble_j.csv", &csv)?;
        }
        Format::Json => {
            out.write_json("ensemble_j.json", &stats.mean_j_series)?;
        }
    }
    out.write_json("ensemble_stats.json", &stats)?;
    for rec in stats.failures() {
        out.failures
            .push(format!("run {}: {}", rec.run_index, rec.error.as_deref().unwrap_or("")));
    }

    println!(
        "runs = {}, reached threshold = {}, target mode = {}",
        stats.n_runs, stats.n_reached, stats.target_mode
    );
    println!(
        "mean_t99 = {}, std_t99 = {}",
        fmt_opt_f(stats.mean_t99),
        fmt_opt_f(stats.std_t99)
    );
    if let Some(j) = stats.second_half_mean_j() {
        println!(
            "second-half <J> = {} (run-to-run SE {})",
            fmt_f(j),
            fmt_opt_f(stats.second_half_standard_error())
        );
    }

    let n_failed = stats.failures().len();
    let config_doc = serde_json::to_value(explicit(&cfg, Some(runs), None, None))
        .map_err(|e| e.to_string())?;
    out.finish("ensemble", cfg.seed, &config_doc)?;
    Ok(if n_failed == runs { 1 } else { 0 })
}

fn cmd_sweep(a: &SweepArgs, g: &Global, file: &FileConfig) -> Result<i32, String> {
    let base = resolve_ring(file, &a.physics, g.seed);
    let indices = a
        .i
        .clone()
        .or_else(|| file.indices.clone())
        .unwrap_or_else(|| vec![0, 1, 2, 3]);
    let runs_per_point = a.runs_per_point.or(file.runs_per_point).unwrap_or(50);
    let spec = SweepSpec {
        indices: indices.clone(),
        runs_per_point,
        base_config: base.clone(),
    };
    let points = sweep(&spec).map_err(|e| e.to_string())?;

    let mut out = OutputSet::create(&g.out)?;
    let mut csv = String::from("i,radius_norm,flux_norm,mean_t99,std_t99,n_reached,n_runs\n");
    let mut any_ok = false;
    for p in &points {
        match (&p.stats, &p.error) {
            (Some(s), _) => {
                any_ok = true;
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    p.i,
                    fmt_f(p.radius_norm),
                    fmt_f(p.flux_norm),
                    fmt_opt_f(s.mean_t99),
                    fmt_opt_f(s.std_t99),
                    s.n_reached,
                    s.n_runs
                ));
                println!(
                    "i = {}: R = {}, flux = {}, mean_t99 = {} ({}/{} reached)",
                    p.i,
                    fmt_f(p.radius_norm),
                    fmt_f(p.flux_norm),
                    fmt_opt_f(s.mean_t99),
                    s.n_reached,
                    s.n_runs
                );
            }
            (None, err) => {
                csv.push_str(&format!(
                    "{},{},{},,,0,{}\n",
                    p.i,
                    fmt_f(p.radius_norm),
                    fmt_f(p.flux_norm),
                    runs_per_point
                ));
                let msg = format!(
                    "i={}: {}",
                    p.i,
                    err.as_deref().unwrap_or("unknown failure")
                );
                eprintln!("warning: sweep point failed: {msg}");
                out.failures.push(msg);
            }
        }
    }
    match g.format {
        Format::Csv => {
            out.write_text("sweep.csv", &csv)?;
        }
        Format::Json => {
            out.write_json("sweep.json", &points)?;
        }
    }

    let config_doc = serde_json::to_value(explicit(
        &base,
        None,
        Some(indices),
        Some(runs_per_point),
    ))
    .map_err(|e| e.to_string())?;
    out.finish("sweep", base.seed, &config_doc)?;
    Ok(if any_ok { 0 } else { 1 })
}

fn parse_sweep_csv(path: &PathBuf) -> Result<Vec<f64>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read sweep csv {}: {e}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or("sweep csv is empty")?;
    let idx = header
        .split(',')
        .position(|h| h == "mean_t99")
        .ok_or("sweep csv has no mean_t99 column")?;
    let mut values = Vec::new();
    for line in lines {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let field = line.split(',').nth(idx).unwrap_or("");
        if field.is_empty() {
            continue;
        }
        values.push(
            field
                .parse::<f64>()
                .map_err(|_| format!("bad mean_t99 value {field:?} in {}", path.display()))?,
        );
    }
    Ok(values)
}

fn cmd_causal(a: &CausalArgs, g: &Global, file: &FileConfig) -> Result<i32, String> {
    let mats = load_materials(&a.materials_file)?;
    let mat = find_material(&a.material, &mats)
        .map_err(|e| e.to_string())?
        .clone();
    let t_eqs = match (a.t_eq, &a.sweep_csv) {
        (Some(t), _) => vec![t],
        (None, Some(path)) => parse_sweep_csv(path)?,
        (None, None) => unreachable!("clap group enforces one source"),
    };
    let report = feasibility_report(&mat, &t_eqs).map_err(|e| e.to_string())?;

    let mut doc = serde_json::to_value(&report).map_err(|e| e.to_string())?;
    if let (Some(gap), Some(detector)) = (a.gap, a.detector) {
        let scenario = CausalScenario {
            material: mat.clone(),
            ring_radius_norm: report.r_min_lambda.unwrap_or(1.0),
            ring_solenoid_gap_norm: gap,
            equilibration_time_norm: report.t_eq_norm.unwrap_or(1.0),
        };
        let (open, close) = detector_window(&scenario, detector).map_err(|e| e.to_string())?;
        doc["window"] = json!({ "t_open_norm": open, "t_close_norm": close });
        println!(
            "detector window: opens {} closes {} (relaxation units)",
            fmt_f(open),
            fmt_f(close)
        );
    }

    println!("material = {}", report.material);
    println!("light_time_per_lambda = {}", fmt_f(light_time_per_lambda(&mat)));
    match (report.t_eq_norm, report.r_min_lambda, report.d_min_m) {
        (Some(t), Some(r), Some(d)) => {
            println!("t_eq = {}", fmt_f(t));
            println!("r_min = {} lambda = {} m", fmt_f(r), fmt_f(d));
            println!("plausible = {}", report.plausible);
        }
        _ => println!("inconclusive: no equilibration times supplied"),
    }

    let mut out = OutputSet::create(&g.out)?;
    out.write_json("causal.json", &doc)?;
    let cfg = json!({
        "material": mat.name,
        "t_eq": a.t_eq,
        "sweep_csv": a.sweep_csv.as_ref().map(|p| p.display().to_string()),
        "gap": a.gap,
        "detector": a.detector,
    });
    out.finish("causal", resolved_seed(g, file), &cfg)?;
    Ok(0)
}

fn cmd_materials(a: &MaterialsArgs, g: &Global, file: &FileConfig) -> Result<i32, String> {
    let mats = load_materials(&a.materials_file)?;
    println!(
        "{:<18} {:>12} {:>12} {:>14} {:>8} {:>22}",
        "name", "xi_m", "lambda_m", "diffusion_m2s", "kappa", "light_time_per_lambda"
    );
    let mut csv = String::from("name,xi_m,lambda_m,diffusion_m2s,kappa,light_time_per_lambda\n");
    let mut doc = Vec::new();
    for m in &mats {
        let ltpl = light_time_per_lambda(m);
        println!(
            "{:<18} {:>12} {:>12} {:>14} {:>8} {:>22}",
            m.name,
            fmt_f(m.xi),
            fmt_f(m.lambda),
            fmt_f(m.diffusion),
            fmt_f(m.kappa()),
            fmt_f(ltpl)
        );
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            m.name,
            fmt_f(m.xi),
            fmt_f(m.lambda),
            fmt_f(m.diffusion),
            fmt_f(m.kappa()),
            fmt_f(ltpl)
        ));
        doc.push(json!({
            "name": m.name,
            "xi_m": m.xi,
            "lambda_m": m.lambda,
            "diffusion_m2s": m.diffusion,
            "kappa": m.kappa(),
            "light_time_per_lambda": ltpl,
        }));
    }

    let mut out = OutputSet::create(&g.out)?;
    match g.format {
        Format::Csv => {
            out.write_text("materials.csv", &csv)?;
        }
        Format::Json => {
            out.write_json("materials.json", &doc)?;
        }
    }
    let cfg = json!({
        "materials_file": a.materials_file.as_ref().map(|p| p.display().to_string()),
    });
    out.finish("materials", resolved_seed(g, file), &cfg)?;
    Ok(0)
}
