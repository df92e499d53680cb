//! Command-line surface: config-driven subcommands emitting CSV/JSON/SVG.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric failure,
//! 4 CTP identity violation. Any `--path.to.field=value` flag overrides the
//! matching config entry before parsing.

use crate::config::{apply_overrides, RunConfig};
use crate::ctp::{
    check_consistency, ctp_action, decoherence_weight, invert_block, lift_trajectory,
    physical_response, quantum_ctp_propagator, tau_exchange, CtpBlock, TimeKernel,
};
use crate::green::{
    near_far_split, retarded_propagator, Pole, SearchBox, SelfEnergyModel, TimeArrow,
};
use crate::grid::{linspace, FrequencyGrid, TimeGrid};
use crate::model::{stability_check, BathSpec, SourceProfile};
use crate::oracle::{diagonalize, evolve_full, EvolveOptions, NormalModes};
use crate::output;
use crate::window::{
    apparent_source, apparent_source_smooth_time, count_resolved_peaks, pole_apparent_source,
    trapezoid_mass, windowed_response, Window,
};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

pub const OUT_DIR_ENV: &str = "CTP_HARMONICS_OUTDIR";

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
    CtpViolation(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::CtpViolation(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numeric(m) | CliError::CtpViolation(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(name = "ctp-harmonics", version, about = "System-bath harmonic dynamics toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// JSON run configuration
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: $CTP_HARMONICS_OUTDIR, then the config, then ".")
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Reserved for future stochastic extensions; current commands are deterministic
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the full system-bath equations of motion; writes trajectory.csv
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Also store bath coordinates in the CSV
        #[arg(long)]
        store_bath: bool,
    },
    /// Sample the retarded propagator; writes green.csv and poles.json
    Green {
        #[command(flatten)]
        common: CommonArgs,
        /// Environment time arrow: forward (retarded) or backward (advanced)
        #[arg(long, default_value = "forward")]
        arrow: String,
    },
    /// Apparent spectral function of the observed coordinate; writes spectral.csv
    Spectral {
        #[command(flatten)]
        common: CommonArgs,
        /// Window kind: gaussian or lorentzian
        #[arg(long, default_value = "gaussian")]
        window: String,
        /// Observation time T
        #[arg(long = "t-obs", default_value_t = 100.0)]
        t_obs: f64,
        /// Observed physical coordinate index
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[arg(long, default_value_t = 0.0)]
        omega_min: f64,
        #[arg(long, default_value_t = 3.0)]
        omega_max: f64,
        #[arg(long, default_value_t = 9601)]
        n_omega: usize,
    },
    /// Spectral-line merging at the condensation point: three windowed curves
    Fig1 {
        #[command(flatten)]
        common: CommonArgs,
        /// Observation times (comma separated)
        #[arg(long = "T", value_delimiter = ',', default_values_t = vec![2000.0, 700.0, 100.0])]
        t_obs: Vec<f64>,
        /// Also write an SVG overlay of the curves
        #[arg(long)]
        svg: bool,
        /// Prominence threshold for the peak report, as a fraction of each curve's max
        #[arg(long, default_value_t = 0.01)]
        prominence: f64,
        #[arg(long, default_value_t = 20)]
        n_modes: usize,
    },
    /// Apparent-source reconstruction under a Lorentzian window; writes acausal.csv
    Acausal {
        #[command(flatten)]
        common: CommonArgs,
        /// Observation time T of the Lorentzian window
        #[arg(long = "t-obs", default_value_t = 100.0)]
        t_obs: f64,
    },
    /// CTP identity report; nonzero exit on violations
    CtpCheck {
        #[command(flatten)]
        common: CommonArgs,
        /// Perturb the inert symmetric block before the response check
        #[arg(long)]
        perturb_dbar: bool,
        /// Deliberately break the consistency identity (negative control)
        #[arg(long)]
        break_consistency: bool,
    },
}

/// Split `--path.with.dots=value` (or `--path.with.dots value`) overrides out
/// of the raw argument list before clap sees it.
pub fn extract_overrides(args: Vec<String>) -> (Vec<String>, Vec<(String, String)>) {
    let mut rest = Vec::new();
    let mut overrides = Vec::new();
    let mut it = args.into_iter().peekable();
    while let Some(arg) = it.next() {
        if let Some(body) = arg.strip_prefix("--") {
            let looks_dotted = body.split('=').next().is_some_and(|p| p.contains('.'));
            if looks_dotted {
                if let Some((path, value)) = body.split_once('=') {
                    overrides.push((path.to_string(), value.to_string()));
                } else if let Some(value) = it.peek().cloned() {
                    it.next();
                    overrides.push((body.to_string(), value));
                }
                continue;
            }
        }
        rest.push(arg);
    }
    (rest, overrides)
}

pub fn run(args: Vec<String>) -> u8 {
    let (rest, overrides) = extract_overrides(args);
    let cli = match Cli::try_parse_from(rest) {
        Ok(c) => c,
        Err(e) => {
            // keep clap's own help/version behaviour
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Simulate { common, store_bath } => cmd_simulate(&common, &overrides, store_bath),
        Command::Green { common, arrow } => cmd_green(&common, &overrides, &arrow),
        Command::Spectral { common, window, t_obs, k, omega_min, omega_max, n_omega } => {
            cmd_spectral(&common, &overrides, &window, t_obs, k, omega_min, omega_max, n_omega)
        }
        Command::Fig1 { common, t_obs, svg, prominence, n_modes } => {
            cmd_fig1(&common, &t_obs, svg, prominence, n_modes)
        }
        Command::Acausal { common, t_obs } => cmd_acausal(&common, &overrides, t_obs),
        Command::CtpCheck { common, perturb_dbar, break_consistency } => {
            cmd_ctp_check(&common, &overrides, perturb_dbar, break_consistency)
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

fn load_config(common: &CommonArgs, overrides: &[(String, String)]) -> Result<RunConfig, CliError> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("this subcommand needs --config <file>".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
    if !overrides.is_empty() {
        value = apply_overrides(value, overrides).map_err(CliError::Config)?;
    }
    RunConfig::parse(&value.to_string()).map_err(CliError::Config)
}

fn out_dir(common: &CommonArgs, cfg: Option<&RunConfig>) -> Result<PathBuf, CliError> {
    let dir = common
        .out_dir
        .clone()
        .or_else(|| std::env::var(OUT_DIR_ENV).ok().map(PathBuf::from))
        .or_else(|| cfg.and_then(|c| c.output.dir.as_ref().map(PathBuf::from)))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn require_stable(cfg: &RunConfig) -> Result<(), CliError> {
    if let Some(bath) = &cfg.bath {
        let report = stability_check(&cfg.system, bath);
        if !report.stable {
            let inequality = match bath {
                BathSpec::Discrete(_) => "sum_n g_n^2/(m omega_n^2) < m omega0^2",
                BathSpec::Ohmic(_) => "pi g^2/(m omegaD^2) < m omega0^2",
            };
            return Err(CliError::Numeric(format!(
                "unstable model: the stability condition {inequality} is violated (margin {:.6e})",
                report.margin
            )));
        }
    }
    Ok(())
}

fn sigma_for(cfg: &RunConfig) -> SelfEnergyModel {
    match &cfg.bath {
        None => SelfEnergyModel::None,
        Some(BathSpec::Discrete(b)) => SelfEnergyModel::from_discrete(b, cfg.system.mass),
        Some(BathSpec::Ohmic(b)) => SelfEnergyModel::from_ohmic(b, cfg.system.mass),
    }
}

fn cmd_simulate(
    common: &CommonArgs,
    overrides: &[(String, String)],
    store_bath: bool,
) -> Result<(), CliError> {
    let cfg = load_config(common, overrides)?;
    let dir = out_dir(common, Some(&cfg))?;
    require_stable(&cfg)?;
    let grid = cfg
        .grid
        .ok_or_else(|| CliError::Config("simulate needs a \"grid\" section".into()))?;
    let source = cfg
        .source
        .clone()
        .ok_or_else(|| CliError::Config("simulate needs a \"source\" section".into()))?;
    let bath = match &cfg.bath {
        Some(BathSpec::Discrete(b)) => b.clone(),
        Some(BathSpec::Ohmic(_)) => {
            return Err(CliError::Config(
                "simulate integrates microscopic dynamics; an ohmic bath has none (use green)"
                    .into(),
            ))
        }
        // free oscillator: a single decoupled placeholder mode keeps the
        // integrator's bath machinery out of the physics
        None => crate::model::DiscreteBath::new(vec![crate::model::BathMode {
            omega: cfg.system.omega0,
            g: 0.0,
        }])
        .map_err(|e| CliError::Config(e.to_string()))?,
    };
    let opts = EvolveOptions { initial: None, store_bath: store_bath && cfg.bath.is_some() };
    let traj = evolve_full(&cfg.system, &bath, &source, &grid, opts)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let mut traj = traj;
    if cfg.bath.is_none() {
        traj.bath = None;
    }
    output::write_trajectory_csv(&dir.join("trajectory.csv"), &traj)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    println!("wrote {}", dir.join("trajectory.csv").display());
    Ok(())
}

fn default_search_box(cfg: &RunConfig) -> SearchBox {
    let mut scale = cfg.system.omega0;
    if let Some(BathSpec::Discrete(b)) = &cfg.bath {
        for m in &b.modes {
            scale = scale.max(m.omega);
        }
    }
    let im_min = match &cfg.bath {
        // stay clear of the self-energy singularity at -i omegaD
        Some(BathSpec::Ohmic(b)) => -(2.0 * scale).min(0.8 * b.omega_d),
        _ => -2.0 * scale,
    };
    SearchBox { re_min: -1.6 * scale, re_max: 1.6 * scale, im_min, im_max: 0.1 * scale }
}

fn cmd_green(
    common: &CommonArgs,
    overrides: &[(String, String)],
    arrow: &str,
) -> Result<(), CliError> {
    let cfg = load_config(common, overrides)?;
    let dir = out_dir(common, Some(&cfg))?;
    require_stable(&cfg)?;
    let time_arrow = match arrow {
        "forward" => TimeArrow::Forward,
        "backward" => TimeArrow::Backward,
        other => return Err(CliError::Config(format!("unknown arrow '{other}'"))),
    };
    let sigma = sigma_for(&cfg);
    let mut gf = retarded_propagator(
        &cfg.system,
        &sigma,
        &cfg.numerics.frequency,
        cfg.epsilon(),
        time_arrow,
    )
    .map_err(|e| CliError::Numeric(e.to_string()))?;
    let (d_n, d_f) = near_far_split(&gf);
    output::write_green_csv(
        &dir.join("green.csv"),
        gf.grid(),
        &gf.d_r.values,
        &d_n.values,
        &d_f.values,
    )
    .map_err(|e| CliError::Numeric(e.to_string()))?;

    let poles: Vec<Pole> = gf
        .locate_poles(default_search_box(&cfg))
        .map_err(|e| CliError::Numeric(e.to_string()))?
        .to_vec();
    output::write_poles_json(&dir.join("poles.json"), &poles)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    for p in &poles {
        println!(
            "pole at {:+.9e} {:+.9e}i (|Im| = {:.3e}, half-plane: {})",
            p.position.re,
            p.position.im,
            p.position.im.abs(),
            if p.position.im < 0.0 { "lower" } else { "upper" }
        );
    }
    println!("wrote {} and poles.json", dir.join("green.csv").display());
    Ok(())
}

fn modes_for(cfg: &RunConfig) -> Result<NormalModes, CliError> {
    match &cfg.bath {
        Some(BathSpec::Discrete(b)) => {
            diagonalize(&cfg.system, b).map_err(|e| CliError::Numeric(e.to_string()))
        }
        Some(BathSpec::Ohmic(_)) => Err(CliError::Config(
            "spectral needs a discrete model; the ohmic bath has no line spectrum".into(),
        )),
        None => Ok(NormalModes::with_uniform_observed_row(&[cfg.system.omega0])),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_spectral(
    common: &CommonArgs,
    overrides: &[(String, String)],
    window_kind: &str,
    t_obs: f64,
    k: usize,
    omega_min: f64,
    omega_max: f64,
    n_omega: usize,
) -> Result<(), CliError> {
    let cfg = load_config(common, overrides)?;
    let dir = out_dir(common, Some(&cfg))?;
    require_stable(&cfg)?;
    if !(t_obs > 0.0) {
        return Err(CliError::Config("t-obs must be positive".into()));
    }
    let window = match window_kind {
        "gaussian" => Window::gaussian(t_obs),
        "lorentzian" => Window::lorentzian_for_period(t_obs),
        other => return Err(CliError::Config(format!("unknown window '{other}'"))),
    };
    let modes = modes_for(&cfg)?;
    if k >= modes.frequencies.len() {
        return Err(CliError::Config(format!(
            "observed index {k} out of range for {} coordinates",
            modes.frequencies.len()
        )));
    }
    let omegas = linspace(omega_min, omega_max, n_omega.max(2));
    let rho = crate::window::apparent_spectral_function(&modes, k, cfg.system.mass, &window, &omegas);
    output::write_columns_csv(&dir.join("spectral.csv"), "Omega,rho_apparent", &[&omegas, &rho])
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    println!("wrote {}", dir.join("spectral.csv").display());
    Ok(())
}

fn cmd_fig1(
    common: &CommonArgs,
    t_obs: &[f64],
    svg: bool,
    prominence: f64,
    n_modes: usize,
) -> Result<(), CliError> {
    let dir = out_dir(common, None)?;
    if t_obs.is_empty() || t_obs.iter().any(|&t| !(t > 0.0)) {
        return Err(CliError::Config("observation times must be positive".into()));
    }
    // spectrum with a condensation point at 1, observed with uniform weights
    let freqs: Vec<f64> = (1..=n_modes).map(|j| 1.0 + 1.0 / j as f64).collect();
    let modes = NormalModes::with_uniform_observed_row(&freqs);
    // the grid must resolve the narrowest kernel (width 1/T)
    let t_max = t_obs.iter().cloned().fold(0.0, f64::max);
    let n_omega = ((1.2 * t_max * 4.0) as usize).clamp(9601, 4_000_001) | 1;
    let omegas = linspace(0.9, 2.1, n_omega);

    let mut curves: Vec<(String, Vec<f64>)> = Vec::new();
    let mut counts = serde_json::Map::new();
    for &t in t_obs {
        let rho = crate::window::apparent_spectral_function(
            &modes,
            0,
            1.0,
            &Window::gaussian(t),
            &omegas,
        );
        let max = rho.iter().cloned().fold(0.0, f64::max);
        let n_peaks = count_resolved_peaks(&rho, prominence * max);
        counts.insert(format!("T={t}"), serde_json::json!(n_peaks));
        let label = format!("T={t}");
        let path = dir.join(format!("fig1_T{t}.csv"));
        output::write_columns_csv(&path, "Omega,rho_apparent", &[&omegas, &rho])
            .map_err(|e| CliError::Numeric(e.to_string()))?;
        println!(
            "wrote {} ({n_peaks} peaks at {:.2}% prominence)",
            path.display(),
            100.0 * prominence
        );
        curves.push((label, rho));
    }
    output::write_json(
        &dir.join("fig1_peaks.json"),
        &serde_json::json!({"prominence_fraction": prominence, "peak_counts": counts}),
    )
    .map_err(|e| CliError::Numeric(e.to_string()))?;

    if svg {
        let refs: Vec<(&str, &[f64])> = curves
            .iter()
            .map(|(l, c)| (l.as_str(), c.as_slice()))
            .collect();
        output::write_svg_curves(&dir.join("fig1.svg"), &omegas, &refs, "Omega")
            .map_err(|e| CliError::Numeric(e.to_string()))?;
        println!("wrote {}", dir.join("fig1.svg").display());
    }
    Ok(())
}

fn cmd_acausal(
    common: &CommonArgs,
    overrides: &[(String, String)],
    t_obs: f64,
) -> Result<(), CliError> {
    let cfg = load_config(common, overrides)?;
    let dir = out_dir(common, Some(&cfg))?;
    require_stable(&cfg)?;
    if !(t_obs > 0.0) {
        return Err(CliError::Config("t-obs must be positive".into()));
    }
    let eta = 2.0 * PI / t_obs;
    let window = Window::LorentzianFreq { eta };

    // grid sized so the sampled response resolves its own damping
    let fgrid = FrequencyGrid::new(10.0 * cfg.system.omega0, 1 << 15)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let eps = (eta / 20.0).max(21.0 / fgrid.period());
    let sigma = sigma_for(&cfg);
    let gf = retarded_propagator(&cfg.system, &sigma, &fgrid, eps, TimeArrow::Forward)
        .map_err(|e| CliError::Numeric(e.to_string()))?;

    let source = cfg
        .source
        .clone()
        .unwrap_or(SourceProfile::DeltaKick { t0: 0.0, j0: 1.0 });
    let kicks = source
        .as_kicks()
        .ok_or_else(|| CliError::Config("acausal needs a kick source".into()))?;
    let (t_kick, j0) = kicks
        .first()
        .map(|k| (k.t0, k.j0))
        .ok_or_else(|| CliError::Config("acausal needs at least one kick".into()))?;

    let x_obs = windowed_response(&gf, &source, &window, t_kick)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let app = apparent_source(&x_obs, &gf, &window, &source, t_kick)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let smooth_num = apparent_source_smooth_time(&app, &gf, &source);

    // time axis spanning both sides of the kick, inside the transform period
    let span = (3.0 * t_obs).min(fgrid.period() / 3.0);
    let n_t = 2401;
    let tgrid = TimeGrid::new(t_kick - span, t_kick + span, n_t)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let closed = pole_apparent_source(
        Complex64::new(cfg.system.omega0, 0.0),
        eta,
        j0,
        t_kick,
        &tgrid,
    );

    let times = tgrid.times();
    let mut num_re = Vec::with_capacity(n_t);
    let mut num_im = Vec::with_capacity(n_t);
    let mut closed_re = Vec::with_capacity(n_t);
    let mut closed_im = Vec::with_capacity(n_t);
    let num_at = |t: f64| -> Complex64 {
        crate::transform::interp_periodic(&fgrid, &smooth_num, t)
    };
    for (i, &t) in times.iter().enumerate() {
        let v = num_at(t);
        num_re.push(v.re);
        num_im.push(v.im);
        closed_re.push(closed.smooth[i].re);
        closed_im.push(closed.smooth[i].im);
    }
    output::write_columns_csv(
        &dir.join("acausal.csv"),
        "t,re_j_num,im_j_num,re_j_closed,im_j_closed",
        &[&times, &num_re, &num_im, &closed_re, &closed_im],
    )
    .map_err(|e| CliError::Numeric(e.to_string()))?;

    let num_series: Vec<Complex64> = num_re
        .iter()
        .zip(&num_im)
        .map(|(&r, &i)| Complex64::new(r, i))
        .collect();
    let neg_mass_num = trapezoid_mass(&tgrid, &num_series, t_kick);
    let neg_mass_closed = closed.negative_time_mass();
    let neg_mass_closed_analytic = closed.negative_time_mass_closed(eta);
    output::write_json(
        &dir.join("acausal_report.json"),
        &serde_json::json!({
            "t_obs": t_obs,
            "eta": eta,
            "epsilon": eps,
            "route_residual": app.route_residual,
            "neg_time_mass_numerical": neg_mass_num,
            "neg_time_mass_closed_form": neg_mass_closed,
            "neg_time_mass_closed_analytic": neg_mass_closed_analytic,
        }),
    )
    .map_err(|e| CliError::Numeric(e.to_string()))?;
    println!(
        "wrote {} (t<0 mass: numerical {neg_mass_num:.3e}, closed form {neg_mass_closed:.3e})",
        dir.join("acausal.csv").display()
    );
    Ok(())
}

fn cmd_ctp_check(
    common: &CommonArgs,
    overrides: &[(String, String)],
    perturb_dbar: bool,
    break_consistency: bool,
) -> Result<(), CliError> {
    let cfg = load_config(common, overrides)?;
    let dir = out_dir(common, Some(&cfg))?;
    let sys = cfg.system;
    let hbar = cfg.numerics.hbar;

    // tau anti-conjugation on a folded kicked trajectory
    let bath = crate::model::DiscreteBath::new(vec![crate::model::BathMode {
        omega: sys.omega0,
        g: 0.0,
    }])
    .map_err(|e| CliError::Config(e.to_string()))?;
    let fold_grid = TimeGrid::new(0.0, 8.0 / sys.omega0, 16_001)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let traj = evolve_full(
        &sys,
        &bath,
        &SourceProfile::kick(0.0, 1.0),
        &fold_grid,
        Default::default(),
    )
    .map_err(|e| CliError::Numeric(e.to_string()))?;
    let fold = lift_trajectory(&traj).map_err(|e| CliError::Numeric(e.to_string()))?;
    let s = ctp_action(&sys, &fold, cfg.epsilon(), None);
    let s_tau = ctp_action(&sys, &tau_exchange(&fold), cfg.epsilon(), None);
    let tau_residual = (s_tau + s.conj()).norm();

    // quantum block identities on a resolvable grid
    let fgrid = FrequencyGrid::new(50.0 * sys.omega0, 1 << 14)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let eps = (0.05 * sys.omega0).max(21.0 / fgrid.period());
    let q = quantum_ctp_propagator(&sys, hbar, eps, &fgrid);
    let mut components = q.components.clone();
    if break_consistency {
        let mid = fgrid.n_samples / 2;
        components.pm[mid] += Complex64::new(0.1, 0.05);
    }
    let consistency_residual = check_consistency(&components);

    // Dbar independence of the physical response
    let grid_t = TimeGrid::new(0.0, 20.0 / sys.omega0, 401)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let source = SourceProfile::kick(0.0, 1.0);
    let (xp_base, _) = physical_response(&q.block, &source, &grid_t)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let d_bar2: Vec<Complex64> = if perturb_dbar {
        // deterministic even perturbation
        (0..fgrid.n_samples)
            .map(|k| {
                let w = fgrid.omega(k);
                q.block.d_bar[k] + Complex64::new(0.5 * (w * w / 100.0).cos(), 0.0)
            })
            .collect()
    } else {
        q.block
            .d_bar
            .iter()
            .map(|v| v + Complex64::new(1.0, 0.0))
            .collect()
    };
    let perturbed = CtpBlock {
        grid: fgrid,
        d_n: q.block.d_n.clone(),
        d_f: q.block.d_f.clone(),
        d_bar: d_bar2,
    };
    let (xp_pert, _) = physical_response(&perturbed, &source, &grid_t)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let dbar_independence_residual = xp_base
        .iter()
        .zip(&xp_pert)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    // quantum retarded combination against hbar x classical kernel
    let gf = retarded_propagator(&sys, &SelfEnergyModel::None, &fgrid, eps, TimeArrow::Forward)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let kt_q = crate::transform::freq_to_time(&fgrid, &q.block.retarded());
    let kt_c = crate::transform::freq_to_time(&fgrid, &gf.d_r.values);
    let mut retarded_match_error: f64 = 0.0;
    for m in 0..fgrid.n_samples {
        let t = fgrid.fold_time(m);
        if (0.0..=20.0 / sys.omega0).contains(&t) {
            retarded_match_error = retarded_match_error.max((kt_q[m] - hbar * kt_c[m]).norm());
        }
    }

    // decoherence weights along a ray of bump amplitudes
    let kernel = invert_block(&q.block);
    let wgrid = TimeGrid::new(0.0, 10.0 / sys.omega0, 201)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let tk = TimeKernel::from_kbar(&fgrid, &kernel.k_bar, &wgrid);
    let bump: Vec<f64> = wgrid
        .times()
        .iter()
        .map(|&t| (-(t - 5.0 / sys.omega0) * (t - 5.0 / sys.omega0)).exp())
        .collect();
    let mut weight_samples = Vec::new();
    for amp in [0.0, 0.5, 1.0, 1.5, 2.0] {
        let y: Vec<f64> = bump.iter().map(|v| amp * v).collect();
        let w = decoherence_weight(&tk, &y, hbar).map_err(|e| CliError::Numeric(e.to_string()))?;
        weight_samples.push(serde_json::json!({"amplitude": amp, "weight": w}));
    }

    let report = serde_json::json!({
        "tau_residual": tau_residual,
        "consistency_residual": consistency_residual,
        "dbar_independence_residual": dbar_independence_residual,
        "retarded_match_error": retarded_match_error,
        "kbar_split_residual": kernel.kbar_split_residual,
        "weight_samples": weight_samples,
    });
    output::write_json(&dir.join("ctp_report.json"), &report)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    println!("{}", serde_json::to_string_pretty(&report).unwrap());

    let ok = tau_residual <= 1e-12
        && consistency_residual <= 1e-10
        && dbar_independence_residual <= 1e-10
        && retarded_match_error <= 1e-6;
    if ok {
        Ok(())
    } else {
        Err(CliError::CtpViolation(format!(
            "identity violation: tau {tau_residual:.3e}, consistency {consistency_residual:.3e}, \
             dbar {dbar_independence_residual:.3e}, retarded {retarded_match_error:.3e}"
        )))
    }
}

/// Path of a written artifact for tests.
pub fn artifact(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
