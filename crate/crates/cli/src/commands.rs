//! Subcommand implementations for the `ringlab` binary.
//!
//! Every subcommand resolves each setting as: command-line flag if given,
//! else config-file key (same name, `-`/`_` interchangeable), else the
//! documented default. The effective configuration is echoed into the JSON
//! sidecar of every artifact the command writes.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use num_complex::Complex;

use ringlab::elliptic::{self, EllipticParameter};
use ringlab::experiments::{self, ScanStatus};
use ringlab::gpe_dynamics::{self, Mode};
use ringlab::ring_particle;
use ringlab::snapshot::{self, SnapshotMeta};
use ringlab::soliton_analytic::{self, StationarySolution};
use ringlab::{Error, Result};
use ringlab::{EvolutionConfig64, Observables64, RingWavefunction64, SweepConfig64};

use crate::config::{parse_grid_sizes, parse_values, Settings};

/// Largest real- or imaginary-time step used when none is requested: 1e-3,
/// shrunk whenever the kinetic stability margin of the grid demands it.
fn auto_dt(n: usize, alpha: f64) -> f64 {
    let reach = n as f64 / 2.0 + alpha.abs() + 1.0;
    f64::min(1e-3, 5.0 / (reach * reach))
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}

fn print_observables(obs: &Observables64) {
    println!("  norm = {}", obs.norm);
    println!("  energy = {}", obs.energy);
    println!("  mu = {}", obs.chem_potential);
    println!("  current = {}", obs.current);
    println!("  centroid angle = {}", obs.centroid_angle);
    println!("  centroid magnitude = {}", obs.centroid_magnitude);
}

fn print_branch(sol: &StationarySolution<f64>) -> Result<()> {
    println!("branch = {}", sol.branch().label());
    if let Some(p) = sol.elliptic_parameter() {
        println!("  m = {}", p.m());
        println!("  complement = {}", p.complement());
    }
    if let Some(r) = sol.amplitude_r() {
        println!("  r = {r}");
    }
    println!("  mu = {}", sol.chem_potential());
    println!("  energy = {}", sol.energy_functional()?);
    Ok(())
}

/// Loads a profile from `path` and cross-checks an explicitly requested grid
/// size against it.
fn load_profile(path: &str, n_flag: Option<usize>) -> Result<RingWavefunction64> {
    let psi = snapshot::read_profile(Path::new(path))?;
    if let Some(n) = n_flag {
        if n != psi.grid_size() {
            return Err(Error::Precondition(format!(
                "profile {path} has {} points but --n {n} was requested",
                psi.grid_size()
            )));
        }
    }
    Ok(psi)
}

fn sweep_echo(cfg: &SweepConfig64) -> serde_json::Value {
    serde_json::json!({
        "N": cfg.grid_size,
        "relax_dt": cfg.relax_dt,
        "relax_steps": cfg.relax_steps,
        "relax_tol": cfg.relax_tol,
        "polish_tol": cfg.polish_tol,
        "polish_iters": cfg.polish_iters,
        "evolve_dt": cfg.evolve_dt,
        "evolve_time": cfg.evolve_time,
        "snapshot_every": cfg.snapshot_every,
    })
}

// ---------------------------------------------------------------------------
// elliptic

#[derive(Args, Debug)]
pub struct EllipticArgs {
    /// Elliptic parameter m in [0, 1)
    #[arg(long)]
    pub m: Option<f64>,
    /// Complementary parameter 1 − m in (0, 1]
    #[arg(long)]
    pub complement: Option<f64>,
    /// Also evaluate sn, cn, dn at this argument
    #[arg(long, allow_negative_numbers = true)]
    pub u: Option<f64>,
    /// Solve E(m)·K(m) = target for m instead of evaluating at a given m
    #[arg(long)]
    pub invert_target: Option<f64>,
}

pub fn run_elliptic(args: EllipticArgs, settings: &Settings) -> Result<()> {
    let m = settings.resolve_opt("m", args.m)?;
    let complement = settings.resolve_opt("complement", args.complement)?;
    let u = settings.resolve_opt("u", args.u)?;
    let target = settings.resolve_opt("invert_target", args.invert_target)?;

    let p = match (target, m, complement) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
            return Err(Error::Precondition(
                "--invert-target cannot be combined with --m or --complement".into(),
            ))
        }
        (Some(t), None, None) => {
            let p = elliptic::invert_product(t)?;
            let (k, e) = elliptic::complete_ke(p)?;
            println!("target = {t}");
            println!("residual = {}", (e * k - t).abs());
            p
        }
        (None, Some(_), Some(_)) => {
            return Err(Error::Precondition(
                "pass exactly one of --m or --complement".into(),
            ))
        }
        (None, Some(m), None) => EllipticParameter::new(m)?,
        (None, None, Some(mc)) => EllipticParameter::from_complement(mc)?,
        (None, None, None) => {
            return Err(Error::Precondition(
                "pass one of --m, --complement, or --invert-target".into(),
            ))
        }
    };

    let (k, e) = elliptic::complete_ke(p)?;
    println!("m = {}", p.m());
    println!("complement = {}", p.complement());
    println!("K = {k}");
    println!("E = {e}");
    println!("EK = {}", e * k);
    if let Some(u) = u {
        let j = elliptic::jacobi_elliptic(u, p)?;
        println!("u = {u}");
        println!("sn = {}", j.sn);
        println!("cn = {}", j.cn);
        println!("dn = {}", j.dn);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// ring

#[derive(Args, Debug)]
pub struct RingArgs {
    /// Flux through the ring in units of the flux quantum
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Degeneracy tolerance for the ground-level selection
    #[arg(long)]
    pub tie_tol: Option<f64>,
    /// Half-width of the level window listed around the flux
    #[arg(long)]
    pub window: Option<i64>,
}

pub fn run_ring(args: RingArgs, settings: &Settings) -> Result<()> {
    let alpha: f64 = settings.resolve_required("alpha", args.alpha)?;
    let tie_tol = settings.resolve("tie_tol", args.tie_tol, ring_particle::DEFAULT_TIE_TOL)?;
    let window = settings.resolve("window", args.window, 2i64)?;
    if window < 0 {
        return Err(Error::Precondition(format!(
            "window must be nonnegative, got {window}"
        )));
    }

    println!("alpha = {alpha}");
    let ground = ring_particle::ground_level(alpha, tie_tol)?;
    let center = ground.levels[0];
    for l in (center - window)..=(center + window) {
        println!(
            "l = {l}  energy = {}  velocity = {}",
            ring_particle::level_energy(l, alpha),
            ring_particle::level_velocity(l, alpha)
        );
    }
    let labels: Vec<String> = ground.levels.iter().map(|l| l.to_string()).collect();
    println!("ground levels = {}", labels.join(","));
    println!("ground energy = {}", ground.energy);
    println!("degenerate = {}", ground.degenerate);
    for &l in &ground.levels {
        println!(
            "ground velocity[{l}] = {}",
            ring_particle::level_velocity(l, alpha)
        );
    }
    match ring_particle::modified_time_reversal(center, alpha) {
        Ok(_) => {
            for &l in &ground.levels {
                let image = ring_particle::modified_time_reversal(l, alpha)?;
                println!("time reversal: {l} -> {image}");
            }
        }
        Err(Error::NonIntegerImage { .. }) => {
            println!("time reversal: undefined (2*alpha is not an integer)");
        }
        Err(e) => return Err(e),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// stationary

/// Couplings this close to critical are treated as exactly critical, so that
/// a decimal approximation of the threshold prints both degenerate branches.
const CRITICAL_SNAP_TOL: f64 = 1e-6;

#[derive(Args, Debug)]
pub struct StationaryArgs {
    /// Attractive coupling strength
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Angle of the density peak in the sampled profile
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Grid size for the sampled profile written with --out
    #[arg(long)]
    pub n: Option<usize>,
    /// Write the selected branch profile (plus JSON sidecar) here
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run_stationary(args: StationaryArgs, settings: &Settings) -> Result<()> {
    let mut lambda: f64 = settings.resolve_required("lambda", args.lambda)?;
    let beta = settings.resolve("beta", args.beta, 0.0)?;
    let n = settings.resolve("n", args.n, 256usize)?;
    let out = settings.resolve_opt::<PathBuf>("out", args.out)?;

    let critical = soliton_analytic::critical_coupling::<f64>();
    if lambda != critical && (lambda - critical).abs() < CRITICAL_SNAP_TOL {
        println!("note: lambda {lambda} treated as the critical coupling {critical}");
        lambda = critical;
    }
    println!("lambda = {lambda}");
    println!("critical = {critical}");

    let uniform = soliton_analytic::uniform_branch(lambda)?;
    print_branch(&uniform)?;
    match soliton_analytic::solve_soliton_branch(lambda) {
        Ok(sol) => print_branch(&sol)?,
        Err(Error::BelowCritical { .. }) => {
            println!("branch = soliton");
            println!("  (does not exist below the critical coupling)");
        }
        Err(e) => return Err(e),
    }
    let selected = soliton_analytic::select_ground_branch(lambda)?;
    println!("selected = {}", selected.branch().label());

    if let Some(path) = out {
        let psi = selected.with_beta(beta).sample_profile(n)?;
        let obs = gpe_dynamics::measure(&psi, 0.0, lambda);
        let cfg = EvolutionConfig64 {
            dt: 0.0,
            steps: 0,
            alpha: 0.0,
            lambda,
            mode: Mode::RealTime,
        };
        let echo = serde_json::json!({
            "subcommand": "stationary",
            "lambda": lambda,
            "beta": beta,
            "N": n,
            "branch": selected.branch().label(),
            "out": path.display().to_string(),
        });
        let meta = SnapshotMeta::new(n, &cfg, 0.0, &obs).with_config(echo);
        snapshot::write_snapshot(&path, &psi, &meta)?;
        println!("wrote {}", path.display());
        println!("wrote {}", snapshot::sidecar_path(&path).display());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// relax

#[derive(Args, Debug)]
pub struct RelaxArgs {
    /// Attractive coupling strength
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Flux through the ring
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Grid size (power of two, at least 16)
    #[arg(long)]
    pub n: Option<usize>,
    /// Imaginary-time step; defaults to the largest stable choice up to 1e-3
    #[arg(long)]
    pub dt: Option<f64>,
    /// Step cap for the relaxation
    #[arg(long)]
    pub steps: Option<u64>,
    /// Per-step stall tolerance on the chemical potential
    #[arg(long)]
    pub tol: Option<f64>,
    /// Skip the stationary-state polish stage after relaxation
    #[arg(long)]
    pub skip_polish: bool,
    /// Eigen-residual tolerance of the polish stage
    #[arg(long)]
    pub polish_tol: Option<f64>,
    /// Iteration cap of the polish stage
    #[arg(long)]
    pub polish_iters: Option<u64>,
    /// Initial state: auto | uniform | ripple | <profile file>
    #[arg(long)]
    pub seed: Option<String>,
    /// Write the final profile (plus JSON sidecar) here
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn build_seed(choice: &str, n_flag: Option<usize>, lambda: f64) -> Result<RingWavefunction64> {
    let n = n_flag.unwrap_or(128);
    match choice {
        "auto" => gpe_dynamics::default_relaxation_seed(n, lambda),
        "uniform" => RingWavefunction64::uniform(n),
        "ripple" => {
            let amp = std::f64::consts::TAU.sqrt().recip();
            RingWavefunction64::from_fn(n, |phi: f64| {
                Complex::new(amp * (1.0 + 0.1 * phi.cos()), 0.0)
            })?
            .normalized()
        }
        path => load_profile(path, n_flag),
    }
}

pub fn run_relax(args: RelaxArgs, settings: &Settings) -> Result<()> {
    let lambda: f64 = settings.resolve_required("lambda", args.lambda)?;
    let alpha = settings.resolve("alpha", args.alpha, 0.0)?;
    let seed_choice = settings.resolve("seed", args.seed, "auto".to_string())?;
    let n_flag = settings.resolve_opt("n", args.n)?;
    let seed = build_seed(&seed_choice, n_flag, lambda)?;
    let n = seed.grid_size();
    let dt = settings.resolve("dt", args.dt, auto_dt(n, alpha))?;
    let steps = settings.resolve("steps", args.steps, 2_000_000u64)?;
    let tol = settings.resolve("tol", args.tol, 1e-7)?;
    let polish = !args.skip_polish && settings.resolve("polish", None, true)?;
    let polish_tol = settings.resolve("polish_tol", args.polish_tol, 1e-9)?;
    let polish_iters = settings.resolve("polish_iters", args.polish_iters, 20_000u64)?;
    let out = settings.resolve_opt::<PathBuf>("out", args.out)?;
    check_positive("dt", dt)?;

    let cfg = EvolutionConfig64 {
        dt,
        steps,
        alpha,
        lambda,
        mode: Mode::ImaginaryTime,
    };
    let (relaxed, relaxed_obs) = gpe_dynamics::relax_ground_state(&seed, &cfg, tol)?;
    println!("relaxation:");
    print_observables(&relaxed_obs);
    let (psi, obs) = if polish {
        let (psi, obs) = gpe_dynamics::polish_stationary_state(
            &relaxed,
            alpha,
            lambda,
            polish_tol,
            polish_iters,
        )?;
        println!("polish:");
        print_observables(&obs);
        (psi, obs)
    } else {
        (relaxed, relaxed_obs)
    };
    println!(
        "residual = {}",
        experiments::eigen_residual(&psi, alpha, lambda, obs.chem_potential)
    );
    if alpha == 0.0 {
        let reference = soliton_analytic::select_ground_branch(lambda)?;
        println!("analytic branch = {}", reference.branch().label());
        println!("analytic mu = {}", reference.chem_potential());
        println!(
            "mu gap = {}",
            (obs.chem_potential - reference.chem_potential()).abs()
        );
        println!(
            "profile distance = {}",
            gpe_dynamics::aligned_profile_distance(&psi, &reference)?
        );
    }

    if let Some(path) = out {
        let echo = serde_json::json!({
            "subcommand": "relax",
            "lambda": lambda,
            "alpha": alpha,
            "N": n,
            "dt": dt,
            "steps": steps,
            "tol": tol,
            "polish": polish,
            "polish_tol": polish_tol,
            "polish_iters": polish_iters,
            "seed": seed_choice,
            "out": path.display().to_string(),
        });
        let meta = SnapshotMeta::new(n, &cfg, 0.0, &obs).with_config(echo);
        snapshot::write_snapshot(&path, &psi, &meta)?;
        println!("wrote {}", path.display());
        println!("wrote {}", snapshot::sidecar_path(&path).display());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// evolve

#[derive(Args, Debug)]
pub struct EvolveArgs {
    /// Attractive coupling strength
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Flux through the ring
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Grid size (power of two, at least 16)
    #[arg(long)]
    pub n: Option<usize>,
    /// Real-time step; defaults to the largest stable choice up to 1e-3
    #[arg(long)]
    pub dt: Option<f64>,
    /// Total evolution time, rounded to whole steps
    #[arg(long)]
    pub time: Option<f64>,
    /// Number of steps (alternative to --time)
    #[arg(long)]
    pub steps: Option<u64>,
    /// Write a snapshot every this many steps (0 disables the series)
    #[arg(long)]
    pub snapshot_every: Option<usize>,
    /// Initial state: auto | uniform | <profile file>
    #[arg(long)]
    pub initial: Option<String>,
    /// Directory that receives snapshot files
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Filename prefix of the snapshot series
    #[arg(long)]
    pub prefix: Option<String>,
}

fn build_initial(choice: &str, n_flag: Option<usize>, lambda: f64) -> Result<RingWavefunction64> {
    let n = n_flag.unwrap_or(128);
    match choice {
        "auto" => soliton_analytic::select_ground_branch(lambda)?.sample_profile(n),
        "uniform" => RingWavefunction64::uniform(n),
        path => load_profile(path, n_flag),
    }
}

pub fn run_evolve(args: EvolveArgs, settings: &Settings) -> Result<()> {
    let lambda: f64 = settings.resolve_required("lambda", args.lambda)?;
    let alpha = settings.resolve("alpha", args.alpha, 0.0)?;
    let initial = settings.resolve("initial", args.initial, "auto".to_string())?;
    let n_flag = settings.resolve_opt("n", args.n)?;
    let psi0 = build_initial(&initial, n_flag, lambda)?;
    let n = psi0.grid_size();
    let dt = settings.resolve("dt", args.dt, auto_dt(n, alpha))?;
    check_positive("dt", dt)?;
    let time = settings.resolve_opt("time", args.time)?;
    let steps_given = settings.resolve_opt("steps", args.steps)?;
    let steps = match (time, steps_given) {
        (Some(_), Some(_)) => {
            return Err(Error::Precondition(
                "pass either --time or --steps, not both".into(),
            ))
        }
        (None, Some(s)) => s,
        (Some(t), None) => {
            check_positive("time", t)?;
            (t / dt).round().max(1.0) as u64
        }
        (None, None) => (10.0 / dt).round() as u64,
    };
    let snapshot_every = settings.resolve("snapshot_every", args.snapshot_every, 0usize)?;
    let out_dir = settings.resolve("out_dir", args.out_dir.clone(), PathBuf::from("."))?;
    let prefix = settings.resolve("prefix", args.prefix, "state".to_string())?;

    let cfg = EvolutionConfig64 {
        dt,
        steps,
        alpha,
        lambda,
        mode: Mode::RealTime,
    };
    let initial_obs = gpe_dynamics::measure(&psi0, alpha, lambda);
    let run = gpe_dynamics::evolve(&psi0, &cfg, snapshot_every)?;
    let final_obs = gpe_dynamics::measure(&run.final_state, alpha, lambda);

    println!("N = {n}");
    println!("dt = {dt}");
    println!("steps = {steps}");
    println!("t final = {}", dt * steps as f64);
    println!("final state:");
    print_observables(&final_obs);
    println!("norm drift = {}", (final_obs.norm - initial_obs.norm).abs());
    println!(
        "energy drift = {}",
        (final_obs.energy - initial_obs.energy).abs()
    );

    let echo = serde_json::json!({
        "subcommand": "evolve",
        "lambda": lambda,
        "alpha": alpha,
        "N": n,
        "dt": dt,
        "steps": steps,
        "snapshot_every": snapshot_every,
        "initial": initial,
        "out_dir": out_dir.display().to_string(),
        "prefix": prefix,
    });
    std::fs::create_dir_all(&out_dir)?;
    if snapshot_every > 0 {
        for (t, psi) in &run.snapshots {
            let step = (t / dt).round() as u64;
            let path = out_dir.join(format!("{prefix}_{step:06}.dat"));
            let obs = gpe_dynamics::measure(psi, alpha, lambda);
            let meta = SnapshotMeta::new(n, &cfg, *t, &obs).with_config(echo.clone());
            snapshot::write_snapshot(&path, psi, &meta)?;
        }
        println!(
            "wrote {} snapshots to {}",
            run.snapshots.len(),
            out_dir.display()
        );
        match gpe_dynamics::drift_fit(&run.snapshots) {
            Ok(fit) => {
                println!("drift rate = {}", fit.rate);
                println!("drift residual = {}", fit.residual_rms);
            }
            Err(Error::NoLump { .. }) => {
                println!("drift rate = n/a (no localized lump to track)");
            }
            Err(Error::Precondition(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let final_path = out_dir.join(format!("{prefix}_final.dat"));
    let meta = SnapshotMeta::new(n, &cfg, dt * steps as f64, &final_obs).with_config(echo);
    snapshot::write_snapshot(&final_path, &run.final_state, &meta)?;
    println!("wrote {}", final_path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// boost

#[derive(Args, Debug)]
pub struct BoostArgs {
    /// Attractive coupling strength (must exceed the critical coupling)
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Flux through the ring
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Winding level of the boost; defaults to the slowest drifting choice
    #[arg(long, allow_negative_numbers = true)]
    pub level: Option<i64>,
    /// Grid size (power of two, at least 16)
    #[arg(long)]
    pub n: Option<usize>,
    /// Time at which the boosted state is evaluated
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
    /// Write the boosted profile (plus JSON sidecar) here
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run_boost(args: BoostArgs, settings: &Settings) -> Result<()> {
    let lambda: f64 = settings.resolve_required("lambda", args.lambda)?;
    let alpha = settings.resolve("alpha", args.alpha, 0.0)?;
    let n = settings.resolve("n", args.n, 256usize)?;
    let t = settings.resolve("t", args.t, 0.0)?;
    let level = settings.resolve("level", args.level, gpe_dynamics::minimal_boost_level(alpha))?;
    let out = settings.resolve_opt::<PathBuf>("out", args.out)?;

    let sol = soliton_analytic::solve_soliton_branch(lambda)?;
    let psi_tilde = sol.sample_profile(n)?;
    let e0 = sol.chem_potential();
    let psi = gpe_dynamics::boost(&psi_tilde, level, alpha, t, e0)?;
    let obs = gpe_dynamics::measure(&psi, alpha, lambda);
    let speed = level as f64 + alpha;

    println!("lambda = {lambda}");
    println!("alpha = {alpha}");
    println!("level = {level}");
    println!(
        "minimal level = {}",
        gpe_dynamics::minimal_boost_level(alpha)
    );
    println!("base mu = {e0}");
    println!("mu = {}", e0 + speed * speed / 2.0);
    println!("expected drift = {}", -speed);
    println!("t = {t}");
    println!("state:");
    print_observables(&obs);
    let residual = experiments::boost_residual(lambda, alpha, level, n, t)?;
    println!("equation residual = {residual}");

    if let Some(path) = out {
        let cfg = EvolutionConfig64 {
            dt: 0.0,
            steps: 0,
            alpha,
            lambda,
            mode: Mode::RealTime,
        };
        let echo = serde_json::json!({
            "subcommand": "boost",
            "lambda": lambda,
            "alpha": alpha,
            "level": level,
            "N": n,
            "t": t,
            "out": path.display().to_string(),
        });
        let meta = SnapshotMeta::new(n, &cfg, t, &obs).with_config(echo);
        snapshot::write_snapshot(&path, &psi, &meta)?;
        println!("wrote {}", path.display());
        println!("wrote {}", snapshot::sidecar_path(&path).display());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// scan

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ScanMode {
    /// Sweep the coupling at zero flux
    Lambda,
    /// Sweep the flux at a fixed coupling
    Alpha,
}

impl ScanMode {
    fn label(self) -> &'static str {
        match self {
            ScanMode::Lambda => "lambda",
            ScanMode::Alpha => "alpha",
        }
    }
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    /// Sweep variable
    #[arg(long, value_enum)]
    pub mode: Option<ScanMode>,
    /// Coupling values for --mode lambda: list or start:step:stop
    #[arg(long)]
    pub lambdas: Option<String>,
    /// Flux values for --mode alpha: list or start:step:stop
    #[arg(long, allow_negative_numbers = true)]
    pub alphas: Option<String>,
    /// Coupling used for every flux in --mode alpha
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Grid size for the numeric stages
    #[arg(long)]
    pub n: Option<usize>,
    /// Output CSV path; a JSON mirror lands next to it
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Stall tolerance of the relaxation stage
    #[arg(long)]
    pub relax_tol: Option<f64>,
    /// Eigen-residual tolerance of the polish stage
    #[arg(long)]
    pub polish_tol: Option<f64>,
    /// Real-time step of the drift stage
    #[arg(long)]
    pub evolve_dt: Option<f64>,
    /// Total real time of the drift stage
    #[arg(long)]
    pub evolve_time: Option<f64>,
}

fn resolve_sweep_config(
    n: usize,
    args: &ScanArgs,
    settings: &Settings,
) -> Result<SweepConfig64> {
    let mut cfg = SweepConfig64::for_grid(n)?;
    if let Some(v) = settings.resolve_opt("relax_tol", args.relax_tol)? {
        cfg.relax_tol = v;
    }
    if let Some(v) = settings.resolve_opt("polish_tol", args.polish_tol)? {
        cfg.polish_tol = v;
    }
    if let Some(v) = settings.resolve_opt("evolve_dt", args.evolve_dt)? {
        cfg.evolve_dt = v;
    }
    if let Some(v) = settings.resolve_opt("evolve_time", args.evolve_time)? {
        cfg.evolve_time = v;
    }
    Ok(cfg)
}

fn print_status_counts(records: &[experiments::ScanRecord]) {
    let count = |status: fn(&ScanStatus) -> bool| records.iter().filter(|r| status(&r.status)).count();
    println!("rows = {}", records.len());
    println!("ok = {}", count(|s| matches!(s, ScanStatus::Ok)));
    println!(
        "below critical = {}",
        count(|s| matches!(s, ScanStatus::BelowCritical))
    );
    println!(
        "no converge = {}",
        count(|s| matches!(s, ScanStatus::NoConverge))
    );
}

pub fn run_scan(args: ScanArgs, settings: &Settings) -> Result<()> {
    let mode_str =
        settings.resolve_required("mode", args.mode.map(|m| m.label().to_string()))?;
    let mode = match mode_str.as_str() {
        "lambda" => ScanMode::Lambda,
        "alpha" => ScanMode::Alpha,
        other => {
            return Err(Error::Parse(format!(
                "mode must be lambda or alpha, got {other:?}"
            )))
        }
    };
    let n = settings.resolve("n", args.n, 128usize)?;
    let out = settings.resolve("out", args.out.clone(), PathBuf::from("scan.csv"))?;
    let cfg = resolve_sweep_config(n, &args, settings)?;

    let (records, echo) = match mode {
        ScanMode::Lambda => {
            let list = settings.resolve_required("lambdas", args.lambdas)?;
            let lambdas = parse_values(&list)?;
            let records = experiments::scan_lambda(&lambdas, &cfg)?;
            let echo = serde_json::json!({
                "subcommand": "scan",
                "mode": "lambda",
                "lambdas": list,
                "out": out.display().to_string(),
                "sweep": sweep_echo(&cfg),
            });
            (records, echo)
        }
        ScanMode::Alpha => {
            let lambda: f64 = settings.resolve_required("lambda", args.lambda)?;
            let list = settings.resolve_required("alphas", args.alphas)?;
            let alphas = parse_values(&list)?;
            let records = experiments::scan_alpha(&alphas, lambda, &cfg)?;
            let echo = serde_json::json!({
                "subcommand": "scan",
                "mode": "alpha",
                "lambda": lambda,
                "alphas": list,
                "out": out.display().to_string(),
                "sweep": sweep_echo(&cfg),
            });
            (records, echo)
        }
    };

    experiments::write_csv(&out, &records)?;
    let json_path = out.with_extension("json");
    experiments::write_json(&json_path, &records, Some(echo))?;
    print_status_counts(&records);
    println!("csv = {}", out.display());
    println!("json = {}", json_path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// converge

#[derive(Args, Debug)]
pub struct ConvergeArgs {
    /// Attractive coupling strength
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Flux through the ring
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Grid sizes: comma-separated ascending powers of two
    #[arg(long)]
    pub ns: Option<String>,
    /// Time steps: comma-separated, strictly decreasing
    #[arg(long)]
    pub dts: Option<String>,
    /// Output CSV path; a JSON mirror lands next to it
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Stall tolerance of the relaxation stages
    #[arg(long)]
    pub relax_tol: Option<f64>,
    /// Eigen-residual tolerance of the polish stages
    #[arg(long)]
    pub polish_tol: Option<f64>,
}

pub fn run_converge(args: ConvergeArgs, settings: &Settings) -> Result<()> {
    let lambda = settings.resolve("lambda", args.lambda, 3.0)?;
    let alpha = settings.resolve("alpha", args.alpha, 0.3)?;
    let ns = parse_grid_sizes(&settings.resolve("ns", args.ns, "16,32,64".to_string())?)?;
    let dts = parse_values(&settings.resolve("dts", args.dts, "4e-3,2e-3,1e-3".to_string())?)?;
    let out = settings.resolve("out", args.out, PathBuf::from("converge.csv"))?;
    let mut cfg = SweepConfig64::for_grid(*ns.first().ok_or_else(|| {
        Error::Precondition("at least one grid size is required".into())
    })?)?;
    if let Some(v) = settings.resolve_opt("relax_tol", args.relax_tol)? {
        cfg.relax_tol = v;
    }
    if let Some(v) = settings.resolve_opt("polish_tol", args.polish_tol)? {
        cfg.polish_tol = v;
    }

    let (records, summary) = experiments::convergence_table(lambda, alpha, &ns, &dts, &cfg)?;

    experiments::write_csv(&out, &records)?;
    let echo = serde_json::json!({
        "subcommand": "converge",
        "lambda": lambda,
        "alpha": alpha,
        "ns": ns,
        "dts": dts,
        "out": out.display().to_string(),
        "sweep": sweep_echo(&cfg),
    });
    let doc = serde_json::json!({
        "config": echo,
        "records": experiments::records_json(&records),
        "summary": serde_json::to_value(&summary)
            .map_err(|e| Error::Parse(format!("summary serialization failed: {e}")))?,
    });
    let json_path = out.with_extension("json");
    let text = serde_json::to_string_pretty(&doc)
        .map_err(|e| Error::Parse(format!("mirror serialization failed: {e}")))?;
    snapshot::atomic_write(&json_path, text.as_bytes())?;

    for row in &summary.spatial {
        println!(
            "N = {}  profile error = {}  mu error = {}",
            row.n, row.profile_error, row.mu_error
        );
    }
    for row in &summary.temporal {
        println!("dt = {}  energy drift = {}", row.dt, row.energy_drift);
    }
    let orders: Vec<String> = summary.temporal_orders.iter().map(|o| o.to_string()).collect();
    println!("temporal orders = {}", orders.join(","));
    match summary.temporal_order() {
        Some(order) => println!("temporal order = {order}"),
        None => println!("temporal order = n/a"),
    }
    println!("spatial spectral = {}", summary.spatial_spectral);
    println!("csv = {}", out.display());
    println!("json = {}", json_path.display());
    Ok(())
}
