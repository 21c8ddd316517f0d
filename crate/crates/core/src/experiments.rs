//! Reproducible parameter sweeps: phase diagram over the coupling, drift-rate
//! curve over the flux, and discretization-convergence tables.
//!
//! Each sweep maps its input list onto a list of [`ScanRecord`]s. Records are
//! independent jobs and run in parallel, but output order always follows
//! input order, and every stage is deterministic — identical inputs produce
//! bitwise-identical CSV rows. A failed stage never aborts the sweep: the
//! record's `status` says what failed and every output that depended on the
//! failed stage stays absent (empty CSV cell, JSON `null`) rather than being
//! zero-filled.
//!
//! Artifacts: CSV with the fixed header [`CSV_HEADER`], all floats printed
//! with 17 significant digits so they round-trip exactly, plus a JSON mirror
//! (same keys, one object per record).

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gpe_dynamics::{
    aligned_profile_distance, apply_hamiltonian, default_relaxation_seed, drift_fit, evolve,
    measure, polish_stationary_state, relax_ground_state, EvolutionConfig, Mode, Observables,
    Propagator,
};
use crate::scalar::FftReal;
use crate::soliton_analytic::{
    critical_coupling, select_ground_branch, solve_soliton_branch, uniform_branch, Branch,
};
use crate::wavefunction::{validate_grid_size, RingWavefunction};

/// Fixed CSV header shared by every sweep artifact.
pub const CSV_HEADER: &str = "lambda,alpha,N,dt,seed,m,r,mu_analytic,mu_numeric,\
E_uniform,E_soliton,branch,drift_rate,residual,status";

/// Outcome class of one record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScanStatus {
    /// Every stage of the record ran to completion.
    #[serde(rename = "ok")]
    Ok,
    /// The coupling admits no bright branch; soliton-stage fields are absent.
    #[serde(rename = "below_critical")]
    BelowCritical,
    /// An iterative stage (relaxation, polish, or drift fit) did not reach
    /// its target; fields depending on it are absent.
    #[serde(rename = "no_converge")]
    NoConverge,
}

impl ScanStatus {
    /// Stable lowercase label used in CSV rows.
    pub fn label(self) -> &'static str {
        match self {
            ScanStatus::Ok => "ok",
            ScanStatus::BelowCritical => "below_critical",
            ScanStatus::NoConverge => "no_converge",
        }
    }
}

/// One row of a sweep artifact. Inputs are always present; outputs are
/// `Option` so a failed stage leaves holes instead of fake zeros.
#[derive(Debug, Clone, Serialize)]
pub struct ScanRecord {
    pub lambda: f64,
    pub alpha: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub dt: f64,
    /// Human-readable descriptor of the initial state used by the numeric
    /// stages (part of the reproducibility contract).
    pub seed: String,
    /// Elliptic parameter of the analytic bright branch.
    pub m: Option<f64>,
    /// Amplitude scale of the analytic bright branch.
    pub r: Option<f64>,
    pub mu_analytic: Option<f64>,
    pub mu_numeric: Option<f64>,
    #[serde(rename = "E_uniform")]
    pub e_uniform: Option<f64>,
    #[serde(rename = "E_soliton")]
    pub e_soliton: Option<f64>,
    /// Energetically selected branch label (`uniform` / `soliton`).
    pub branch: Option<String>,
    pub drift_rate: Option<f64>,
    /// Stage-specific quality figure: eigen-residual for stationary-state
    /// rows, drift-fit RMS for drift rows, discretization error for
    /// convergence rows.
    pub residual: Option<f64>,
    pub status: ScanStatus,
}

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f).unwrap_or_default()
}

impl ScanRecord {
    fn blank(lambda: f64, alpha: f64, n: usize, dt: f64, seed: String) -> Self {
        Self {
            lambda,
            alpha,
            n,
            dt,
            seed,
            m: None,
            r: None,
            mu_analytic: None,
            mu_numeric: None,
            e_uniform: None,
            e_soliton: None,
            branch: None,
            drift_rate: None,
            residual: None,
            status: ScanStatus::Ok,
        }
    }

    /// The record as one CSV row under [`CSV_HEADER`] (no trailing newline).
    pub fn csv_row(&self) -> String {
        [
            fmt_f(self.lambda),
            fmt_f(self.alpha),
            self.n.to_string(),
            fmt_f(self.dt),
            self.seed.clone(),
            fmt_opt(self.m),
            fmt_opt(self.r),
            fmt_opt(self.mu_analytic),
            fmt_opt(self.mu_numeric),
            fmt_opt(self.e_uniform),
            fmt_opt(self.e_soliton),
            self.branch.clone().unwrap_or_default(),
            fmt_opt(self.drift_rate),
            fmt_opt(self.residual),
            self.status.label().to_string(),
        ]
        .join(",")
    }
}

/// Renders a full CSV artifact (header plus one row per record).
pub fn render_csv(records: &[ScanRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Writes the CSV artifact atomically (temporary file, then rename).
pub fn write_csv(path: &Path, records: &[ScanRecord]) -> Result<()> {
    crate::snapshot::atomic_write(path, render_csv(records).as_bytes())
}

/// The records as a JSON array with the same keys as the CSV columns.
pub fn records_json(records: &[ScanRecord]) -> serde_json::Value {
    serde_json::to_value(records).expect("scan records serialize infallibly")
}

/// Writes the JSON mirror atomically. With `config`, wraps the array as
/// `{"config": ..., "records": [...]}` so the producing tool's effective
/// configuration travels with the artifact; without it, writes the bare
/// array.
pub fn write_json(
    path: &Path,
    records: &[ScanRecord],
    config: Option<serde_json::Value>,
) -> Result<()> {
    let value = match config {
        Some(cfg) => serde_json::json!({ "config": cfg, "records": records_json(records) }),
        None => records_json(records),
    };
    let text = serde_json::to_string_pretty(&value)
        .map_err(|e| Error::Parse(format!("mirror serialization failed: {e}")))?;
    crate::snapshot::atomic_write(path, text.as_bytes())
}

/// Numeric-stage settings shared by the sweeps.
///
/// `relax_dt` must respect the kinetic-phase bound for the chosen grid;
/// [`SweepConfig::for_grid`] picks a safe default.
#[derive(Debug, Clone, Copy)]
pub struct SweepConfig<T> {
    /// Grid size used by scan_lambda / scan_alpha records.
    pub grid_size: usize,
    /// Imaginary-time step for relaxation stages.
    pub relax_dt: T,
    /// Step cap for relaxation stages.
    pub relax_steps: u64,
    /// Chemical-potential stall tolerance for stationary-state relaxation.
    pub relax_tol: T,
    /// Eigen-residual target of the post-relaxation polish.
    pub polish_tol: T,
    /// Iteration cap of the polish stage.
    pub polish_iters: u64,
    /// Real-time step for drift runs.
    pub evolve_dt: T,
    /// Total real time of a drift run.
    pub evolve_time: T,
    /// Steps between drift-run snapshots.
    pub snapshot_every: usize,
}

impl<T: FftReal> SweepConfig<T> {
    /// Defaults for grid size `n`, with `relax_dt` capped so the kinetic
    /// phase per step stays below π for any flux up to |α| ≤ 1.
    pub fn for_grid(n: usize) -> Result<Self> {
        validate_grid_size(n)?;
        let reach = n as f64 / 2.0 + 1.0;
        let relax_dt = (2.5 / (reach * reach / 2.0)).min(1e-3);
        Ok(Self {
            grid_size: n,
            relax_dt: T::of(relax_dt),
            relax_steps: 2_000_000,
            relax_tol: T::of(1e-7),
            polish_tol: T::of(1e-9),
            polish_iters: 20_000,
            evolve_dt: T::of(1e-3),
            evolve_time: T::of(10.0),
            snapshot_every: 500,
        })
    }

    fn relax_config(&self, alpha: T, lambda: T) -> EvolutionConfig<T> {
        EvolutionConfig {
            dt: self.relax_dt,
            steps: self.relax_steps,
            alpha,
            lambda,
            mode: Mode::ImaginaryTime,
        }
    }
}

/// L² norm of `Hψ − μψ`: how far `psi` is from an exact stationary state of
/// the discrete mean-field operator at chemical potential `mu`.
pub fn eigen_residual<T: FftReal>(psi: &RingWavefunction<T>, alpha: T, lambda: T, mu: T) -> T {
    let h = apply_hamiltonian(psi, alpha, lambda);
    let mut r2 = T::zero();
    for (hj, pj) in h.samples().iter().zip(psi.samples()) {
        r2 += (hj - pj * mu).norm_sqr();
    }
    (psi.weight() * r2).sqrt()
}

/// Phase-diagram sweep over the coupling at zero flux.
///
/// For each λ: solve both analytic branches, pick the energetic winner,
/// relax-and-polish a numeric ground state, and record the analytic–numeric
/// chemical-potential pair. Couplings below the critical value carry
/// `status = below_critical` with the bright-branch fields absent — that is
/// the expected phase verdict, not an abort. Requires positive couplings in
/// ascending order.
pub fn scan_lambda<T: FftReal>(lambdas: &[T], cfg: &SweepConfig<T>) -> Result<Vec<ScanRecord>> {
    for pair in lambdas.windows(2) {
        if !(pair[0] <= pair[1]) {
            return Err(Error::Precondition(
                "coupling list must be sorted ascending".into(),
            ));
        }
    }
    if let Some(bad) = lambdas.iter().find(|l| !(**l > T::zero()) || !l.is_finite()) {
        return Err(Error::Precondition(format!(
            "couplings must be positive and finite, got {bad}"
        )));
    }
    cfg.relax_config(T::zero(), T::one()).validate(cfg.grid_size)?;

    let records = lambdas
        .par_iter()
        .map(|&lambda| scan_lambda_record(lambda, cfg))
        .collect();
    Ok(records)
}

fn scan_lambda_record<T: FftReal>(lambda: T, cfg: &SweepConfig<T>) -> ScanRecord {
    let n = cfg.grid_size;
    let seed_desc = if lambda > critical_coupling::<T>() {
        "uniform_ripple"
    } else {
        "uniform"
    };
    let mut rec = ScanRecord::blank(
        lambda.lossy_f64(),
        0.0,
        n,
        cfg.relax_dt.lossy_f64(),
        seed_desc.to_string(),
    );

    // Analytic stage. The uniform branch exists at every positive coupling.
    let uniform = uniform_branch(lambda).expect("positive coupling validated");
    rec.e_uniform = Some(
        uniform
            .energy_functional()
            .expect("uniform energy is closed-form")
            .lossy_f64(),
    );
    let soliton = match solve_soliton_branch(lambda) {
        Ok(sol) => Some(sol),
        Err(Error::BelowCritical { .. }) => {
            rec.status = ScanStatus::BelowCritical;
            None
        }
        Err(_) => unreachable!("coupling validated positive and finite"),
    };
    if let Some(sol) = &soliton {
        rec.m = sol.elliptic_parameter().map(|p| p.m().lossy_f64());
        rec.r = sol.amplitude_r().map(|r| r.lossy_f64());
        if let Ok(e) = sol.energy_functional() {
            rec.e_soliton = Some(e.lossy_f64());
        }
    }
    let winner = select_ground_branch(lambda).expect("positive coupling validated");
    rec.branch = Some(winner.branch().label().to_string());
    rec.mu_analytic = Some(winner.chem_potential().lossy_f64());

    // Numeric stage: relax, then polish to eigenpair accuracy.
    let seed = match default_relaxation_seed(n, lambda) {
        Ok(s) => s,
        Err(_) => unreachable!("grid validated"),
    };
    let relax_cfg = cfg.relax_config(T::zero(), lambda);
    let relaxed = match relax_ground_state(&seed, &relax_cfg, cfg.relax_tol) {
        Ok(pair) => pair,
        Err(_) => {
            rec.status = ScanStatus::NoConverge;
            return rec;
        }
    };
    match polish_stationary_state(&relaxed.0, T::zero(), lambda, cfg.polish_tol, cfg.polish_iters)
    {
        Ok((psi, obs)) => {
            rec.mu_numeric = Some(obs.chem_potential.lossy_f64());
            rec.residual =
                Some(eigen_residual(&psi, T::zero(), lambda, obs.chem_potential).lossy_f64());
        }
        Err(_) => {
            // Keep the relaxation-grade value; mark the record.
            rec.mu_numeric = Some(relaxed.1.chem_potential.lossy_f64());
            rec.residual = Some(
                eigen_residual(&relaxed.0, T::zero(), lambda, relaxed.1.chem_potential)
                    .lossy_f64(),
            );
            rec.status = ScanStatus::NoConverge;
        }
    }
    rec
}

/// Drift-rate sweep over the flux at a fixed super-critical coupling.
///
/// The numeric ground-state lump is relaxed and polished once at zero flux —
/// where it is a true stationary state — and each flux value gets it dressed
/// with the carrier `e^{i·round(α)·φ}`, the winding that minimizes the
/// resulting speed. Evolving that state in real time at flux α produces a
/// rigidly drifting lump whose fitted angular velocity tracks the distance
/// from α to the nearest integer. Relaxing *at* non-integer flux would not
/// work: the drifting lump is not an imaginary-time fixed point there, and
/// the flow bleeds its current away before the stall criterion triggers.
pub fn scan_alpha<T: FftReal>(
    alphas: &[T],
    lambda: T,
    cfg: &SweepConfig<T>,
) -> Result<Vec<ScanRecord>> {
    let soliton = solve_soliton_branch(lambda)?;
    if let Some(bad) = alphas.iter().find(|a| !a.is_finite()) {
        return Err(Error::Precondition(format!(
            "flux values must be finite, got {bad}"
        )));
    }
    // Shared numeric lump at zero flux; per-record failures (not a global
    // abort) if it cannot be produced.
    let lump: Result<RingWavefunction<T>> = (|| {
        let seed = default_relaxation_seed(cfg.grid_size, lambda)?;
        let relax_cfg = cfg.relax_config(T::zero(), lambda);
        let (coarse, _) = relax_ground_state(&seed, &relax_cfg, cfg.relax_tol)?;
        let (psi, _) = polish_stationary_state(
            &coarse,
            T::zero(),
            lambda,
            cfg.polish_tol,
            cfg.polish_iters,
        )?;
        Ok(psi)
    })();
    let records = alphas
        .par_iter()
        .map(|&alpha| match &lump {
            Ok(psi) => scan_alpha_record(alpha, lambda, &soliton, psi, cfg),
            Err(_) => {
                let winding = alpha.round().lossy_f64() as i64;
                let mut rec = ScanRecord::blank(
                    lambda.lossy_f64(),
                    alpha.lossy_f64(),
                    cfg.grid_size,
                    cfg.evolve_dt.lossy_f64(),
                    format!("lump_carrier_{winding}"),
                );
                rec.status = ScanStatus::NoConverge;
                rec
            }
        })
        .collect();
    Ok(records)
}

fn scan_alpha_record<T: FftReal>(
    alpha: T,
    lambda: T,
    soliton: &crate::soliton_analytic::StationarySolution<T>,
    lump: &RingWavefunction<T>,
    cfg: &SweepConfig<T>,
) -> ScanRecord {
    let n = cfg.grid_size;
    let winding = alpha.round().lossy_f64() as i64;
    let mut rec = ScanRecord::blank(
        lambda.lossy_f64(),
        alpha.lossy_f64(),
        n,
        cfg.evolve_dt.lossy_f64(),
        format!("lump_carrier_{winding}"),
    );
    rec.m = soliton.elliptic_parameter().map(|p| p.m().lossy_f64());
    rec.r = soliton.amplitude_r().map(|r| r.lossy_f64());
    rec.branch = Some(Branch::Soliton.label().to_string());
    // Chemical potential of the drifting lump: flux-free value plus the
    // kinetic offset of the residual speed.
    let speed = alpha - T::of(winding as f64);
    rec.mu_analytic =
        Some((soliton.chem_potential() + speed * speed * T::of(0.5)).lossy_f64());

    // Dress the zero-flux lump with the winding carrier.
    let seed = {
        let samples = lump
            .samples()
            .iter()
            .enumerate()
            .map(|(j, z)| {
                let phi = RingWavefunction::<T>::angle(j, n);
                *z * num_complex::Complex::from_polar(T::one(), T::of(winding as f64) * phi)
            })
            .collect();
        RingWavefunction::from_samples_unchecked(samples)
    };
    rec.mu_numeric = Some(measure(&seed, alpha, lambda).chem_potential.lossy_f64());

    let steps = (cfg.evolve_time / cfg.evolve_dt).round().lossy_f64() as u64;
    let evolve_cfg = EvolutionConfig {
        dt: cfg.evolve_dt,
        steps: steps.max(1),
        alpha,
        lambda,
        mode: Mode::RealTime,
    };
    if evolve_cfg.validate(n).is_err() {
        rec.status = ScanStatus::NoConverge;
        return rec;
    }
    let run = match evolve(&seed, &evolve_cfg, cfg.snapshot_every) {
        Ok(run) => run,
        Err(_) => {
            rec.status = ScanStatus::NoConverge;
            return rec;
        }
    };
    match drift_fit(&run.snapshots) {
        Ok(fit) => {
            rec.drift_rate = Some(fit.rate.lossy_f64());
            rec.residual = Some(fit.residual_rms.lossy_f64());
        }
        Err(_) => {
            // The lump dissolved or never formed; the drifting branch was
            // not reached.
            rec.status = ScanStatus::NoConverge;
        }
    }
    rec
}

/// One spatial-refinement row of a convergence study.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpatialRow {
    /// Grid size.
    #[serde(rename = "N")]
    pub n: usize,
    /// Aligned L² distance between the polished numeric state and the
    /// analytic profile on the same grid.
    pub profile_error: f64,
    /// |μ_numeric − μ_analytic| on that grid.
    pub mu_error: f64,
}

/// One temporal-refinement row of a convergence study.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TemporalRow {
    /// Time step.
    pub dt: f64,
    /// Largest |E(t) − E(0)| observed over the run.
    pub energy_drift: f64,
}

/// Measured discretization behaviour of a [`convergence_table`] run.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceSummary {
    pub spatial: Vec<SpatialRow>,
    pub temporal: Vec<TemporalRow>,
    /// Measured convergence order between consecutive dt rows
    /// (`ln(e_i/e_{i+1}) / ln(dt_i/dt_{i+1})`); ≈ 2 for Strang splitting.
    pub temporal_orders: Vec<f64>,
    /// True when every spatial refinement either shrinks the profile error
    /// by at least ×2 or has already hit the roundoff floor (1e−12).
    pub spatial_spectral: bool,
}

impl ConvergenceSummary {
    /// Mean of the pairwise temporal orders, if any were measurable.
    pub fn temporal_order(&self) -> Option<f64> {
        if self.temporal_orders.is_empty() {
            None
        } else {
            Some(self.temporal_orders.iter().sum::<f64>() / self.temporal_orders.len() as f64)
        }
    }
}

/// Total real time of every temporal-refinement run.
pub const CONVERGENCE_EVOLVE_TIME: f64 = 1.0;

/// Discretization study against the analytic oracle.
///
/// Spatial rows: for each grid size, relax and polish the ground state at
/// coupling `lambda` (zero flux) and record its aligned L² distance to the
/// analytic profile plus the chemical-potential error — these shrink
/// spectrally with N. Temporal rows: on the coarsest grid, evolve a smooth
/// non-stationary state (the analytic lump modulated by `1 + 0.1·cos φ`, at
/// flux `alpha`) over a fixed horizon for each time step and record the
/// worst energy drift — Strang splitting makes these shrink at order ≈ 2,
/// and the measured orders land in the summary.
///
/// Grid sizes must be ascending powers of two; time steps must be positive
/// and descending.
pub fn convergence_table<T: FftReal>(
    lambda: T,
    alpha: T,
    ns: &[usize],
    dts: &[T],
    cfg: &SweepConfig<T>,
) -> Result<(Vec<ScanRecord>, ConvergenceSummary)> {
    for &n in ns {
        validate_grid_size(n)?;
    }
    for pair in ns.windows(2) {
        if pair[0] >= pair[1] {
            return Err(Error::Precondition(
                "grid sizes must be strictly ascending".into(),
            ));
        }
    }
    for &dt in dts {
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(Error::Precondition(format!(
                "time steps must be positive and finite, got {dt}"
            )));
        }
    }
    for pair in dts.windows(2) {
        if !(pair[0] > pair[1]) {
            return Err(Error::Precondition(
                "time steps must be strictly descending".into(),
            ));
        }
    }
    if ns.is_empty() && dts.is_empty() {
        return Ok((
            Vec::new(),
            ConvergenceSummary {
                spatial: Vec::new(),
                temporal: Vec::new(),
                temporal_orders: Vec::new(),
                spatial_spectral: true,
            },
        ));
    }

    let reference = select_ground_branch(lambda)?;
    let branch = reference.branch();
    let mu_exact = reference.chem_potential();

    // Spatial refinement: independent jobs, order preserved.
    let spatial_results: Vec<Result<(ScanRecord, SpatialRow)>> = ns
        .par_iter()
        .map(|&n| -> Result<(ScanRecord, SpatialRow)> {
            let mut grid_cfg = SweepConfig::<T>::for_grid(n)?;
            grid_cfg.relax_tol = cfg.relax_tol;
            grid_cfg.polish_tol = cfg.polish_tol;
            grid_cfg.polish_iters = cfg.polish_iters;
            grid_cfg.relax_steps = cfg.relax_steps;
            let seed_desc = if lambda > critical_coupling::<T>() {
                "uniform_ripple"
            } else {
                "uniform"
            };
            let mut rec = ScanRecord::blank(
                lambda.lossy_f64(),
                0.0,
                n,
                grid_cfg.relax_dt.lossy_f64(),
                seed_desc.to_string(),
            );
            rec.branch = Some(branch.label().to_string());
            rec.mu_analytic = Some(mu_exact.lossy_f64());
            let seed = default_relaxation_seed(n, lambda)?;
            let relax_cfg = grid_cfg.relax_config(T::zero(), lambda);
            let (coarse, _) = relax_ground_state(&seed, &relax_cfg, grid_cfg.relax_tol)?;
            let (psi, obs) = polish_stationary_state(
                &coarse,
                T::zero(),
                lambda,
                grid_cfg.polish_tol,
                grid_cfg.polish_iters,
            )?;
            let err = aligned_profile_distance(&psi, &reference)?;
            let mu_err = (obs.chem_potential - mu_exact).abs();
            rec.mu_numeric = Some(obs.chem_potential.lossy_f64());
            rec.residual = Some(err.lossy_f64());
            Ok((
                rec,
                SpatialRow {
                    n,
                    profile_error: err.lossy_f64(),
                    mu_error: mu_err.lossy_f64(),
                },
            ))
        })
        .collect();

    // Temporal refinement on the coarsest grid.
    let temporal_n = ns.first().copied().unwrap_or(cfg.grid_size);
    let temporal_seed = {
        let base = reference.sample_profile(temporal_n)?;
        let modulated: Vec<_> = base
            .samples()
            .iter()
            .enumerate()
            .map(|(j, z)| {
                let phi = RingWavefunction::<T>::angle(j, temporal_n);
                *z * (T::one() + T::of(0.1) * phi.cos())
            })
            .collect();
        RingWavefunction::new(modulated)?.normalized()?
    };
    let temporal_results: Vec<Result<(ScanRecord, TemporalRow)>> = dts
        .par_iter()
        .map(|&dt| -> Result<(ScanRecord, TemporalRow)> {
            let steps = (T::of(CONVERGENCE_EVOLVE_TIME) / dt).round().lossy_f64() as u64;
            let run_cfg = EvolutionConfig {
                dt,
                steps: steps.max(1),
                alpha,
                lambda,
                mode: Mode::RealTime,
            };
            let mut prop = Propagator::new(temporal_n, run_cfg)?;
            let mut psi = temporal_seed.clone();
            let e0 = prop.observables(&psi).energy;
            let mut worst = T::zero();
            for _ in 0..run_cfg.steps {
                prop.step_in_place(&mut psi);
                let drift = (prop.observables(&psi).energy - e0).abs();
                if drift > worst {
                    worst = drift;
                }
            }
            let mut rec = ScanRecord::blank(
                lambda.lossy_f64(),
                alpha.lossy_f64(),
                temporal_n,
                dt.lossy_f64(),
                "lump_modulated".to_string(),
            );
            rec.branch = Some(branch.label().to_string());
            rec.residual = Some(worst.lossy_f64());
            Ok((
                rec,
                TemporalRow {
                    dt: dt.lossy_f64(),
                    energy_drift: worst.lossy_f64(),
                },
            ))
        })
        .collect();

    let mut records = Vec::with_capacity(ns.len() + dts.len());
    let mut spatial = Vec::with_capacity(ns.len());
    for r in spatial_results {
        let (rec, row) = r?;
        records.push(rec);
        spatial.push(row);
    }
    let mut temporal = Vec::with_capacity(dts.len());
    for r in temporal_results {
        let (rec, row) = r?;
        records.push(rec);
        temporal.push(row);
    }

    let temporal_orders = temporal
        .windows(2)
        .map(|w| (w[0].energy_drift / w[1].energy_drift).ln() / (w[0].dt / w[1].dt).ln())
        .collect();
    let spatial_spectral = spatial.windows(2).all(|w| {
        w[1].profile_error < 0.5 * w[0].profile_error || w[1].profile_error < 1e-12
    });
    Ok((
        records,
        ConvergenceSummary {
            spatial,
            temporal,
            temporal_orders,
            spatial_spectral,
        },
    ))
}

/// Boost-consistency report: constructs the boosted lump at integer winding
/// `l` and flux `alpha` from the flux-free analytic profile and measures how
/// well it solves the time-dependent equation, via the residual of a centered
/// finite-difference time derivative against the Hamiltonian action.
pub fn boost_residual<T: FftReal>(
    lambda: T,
    alpha: T,
    l: i64,
    n: usize,
    t: T,
) -> Result<T> {
    let sol = solve_soliton_branch(lambda)?;
    let profile = sol.sample_profile(n)?;
    let e0 = sol.chem_potential();
    let h = T::of(1e-4);
    let minus = crate::gpe_dynamics::boost(&profile, l, alpha, t - h, e0)?;
    let plus = crate::gpe_dynamics::boost(&profile, l, alpha, t + h, e0)?;
    let mid = crate::gpe_dynamics::boost(&profile, l, alpha, t, e0)?;
    let hpsi = apply_hamiltonian(&mid, alpha, lambda);
    let two_h = h + h;
    let mut r2 = T::zero();
    for ((p, m), hv) in plus.samples().iter().zip(minus.samples()).zip(hpsi.samples()) {
        // i·(dψ/dt) − Hψ should vanish.
        let dpsi_dt = (*p - *m) / two_h;
        let lhs = num_complex::Complex::new(T::zero(), T::one()) * dpsi_dt;
        r2 += (lhs - *hv).norm_sqr();
    }
    Ok((mid.weight() * r2).sqrt())
}

/// Measured observables of a state, as a record row (used by the CLI for
/// one-off diagnostics artifacts).
pub fn observables_record<T: FftReal>(
    psi: &RingWavefunction<T>,
    alpha: T,
    lambda: T,
    dt: f64,
    seed: &str,
) -> (ScanRecord, Observables<T>) {
    let obs = measure(psi, alpha, lambda);
    let mut rec = ScanRecord::blank(
        lambda.lossy_f64(),
        alpha.lossy_f64(),
        psi.grid_size(),
        dt,
        seed.to_string(),
    );
    rec.mu_numeric = Some(obs.chem_potential.lossy_f64());
    rec.residual = Some(eigen_residual(psi, alpha, lambda, obs.chem_potential).lossy_f64());
    (rec, obs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn quick_cfg(n: usize) -> SweepConfig<f64> {
        SweepConfig::for_grid(n).unwrap()
    }

    #[test]
    fn empty_scan_is_empty() {
        let cfg = quick_cfg(64);
        let records = scan_lambda::<f64>(&[], &cfg).unwrap();
        assert!(records.is_empty());
        assert_eq!(render_csv(&records), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn lambda_grid_shows_branch_flip_at_critical() {
        let cfg = quick_cfg(64);
        let lambdas = [1.0f64, 1.5, FRAC_PI_2, 2.0, 3.0];
        let records = scan_lambda(&lambdas, &cfg).unwrap();
        let branches: Vec<&str> = records
            .iter()
            .map(|r| r.branch.as_deref().unwrap())
            .collect();
        assert_eq!(
            branches,
            ["uniform", "uniform", "uniform", "soliton", "soliton"]
        );
        // Sub-critical rows carry the below-critical status and no bright
        // branch fields; the rest are fully populated.
        assert_eq!(records[0].status, ScanStatus::BelowCritical);
        assert!(records[0].m.is_none() && records[0].r.is_none());
        assert!(records[0].e_soliton.is_none());
        assert!(records[0].mu_numeric.is_some());
        assert_eq!(records[4].status, ScanStatus::Ok);
        assert!(records[4].m.is_some() && records[4].e_soliton.is_some());
        // Verdicts agree with the analytic selector everywhere.
        for r in &records {
            let expect = select_ground_branch(r.lambda).unwrap().branch().label();
            assert_eq!(r.branch.as_deref(), Some(expect));
        }
    }

    #[test]
    fn lambda_scan_mu_gap_is_tight() {
        let cfg = quick_cfg(128);
        let records = scan_lambda(&[3.0f64], &cfg).unwrap();
        let r = &records[0];
        assert_eq!(r.status, ScanStatus::Ok);
        let gap = (r.mu_numeric.unwrap() - r.mu_analytic.unwrap()).abs();
        assert!(gap < 1e-6, "mu gap {gap:e}");
        assert!(r.residual.unwrap() < 1e-8);
    }

    #[test]
    fn lambda_scan_rejects_unsorted_or_nonpositive() {
        let cfg = quick_cfg(64);
        assert!(matches!(
            scan_lambda(&[2.0f64, 1.0], &cfg),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            scan_lambda(&[-1.0f64, 2.0], &cfg),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn alpha_scan_requires_supercritical_coupling() {
        let cfg = quick_cfg(64);
        assert!(matches!(
            scan_alpha(&[0.3f64], 1.0, &cfg),
            Err(Error::BelowCritical { .. })
        ));
    }

    #[test]
    fn alpha_scan_drift_tracks_distance_to_integers() {
        let mut cfg = quick_cfg(128);
        // Shorter real-time run than the default production sweep: the fit
        // is already stable over t ∈ [0, 5].
        cfg.evolve_time = 5.0;
        let alphas = [0.0f64, 0.3, -0.3, 1.3];
        let records = scan_alpha(&alphas, 3.0, &cfg).unwrap();
        for r in &records {
            assert_eq!(r.status, ScanStatus::Ok, "record at alpha={}", r.alpha);
        }
        let drift: Vec<f64> = records.iter().map(|r| r.drift_rate.unwrap()).collect();
        assert!(drift[0].abs() < 1e-3, "integer flux drift {:e}", drift[0]);
        assert!((drift[1].abs() - 0.3).abs() < 1e-2, "drift {}", drift[1]);
        // Symmetry under α → −α and periodicity under α → α + 1.
        assert!((drift[1].abs() - drift[2].abs()).abs() < 1e-2);
        assert!((drift[1].abs() - drift[3].abs()).abs() < 1e-2);
        // Seeds record the winding sector.
        assert_eq!(records[1].seed, "lump_carrier_0");
        assert_eq!(records[3].seed, "lump_carrier_1");
    }

    #[test]
    fn csv_round_trip_shape() {
        let cfg = quick_cfg(64);
        let records = scan_lambda(&[1.0f64, 3.0], &cfg).unwrap();
        let csv = render_csv(&records);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let header_cols = CSV_HEADER.split(',').count();
        for line in lines {
            assert_eq!(line.split(',').count(), header_cols, "row: {line}");
        }
        // Sub-critical row has empty m cell, not a zero.
        let row1: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row1[5], "", "m column must be empty below critical");
        assert_eq!(row1[14], "below_critical");
        // All floats parse back exactly.
        let lambda_back: f64 = row1[0].parse().unwrap();
        assert_eq!(lambda_back, 1.0);
    }

    #[test]
    fn identical_inputs_give_bitwise_identical_artifacts() {
        let cfg = quick_cfg(64);
        let a = render_csv(&scan_lambda(&[1.0f64, 2.0], &cfg).unwrap());
        let b = render_csv(&scan_lambda(&[1.0f64, 2.0], &cfg).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn json_mirror_has_csv_keys() {
        let cfg = quick_cfg(64);
        let records = scan_lambda(&[3.0f64], &cfg).unwrap();
        let value = records_json(&records);
        let obj = &value.as_array().unwrap()[0];
        for key in CSV_HEADER.split(',') {
            assert!(obj.get(key).is_some(), "mirror missing key {key}");
        }
        assert_eq!(obj["status"], serde_json::json!("ok"));
        assert_eq!(obj["branch"], serde_json::json!("soliton"));
    }

    #[test]
    fn artifact_files_are_written_atomically() {
        let cfg = quick_cfg(64);
        let records = scan_lambda(&[1.0f64], &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let csv_path = dir.path().join("scan.csv");
        let json_path = dir.path().join("scan.json");
        write_csv(&csv_path, &records).unwrap();
        write_json(&json_path, &records, Some(serde_json::json!({"N": 64}))).unwrap();
        let csv = std::fs::read_to_string(&csv_path).unwrap();
        assert!(csv.starts_with(CSV_HEADER));
        let mirror: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
        assert_eq!(mirror["config"]["N"], serde_json::json!(64));
        assert!(mirror["records"].as_array().unwrap().len() == 1);
        // No stray temporaries left behind.
        let leftovers: Vec<_> = std::fs::read_dir(dir.path())
            .unwrap()
            .filter_map(|e| e.ok())
            .filter(|e| {
                let name = e.file_name().to_string_lossy().into_owned();
                name != "scan.csv" && name != "scan.json"
            })
            .collect();
        assert!(leftovers.is_empty(), "leftover files: {leftovers:?}");
    }

    #[test]
    fn convergence_table_shows_spectral_and_second_order() {
        let cfg = quick_cfg(64);
        let (records, summary) =
            convergence_table(3.0f64, 0.3, &[16, 32, 64], &[4e-3, 2e-3, 1e-3], &cfg).unwrap();
        assert_eq!(records.len(), 6);
        assert!(
            summary.spatial_spectral,
            "spatial errors: {:?}",
            summary.spatial
        );
        // The coarse 16-point grid barely resolves the lump; 64 points are
        // plenty, so the curve must fall steeply.
        assert!(summary.spatial[0].profile_error > summary.spatial[2].profile_error * 10.0);
        let order = summary.temporal_order().unwrap();
        assert!(
            (1.6..=2.4).contains(&order),
            "temporal orders {:?}",
            summary.temporal_orders
        );
        // Energy drift falls roughly 4x per halving.
        let ratio = summary.temporal[0].energy_drift / summary.temporal[1].energy_drift;
        assert!((2.8..=5.2).contains(&ratio), "drift ratio {ratio}");
    }

    #[test]
    fn convergence_table_single_entries() {
        let cfg = quick_cfg(64);
        let (records, summary) =
            convergence_table(3.0f64, 0.0, &[32], &[1e-3], &cfg).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(summary.spatial.len(), 1);
        assert_eq!(summary.temporal.len(), 1);
        assert!(summary.temporal_orders.is_empty());
        assert!(summary.temporal_order().is_none());
    }

    #[test]
    fn convergence_table_validates_inputs() {
        let cfg = quick_cfg(64);
        assert!(matches!(
            convergence_table(3.0f64, 0.0, &[64, 32], &[1e-3], &cfg),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            convergence_table(3.0f64, 0.0, &[48], &[1e-3], &cfg),
            Err(Error::InvalidGrid(_))
        ));
        assert!(matches!(
            convergence_table(3.0f64, 0.0, &[64], &[1e-3, 2e-3], &cfg),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            convergence_table(3.0f64, 0.0, &[64], &[-1e-3], &cfg),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn boost_residual_is_small_for_exact_construction() {
        for &(l, alpha) in &[(0i64, 0.3f64), (1, 0.3), (-1, 0.5)] {
            let res = boost_residual(3.0f64, alpha, l, 256, 0.4).unwrap();
            // Residual is limited by the O(h²) finite-difference probe.
            assert!(res < 1e-6, "boost residual {res:e} at l={l}, alpha={alpha}");
        }
    }
}
