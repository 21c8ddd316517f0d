//! Snapshot files: a plain-text profile plus a JSON sidecar.
//!
//! The profile is binary-free, one grid point per line — `phi re im`, each
//! printed with 17 significant digits so `f64` values round-trip exactly. The
//! sidecar `<name>.json` records the physical context (`N`, `alpha`,
//! `lambda`, `dt`, `t`) and the state's measured diagnostics (`norm`,
//! `energy`, `chem_potential`, `centroid_angle`), plus an optional free-form
//! `config` object for whoever produced the file (the CLI echoes its
//! effective configuration there).
//!
//! Both files are written to a temporary path in the destination directory
//! and renamed into place, so a failed run never leaves partial output.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gpe_dynamics::{EvolutionConfig, Observables};
use crate::scalar::Real;
use crate::wavefunction::RingWavefunction;

/// Physical context and diagnostics stored alongside a profile.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SnapshotMeta {
    /// Grid size.
    #[serde(rename = "N")]
    pub n: usize,
    /// Flux parameter.
    pub alpha: f64,
    /// Coupling strength.
    pub lambda: f64,
    /// Time step of the run that produced the state.
    pub dt: f64,
    /// Physical time of the snapshot.
    pub t: f64,
    /// Measured L² norm.
    pub norm: f64,
    /// Measured energy functional.
    pub energy: f64,
    /// Measured chemical potential.
    pub chem_potential: f64,
    /// Angle of the density centroid.
    pub centroid_angle: f64,
    /// Free-form configuration echo from the producing tool.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

impl SnapshotMeta {
    /// Assembles metadata from a run configuration and measured observables.
    pub fn new<T: Real>(
        n: usize,
        cfg: &EvolutionConfig<T>,
        t: T,
        obs: &Observables<T>,
    ) -> Self {
        Self {
            n,
            alpha: cfg.alpha.lossy_f64(),
            lambda: cfg.lambda.lossy_f64(),
            dt: cfg.dt.lossy_f64(),
            t: t.lossy_f64(),
            norm: obs.norm.lossy_f64(),
            energy: obs.energy.lossy_f64(),
            chem_potential: obs.chem_potential.lossy_f64(),
            centroid_angle: obs.centroid_angle.lossy_f64(),
            config: None,
        }
    }

    /// Returns `self` with the `config` echo attached.
    pub fn with_config(mut self, config: serde_json::Value) -> Self {
        self.config = Some(config);
        self
    }
}

/// The sidecar path for a profile path: `<file>.json` appended to the full
/// file name, so distinct profiles never share a sidecar.
pub fn sidecar_path(data_path: &Path) -> PathBuf {
    let mut name = data_path.file_name().unwrap_or_default().to_os_string();
    name.push(".json");
    data_path.with_file_name(name)
}

/// Writes `bytes` to `path` atomically: the content lands in a temporary file
/// in the destination directory, then replaces the target in one rename, so a
/// crash mid-write never leaves a partial artifact behind.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(d) => tempfile::NamedTempFile::new_in(d)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Renders the profile text: one `phi re im` line per grid point.
pub fn profile_text<T: Real>(psi: &RingWavefunction<T>) -> String {
    let mut out = String::with_capacity(psi.grid_size() * 80);
    for (j, z) in psi.samples().iter().enumerate() {
        let phi = RingWavefunction::<T>::angle(j, psi.grid_size());
        out.push_str(&format!(
            "{:.16e} {:.16e} {:.16e}\n",
            phi.lossy_f64(),
            z.re.lossy_f64(),
            z.im.lossy_f64()
        ));
    }
    out
}

/// Writes the profile to `path` and the sidecar to [`sidecar_path`], each via
/// temporary-file-plus-rename.
pub fn write_snapshot<T: Real>(
    path: &Path,
    psi: &RingWavefunction<T>,
    meta: &SnapshotMeta,
) -> Result<()> {
    if meta.n != psi.grid_size() {
        return Err(Error::Precondition(format!(
            "metadata N={} does not match grid size {}",
            meta.n,
            psi.grid_size()
        )));
    }
    let json = serde_json::to_string_pretty(meta)
        .map_err(|e| Error::Parse(format!("sidecar serialization failed: {e}")))?;
    atomic_write(path, profile_text(psi).as_bytes())?;
    atomic_write(&sidecar_path(path), json.as_bytes())?;
    Ok(())
}

/// Reads a profile file alone (no sidecar), reconstructing the state and
/// checking that the stored angles match the uniform grid.
pub fn read_profile(path: &Path) -> Result<RingWavefunction<f64>> {
    let text = fs::read_to_string(path)?;
    let mut samples = Vec::new();
    let mut angles = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let mut field = |name: &str| -> Result<f64> {
            parts
                .next()
                .ok_or_else(|| {
                    Error::Parse(format!(
                        "{}:{}: missing {name} column",
                        path.display(),
                        lineno + 1
                    ))
                })?
                .parse::<f64>()
                .map_err(|e| {
                    Error::Parse(format!(
                        "{}:{}: bad {name} value: {e}",
                        path.display(),
                        lineno + 1
                    ))
                })
        };
        let phi = field("phi")?;
        let re = field("re")?;
        let im = field("im")?;
        if parts.next().is_some() {
            return Err(Error::Parse(format!(
                "{}:{}: expected exactly 3 columns",
                path.display(),
                lineno + 1
            )));
        }
        angles.push(phi);
        samples.push(Complex::new(re, im));
    }
    let n = samples.len();
    crate::wavefunction::validate_grid_size(n)?;
    for (j, &phi) in angles.iter().enumerate() {
        let expect = RingWavefunction::<f64>::angle(j, n);
        if (phi - expect).abs() > 1e-12 {
            return Err(Error::Parse(format!(
                "{}: row {} has phi={phi:.17e}, expected uniform grid value {expect:.17e}",
                path.display(),
                j + 1
            )));
        }
    }
    RingWavefunction::new(samples)
}

/// Reads a profile and its sidecar back.
pub fn read_snapshot(path: &Path) -> Result<(RingWavefunction<f64>, SnapshotMeta)> {
    let psi = read_profile(path)?;
    let json = fs::read_to_string(sidecar_path(path))?;
    let meta: SnapshotMeta = serde_json::from_str(&json)
        .map_err(|e| Error::Parse(format!("{}: bad sidecar: {e}", sidecar_path(path).display())))?;
    if meta.n != psi.grid_size() {
        return Err(Error::Parse(format!(
            "{}: sidecar N={} does not match {} profile rows",
            sidecar_path(path).display(),
            meta.n,
            psi.grid_size()
        )));
    }
    Ok((psi, meta))
}
