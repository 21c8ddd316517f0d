//! Library-wide error type. Every fallible operation returns `Result<_, Error>`
//! so callers (the CLI in particular) can map failures onto exit codes and
//! one-line diagnostics without string matching.

use thiserror::Error;

/// Unified error for the whole crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside its mathematical domain (m out of [0,1],
    /// non-positive radius, bad tolerance, ...).
    #[error("domain: {0}")]
    Domain(String),

    /// `invert_product` was asked for a target below the attainable minimum.
    #[error("infeasible target {target:.17e}; minimum attainable is {min:.17e}")]
    InfeasibleTarget { target: f64, min: f64 },

    /// A bright stationary branch was requested below the critical coupling.
    #[error("coupling {lambda:.17e} below critical {critical:.17e}; only the uniform branch exists")]
    BelowCritical { lambda: f64, critical: f64 },

    /// The anti-unitary level map would leave the integer lattice.
    #[error("level reflection needs 2*alpha integral; got {two_alpha:.17e}")]
    NonIntegerImage { two_alpha: f64 },

    /// Grid construction or grid compatibility failed.
    #[error("grid: {0}")]
    InvalidGrid(String),

    /// A proposed time step violates the split-step stability budget.
    #[error("unstable step: {0}")]
    UnstableStep(String),

    /// Imaginary-time relaxation ran out of its iteration budget.
    #[error(
        "no convergence after {steps} steps; mu={mu:.17e}, last |d mu|={delta_mu:.17e}"
    )]
    NoConvergence { steps: u64, mu: f64, delta_mu: f64 },

    /// Drift measurement needs a localized lump; the density was too uniform.
    #[error("no lump: centroid magnitude {magnitude:.3e} below threshold {threshold:.3e}")]
    NoLump { magnitude: f64, threshold: f64 },

    /// An operation's precondition on program state was not met.
    #[error("precondition: {0}")]
    Precondition(String),

    /// Malformed text input (config files, range expressions, CSV).
    #[error("parse: {0}")]
    Parse(String),

    /// Underlying I/O failure.
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable machine-readable kind tag, used by the CLI's one-line error
    /// format and by tests that pin exit-code behaviour.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::InfeasibleTarget { .. } => "infeasible_target",
            Error::BelowCritical { .. } => "below_critical",
            Error::NonIntegerImage { .. } => "non_integer_image",
            Error::InvalidGrid(_) => "invalid_grid",
            Error::UnstableStep(_) => "unstable_step",
            Error::NoConvergence { .. } => "no_converge",
            Error::NoLump { .. } => "no_lump",
            Error::Precondition(_) => "precondition",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }
}
