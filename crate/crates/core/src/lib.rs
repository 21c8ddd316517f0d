//! ringlab: mean-field laboratory for an attractive Bose ring threaded by flux.
//!
//! The crate covers one tightly scoped physics problem — particles on a unit
//! ring with a gauge flux `alpha`, self-attracting via a cubic mean-field
//! term — and provides:
//!
//! * complete elliptic integrals and Jacobi elliptic functions ([`elliptic`]),
//! * the exactly solvable one-particle ring spectrum ([`ring_particle`]),
//! * closed-form bright stationary states on the ring ([`soliton_analytic`]),
//! * a split-step spectral solver for real- and imaginary-time dynamics
//!   ([`gpe_dynamics`]),
//! * reproducible parameter-scan drivers with CSV/JSON output
//!   ([`experiments`]).
//!
//! Everything numeric is generic over the scalar type through [`Real`];
//! concrete `f64` aliases are re-exported at the crate root. Documented
//! tolerances hold for `f64`.

pub mod elliptic;
pub mod error;
pub mod experiments;
pub mod gpe_dynamics;
pub mod ring_particle;
pub mod scalar;
pub mod snapshot;
pub mod soliton_analytic;
pub mod spectral;
pub mod wavefunction;

pub use error::{Error, Result};
pub use scalar::{FftReal, Real};

/// `f64` elliptic parameter carrier.
pub type EllipticParameter64 = elliptic::EllipticParameter<f64>;
/// `f64` stationary branch solution.
pub type StationarySolution64 = soliton_analytic::StationarySolution<f64>;
/// `f64` ring state.
pub type RingWavefunction64 = wavefunction::RingWavefunction<f64>;
/// `f64` FFT engine.
pub type SpectralEngine64 = spectral::SpectralEngine<f64>;
/// `f64` evolution settings.
pub type EvolutionConfig64 = gpe_dynamics::EvolutionConfig<f64>;
/// `f64` split-step stepper.
pub type Propagator64 = gpe_dynamics::Propagator<f64>;
/// `f64` state diagnostics.
pub type Observables64 = gpe_dynamics::Observables<f64>;
/// `f64` drift fit result.
pub type DriftFit64 = gpe_dynamics::DriftFit<f64>;
/// `f64` ground-level query result.
pub type GroundLevelResult64 = ring_particle::GroundLevelResult<f64>;
/// `f64` sweep settings.
pub type SweepConfig64 = experiments::SweepConfig<f64>;
