//! Complex wavefunction samples on the uniform periodic grid φ_j = 2πj/N.
//!
//! A `RingWavefunction` is a value: every operation returns a new state, so
//! independent evolutions can run on any number of threads.

use crate::error::{Error, Result};
use crate::scalar::Real;
use num_complex::Complex;

/// Smallest admissible grid.
pub const MIN_GRID: usize = 16;

/// Checks the grid-size contract shared by every spectral consumer:
/// a power of two, at least [`MIN_GRID`].
pub fn validate_grid_size(n: usize) -> Result<()> {
    if n < MIN_GRID || !n.is_power_of_two() {
        return Err(Error::InvalidGrid(format!(
            "grid size must be a power of two >= {MIN_GRID}; got {n}"
        )));
    }
    Ok(())
}

/// ψ sampled at φ_j = 2πj/N, j = 0..N.
#[derive(Debug, Clone, PartialEq)]
pub struct RingWavefunction<T> {
    samples: Vec<Complex<T>>,
}

impl<T: Real> RingWavefunction<T> {
    /// Wraps samples after checking the grid contract and finiteness.
    pub fn new(samples: Vec<Complex<T>>) -> Result<Self> {
        validate_grid_size(samples.len())?;
        if samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("wavefunction samples must be finite".into()));
        }
        Ok(Self { samples })
    }

    /// Samples ψ(φ_j) from a closure over the angle.
    pub fn from_fn(n: usize, f: impl Fn(T) -> Complex<T>) -> Result<Self> {
        validate_grid_size(n)?;
        let samples = (0..n).map(|j| f(Self::angle(j, n))).collect();
        Self::new(samples)
    }

    /// The unit-norm uniform state, 1/√(2π) everywhere.
    pub fn uniform(n: usize) -> Result<Self> {
        let amp = (T::TAU()).sqrt().recip();
        Self::from_fn(n, |_| Complex::new(amp, T::zero()))
    }

    pub(crate) fn angle(j: usize, n: usize) -> T {
        T::TAU() * T::of(j as f64) / T::of(n as f64)
    }

    /// Grid angle of sample `j`.
    pub fn phi(&self, j: usize) -> T {
        Self::angle(j, self.samples.len())
    }

    /// Number of grid points N.
    pub fn grid_size(&self) -> usize {
        self.samples.len()
    }

    /// Immutable sample view.
    pub fn samples(&self) -> &[Complex<T>] {
        &self.samples
    }

    /// In-crate mutable access for the propagator's pointwise factors; users
    /// go through `new`/`from_fn`, which enforce the invariants.
    pub(crate) fn samples_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.samples
    }

    pub(crate) fn from_samples_unchecked(samples: Vec<Complex<T>>) -> Self {
        Self { samples }
    }

    /// Consumes the state, yielding its samples.
    pub fn into_samples(self) -> Vec<Complex<T>> {
        self.samples
    }

    /// Quadrature weight 2π/N of the uniform grid.
    pub fn weight(&self) -> T {
        T::TAU() / T::of(self.samples.len() as f64)
    }

    /// Squared L² norm, (2π/N)·Σ|ψ_j|².
    pub fn norm_sq(&self) -> T {
        let s = self
            .samples
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr());
        s * self.weight()
    }

    /// L² norm.
    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    /// The state scaled to unit norm. Errors on zero or non-finite norm.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::Precondition(format!(
                "cannot normalize a state with norm {n}"
            )));
        }
        let inv = n.recip();
        Ok(Self {
            samples: self.samples.iter().map(|z| z * inv).collect(),
        })
    }

    /// |ψ_j|² at every grid point.
    pub fn density(&self) -> Vec<T> {
        self.samples.iter().map(|z| z.norm_sqr()).collect()
    }

    /// L² inner product ⟨self|other⟩ = (2π/N)·Σ conj(self)·other.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        self.check_same_grid(other)?;
        let mut acc = Complex::new(T::zero(), T::zero());
        for (a, b) in self.samples.iter().zip(&other.samples) {
            acc = acc + a.conj() * b;
        }
        Ok(acc * self.weight())
    }

    /// L² distance ‖self − other‖.
    pub fn l2_distance(&self, other: &Self) -> Result<T> {
        self.check_same_grid(other)?;
        let mut acc = T::zero();
        for (a, b) in self.samples.iter().zip(&other.samples) {
            acc = acc + (a - b).norm_sqr();
        }
        Ok((acc * self.weight()).sqrt())
    }

    /// Largest pointwise modulus deviation max_j ||self_j| − |other_j||.
    pub fn sup_modulus_deviation(&self, other: &Self) -> Result<T> {
        self.check_same_grid(other)?;
        let mut worst = T::zero();
        for (a, b) in self.samples.iter().zip(&other.samples) {
            let d = (a.norm() - b.norm()).abs();
            if d > worst {
                worst = d;
            }
        }
        Ok(worst)
    }

    fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid_size() != other.grid_size() {
            return Err(Error::InvalidGrid(format!(
                "grid sizes differ: {} vs {}",
                self.grid_size(),
                other.grid_size()
            )));
        }
        Ok(())
    }
}
