//! Discrete Fourier machinery for the periodic grid: mode numbering,
//! normalized transforms, and zero-padded spectral resampling.
//!
//! Convention: coefficients c_l satisfy ψ_j = Σ_l c_l·e^{i·l·φ_j} with
//! l ∈ {−N/2, …, N/2−1}; the forward transform therefore scales the DFT by
//! 1/N. Parseval then reads (2π/N)·Σ_j|ψ_j|² = 2π·Σ_l|c_l|².

use crate::error::Result;
use crate::scalar::FftReal;
use crate::wavefunction::{validate_grid_size, RingWavefunction};
use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Signed mode number carried by DFT bin `k` of an N-point grid.
pub fn mode_number(k: usize, n: usize) -> i64 {
    debug_assert!(k < n);
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// DFT bin holding signed mode `l` on an N-point grid, if representable.
pub fn mode_bin(l: i64, n: usize) -> Option<usize> {
    let half = (n / 2) as i64;
    if l >= -half && l < half {
        Some(l.rem_euclid(n as i64) as usize)
    } else {
        None
    }
}

/// Cached FFT plans plus scratch for one grid size.
pub struct SpectralEngine<T: FftReal> {
    n: usize,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
    scratch: Vec<Complex<T>>,
}

impl<T: FftReal> SpectralEngine<T> {
    pub fn new(n: usize) -> Result<Self> {
        validate_grid_size(n)?;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Ok(Self {
            n,
            fwd,
            inv,
            scratch: vec![Complex::new(T::zero(), T::zero()); scratch_len],
        })
    }

    pub fn grid_size(&self) -> usize {
        self.n
    }

    /// Samples → coefficients, in place (DFT scaled by 1/N).
    pub fn forward(&mut self, buf: &mut [Complex<T>]) {
        debug_assert_eq!(buf.len(), self.n);
        self.fwd.process_with_scratch(buf, &mut self.scratch);
        let inv_n = T::of(self.n as f64).recip();
        for z in buf.iter_mut() {
            *z = *z * inv_n;
        }
    }

    /// Coefficients → samples, in place (plain synthesis, no scaling).
    pub fn inverse(&mut self, buf: &mut [Complex<T>]) {
        debug_assert_eq!(buf.len(), self.n);
        self.inv.process_with_scratch(buf, &mut self.scratch);
    }

    /// Mode coefficients of a state (allocating convenience).
    pub fn modes_of(&mut self, psi: &RingWavefunction<T>) -> Vec<Complex<T>> {
        let mut buf = psi.samples().to_vec();
        self.forward(&mut buf);
        buf
    }
}

/// Spectrally interpolates ψ onto a finer grid by zero-padding its modes.
///
/// The fine grid must be a power of two ≥ the source grid. For smooth states
/// this reconstructs the underlying function to aliasing accuracy, which is
/// what the convergence diagnostics measure.
pub fn resample<T: FftReal>(psi: &RingWavefunction<T>, n_fine: usize) -> Result<RingWavefunction<T>> {
    validate_grid_size(n_fine)?;
    let n = psi.grid_size();
    if n_fine < n {
        return Err(crate::error::Error::InvalidGrid(format!(
            "resample target {n_fine} is below the source grid {n}"
        )));
    }
    if n_fine == n {
        return Ok(psi.clone());
    }
    let mut engine = SpectralEngine::<T>::new(n)?;
    let modes = engine.modes_of(psi);
    let zero = Complex::new(T::zero(), T::zero());
    let mut fine_modes = vec![zero; n_fine];
    for (k, &c) in modes.iter().enumerate() {
        let l = mode_number(k, n);
        // Every source mode is representable on the finer grid.
        let bin = mode_bin(l, n_fine).expect("coarse mode fits fine grid");
        fine_modes[bin] = c;
    }
    let mut fine_engine = SpectralEngine::<T>::new(n_fine)?;
    fine_engine.inverse(&mut fine_modes);
    RingWavefunction::new(fine_modes)
}
