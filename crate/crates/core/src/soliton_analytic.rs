//! Closed-form stationary states of the attractive ring condensate at zero flux.
//!
//! Two families solve the stationary mean-field equation on the unit ring:
//! the uniform state `1/√(2π)`, which exists for every coupling `λ > 0`, and a
//! bright-soliton branch built from the Jacobi `dn` function, which exists for
//! `λ ≥ π/2`. The soliton profile is
//!
//! ```text
//! ψ₀(φ) = r · dn(r√λ · φ, m)
//! ```
//!
//! where the elliptic parameter `m` and amplitude `r` are fixed by demanding
//! exactly one `dn` period around the ring together with unit norm. Those two
//! conditions reduce to `E(m)·K(m) = πλ/2`, solved by
//! [`invert_product`](crate::elliptic::invert_product), after which
//! `r = K(m)/(π√λ)`.
//!
//! The chemical potential `μ` (the phase-rotation frequency of the stationary
//! state, `ψ(φ,t) = e^{−iμt}ψ₀(φ+β)`) is `−r²λ(1−m/2)`, distinct from the
//! variational energy per particle `E[ψ] = ∫ ½|∂φψ|² − (λ/2)|ψ|⁴ dφ`. Branch
//! comparison must use the energy functional; both quantities are exposed.

use num_complex::Complex;

use crate::elliptic::{self, EllipticParameter};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::wavefunction::{validate_grid_size, RingWavefunction};

/// Coupling strength below which only the uniform stationary state exists.
pub fn critical_coupling<T: Real>() -> T {
    T::FRAC_PI_2()
}

/// Which stationary family a [`StationarySolution`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// Constant profile `1/√(2π)`; exists for all `λ > 0`.
    Uniform,
    /// Localized `dn`-profile; exists for `λ ≥ π/2`.
    Soliton,
}

impl Branch {
    /// Stable lowercase label, used in CSV/JSON output.
    pub fn label(self) -> &'static str {
        match self {
            Branch::Uniform => "uniform",
            Branch::Soliton => "soliton",
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Shape data carried only by the soliton branch.
#[derive(Debug, Clone, Copy)]
struct SolitonShape<T> {
    m: EllipticParameter<T>,
    r: T,
}

/// A normalized stationary state of the ring condensate at zero flux.
///
/// Construct via [`solve_soliton_branch`], [`uniform_branch`], or
/// [`select_ground_branch`]; the offset angle `β` (the orbit coordinate of the
/// broken translation symmetry) is an input set with [`with_beta`], never
/// fitted.
///
/// [`with_beta`]: StationarySolution::with_beta
#[derive(Debug, Clone, Copy)]
pub struct StationarySolution<T> {
    branch: Branch,
    lambda: T,
    shape: Option<SolitonShape<T>>,
    chem_potential: T,
    beta: T,
}

impl<T: Real> StationarySolution<T> {
    /// Which family this solution belongs to.
    pub fn branch(&self) -> Branch {
        self.branch
    }

    /// Coupling strength λ.
    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// Elliptic parameter of the `dn` profile (soliton branch only).
    pub fn elliptic_parameter(&self) -> Option<EllipticParameter<T>> {
        self.shape.map(|s| s.m)
    }

    /// Profile amplitude `r` (soliton branch only).
    pub fn amplitude_r(&self) -> Option<T> {
        self.shape.map(|s| s.r)
    }

    /// Chemical potential μ: the frequency of the stationary phase rotation.
    pub fn chem_potential(&self) -> T {
        self.chem_potential
    }

    /// Offset angle β of the profile.
    pub fn beta(&self) -> T {
        self.beta
    }

    /// Returns the same solution translated so the profile peak sits at `−β`.
    pub fn with_beta(mut self, beta: T) -> Self {
        self.beta = beta;
        self
    }

    /// Profile value `ψ₀(φ + β)` at a single angle (real and positive).
    pub fn profile_at(&self, phi: T) -> Result<T> {
        match self.shape {
            None => Ok((T::TAU()).sqrt().recip()),
            Some(shape) => {
                let u = shape.r * self.lambda.sqrt() * (phi + self.beta);
                Ok(shape.r * elliptic::jacobi_dn(u, shape.m)?)
            }
        }
    }

    /// Samples `ψ₀(φ_j + β)` on the uniform grid `φ_j = 2πj/N`.
    ///
    /// `grid_size` must be a power of two with at least
    /// [`MIN_GRID`](crate::wavefunction::MIN_GRID) points. The samples are the
    /// exact analytic values; their quadrature norm approaches 1 spectrally
    /// fast as the grid refines (see module tests for the resolution envelope).
    pub fn sample_profile(&self, grid_size: usize) -> Result<RingWavefunction<T>> {
        validate_grid_size(grid_size)?;
        let mut samples = Vec::with_capacity(grid_size);
        for j in 0..grid_size {
            let phi = RingWavefunction::<T>::angle(j, grid_size);
            samples.push(Complex::new(self.profile_at(phi)?, T::zero()));
        }
        RingWavefunction::new(samples)
    }

    /// Variational energy per particle, `E[ψ] = ∫ ½|∂φψ|² − (λ/2)|ψ|⁴ dφ`.
    ///
    /// Uniform branch: closed form `−λ/(4π)`. Soliton branch: trapezoidal
    /// quadrature of the analytic profile and its analytic derivative on a
    /// uniform grid sized to resolve the profile (at least 512 points, grown
    /// proportionally to the quarter period `K` for strong coupling).
    pub fn energy_functional(&self) -> Result<T> {
        let shape = match self.shape {
            None => {
                let four_pi = T::TAU() + T::TAU();
                return Ok(-(self.lambda / four_pi));
            }
            Some(shape) => shape,
        };
        let k = elliptic::complete_k(shape.m)?;
        let n = energy_quadrature_grid(k.lossy_f64());
        let s = shape.r * self.lambda.sqrt();
        let m_val = shape.m.m();
        let half = T::of(0.5);
        let mut kin = T::zero();
        let mut quart = T::zero();
        for j in 0..n {
            let phi = RingWavefunction::<T>::angle(j, n);
            let jv = elliptic::jacobi_elliptic(s * phi, shape.m)?;
            // ∂φ [r·dn(sφ)] = −r·s·m·sn·cn
            let dpsi = -(shape.r * s * m_val) * jv.sn * jv.cn;
            let dens = shape.r * jv.dn * shape.r * jv.dn;
            kin += dpsi * dpsi;
            quart += dens * dens;
        }
        let w = T::TAU() / T::of(n as f64);
        Ok(w * (half * kin - half * self.lambda * quart))
    }
}

/// Quadrature grid for the energy functional: at least 512 points, at least
/// eight points per unit of the quarter period `K` (the profile's Fourier
/// coefficients decay like `exp(−π²n/(2K))`, so this keeps the trapezoid
/// aliasing error near roundoff even at strong coupling).
fn energy_quadrature_grid(k: f64) -> usize {
    let need = (8.0 * k).ceil().max(512.0) as usize;
    need.next_power_of_two()
}

/// Solves the soliton branch at coupling `λ ≥ π/2`.
///
/// Determines the elliptic parameter from `E(m)·K(m) = πλ/2`, then
/// `r = K/(π√λ)` and `μ = −r²λ(1−m/2)`. Fails with
/// [`Error::BelowCritical`] for `λ < π/2`, where one `dn` period cannot fit
/// the ring at unit norm.
pub fn solve_soliton_branch<T: Real>(lambda: T) -> Result<StationarySolution<T>> {
    if !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "coupling must be finite, got {lambda}"
        )));
    }
    let crit = critical_coupling::<T>();
    if lambda < crit {
        return Err(Error::BelowCritical {
            lambda: lambda.lossy_f64(),
            critical: crit.lossy_f64(),
        });
    }
    let target = lambda * T::FRAC_PI_2();
    let m = elliptic::invert_product(target)?;
    let k = elliptic::complete_k(m)?;
    let r = k / (T::PI() * lambda.sqrt());
    // −r²λ(1−m/2) written through the complement: 1−m/2 = (1+mc)/2. This keeps
    // full relative accuracy when mc underflows the 1−m representation.
    let half = T::of(0.5);
    let mu = -(r * r * lambda) * (T::one() + m.complement()) * half;
    Ok(StationarySolution {
        branch: Branch::Soliton,
        lambda,
        shape: Some(SolitonShape { m, r }),
        chem_potential: mu,
        beta: T::zero(),
    })
}

/// The uniform stationary state `1/√(2π)` with `μ = −λ/(2π)`.
///
/// Exists for every `λ > 0`; fails with [`Error::Domain`] otherwise.
pub fn uniform_branch<T: Real>(lambda: T) -> Result<StationarySolution<T>> {
    if !(lambda > T::zero()) || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "coupling must be positive and finite, got {lambda}"
        )));
    }
    let mu = -(lambda / T::TAU());
    Ok(StationarySolution {
        branch: Branch::Uniform,
        lambda,
        shape: None,
        chem_potential: mu,
        beta: T::zero(),
    })
}

/// Returns the stationary branch with the lower variational energy.
///
/// Below the critical coupling only the uniform branch exists. At the critical
/// coupling the branches coincide (`m = 0` makes the soliton profile constant)
/// and the uniform label is returned. Above it, the energy functionals of both
/// branches are compared by quadrature; the soliton must win strictly to be
/// selected, so exact ties also fall back to uniform.
pub fn select_ground_branch<T: Real>(lambda: T) -> Result<StationarySolution<T>> {
    let uniform = uniform_branch(lambda)?;
    if lambda < critical_coupling::<T>() {
        return Ok(uniform);
    }
    let soliton = solve_soliton_branch(lambda)?;
    let degenerate = soliton
        .elliptic_parameter()
        .is_some_and(|m| m.m() == T::zero());
    if degenerate {
        return Ok(uniform);
    }
    let e_soliton = soliton.energy_functional()?;
    let e_uniform = uniform.energy_functional()?;
    if e_soliton < e_uniform {
        Ok(soliton)
    } else {
        Ok(uniform)
    }
}
