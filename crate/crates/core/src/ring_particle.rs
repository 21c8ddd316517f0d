//! Exact one-particle physics on a flux-threaded ring: spectrum, ground-level
//! selection, the integer gauge map, and the anti-unitary level reflection
//! that pairs the degenerate levels at half-odd-integer flux.
//!
//! Angular momentum levels are exact integers (`i64`); the flux `alpha` is a
//! bare scalar — physics is periodic in it with period 1, which the tests
//! verify rather than assume.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Eigenvalue of the canonical angular momentum; always an exact integer.
pub type AngularMomentum = i64;

/// Default tolerance for deciding that the flux sits on a half-odd-integer
/// degeneracy point.
pub const DEFAULT_TIE_TOL: f64 = 1e-12;

/// Tolerance inside which 2·alpha must sit next to an integer for the level
/// reflection to act on the integer level lattice.
pub const REFLECTION_INTEGER_TOL: f64 = 1e-12;

/// Ground level(s) of the ring at a given flux.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundLevelResult<T> {
    /// One level away from degeneracy points, two (ascending) on them.
    pub levels: Vec<AngularMomentum>,
    /// Energy of the minimizing level(s).
    pub energy: T,
    /// True exactly when `levels` has two entries.
    pub degenerate: bool,
}

fn to_scalar<T: Real>(l: AngularMomentum) -> T {
    T::of(l as f64)
}

/// Energy of level `l` at flux `alpha`: ½(l − α)².
pub fn level_energy<T: Real>(l: AngularMomentum, alpha: T) -> T {
    let d = to_scalar::<T>(l) - alpha;
    T::of(0.5) * d * d
}

/// Angular velocity expectation of level `l` at flux `alpha`: l − α.
pub fn level_velocity<T: Real>(l: AngularMomentum, alpha: T) -> T {
    to_scalar::<T>(l) - alpha
}

/// The integer level(s) closest to `alpha`, with their energy.
///
/// Returns two levels when `alpha` lies within `tie_tol` of a half-odd
/// integer (the degenerate pair straddling it), else the single minimizer.
pub fn ground_level<T: Real>(alpha: T, tie_tol: T) -> Result<GroundLevelResult<T>> {
    if !alpha.is_finite() {
        return Err(Error::Domain(format!("flux must be finite; got {alpha}")));
    }
    if !(tie_tol >= T::zero()) {
        return Err(Error::Domain(format!(
            "tie tolerance must be non-negative; got {tie_tol}"
        )));
    }
    let lower = alpha.floor();
    let l_lower = lower
        .to_i64()
        .ok_or_else(|| Error::Domain(format!("flux {alpha} out of integer range")))?;
    let frac = alpha - lower; // in [0, 1)
    let half = T::of(0.5);
    let degenerate = (frac - half).abs() <= tie_tol;
    let (levels, d) = if degenerate {
        (vec![l_lower, l_lower + 1], frac.min(T::one() - frac))
    } else if frac < half {
        (vec![l_lower], frac)
    } else {
        (vec![l_lower + 1], T::one() - frac)
    };
    Ok(GroundLevelResult {
        levels,
        energy: half * d * d,
        degenerate,
    })
}

/// The integer gauge map G_k on labeled states: (l, α) → (l + k, α + k).
pub fn gauge_shift<T: Real>(
    l: AngularMomentum,
    alpha: T,
    k: i64,
) -> (AngularMomentum, T) {
    (l + k, alpha + to_scalar::<T>(k))
}

/// Anti-unitary level reflection l → 2α − l.
///
/// Defined only when 2α sits within [`REFLECTION_INTEGER_TOL`] of an integer;
/// otherwise the image leaves the integer lattice and the map is refused.
pub fn modified_time_reversal<T: Real>(l: AngularMomentum, alpha: T) -> Result<AngularMomentum> {
    let two_alpha = alpha + alpha;
    if !two_alpha.is_finite() {
        return Err(Error::Domain(format!("flux must be finite; got {alpha}")));
    }
    let nearest = two_alpha.round();
    if (two_alpha - nearest).abs() > T::of(REFLECTION_INTEGER_TOL) {
        return Err(Error::NonIntegerImage {
            two_alpha: two_alpha.lossy_f64(),
        });
    }
    let n = nearest
        .to_i64()
        .ok_or_else(|| Error::Domain(format!("flux {alpha} out of integer range")))?;
    Ok(n - l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn level_energy_examples() {
        assert_eq!(level_energy(0, 0.0f64), 0.0);
        assert!((level_energy(1, 0.3f64) - 0.245).abs() <= 1e-16);
        assert_eq!(level_energy(-2, -2.0f64), 0.0);
    }

    #[test]
    fn level_velocity_examples() {
        assert_eq!(level_velocity(0, 0.0), 0.0);
        assert_eq!(level_velocity(0, 0.3), -0.3);
        assert_eq!(level_velocity(3, 2.5), 0.5);
    }

    #[test]
    fn ground_level_examples() {
        let g = ground_level(0.3, DEFAULT_TIE_TOL).unwrap();
        assert_eq!(g.levels, vec![0]);
        assert!(!g.degenerate);
        assert!((g.energy - 0.045).abs() <= 1e-16);

        let g = ground_level(2.5, DEFAULT_TIE_TOL).unwrap();
        assert_eq!(g.levels, vec![2, 3]);
        assert!(g.degenerate);
        assert_eq!(g.energy, 0.125);

        let g = ground_level(-0.5, DEFAULT_TIE_TOL).unwrap();
        assert_eq!(g.levels, vec![-1, 0]);
        assert!(g.degenerate);
    }

    #[test]
    fn ground_level_tie_window() {
        assert!(ground_level(0.5 + 1e-13, 1e-12).unwrap().degenerate);
        assert!(!ground_level(0.5 + 1e-11, 1e-12).unwrap().degenerate);
        assert!(ground_level(7.0, DEFAULT_TIE_TOL).unwrap().levels == vec![7]);
        assert!(ground_level(f64::NAN, 1e-12).is_err());
        assert!(ground_level(0.3, -1.0).is_err());
    }

    #[test]
    fn gauge_shift_examples() {
        assert_eq!(gauge_shift(0, 0.3, 1), (1, 1.3));
        assert_eq!(gauge_shift(5, 0.2, 0), (5, 0.2));
        assert_eq!(gauge_shift(1, 0.5, -1), (0, -0.5));
    }

    #[test]
    fn spectrum_is_gauge_covariant() {
        // Mathematical equality; numerically the float shift α+k costs at
        // most an ulp of α+k, so compare at rounding level, not bitwise.
        let mut rng = ChaCha8Rng::seed_from_u64(0x9a6e1);
        for _ in 0..1000 {
            let l = rng.gen_range(-20..20i64);
            let alpha: f64 = rng.gen_range(-5.0..5.0);
            for k in -10..=10i64 {
                let (lk, ak) = gauge_shift(l, alpha, k);
                let e = level_energy(l, alpha);
                let ek = level_energy(lk, ak);
                assert!(
                    (e - ek).abs() <= 1e-12 * (1.0 + e),
                    "energy covariance: l={l} a={alpha} k={k}"
                );
                let v = level_velocity(l, alpha);
                let vk = level_velocity(lk, ak);
                assert!(
                    (v - vk).abs() <= 1e-12 * (1.0 + v.abs()),
                    "velocity covariance: l={l} a={alpha} k={k}"
                );
            }
        }
    }

    #[test]
    fn ground_energy_is_periodic_in_flux() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xf1a8);
        for _ in 0..1000 {
            let alpha: f64 = rng.gen_range(-5.0..5.0);
            let a = ground_level(alpha, DEFAULT_TIE_TOL).unwrap();
            let b = ground_level(alpha + 1.0, DEFAULT_TIE_TOL).unwrap();
            assert!(
                (a.energy - b.energy).abs() <= 1e-14 * (1.0 + a.energy),
                "periodicity at alpha={alpha}"
            );
            assert_eq!(a.degenerate, b.degenerate);
        }
    }

    #[test]
    fn degenerate_pair_has_opposite_velocities() {
        for half_odd in [-2.5, -0.5, 0.5, 1.5, 2.5, 7.5] {
            let g = ground_level(half_odd, DEFAULT_TIE_TOL).unwrap();
            assert!(g.degenerate);
            let v0 = level_velocity(g.levels[0], half_odd);
            let v1 = level_velocity(g.levels[1], half_odd);
            assert_eq!(v0, -v1, "velocities at alpha={half_odd}");
            assert_eq!(v1, 0.5);
        }
    }

    #[test]
    fn reflection_examples() {
        assert_eq!(modified_time_reversal(2, 2.5).unwrap(), 3);
        assert_eq!(modified_time_reversal(0, 0.0).unwrap(), 0);
        match modified_time_reversal(1, 0.3) {
            Err(Error::NonIntegerImage { two_alpha }) => {
                assert!((two_alpha - 0.6).abs() <= 1e-15)
            }
            other => panic!("expected non-integer-image, got {other:?}"),
        }
    }

    #[test]
    fn reflection_is_an_involution_when_defined() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x717e);
        for _ in 0..500 {
            let l = rng.gen_range(-30..30i64);
            let two_alpha = rng.gen_range(-12..12i64);
            let alpha = two_alpha as f64 / 2.0;
            let r = modified_time_reversal(l, alpha).unwrap();
            assert_eq!(modified_time_reversal(r, alpha).unwrap(), l);
        }
    }

    #[test]
    fn reflection_swaps_the_degenerate_pair() {
        let g = ground_level(2.5, DEFAULT_TIE_TOL).unwrap();
        assert_eq!(g.levels, vec![2, 3]);
        assert_eq!(modified_time_reversal(g.levels[0], 2.5).unwrap(), g.levels[1]);
        assert_eq!(modified_time_reversal(g.levels[1], 2.5).unwrap(), g.levels[0]);
    }
}
