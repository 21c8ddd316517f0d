//! Complete elliptic integrals K, E and Jacobi elliptic functions sn, cn, dn,
//! plus inversion of the product E(m)K(m).
//!
//! Everything uses the *parameter* convention m = k²; the modulus k never
//! appears. All routines are pure and allocation-free.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Parameter m = k² of the elliptic integrals and functions, stored together
/// with its complement 1 − m.
///
/// The complement is a first-class field because the interesting regime of the
/// product inversion pushes m exponentially close to 1, where `1 - m` computed
/// from a stored m would round to zero long before the mathematics degenerates
/// (the complement reaches ~1e-54 in routine use). Every algorithm in this
/// module consumes the complement, so a parameter built via
/// [`EllipticParameter::from_complement`] loses no accuracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticParameter<T> {
    m: T,
    mc: T,
}

impl<T: Real> EllipticParameter<T> {
    /// Parameter from m itself. Requires 0 ≤ m ≤ 1; m = 1 is carried but only
    /// the explicit limit forms (E(1) = 1) accept it downstream.
    pub fn new(m: T) -> Result<Self> {
        if !(m >= T::zero() && m <= T::one()) {
            return Err(Error::Domain(format!(
                "elliptic parameter m must lie in [0, 1]; got {m}"
            )));
        }
        Ok(Self {
            m,
            mc: T::one() - m,
        })
    }

    /// Parameter from its complement 1 − m. This is the accurate entry point
    /// when m is close to 1.
    pub fn from_complement(mc: T) -> Result<Self> {
        if !(mc >= T::zero() && mc <= T::one()) {
            return Err(Error::Domain(format!(
                "elliptic complement 1-m must lie in [0, 1]; got {mc}"
            )));
        }
        Ok(Self {
            m: T::one() - mc,
            mc,
        })
    }

    /// The parameter m (rounds to 1 when the complement is below the floating
    /// spacing at 1; use [`Self::complement`] in that regime).
    pub fn m(&self) -> T {
        self.m
    }

    /// The complementary parameter 1 − m, exact as stored.
    pub fn complement(&self) -> T {
        self.mc
    }
}

/// One simultaneous evaluation of the three Jacobi functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiValues<T> {
    pub sn: T,
    pub cn: T,
    pub dn: T,
}

/// AGM termination: |aₙ − bₙ| ≤ 4·eps·aₙ, or stagnation, capped at 64
/// iterations. The threshold is the tightest reliably reachable one: the
/// computed pair converges to within 1–2 ulp and then hovers, and iterating
/// past that point actively corrupts the E-correction sum because its terms
/// carry exponentially growing weights 2ⁿ⁻¹. Quadratic convergence makes the
/// cap unreachable for any positive complement down to the subnormal range.
const AGM_MAX_ITER: usize = 64;

/// K(m) and E(m) from one arithmetic–geometric-mean pass.
///
/// K = π/(2·agm(1, √(1−m))); E accumulates the classical cₙ correction sum
/// E = K·(1 − Σₙ 2ⁿ⁻¹cₙ²) with c₀² = m, cₙ = (aₙ₋₁ − bₙ₋₁)/2.
///
/// Relative error ≤ 1e-14 in f64. Errors on m = 1 where K diverges.
pub fn complete_ke<T: Real>(p: EllipticParameter<T>) -> Result<(T, T)> {
    if p.mc <= T::zero() {
        return Err(Error::Domain(
            "complete elliptic integrals need m < 1 (K diverges at m = 1)".into(),
        ));
    }
    let tol = T::epsilon() * T::of(4.0);
    let half = T::of(0.5);
    let mut a = T::one();
    let mut b = p.mc.sqrt();
    let mut csum = p.m * half; // 2⁻¹·c₀², c₀² = m
    let mut pow = half; // 2ⁿ⁻¹ tracker
    let mut prev_gap = T::infinity();
    for _ in 0..AGM_MAX_ITER {
        let gap = (a - b).abs();
        if gap <= tol * a || gap >= prev_gap {
            break;
        }
        prev_gap = gap;
        let c = (a - b) * half;
        let an = (a + b) * half;
        b = (a * b).sqrt();
        a = an;
        pow = pow + pow;
        csum += pow * c * c;
    }
    let k = T::FRAC_PI_2() / a;
    let e = k * (T::one() - csum);
    Ok((k, e))
}

/// Complete elliptic integral of the first kind, K(m) = ∫₀^{π/2} dθ/√(1 − m sin²θ).
pub fn complete_k<T: Real>(p: EllipticParameter<T>) -> Result<T> {
    complete_ke(p).map(|(k, _)| k)
}

/// Complete elliptic integral of the second kind, E(m) = ∫₀^{π/2} √(1 − m sin²θ) dθ.
///
/// Accepts the limit m = 1, where E = 1 exactly.
pub fn complete_e<T: Real>(p: EllipticParameter<T>) -> Result<T> {
    if p.mc == T::zero() {
        return Ok(T::one());
    }
    complete_ke(p).map(|(_, e)| e)
}

/// Jacobi elliptic functions sn, cn, dn by the descending-Landen/AGM backward
/// recurrence. Absolute error ~eps in f64 (bounded by CA² with CA = √eps).
///
/// dn is built multiplicatively through ratios, so it keeps *relative*
/// accuracy even where dn(u) is exponentially small (m → 1, u near K).
pub fn jacobi_elliptic<T: Real>(u: T, p: EllipticParameter<T>) -> Result<JacobiValues<T>> {
    if p.mc <= T::zero() {
        return Err(Error::Domain(
            "jacobi elliptic functions need m in [0, 1)".into(),
        ));
    }
    let ca = T::epsilon().sqrt();
    let half = T::of(0.5);

    // Descending Landen ladder: em/en hold the AGM pair per level.
    const MAX_LEVELS: usize = 32;
    let mut em = [T::zero(); MAX_LEVELS];
    let mut en = [T::zero(); MAX_LEVELS];
    let mut a = T::one();
    let mut dn = T::one();
    let mut emc = p.mc;
    let mut c = T::one();
    let mut top = 0usize;
    for i in 0..MAX_LEVELS {
        top = i;
        em[i] = a;
        emc = emc.sqrt();
        en[i] = emc;
        c = (a + emc) * half;
        if (a - emc).abs() <= ca * a {
            break;
        }
        emc = emc * a;
        a = c;
    }

    // At the converged level the functions are circular; unwind the ladder.
    let arg = u * c;
    let mut sn = arg.sin();
    let mut cn = arg.cos();
    if sn != T::zero() {
        let mut aa = cn / sn;
        c = c * aa;
        for i in (0..=top).rev() {
            let b = em[i];
            aa = aa * c;
            c = c * dn;
            dn = (en[i] + aa) / (b + aa);
            aa = c / b;
        }
        let amp = (c * c + T::one()).sqrt().recip();
        sn = if sn >= T::zero() { amp } else { -amp };
        cn = c * sn;
    }
    Ok(JacobiValues { sn, cn, dn })
}

/// The function sn(u, m); shares the recurrence (and contract) of [`jacobi_elliptic`].
pub fn jacobi_sn<T: Real>(u: T, p: EllipticParameter<T>) -> Result<T> {
    jacobi_elliptic(u, p).map(|v| v.sn)
}

/// The function cn(u, m); shares the recurrence (and contract) of [`jacobi_elliptic`].
pub fn jacobi_cn<T: Real>(u: T, p: EllipticParameter<T>) -> Result<T> {
    jacobi_elliptic(u, p).map(|v| v.cn)
}

/// The function dn(u, m); shares the recurrence (and contract) of [`jacobi_elliptic`].
pub fn jacobi_dn<T: Real>(u: T, p: EllipticParameter<T>) -> Result<T> {
    jacobi_elliptic(u, p).map(|v| v.dn)
}

/// Solve E(m)·K(m) = target for m.
///
/// The product is π²/4 at m = 0 and grows monotonically, diverging as m → 1,
/// so any feasible target has a unique root. Bisection runs on x = ln(1 − m):
/// in that variable the product is ~affine for large targets (K ~ −x/2), and
/// the complement stays exact down to ~1e-150, covering targets beyond 170.
///
/// Residual |E·K − target| ≤ 1e-12·target (floored at 8·eps·target for
/// narrower scalar types). target = π²/4 returns m = 0 exactly.
pub fn invert_product<T: Real>(target: T) -> Result<EllipticParameter<T>> {
    let min = T::FRAC_PI_2() * T::FRAC_PI_2();
    if !(target >= min) {
        return Err(Error::InfeasibleTarget {
            target: target.lossy_f64(),
            min: min.lossy_f64(),
        });
    }
    let rel_tol = T::of(1e-12);
    let eps_tol = T::epsilon() * T::of(8.0);
    let ftol = if rel_tol > eps_tol { rel_tol } else { eps_tol } * target;
    if (target - min).abs() <= ftol {
        return EllipticParameter::new(T::zero());
    }

    // Complement floor: √min_positive keeps the AGM's b₀ = √mc normalized.
    let mc_floor = T::min_positive_value().sqrt();
    let mut lo = mc_floor.ln(); // product above target here, or target is unrepresentable
    let mut hi = T::zero(); // mc = 1: product at its minimum
    let f = |x: T| -> Result<T> {
        let p = EllipticParameter::from_complement(x.exp())?;
        let (k, e) = complete_ke(p)?;
        Ok(k * e - target)
    };
    if f(lo)? < T::zero() {
        return Err(Error::Domain(format!(
            "product target {target} exceeds the representable complement range"
        )));
    }

    let mut best: Option<(T, T)> = None;
    for _ in 0..400 {
        let mid = (lo + hi) * T::of(0.5);
        let res = f(mid)?;
        match best {
            Some((_, b)) if b <= res.abs() => {}
            _ => best = Some((mid, res.abs())),
        }
        if res.abs() <= ftol {
            return EllipticParameter::from_complement(mid.exp());
        }
        if res > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    match best {
        Some((x, r)) if r <= ftol => EllipticParameter::from_complement(x.exp()),
        _ => Err(Error::Domain(
            "product inversion stalled before meeting its residual target".into(),
        )),
    }
}
