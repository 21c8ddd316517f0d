//! Scalar abstraction: every algorithm in this crate is generic over a real
//! floating type, instantiated in practice as `f32` or `f64`.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use std::fmt::{Debug, Display, LowerExp};

/// Real scalar the library is generic over.
///
/// Blanket-implemented for anything float-like; in this workspace that means
/// `f32` and `f64`. Tolerances quoted in the operation contracts assume `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Shorthand for pulling an `f64` literal into the scalar type.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable in scalar type")
    }

    /// Lossy conversion back to `f64`, for diagnostics and error payloads.
    #[inline]
    fn lossy_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + NumAssign
        + Debug
        + Display
        + LowerExp
        + Send
        + Sync
        + 'static
{
}

/// Scalars the spectral engine can plan FFTs over.
pub trait FftReal: Real + rustfft::FftNum {}

impl<T> FftReal for T where T: Real + rustfft::FftNum {}
