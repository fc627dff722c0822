//! Scalar abstraction for the numeric core: `f32` or `f64`.

use nalgebra::RealField;
use num_traits::FromPrimitive;

/// Floating-point scalar the whole crate is generic over.
///
/// Everything numerical is written against this trait; `f64` is the default
/// backend (see the type aliases at the crate root) and `f32` is available
/// for callers that want it. Literals from the model (speeds, exponents,
/// unit conversions) are injected through [`Real::of`].
pub trait Real: RealField + Copy + FromPrimitive {
    /// Lift an `f64` literal into this scalar type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable in scalar type")
    }

    fn infinity() -> Self;

    fn is_finite_val(self) -> bool;
}

impl Real for f32 {
    fn infinity() -> Self {
        f32::INFINITY
    }

    fn is_finite_val(self) -> bool {
        self.is_finite()
    }
}

impl Real for f64 {
    fn infinity() -> Self {
        f64::INFINITY
    }

    fn is_finite_val(self) -> bool {
        self.is_finite()
    }
}

/// Speed of light in meters per second.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// 10^(dB/10), generic over the scalar type.
pub fn db_to_linear<T: Real>(db: T) -> T {
    T::of(10.0).powf(db / T::of(10.0))
}

/// dBm to watts.
pub fn dbm_to_watts<T: Real>(dbm: T) -> T {
    db_to_linear(dbm - T::of(30.0))
}
