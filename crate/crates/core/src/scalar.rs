//! Scalar abstraction shared by every numerical routine in the crate.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// A real floating-point scalar (`f32` or `f64`).
///
/// Everything in the crate is written against this trait; the concrete
/// `f64` aliases at the crate root are what the CLI and the tests use.
pub trait Scalar: RealField + Copy + FromPrimitive + ToPrimitive {
    /// Machine epsilon of the underlying type, as `f64`.
    const EPSILON_F64: f64;

    /// Converts an `f64` literal into this scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Lossy conversion used when writing reports.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// A tolerance of `x`, floored at a small multiple of the type's epsilon
    /// so that `f64` thresholds stay meaningful for `f32`.
    fn tol(x: f64) -> Self {
        Self::lit(x.max(64.0 * Self::EPSILON_F64))
    }

    /// Absolute value (avoids the `Signed`/`ComplexField` method clash).
    fn abs_val(self) -> Self {
        if self < Self::zero() {
            -self
        } else {
            self
        }
    }
}

impl Scalar for f32 {
    const EPSILON_F64: f64 = f32::EPSILON as f64;
}

impl Scalar for f64 {
    const EPSILON_F64: f64 = f64::EPSILON;
}
