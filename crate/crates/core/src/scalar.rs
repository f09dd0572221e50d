//! Scalar abstraction shared by the numeric modules.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar the geometry, projection and fusion code is generic over.
///
/// Implemented for `f32` and `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FromStr
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts from `f64`, panicking only for types that cannot hold finite `f64` values.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 converts into every Real")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("Real converts into f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Sine and cosine of an angle given in degrees.
///
/// The angle is reduced to a quadrant and a remainder in `[0, 90)` degrees before
/// evaluating, so `sin_cos_deg(a - 90)` is exactly `(-cos a, sin a)` and multiples of
/// 90 degrees give exact zeros and ones.
pub fn sin_cos_deg<T: Real>(degrees: T) -> (T, T) {
    let ninety = T::of(90.0);
    let quadrant = (degrees / ninety).floor();
    let rem = degrees - quadrant * ninety;
    let (s, c) = if rem == T::zero() {
        (T::zero(), T::one())
    } else {
        rem.to_radians().sin_cos()
    };
    let q = quadrant.to_i64().unwrap_or(0).rem_euclid(4);
    match q {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_turns_are_exact() {
        assert_eq!(sin_cos_deg(0.0_f64), (0.0, 1.0));
        assert_eq!(sin_cos_deg(90.0_f64), (1.0, -0.0));
        assert_eq!(sin_cos_deg(180.0_f64), (-0.0, -1.0));
        assert_eq!(sin_cos_deg(-90.0_f64), (-1.0, 0.0));
    }

    #[test]
    fn shifted_angles_share_bits() {
        for a in [-135.0_f64, -45.0, 12.5, 35.0, 45.0, 135.0, 170.0, 300.25] {
            let (s, c) = sin_cos_deg(a);
            let (s90, c90) = sin_cos_deg(a - 90.0);
            assert_eq!(s90, -c);
            assert_eq!(c90, s);
            let (s180, c180) = sin_cos_deg(a - 180.0);
            assert_eq!(s180, -s);
            assert_eq!(c180, -c);
        }
    }

    #[test]
    fn agrees_with_std() {
        for i in -720..720 {
            let a = i as f64 * 0.5;
            let (s, c) = sin_cos_deg(a);
            assert!((s - a.to_radians().sin()).abs() < 1e-12);
            assert!((c - a.to_radians().cos()).abs() < 1e-12);
        }
    }
}
