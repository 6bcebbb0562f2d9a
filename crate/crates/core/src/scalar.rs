//! Scalar abstraction shared by every numeric type in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, NumCast, ToPrimitive};

/// Real number type used for powers and energies: `f32` or `f64`.
///
/// `Display` must print the shortest decimal that parses back to the same
/// value; the CSV writers rely on it for lossless round-trips. Both std float
/// types satisfy this.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumCast + Sum + Default + Display + Debug + FromStr + Send + Sync + 'static
{
    /// Converts an `f64` literal, rounding to nearest.
    fn lit(v: f64) -> Self {
        <Self as NumCast>::from(v).expect("f64 literal representable")
    }

    /// Converts a whole number of seconds.
    fn secs(s: i64) -> Self {
        <Self as NumCast>::from(s).expect("second count representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `|a - b| <= rel * max(|a|, |b|)`, with exact equality always accepted.
pub fn rel_eq<T: Scalar>(a: T, b: T, rel: T) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs())
}
