//! Scalar abstraction for the correlation and scoring arithmetic.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point type the correlation maps are computed in.
///
/// Implemented for `f32` and `f64`. All tolerances quoted in the crate docs
/// refer to `f64`; `f32` maps agree to roughly single precision.
pub trait Scalar:
    'static + Float + NumAssign + FromPrimitive + Sum + Default + Send + Sync + Debug + Display + LowerExp
{
    /// Converts an `f64` constant, saturating to the target precision.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).unwrap_or_else(Self::nan)
    }

    fn from_count(v: u64) -> Self {
        Self::from_u64(v).unwrap_or_else(Self::nan)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
