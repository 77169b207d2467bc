use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumCast};

/// Floating-point type the simplex kernel can run in.
///
/// The associated tolerances are tuned to the precision of the type.
pub trait Scalar: Float + FromPrimitive + NumCast + Debug + Display + Send + Sync + 'static {
    /// Reduced costs above `-REDUCED_COST_TOL` are treated as non-improving.
    const REDUCED_COST_TOL: Self;
    /// Primal feasibility and ratio-test tolerance.
    const FEASIBILITY_TOL: Self;
    /// Smallest pivot magnitude accepted.
    const PIVOT_TOL: Self;
    /// Tableau entries below this magnitude are flushed to zero after a pivot.
    const DROP_TOL: Self;

    fn from_f64_lossy(x: f64) -> Self {
        <Self as NumCast>::from(x).unwrap_or_else(Self::nan)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const REDUCED_COST_TOL: f64 = 1e-9;
    const FEASIBILITY_TOL: f64 = 1e-7;
    const PIVOT_TOL: f64 = 1e-10;
    const DROP_TOL: f64 = 1e-11;
}

impl Scalar for f32 {
    const REDUCED_COST_TOL: f32 = 1e-5;
    const FEASIBILITY_TOL: f32 = 1e-4;
    const PIVOT_TOL: f32 = 1e-6;
    const DROP_TOL: f32 = 1e-6;
}
