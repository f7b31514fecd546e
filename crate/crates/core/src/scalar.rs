//! Scalar abstractions.
//!
//! Distribution estimation only needs field arithmetic, so it runs over
//! [`Scalar`], which exact rationals implement. Anything that takes a
//! logarithm needs [`Real`].

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, Num};

/// Field-like numeric type used for probabilities and empirical frequencies.
pub trait Scalar: Num + Copy + PartialOrd + Debug + Send + Sync + 'static {
    /// Converts a record count into the scalar type.
    fn from_count(n: usize) -> Self;

    fn to_f64_lossy(self) -> f64;
}

/// Floating point scalar: f32 or f64.
pub trait Real: Scalar + Float + FromPrimitive {
    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("finite literal")
    }
}

impl Scalar for f64 {
    fn from_count(n: usize) -> Self {
        n as f64
    }
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    fn from_count(n: usize) -> Self {
        n as f32
    }
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {}
impl Real for f32 {}

macro_rules! impl_ratio_scalar {
    ($($int:ty),*) => {
        $(
            impl Scalar for Ratio<$int> {
                fn from_count(n: usize) -> Self {
                    Ratio::from_integer(<$int>::try_from(n).expect("count fits integer type"))
                }
                fn to_f64_lossy(self) -> f64 {
                    *self.numer() as f64 / *self.denom() as f64
                }
            }
        )*
    };
}

impl_ratio_scalar!(i64, i128);
