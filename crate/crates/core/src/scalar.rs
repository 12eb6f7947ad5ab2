//! Floating-point scalar abstraction: f32 or f64.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar type the whole crate is generic over.
pub trait Scalar:
    RealField
    + FromPrimitive
    + ToPrimitive
    + Copy
    + Default
    + Send
    + Sync
    + serde::Serialize
    + serde::de::DeserializeOwned
    + 'static
{
    fn infinity() -> Self;

    fn finite(self) -> bool;

    fn machine_epsilon() -> Self;

    /// Lossy conversion from f64 for literals and tolerances.
    fn from_f(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal")
    }

    fn to_f(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

macro_rules! impl_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn infinity() -> Self {
                <$t>::INFINITY
            }
            fn finite(self) -> bool {
                <$t>::is_finite(self)
            }
            fn machine_epsilon() -> Self {
                <$t>::EPSILON
            }
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);
