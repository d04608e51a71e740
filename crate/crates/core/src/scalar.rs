//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type the learners and bound evaluators are generic over.
///
/// Implemented for `f32` and `f64`. Sampling hooks live on the trait so that
/// generic code does not need to carry `StandardNormal: Distribution<T>`
/// bounds around.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Standard Laplace draw (location 0, scale 1), as the difference of two
    /// unit exponentials.
    fn sample_standard_laplace<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Converts an `f64` literal. Panics only if the target cannot represent
    /// finite `f64` values at all, which never happens for `f32`/`f64`.
    #[inline]
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

macro_rules! impl_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            #[inline]
            fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                <StandardNormal as Distribution<$t>>::sample(&StandardNormal, rng)
            }

            #[inline]
            fn sample_standard_laplace<R: Rng + ?Sized>(rng: &mut R) -> Self {
                let a: $t = Exp1.sample(rng);
                let b: $t = Exp1.sample(rng);
                a - b
            }
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);
