//! Floating-point abstraction shared by the geometric and topological code.
//!
//! Everything that only needs arithmetic, comparisons and square roots is
//! written against [`Scalar`] so the same routines run in `f32` (half the
//! memory for large distance matrices) or `f64`.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::Serialize;

pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Serialize
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`; used when pulling signal values into the
    /// scalar type of a point cloud.
    fn from_f64_lossy(value: f64) -> Self;

    fn to_f64_lossy(self) -> f64;

    fn from_usize_lossy(value: usize) -> Self {
        Self::from_f64_lossy(value as f64)
    }
}

impl Scalar for f32 {
    #[inline]
    fn from_f64_lossy(value: f64) -> Self {
        value as f32
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    #[inline]
    fn from_f64_lossy(value: f64) -> Self {
        value
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

/// Total order on non-NaN scalars. NaN compares equal to everything, which
/// never happens for distances built from finite inputs.
#[inline]
pub(crate) fn cmp_scalar<T: Scalar>(a: &T, b: &T) -> std::cmp::Ordering {
    a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal)
}
