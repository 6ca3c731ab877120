use num_traits::{Float, FromPrimitive, NumAssignOps, ToPrimitive};

/// Scalar type for the geometry, filter, and metric kernels: `f32` or `f64`.
///
/// The pipeline stages (dataset generation, training, fitting, file formats)
/// are pinned to `f64`; the kernels stay generic so callers can instantiate
/// `f32` where storage or throughput matters more than the last digits.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssignOps
    + core::fmt::Debug
    + core::fmt::Display
    + core::iter::Sum
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant; panics only for values outside the type's
    /// range, which no constant in this crate is.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("constant representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}
