//! Scalar abstraction for model weights and metric values.
//!
//! Everything numeric in this crate (perceptron weights, log-likelihoods,
//! precision/recall tables) is generic over [`Scalar`] so the same code runs
//! at `f32` or `f64`. The crate root exports `f64` aliases, which is what the
//! CLI and the on-disk formats use.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssignOps, ToPrimitive};

/// Floating-point scalar usable for model weights and scores.
///
/// A blanket impl covers any type with the required `num-traits` bounds, so
/// `f32` and `f64` both qualify out of the box.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssignOps + Sum + Display + Debug + Send + Sync + 'static
{
    /// Lossless-enough conversion from a usize count.
    ///
    /// Counts in this crate (token counts, supports, epochs) are far below
    /// 2^52, so the `unwrap` never fires for `f32`/`f64`.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable as scalar")
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + NumAssignOps
        + Sum
        + Display
        + Debug
        + Send
        + Sync
        + 'static
{
}
