//! Scalar abstraction for the numeric kernels.
//!
//! All statistics and the randomization engine are generic over a floating
//! scalar so the same code runs at `f32` or `f64` precision. Concrete
//! aliases live at the crate root.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssignOps, ToPrimitive};

/// Floating scalar accepted by the numeric kernels.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssignOps + Debug + Display + Send + Sync + 'static
{
    /// Lossless-enough conversion from `f64` constants (tolerances, levels).
    #[inline]
    fn from_f64_c(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant representable")
    }

    /// Exact conversion from a count.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    /// Conversion to `f64` for reporting and special-function plumbing.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + ToPrimitive + NumAssignOps + Debug + Display + Send + Sync + 'static
{
}

/// Mean of a slice. Empty input yields zero; callers validate lengths.
pub(crate) fn mean<S: Scalar>(xs: &[S]) -> S {
    if xs.is_empty() {
        return S::zero();
    }
    let sum = xs.iter().fold(S::zero(), |acc, &x| acc + x);
    sum / S::from_count(xs.len())
}

/// Population-normalized (1/n) variance about the sample mean.
pub(crate) fn pop_variance<S: Scalar>(xs: &[S]) -> S {
    if xs.is_empty() {
        return S::zero();
    }
    let m = mean(xs);
    let ss = xs.iter().fold(S::zero(), |acc, &x| {
        let d = x - m;
        acc + d * d
    });
    ss / S::from_count(xs.len())
}
