//! Scalar abstraction: the whole crate is generic over the floating-point
//! type via `num-traits`, with `f64` aliases exported at the crate root.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};
use std::fmt::{Debug, Display};
use std::iter::{Product, Sum};

/// Floating-point scalar underlying all geometry: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Sum + Product + Debug + Display + Send + Sync + 'static
{
    /// Conversion from an `f64` constant.
    #[inline]
    fn of(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("finite f64 constant")
    }

    /// Conversion from a count or index.
    #[inline]
    fn of_usize(v: usize) -> Self {
        <Self as FromPrimitive>::from_usize(v).expect("index fits in scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over the crate scalar.
pub type Cx<T> = Complex<T>;

/// Complex constant from `f64` parts.
#[inline]
pub fn cx<T: Real>(re: f64, im: f64) -> Cx<T> {
    Complex::new(T::of(re), T::of(im))
}

/// `e^{iθ}` as a unit complex number.
#[inline]
pub fn unit<T: Real>(theta: T) -> Cx<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// Argument folded into `[0, 2π)`.
#[inline]
pub fn arg_2pi<T: Real>(z: Cx<T>) -> T {
    let a = z.arg();
    if a < T::zero() {
        a + T::TAU()
    } else {
        a
    }
}

/// Angle difference `a − b` folded into `[0, 2π)`.
#[inline]
pub fn mod_2pi<T: Real>(x: T) -> T {
    let tau = T::TAU();
    let mut r = x % tau;
    if r < T::zero() {
        r = r + tau;
    }
    r
}
