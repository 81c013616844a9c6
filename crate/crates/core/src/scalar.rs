//! Scalar abstraction.
//!
//! All numerics are complex; the real scalar `R` picks the precision. The
//! default rank tolerance is part of the scalar because a threshold that is
//! sensible in double precision is below the noise floor in single precision.

use nalgebra::{Complex, DMatrix, DVector, RealField};
use num_traits::{FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};

/// A real floating-point type usable as the base field of the complex
/// linear algebra in this crate.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Relative singular-value threshold used for every rank/zero decision
    /// unless the caller overrides it.
    fn default_tol() -> Self;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn default_tol() -> Self {
        1e-9
    }
}

impl Real for f32 {
    fn default_tol() -> Self {
        1e-4
    }
}

pub type C<R> = Complex<R>;
pub type CMat<R> = DMatrix<Complex<R>>;
pub type CVec<R> = DVector<Complex<R>>;

#[inline]
pub fn c<R: Real>(re: f64, im: f64) -> C<R> {
    Complex::new(R::lit(re), R::lit(im))
}

#[inline]
pub fn cr<R: Real>(re: R) -> C<R> {
    Complex::new(re, R::zero())
}
