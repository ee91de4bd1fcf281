//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point type the simulator can be instantiated over.
///
/// Each implementation carries its own validation tolerances so that the
/// same code runs in single precision without tripping checks that only
/// make sense for `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Maximum `|M[i][j] - conj(M[j][i])|` for a matrix to count as Hermitian.
    fn hermitian_tol() -> Self;
    /// Maximum `|U U^† - I|` entry for a matrix to count as unitary.
    fn unitary_tol() -> Self;
    /// Allowed deviation of a density matrix trace from one.
    fn trace_tol() -> Self;
    /// Most negative eigenvalue tolerated (and clipped) in a density matrix.
    fn psd_tol() -> Self;
    /// Allowed deviation of a pure state's squared norm from one.
    fn norm_tol() -> Self;
    /// Relative threshold below which a singular value counts as zero.
    fn rank_tol() -> Self;

    /// Shorthand for conversions from literal constants.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("count fits in float")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn hermitian_tol() -> Self {
        1e-12
    }
    fn unitary_tol() -> Self {
        1e-10
    }
    fn trace_tol() -> Self {
        1e-9
    }
    fn psd_tol() -> Self {
        1e-9
    }
    fn norm_tol() -> Self {
        1e-10
    }
    fn rank_tol() -> Self {
        1e-9
    }
}

impl Real for f32 {
    fn hermitian_tol() -> Self {
        1e-5
    }
    fn unitary_tol() -> Self {
        1e-4
    }
    fn trace_tol() -> Self {
        1e-4
    }
    fn psd_tol() -> Self {
        1e-4
    }
    fn norm_tol() -> Self {
        1e-4
    }
    fn rank_tol() -> Self {
        1e-4
    }
}

/// Complex amplitude over a [`Real`] scalar.
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn c<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn cr<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}
