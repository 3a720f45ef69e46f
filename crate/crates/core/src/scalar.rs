//! Scalar abstraction shared by the numerical modules.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use rustfft::FftNum;

/// Real floating point type the solver is generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + FftNum
    + Default
    + Debug
    + Display
    + LowerExp
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn of(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn of_i(n: i64) -> Self {
        Self::from_i64(n).expect("i64 representable")
    }

    #[inline]
    fn two_pi() -> Self {
        Self::TAU()
    }

    /// Least non-negative remainder of `self` modulo `m > 0`.
    #[inline]
    fn rem_euclid(self, m: Self) -> Self {
        let r = self % m;
        if r < Self::zero() {
            r + m
        } else {
            r
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `exp(i * theta)`.
#[inline]
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// Reduces `t` to `[0, 1)`.
#[inline]
pub fn wrap_unit<T: Real>(t: T) -> T {
    let r = t - t.floor();
    if r >= T::one() {
        T::zero()
    } else {
        r
    }
}

/// Elements a dense least-squares solve can run over: a real type or its complex extension.
pub trait Field<T: Real>:
    Copy
    + Send
    + Sync
    + Debug
    + PartialEq
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
    + std::ops::AddAssign
    + std::ops::SubAssign
{
    fn zero() -> Self;
    fn from_real(x: T) -> Self;
    fn conj(self) -> Self;
    fn modulus(self) -> T;
    fn scale(self, x: T) -> Self;
    /// `self / |self|`, or one for zero.
    fn phase(self) -> Self;
    fn into_complex(self) -> Complex<T>;
}

impl<T: Real> Field<T> for T {
    #[inline]
    fn zero() -> Self {
        T::zero()
    }
    #[inline]
    fn from_real(x: T) -> Self {
        x
    }
    #[inline]
    fn conj(self) -> Self {
        self
    }
    #[inline]
    fn modulus(self) -> T {
        self.abs()
    }
    #[inline]
    fn scale(self, x: T) -> Self {
        self * x
    }
    #[inline]
    fn phase(self) -> Self {
        if self < T::zero() {
            -T::one()
        } else {
            T::one()
        }
    }
    #[inline]
    fn into_complex(self) -> Complex<T> {
        Complex::new(self, T::zero())
    }
}

impl<T: Real> Field<T> for Complex<T> {
    #[inline]
    fn zero() -> Self {
        Complex::new(T::zero(), T::zero())
    }
    #[inline]
    fn from_real(x: T) -> Self {
        Complex::new(x, T::zero())
    }
    #[inline]
    fn conj(self) -> Self {
        Complex::conj(&self)
    }
    #[inline]
    fn modulus(self) -> T {
        self.norm()
    }
    #[inline]
    fn scale(self, x: T) -> Self {
        self * x
    }
    #[inline]
    fn phase(self) -> Self {
        let r = self.norm();
        if r == T::zero() {
            Complex::new(T::one(), T::zero())
        } else {
            self / r
        }
    }
    #[inline]
    fn into_complex(self) -> Complex<T> {
        self
    }
}
