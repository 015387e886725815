//! Real scalar abstraction shared by the double and double-double pipelines.
//!
//! Every numeric routine in the crate (jets, expression evaluation, the
//! coefficient engine, the expansions and the quadrature oracle) is generic
//! over [`Real`]. `f64` is the everyday carrier; [`crate::dd::Dd`] carries
//! about 32 significant digits and is used wherever a quantity has to be
//! resolved far below double-precision roundoff (convergence studies at large
//! `T`, the `Q(y)` residual, the least-squares reversion oracle).

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_complex::Complex;
use num_traits::Num;

pub trait Real:
    Copy + Debug + Display + PartialOrd + Num + Neg<Output = Self> + Send + Sync + 'static
{
    /// Unit roundoff of the representation.
    const EPSILON: f64;

    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;

    /// Parses a decimal literal at the full precision of the type.
    fn from_literal(text: &str) -> Option<Self> {
        text.parse::<f64>().ok().map(Self::from_f64)
    }

    fn pi() -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sqrt(self) -> Self;
    fn atan(self) -> Self;
    fn abs(self) -> Self;
    /// Nearest integer, ties away from zero.
    fn round(self) -> Self;
    fn powf(self, p: Self) -> Self;
    fn is_finite(self) -> bool;

    fn sin_cos(self) -> (Self, Self) {
        (self.sin(), self.cos())
    }

    fn from_i64(v: i64) -> Self {
        Self::from_f64(v as f64)
    }

    /// `(cos 2πt, sin 2πt)` with `t` reduced modulo 1 first, so integer
    /// arguments give exactly `(1, 0)`.
    fn cis_turns(self) -> (Self, Self) {
        let frac = self - self.round();
        if frac == Self::zero() {
            return (Self::one(), Self::zero());
        }
        let (s, c) = (Self::pi() * Self::from_f64(2.0) * frac).sin_cos();
        (c, s)
    }
}

impl Real for f64 {
    const EPSILON: f64 = f64::EPSILON;

    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn atan(self) -> Self {
        f64::atan(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn round(self) -> Self {
        f64::round(self)
    }
    fn powf(self, p: Self) -> Self {
        f64::powf(self, p)
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn sin_cos(self) -> (Self, Self) {
        (f64::sin(self), f64::cos(self))
    }
}

/// `e(t) = exp(2πi t)`.
pub fn e_turns<R: Real>(t: R) -> Complex<R> {
    let (c, s) = t.cis_turns();
    Complex::new(c, s)
}

/// Complex division that stays exact in the real-divisor case.
///
/// `num_complex` divides through `|b|²`, which perturbs the last bit even when
/// both operands are real; the jet and expression layers rely on real inputs
/// producing bit-identical results on both paths.
pub fn cdiv<R: Real>(a: Complex<R>, b: Complex<R>) -> Complex<R> {
    if b.im == R::zero() {
        Complex::new(a.re / b.re, a.im / b.re)
    } else {
        a / b
    }
}

pub fn cabs<R: Real>(z: Complex<R>) -> R {
    if z.im == R::zero() {
        z.re.abs()
    } else if z.re == R::zero() {
        z.im.abs()
    } else {
        (z.re * z.re + z.im * z.im).sqrt()
    }
}

/// Integer power by binary exponentiation. Used identically by the real and
/// jet evaluators so their constant terms agree bit for bit.
pub fn ipow<T, F>(base: T, exp: u32, one: T, mut mul: F) -> T
where
    T: Clone,
    F: FnMut(&T, &T) -> T,
{
    let mut result = one;
    let mut acc = base;
    let mut e = exp;
    let mut first = true;
    while e > 0 {
        if e & 1 == 1 {
            result = if first { acc.clone() } else { mul(&result, &acc) };
            first = false;
        }
        e >>= 1;
        if e > 0 {
            acc = mul(&acc, &acc);
        }
    }
    result
}
