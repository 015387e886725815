//! Truncated Taylor series ("jets").
//!
//! A jet of degree `D` at a base point `x0` stores `c_k = h^(k)(x0)/k!` for
//! `k = 0..=D`. Arithmetic is exact up to order `D`; anything beyond is
//! silently dropped, which is the usual formal-power-series semantics.
//!
//! Coefficients are complex so that the same carrier serves real Taylor data
//! and the complex boundary terms. Real inputs keep exactly zero imaginary
//! parts.

use num_complex::Complex;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::real::{cdiv, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("jet degree must be at least {min}, got {got}")]
    DegreeTooSmall { min: usize, got: usize },
    #[error("jet degrees differ ({0} vs {1})")]
    DegreeMismatch(usize, usize),
    #[error("jet base points differ ({0} vs {1})")]
    BasePointMismatch(f64, f64),
    #[error("division by a jet with zero constant term")]
    DivisionByZero,
    #[error("{func} is not defined at constant term {value}")]
    Domain { func: &'static str, value: String },
    #[error("composition requires an inner series with zero constant term")]
    NonzeroInnerConstant,
    #[error("series reversion requires c0 = 0 and c1 != 0")]
    NotInvertible,
    #[error("derivative order {k} exceeds jet degree {degree}")]
    OrderOutOfRange { k: usize, degree: usize },
}

/// Elementary maps applicable to a jet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JetFn {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    Pow(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Jet<R: Real = f64> {
    base_point: f64,
    coeffs: Vec<Complex<R>>,
}

fn real_positive<R: Real>(z: Complex<R>) -> bool {
    z.im == R::zero() && z.re > R::zero()
}

fn is_real<R: Real>(z: Complex<R>) -> bool {
    z.im == R::zero()
}

impl<R: Real> Jet<R> {
    /// Identity function at `x0`: `[x0, 1, 0, ...]`.
    pub fn variable(x0: f64, degree: usize) -> Result<Self, JetError> {
        Self::variable_at(R::from_f64(x0), degree)
    }

    /// Identity jet whose constant term carries the full precision of `x0`.
    pub fn variable_at(x0: R, degree: usize) -> Result<Self, JetError> {
        if degree == 0 {
            return Err(JetError::DegreeTooSmall { min: 1, got: 0 });
        }
        let mut coeffs = vec![Complex::zero(); degree + 1];
        coeffs[0] = Complex::new(x0, R::zero());
        coeffs[1] = Complex::one();
        Ok(Jet { base_point: x0.to_f64(), coeffs })
    }

    pub fn constant(value: Complex<R>, base_point: f64, degree: usize) -> Self {
        let mut coeffs = vec![Complex::zero(); degree + 1];
        coeffs[0] = value;
        Jet { base_point, coeffs }
    }

    pub fn from_coeffs(base_point: f64, coeffs: Vec<Complex<R>>) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least one coefficient");
        Jet { base_point, coeffs }
    }

    pub fn from_real(base_point: f64, coeffs: &[R]) -> Self {
        Self::from_coeffs(base_point, coeffs.iter().map(|&c| Complex::new(c, R::zero())).collect())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn base_point(&self) -> f64 {
        self.base_point
    }

    pub fn coeffs(&self) -> &[Complex<R>] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Complex<R> {
        self.coeffs.get(k).copied().unwrap_or_else(Complex::zero)
    }

    pub fn constant_term(&self) -> Complex<R> {
        self.coeffs[0]
    }

    /// Real parts of the coefficients.
    pub fn real_coeffs(&self) -> Vec<R> {
        self.coeffs.iter().map(|c| c.re).collect()
    }

    /// Keeps orders `0..=degree`, padding with zeros when raising the degree.
    pub fn with_degree(&self, degree: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(degree + 1, Complex::zero());
        Jet { base_point: self.base_point, coeffs }
    }

    fn like(&self, coeffs: Vec<Complex<R>>) -> Self {
        Jet { base_point: self.base_point, coeffs }
    }

    fn check_compatible(&self, other: &Self) -> Result<(), JetError> {
        if self.degree() != other.degree() {
            return Err(JetError::DegreeMismatch(self.degree(), other.degree()));
        }
        if self.base_point != other.base_point {
            return Err(JetError::BasePointMismatch(self.base_point, other.base_point));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, JetError> {
        self.check_compatible(other)?;
        Ok(self.like(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, JetError> {
        self.check_compatible(other)?;
        Ok(self.like(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect()))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, JetError> {
        self.check_compatible(other)?;
        Ok(self.like(cauchy(&self.coeffs, &other.coeffs, self.degree())))
    }

    pub fn div(&self, other: &Self) -> Result<Self, JetError> {
        self.check_compatible(other)?;
        let b = &other.coeffs;
        if b[0] == Complex::zero() {
            return Err(JetError::DivisionByZero);
        }
        let mut q: Vec<Complex<R>> = Vec::with_capacity(b.len());
        for k in 0..b.len() {
            let mut acc = self.coeffs[k];
            for j in 1..=k {
                acc = acc - b[j] * q[k - j];
            }
            q.push(cdiv(acc, b[0]));
        }
        Ok(self.like(q))
    }

    pub fn neg(&self) -> Self {
        self.like(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn scale(&self, s: Complex<R>) -> Self {
        self.like(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add_constant(&self, s: Complex<R>) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] = coeffs[0] + s;
        self.like(coeffs)
    }

    /// Non-negative integer power by binary exponentiation.
    pub fn powi(&self, n: u32) -> Self {
        let one = Jet::constant(Complex::one(), self.base_point, self.degree());
        crate::real::ipow(self.clone(), n, one, |a, b| a.like(cauchy(&a.coeffs, &b.coeffs, a.degree())))
    }

    pub fn map(&self, func: JetFn) -> Result<Self, JetError> {
        match func {
            JetFn::Exp => Ok(self.exp()),
            JetFn::Log => self.ln(),
            JetFn::Sin => Ok(self.sin_cos().0),
            JetFn::Cos => Ok(self.sin_cos().1),
            JetFn::Sqrt => self.sqrt(),
            JetFn::Pow(p) => self.powf(R::from_f64(p)),
        }
    }

    pub fn exp(&self) -> Self {
        let a = &self.coeffs;
        let mut b = Vec::with_capacity(a.len());
        b.push(cexp(a[0]));
        for k in 1..a.len() {
            let mut acc = Complex::zero();
            for j in 1..=k {
                acc = acc + a[j] * b[k - j] * R::from_f64(j as f64);
            }
            b.push(acc / R::from_f64(k as f64));
        }
        self.like(b)
    }

    pub fn ln(&self) -> Result<Self, JetError> {
        let a = &self.coeffs;
        if !real_positive(a[0]) {
            return Err(domain("log", a[0]));
        }
        let mut b: Vec<Complex<R>> = Vec::with_capacity(a.len());
        b.push(Complex::new(a[0].re.ln(), R::zero()));
        for k in 1..a.len() {
            let mut acc = a[k] * R::from_f64(k as f64);
            for j in 1..k {
                acc = acc - a[j] * b[k - j] * R::from_f64((k - j) as f64);
            }
            b.push(cdiv(acc, a[0] * R::from_f64(k as f64)));
        }
        Ok(self.like(b))
    }

    /// `(sin a, cos a)` from the coupled recurrences `s' = c a'`, `c' = -s a'`.
    pub fn sin_cos(&self) -> (Self, Self) {
        let a = &self.coeffs;
        let (s0, c0) = csin_cos(a[0]);
        let mut s = vec![s0];
        let mut c = vec![c0];
        for k in 1..a.len() {
            let mut sa = Complex::zero();
            let mut ca = Complex::zero();
            for j in 1..=k {
                let w = a[j] * R::from_f64(j as f64);
                sa = sa + w * c[k - j];
                ca = ca - w * s[k - j];
            }
            let kk = R::from_f64(k as f64);
            s.push(sa / kk);
            c.push(ca / kk);
        }
        (self.like(s), self.like(c))
    }

    pub fn sqrt(&self) -> Result<Self, JetError> {
        if !real_positive(self.coeffs[0]) {
            return Err(domain("sqrt", self.coeffs[0]));
        }
        self.pow_recurrence(R::from_f64(0.5), Complex::new(self.coeffs[0].re.sqrt(), R::zero()))
    }

    /// `a^p` for real `p`. Needs a positive real constant term.
    pub fn powf(&self, p: R) -> Result<Self, JetError> {
        if !real_positive(self.coeffs[0]) {
            return Err(domain("pow", self.coeffs[0]));
        }
        self.pow_recurrence(p, Complex::new(self.coeffs[0].re.powf(p), R::zero()))
    }

    // a b' = p a' b  =>  k a0 b_k = sum_{j=1..k} (p j - (k - j)) a_j b_{k-j}
    fn pow_recurrence(&self, p: R, b0: Complex<R>) -> Result<Self, JetError> {
        let a = &self.coeffs;
        let mut b = vec![b0];
        for k in 1..a.len() {
            let mut acc = Complex::zero();
            for j in 1..=k {
                let w = p * R::from_f64(j as f64) - R::from_f64((k - j) as f64);
                acc = acc + a[j] * b[k - j] * w;
            }
            b.push(cdiv(acc, a[0] * R::from_f64(k as f64)));
        }
        Ok(self.like(b))
    }

    pub fn atan(&self) -> Result<Self, JetError> {
        let a0 = self.coeffs[0];
        if !is_real(a0) {
            return Err(domain("atan", a0));
        }
        let c0 = Complex::new(a0.re.atan(), R::zero());
        if self.degree() == 0 {
            return Ok(self.like(vec![c0]));
        }
        // atan(a)' = a' / (1 + a^2)
        let da = self.differentiate()?;
        let low = self.with_degree(self.degree() - 1);
        let denom = cauchy(&low.coeffs, &low.coeffs, low.degree());
        let denom = low.like(denom).add_constant(Complex::one());
        let q = da.div(&denom)?;
        Ok(q.integrate(c0))
    }

    /// `|a|`, defined only away from the kink.
    pub fn abs(&self) -> Result<Self, JetError> {
        let a0 = self.coeffs[0];
        if !is_real(a0) || a0.re == R::zero() {
            return Err(domain("abs", a0));
        }
        Ok(if a0.re > R::zero() { self.clone() } else { self.neg() })
    }

    /// Formal composition `outer ∘ inner`; the result lives at the base point
    /// of `inner`.
    pub fn compose(outer: &Self, inner: &Self) -> Result<Self, JetError> {
        if outer.degree() != inner.degree() {
            return Err(JetError::DegreeMismatch(outer.degree(), inner.degree()));
        }
        if inner.coeffs[0] != Complex::zero() {
            return Err(JetError::NonzeroInnerConstant);
        }
        let d = inner.degree();
        // Horner in the series ring
        let mut acc = vec![Complex::zero(); d + 1];
        for k in (0..=d).rev() {
            acc = cauchy(&acc, &inner.coeffs, d);
            acc[0] = acc[0] + outer.coeffs[k];
        }
        Ok(inner.like(acc))
    }

    /// Compositional inverse: returns `b` with `a ∘ b = id` to the jet's degree.
    ///
    /// Newton iteration `b <- b - (a∘b - y) / (a'∘b)` on formal series; each
    /// step doubles the number of correct coefficients.
    pub fn revert(&self) -> Result<Self, JetError> {
        let d = self.degree();
        if d == 0 || self.coeffs[0] != Complex::zero() || self.coeffs[1] == Complex::zero() {
            return Err(JetError::NotInvertible);
        }
        let base = self.coeffs[0].re.to_f64();
        let mut b = vec![Complex::zero(); d + 1];
        b[1] = cdiv(Complex::one(), self.coeffs[1]);
        let mut b = Jet { base_point: base, coeffs: b };
        let a = Jet { base_point: base, coeffs: self.coeffs.clone() };
        let da = self.differentiate()?.with_degree(d);
        let da = Jet { base_point: base, coeffs: da.coeffs };
        let identity = Jet::<R>::variable_at(R::zero(), d)?;

        let steps = (usize::BITS - d.leading_zeros()) as usize + 1;
        for _ in 0..steps {
            let residual = Jet::compose(&a, &b)?.sub(&identity)?;
            let slope = Jet::compose(&da, &b)?;
            b = b.sub(&residual.div(&slope)?)?;
        }
        Ok(b)
    }

    pub fn differentiate(&self) -> Result<Self, JetError> {
        let d = self.degree();
        if d == 0 {
            return Err(JetError::DegreeTooSmall { min: 1, got: 0 });
        }
        Ok(self.like((0..d).map(|k| self.coeffs[k + 1] * R::from_f64((k + 1) as f64)).collect()))
    }

    /// Antiderivative with constant term `c0`; the degree grows by one.
    pub fn integrate(&self, c0: Complex<R>) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(c0);
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c / R::from_f64((k + 1) as f64));
        }
        self.like(coeffs)
    }

    /// `h^(k)(x0) = k! c_k`.
    pub fn derivative(&self, k: usize) -> Result<Complex<R>, JetError> {
        if k > self.degree() {
            return Err(JetError::OrderOutOfRange { k, degree: self.degree() });
        }
        let fact = (1..=k).fold(R::one(), |acc, i| acc * R::from_f64(i as f64));
        Ok(self.coeffs[k] * fact)
    }

    /// Evaluates the truncated polynomial at offset `t` from the base point.
    pub fn eval_offset(&self, t: Complex<R>) -> Complex<R> {
        self.coeffs.iter().rev().fold(Complex::zero(), |acc, &c| acc * t + c)
    }
}

fn cauchy<R: Real>(a: &[Complex<R>], b: &[Complex<R>], degree: usize) -> Vec<Complex<R>> {
    (0..=degree)
        .map(|k| {
            let mut acc = Complex::zero();
            for j in 0..=k {
                acc = acc + a[j] * b[k - j];
            }
            acc
        })
        .collect()
}

fn domain<R: Real>(func: &'static str, value: Complex<R>) -> JetError {
    let value = if value.im == R::zero() {
        format!("{}", value.re.to_f64())
    } else {
        format!("{}{:+}i", value.re.to_f64(), value.im.to_f64())
    };
    JetError::Domain { func, value }
}

fn cexp<R: Real>(z: Complex<R>) -> Complex<R> {
    let m = z.re.exp();
    if z.im == R::zero() {
        return Complex::new(m, R::zero());
    }
    let (s, c) = z.im.sin_cos();
    Complex::new(m * c, m * s)
}

fn csin_cos<R: Real>(z: Complex<R>) -> (Complex<R>, Complex<R>) {
    let (s, c) = z.re.sin_cos();
    if z.im == R::zero() {
        return (Complex::new(s, R::zero()), Complex::new(c, R::zero()));
    }
    let ep = z.im.exp();
    let em = R::one() / ep;
    let two = R::from_f64(2.0);
    let (ch, sh) = ((ep + em) / two, (ep - em) / two);
    (Complex::new(s * ch, c * sh), Complex::new(c * ch, -(s * sh)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn jet(coeffs: &[f64]) -> Jet {
        Jet::from_real(0.0, coeffs)
    }

    fn assert_coeffs(j: &Jet, expected: &[f64], tol: f64) {
        assert_eq!(j.degree() + 1, expected.len(), "degree of {:?}", j.real_coeffs());
        for (k, (c, e)) in j.coeffs().iter().zip(expected).enumerate() {
            assert!((c.re - e).abs() <= tol && c.im.abs() <= tol, "coeff {k}: {c} vs {e}");
        }
    }

    #[test]
    fn variable_jets() {
        assert_coeffs(&Jet::<f64>::variable(2.0, 3).unwrap(), &[2.0, 1.0, 0.0, 0.0], 0.0);
        assert_coeffs(&Jet::<f64>::variable(0.0, 1).unwrap(), &[0.0, 1.0], 0.0);
        assert_coeffs(&Jet::<f64>::variable(-1.5, 2).unwrap(), &[-1.5, 1.0, 0.0], 0.0);
        assert!(matches!(Jet::<f64>::variable(1.0, 0), Err(JetError::DegreeTooSmall { .. })));
    }

    #[test]
    fn arithmetic() {
        let a = jet(&[1.0, 1.0, 0.0]);
        assert_coeffs(&a.mul(&a).unwrap(), &[1.0, 2.0, 1.0], 0.0);
        assert_coeffs(&jet(&[1.0, 0.0, 0.0]).div(&a).unwrap(), &[1.0, -1.0, 1.0], 0.0);
        assert_coeffs(&jet(&[0.0, 1.0]).add(&jet(&[1.0, 0.0])).unwrap(), &[1.0, 1.0], 0.0);
        assert!(matches!(a.add(&jet(&[1.0, 0.0])), Err(JetError::DegreeMismatch(2, 1))));
        let shifted = Jet::from_real(1.0, &[1.0, 1.0, 0.0]);
        assert!(matches!(a.mul(&shifted), Err(JetError::BasePointMismatch(..))));
        assert_eq!(a.div(&jet(&[0.0, 1.0, 0.0])), Err(JetError::DivisionByZero));
    }

    #[test]
    fn elementary_maps() {
        let tol = 1e-15;
        assert_coeffs(&jet(&[1.0, 1.0, 0.0, 0.0]).map(JetFn::Sqrt).unwrap(), &[1.0, 0.5, -0.125, 0.0625], tol);
        assert_coeffs(&jet(&[0.0, 1.0, 0.0, 0.0]).map(JetFn::Exp).unwrap(), &[1.0, 1.0, 0.5, 1.0 / 6.0], tol);
        assert_coeffs(&jet(&[1.0, 1.0, 0.0]).map(JetFn::Log).unwrap(), &[0.0, 1.0, -0.5], tol);
        assert_coeffs(&jet(&[0.0, 1.0, 0.0, 0.0]).map(JetFn::Sin).unwrap(), &[0.0, 1.0, 0.0, -1.0 / 6.0], tol);
        assert_coeffs(&jet(&[0.0, 1.0, 0.0, 0.0, 0.0]).map(JetFn::Cos).unwrap(), &[1.0, 0.0, -0.5, 0.0, 1.0 / 24.0], tol);
        // (1+x)^-1
        assert_coeffs(&jet(&[1.0, 1.0, 0.0, 0.0]).map(JetFn::Pow(-1.0)).unwrap(), &[1.0, -1.0, 1.0, -1.0], tol);
        // atan(x) = x - x^3/3
        assert_coeffs(&jet(&[0.0, 1.0, 0.0, 0.0]).atan().unwrap(), &[0.0, 1.0, 0.0, -1.0 / 3.0], tol);
        assert!(matches!(jet(&[0.0, 1.0]).map(JetFn::Log), Err(JetError::Domain { func: "log", .. })));
        assert!(matches!(jet(&[-1.0, 1.0]).map(JetFn::Sqrt), Err(JetError::Domain { func: "sqrt", .. })));
        assert!(matches!(jet(&[0.0, 1.0]).abs(), Err(JetError::Domain { func: "abs", .. })));
        assert_coeffs(&jet(&[-2.0, 1.0]).abs().unwrap(), &[2.0, -1.0], 0.0);
    }

    #[test]
    fn composition() {
        let c = Jet::compose(&jet(&[0.0, 1.0, 1.0]), &jet(&[0.0, 2.0, 0.0])).unwrap();
        assert_coeffs(&c, &[0.0, 2.0, 4.0], 0.0);
        let c = Jet::compose(&jet(&[5.0, 0.0, 0.0]), &jet(&[0.0, 1.0, 1.0])).unwrap();
        assert_coeffs(&c, &[5.0, 0.0, 0.0], 0.0);
        let c = Jet::compose(&jet(&[0.0, 1.0, 0.0, 0.0]), &jet(&[0.0, 1.0, 1.0, 0.0])).unwrap();
        assert_coeffs(&c, &[0.0, 1.0, 1.0, 0.0], 0.0);
        assert_eq!(
            Jet::compose(&jet(&[0.0, 1.0]), &jet(&[1.0, 1.0])),
            Err(JetError::NonzeroInnerConstant)
        );
    }

    #[test]
    fn reversion() {
        let a = jet(&[0.0, 1.0, 1.0, 0.0, 0.0]);
        let b = a.revert().unwrap();
        // signed Catalan numbers
        assert_coeffs(&b, &[0.0, 1.0, -1.0, 2.0, -5.0], 1e-14);
        let id = Jet::compose(&a, &b).unwrap();
        assert_coeffs(&id, &[0.0, 1.0, 0.0, 0.0, 0.0], 1e-14);
        assert_coeffs(&jet(&[0.0, 2.0, 0.0]).revert().unwrap(), &[0.0, 0.5, 0.0], 0.0);
        let identity = jet(&[0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(identity.revert().unwrap().real_coeffs(), identity.real_coeffs());
        assert_eq!(jet(&[1.0, 1.0]).revert(), Err(JetError::NotInvertible));
        assert_eq!(jet(&[0.0, 0.0, 1.0]).revert(), Err(JetError::NotInvertible));
    }

    #[test]
    fn differentiation_and_derivatives() {
        assert_coeffs(&jet(&[0.0, 1.0, -1.0, 2.0]).differentiate().unwrap(), &[1.0, -2.0, 6.0], 0.0);
        assert_coeffs(&jet(&[7.0, 0.0, 0.0]).differentiate().unwrap(), &[0.0, 0.0], 0.0);
        assert_coeffs(&jet(&[0.0, 0.0, 1.0]).differentiate().unwrap(), &[0.0, 2.0], 0.0);
        assert!(jet(&[3.0]).differentiate().is_err());

        assert_eq!(jet(&[1.0, 1.0, 0.5, 1.0 / 6.0]).derivative(3).unwrap().re, 1.0);
        assert_eq!(jet(&[5.0, 0.0, 0.0]).derivative(0).unwrap().re, 5.0);
        let x = Jet::<f64>::variable(3.0, 2).unwrap();
        assert_eq!(x.mul(&x).unwrap().derivative(2).unwrap().re, 2.0);
        assert!(matches!(jet(&[1.0, 1.0]).derivative(2), Err(JetError::OrderOutOfRange { .. })));
    }

    fn arb_jet(degree: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-2.0f64..2.0, degree + 1)
    }

    fn rel_close(a: &Jet, b: &Jet, tol: f64) -> bool {
        let scale = a.coeffs().iter().chain(b.coeffs()).map(|c| c.norm()).fold(1.0, f64::max);
        a.coeffs().iter().zip(b.coeffs()).all(|(x, y)| (x - y).norm() <= tol * scale)
    }

    proptest! {
        #[test]
        fn mul_is_commutative_and_associative(a in arb_jet(6), b in arb_jet(6), c in arb_jet(6)) {
            let (a, b, c) = (jet(&a), jet(&b), jet(&c));
            prop_assert!(rel_close(&a.mul(&b).unwrap(), &b.mul(&a).unwrap(), 1e-14));
            let left = a.mul(&b).unwrap().mul(&c).unwrap();
            let right = a.mul(&b.mul(&c).unwrap()).unwrap();
            prop_assert!(rel_close(&left, &right, 1e-14));
        }

        #[test]
        fn div_then_mul_round_trips(a in arb_jet(6), mut b in arb_jet(6)) {
            b[0] = if b[0] >= 0.0 { b[0] + 0.5 } else { b[0] - 0.5 };
            let (a, b) = (jet(&a), jet(&b));
            let back = a.div(&b).unwrap().mul(&b).unwrap();
            prop_assert!(rel_close(&back, &a, 1e-12));
        }

        #[test]
        fn revert_round_trips(
            shape in prop::collection::vec(-0.5f64..0.5, 13),
            lead in 0.5f64..2.0,
            sign in any::<bool>(),
        ) {
            let a1 = if sign { lead } else { -lead };
            let mut a = vec![0.0, a1];
            a.extend((2..=12).map(|k| shape[k] * a1.powi(k as i32)));
            let a = jet(&a);
            let id = Jet::compose(&a, &a.revert().unwrap()).unwrap();
            prop_assert!((id.coeff(1).re - 1.0).abs() <= 1e-10);
            for k in 2..=12 {
                prop_assert!(id.coeff(k).norm() <= 1e-10, "coeff {} = {}", k, id.coeff(k));
            }
        }

        #[test]
        fn sqrt_of_square_recovers_the_jet(mut a in arb_jet(8)) {
            a[0] = a[0].abs() + 1.0;
            let a = jet(&a);
            let back = a.mul(&a).unwrap().sqrt().unwrap();
            prop_assert!(rel_close(&back, &a, 1e-12));
        }
    }
}
