//! Double-double arithmetic: an unevaluated sum `hi + lo` of two doubles with
//! `|lo| <= ulp(hi)/2`, giving roughly 106 bits of significand.
//!
//! The error-free transformations follow Dekker and Knuth; the elementary
//! functions use argument reduction followed by short Taylor series
//! (`exp`, `sin`, `cos`) or a single Newton step from the double result
//! (`ln`, `atan`, `sqrt`).

use std::cmp::Ordering;
use std::fmt;
use std::sync::OnceLock;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use num_traits::{Num, One, Zero};

use crate::real::{ipow, Real};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    if !s.is_finite() {
        return (s, 0.0);
    }
    (s, b - (s - a))
}

#[inline]
#[cfg(target_feature = "fma")]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Dekker's product. Without hardware FMA, `mul_add` is a slow library call.
#[cfg(not(target_feature = "fma"))]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    fn split(a: f64) -> (f64, f64) {
        const SPLITTER: f64 = 134217729.0; // 2^27 + 1
        if a.abs() > 6.696_928_794_914_17e299 {
            let a = a * 3.725_290_298_461_914e-9; // 2^-28
            let t = SPLITTER * a;
            let hi = t - (t - a);
            return (hi * 268435456.0, (a - hi) * 268435456.0);
        }
        let t = SPLITTER * a;
        let hi = t - (t - a);
        (hi, a - hi)
    }
    let p = a * b;
    if !p.is_finite() {
        return (p, 0.0);
    }
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

const SIN_TABLE: [Dd; 4] = [
    Dd::from_parts(0.19509032201612828, -7.991079068461731e-18),
    Dd::from_parts(0.3826834323650898, -1.0050772696461588e-17),
    Dd::from_parts(0.5555702330196022, 4.709410940561677e-17),
    Dd::from_parts(std::f64::consts::FRAC_1_SQRT_2, -4.833646656726457e-17),
];

const COS_TABLE: [Dd; 4] = [
    Dd::from_parts(0.9807852804032304, 1.8546939997825006e-17),
    Dd::from_parts(0.9238795325112867, 1.7645047084336677e-17),
    Dd::from_parts(0.8314696123025452, 1.4073856984728024e-18),
    Dd::from_parts(std::f64::consts::FRAC_1_SQRT_2, -4.833646656726457e-17),
];

// third limb of 2π, used only in argument reduction
const TWO_PI_TAIL: f64 = -5.989539619436679e-33;

impl Dd {
    pub const ZERO: Dd = Dd::from_parts(0.0, 0.0);
    pub const ONE: Dd = Dd::from_parts(1.0, 0.0);
    pub const PI: Dd = Dd::from_parts(std::f64::consts::PI, 1.2246467991473532e-16);
    pub const TWO_PI: Dd = Dd::from_parts(std::f64::consts::TAU, 2.4492935982947064e-16);
    pub const FRAC_PI_2: Dd = Dd::from_parts(std::f64::consts::FRAC_PI_2, 6.123233995736766e-17);
    pub const FRAC_PI_16: Dd = Dd::from_parts(0.19634954084936207, 7.654042494670958e-18);
    pub const LN_2: Dd = Dd::from_parts(std::f64::consts::LN_2, 2.3190468138462996e-17);
    /// 2^-104.
    pub const EPS: f64 = 4.930380657631324e-32;

    /// Builds a value from an already normalized pair.
    pub const fn from_parts(hi: f64, lo: f64) -> Self {
        Dd { hi, lo }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    fn mul_f64(self, b: f64) -> Dd {
        let (p1, p2) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p1, p2 + self.lo * b);
        Dd { hi, lo }
    }

    fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let (p1, p2) = two_prod(q1, b);
        let (s, e) = two_sum(self.hi, -p1);
        let e = e - p2 + self.lo;
        let q2 = (s + e) / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }
    }

    /// Exact scaling by a power of two.
    fn ldexp(self, k: i32) -> Dd {
        let scale = |v: f64| {
            let mut v = v;
            let mut k = k;
            while k > 1000 {
                v *= 2f64.powi(1000);
                k -= 1000;
            }
            while k < -1000 {
                v *= 2f64.powi(-1000);
                k += 1000;
            }
            v * 2f64.powi(k)
        };
        Dd { hi: scale(self.hi), lo: scale(self.lo) }
    }

    fn square(self) -> Dd {
        self * self
    }

    fn floor(self) -> Dd {
        let hi = self.hi.floor();
        if hi == self.hi {
            let (h, l) = quick_two_sum(hi, self.lo.floor());
            Dd { hi: h, lo: l }
        } else {
            Dd { hi, lo: 0.0 }
        }
    }

    fn trunc(self) -> Dd {
        if self.hi >= 0.0 {
            self.floor()
        } else {
            -(-self).floor()
        }
    }

    /// sin(t) for |t| <= π/32.
    fn cos_taylor(t: Dd) -> Dd {
        let t2 = -t.square();
        let mut term = Dd::ONE;
        let mut sum = Dd::ONE;
        let mut k = 0.0;
        loop {
            term = (term * t2).div_f64((k + 1.0) * (k + 2.0));
            k += 2.0;
            sum = sum + term;
            if term.hi.abs() <= 1e-34 {
                break;
            }
        }
        sum
    }

    fn sin_taylor(t: Dd) -> Dd {
        if t.hi == 0.0 {
            return Dd::ZERO;
        }
        let t2 = -t.square();
        let mut term = t;
        let mut sum = t;
        let mut k = 1.0;
        loop {
            term = (term * t2).div_f64((k + 1.0) * (k + 2.0));
            k += 2.0;
            sum = sum + term;
            if term.hi.abs() <= 1e-34 * sum.hi.abs() {
                break;
            }
        }
        sum
    }

    /// `(sin t, cos t)` by one Taylor loop; meant for `|t| ≤ π/256`. Terms
    /// below `2⁻⁵⁶` of the leading one are summed in plain `f64`.
    fn sin_cos_small(t: Dd) -> (Dd, Dd) {
        let (mut s, mut c) = (Dd::ZERO, Dd::ONE);
        let mut term = Dd::ONE;
        let mut k = 1u32;
        while k < 40 {
            term = (term * t).div_f64(f64::from(k));
            match k % 4 {
                1 => s = s + term,
                2 => c = c - term,
                3 => s = s - term,
                _ => c = c + term,
            }
            k += 1;
            if term.hi.abs() <= 1.4e-17 * t.hi.abs() {
                break;
            }
        }
        let (mut ts, mut tc) = (0.0, 0.0);
        let mut tail = term.hi;
        let floor = 1e-34 * t.hi.abs();
        while k < 60 && tail.abs() > floor {
            tail = tail * t.hi / f64::from(k);
            match k % 4 {
                1 => ts += tail,
                2 => tc -= tail,
                3 => ts -= tail,
                _ => tc += tail,
            }
            k += 1;
        }
        (s + Dd::from(ts), c + Dd::from(tc))
    }

    fn nan() -> Dd {
        Dd { hi: f64::NAN, lo: f64::NAN }
    }
}

impl From<f64> for Dd {
    fn from(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            ord => Some(ord),
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        if !s1.is_finite() {
            return Dd { hi: s1, lo: 0.0 };
        }
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, b.hi);
        if !p1.is_finite() {
            return Dd { hi: p1, lo: 0.0 };
        }
        let (hi, lo) = quick_two_sum(p1, p2 + (self.hi * b.lo + self.lo * b.hi));
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        if b.hi == 0.0 {
            return Dd::from(self.hi / b.hi);
        }
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from(q3)
    }
}

impl Rem for Dd {
    type Output = Dd;
    fn rem(self, b: Dd) -> Dd {
        self - (self / b).trunc() * b
    }
}

impl Zero for Dd {
    fn zero() -> Self {
        Dd::ZERO
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0
    }
}

impl One for Dd {
    fn one() -> Self {
        Dd::ONE
    }
}

impl Num for Dd {
    type FromStrRadixErr = ParseDdError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        if radix != 10 {
            return Err(ParseDdError);
        }
        <Dd as Real>::from_literal(s).ok_or(ParseDdError)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseDdError;

impl fmt::Display for ParseDdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("invalid decimal literal")
    }
}

impl std::error::Error for ParseDdError {}

impl Dd {
    /// `digits` significant decimal digits in scientific notation.
    fn scientific(self, digits: usize) -> String {
        if !self.hi.is_finite() {
            return format!("{}", self.hi);
        }
        if self.hi == 0.0 {
            return format!("{:.*e}", digits.saturating_sub(1), self.hi);
        }
        let sign = if self.hi < 0.0 { "-" } else { "" };
        let mut y = self.abs();
        let mut exp = y.hi.log10().floor() as i32;
        let ten = Dd::from(10.0);
        let scale = ipow(ten, exp.unsigned_abs(), Dd::ONE, |a, b| *a * *b);
        y = if exp >= 0 { y / scale } else { y * scale };
        if y.hi >= 10.0 {
            y = y.div_f64(10.0);
            exp += 1;
        } else if y.hi < 1.0 {
            y = y.mul_f64(10.0);
            exp -= 1;
        }
        let mut out: Vec<u8> = Vec::with_capacity(digits + 1);
        for _ in 0..=digits {
            let d = y.floor().hi.clamp(0.0, 9.0);
            out.push(d as u8);
            y = (y - Dd::from(d)).mul_f64(10.0);
        }
        // round half up on the guard digit
        let guard = out.pop().unwrap_or(0);
        if guard >= 5 {
            let mut i = out.len();
            loop {
                if i == 0 {
                    out.insert(0, 1);
                    out.pop();
                    exp += 1;
                    break;
                }
                i -= 1;
                if out[i] == 9 {
                    out[i] = 0;
                } else {
                    out[i] += 1;
                    break;
                }
            }
        }
        let mut text: String = out.iter().map(|d| char::from(b'0' + d)).collect();
        if text.len() > 1 {
            text.insert(1, '.');
        }
        format!("{sign}{text}e{exp}")
    }
}

impl fmt::Display for Dd {
    /// Scientific notation; 32 significant digits unless a precision is given.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().map_or(32, |p| p + 1);
        f.write_str(&self.scientific(digits))
    }
}

const TURN_STEPS: usize = 256;

/// `(cos, sin)` of `2πk/256` for `k = 0..256`.
fn turn_table() -> &'static [(Dd, Dd)] {
    static TABLE: OnceLock<Vec<(Dd, Dd)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (0..TURN_STEPS)
            .map(|k| {
                let (s, c) = (Dd::TWO_PI * Dd::from(k as f64 / TURN_STEPS as f64)).sin_cos();
                (c, s)
            })
            .collect()
    })
}

impl Real for Dd {
    const EPSILON: f64 = Dd::EPS;

    fn from_f64(v: f64) -> Self {
        Dd::from(v)
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn from_literal(text: &str) -> Option<Self> {
        let text = text.trim();
        let (mantissa, exponent) = match text.find(['e', 'E']) {
            Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
            None => (text, 0),
        };
        let mut value = Dd::ZERO;
        let mut scale = exponent;
        let mut seen_point = false;
        let mut digits = 0;
        for ch in mantissa.chars() {
            match ch {
                '.' if !seen_point => seen_point = true,
                '0'..='9' => {
                    value = value.mul_f64(10.0) + Dd::from(f64::from(ch as u8 - b'0'));
                    digits += 1;
                    if seen_point {
                        scale -= 1;
                    }
                }
                _ => return None,
            }
        }
        if digits == 0 {
            return None;
        }
        let ten = Dd::from(10.0);
        let pow = crate::real::ipow(ten, scale.unsigned_abs(), Dd::ONE, |a, b| *a * *b);
        Some(if scale >= 0 { value * pow } else { value / pow })
    }

    fn pi() -> Self {
        Dd::PI
    }

    fn exp(self) -> Self {
        if self.hi > 709.78 {
            return Dd::from(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        if self.hi == 0.0 {
            return Dd::ONE;
        }
        let m = (self.hi / Dd::LN_2.hi).round();
        let r = (self - Dd::LN_2.mul_f64(m)).ldexp(-10);
        // expm1(r) by Taylor, |r| < 3.4e-4
        let mut term = r;
        let mut s = r;
        let mut k = 2.0;
        loop {
            term = (term * r).div_f64(k);
            s = s + term;
            if term.hi.abs() <= 1e-36 * s.hi.abs().max(1e-300) {
                break;
            }
            k += 1.0;
        }
        for _ in 0..10 {
            s = s.mul_f64(2.0) + s.square();
        }
        (s + Dd::ONE).ldexp(m as i32)
    }

    fn ln(self) -> Self {
        if self.hi <= 0.0 || self.hi.is_nan() {
            return if self.hi == 0.0 { Dd::from(f64::NEG_INFINITY) } else { Dd::nan() };
        }
        if self == Dd::ONE {
            return Dd::ZERO;
        }
        let mut x = Dd::from(self.hi.ln());
        for _ in 0..2 {
            x = x + self * (-x).exp() - Dd::ONE;
        }
        x
    }

    fn sin(self) -> Self {
        self.sin_cos().0
    }

    fn cos(self) -> Self {
        self.sin_cos().1
    }

    fn sin_cos(self) -> (Self, Self) {
        if self.hi == 0.0 {
            return (Dd::ZERO, Dd::ONE);
        }
        if !self.hi.is_finite() {
            return (Dd::nan(), Dd::nan());
        }
        let z = (self / Dd::TWO_PI).round();
        let r = self - Dd::TWO_PI * z - Dd::from(TWO_PI_TAIL) * z;
        let q = (r.hi / Dd::FRAC_PI_2.hi).round();
        let t = r - Dd::FRAC_PI_2.mul_f64(q);
        let k = (t.hi / Dd::FRAC_PI_16.hi).round();
        let t = t - Dd::FRAC_PI_16.mul_f64(k);

        let s_t = Dd::sin_taylor(t);
        let c_t = Dd::cos_taylor(t);

        let (s, c) = if k == 0.0 {
            (s_t, c_t)
        } else {
            let idx = (k.abs() as usize) - 1;
            let (u, v) = (COS_TABLE[idx], SIN_TABLE[idx]);
            if k > 0.0 {
                (u * s_t + v * c_t, u * c_t - v * s_t)
            } else {
                (u * s_t - v * c_t, u * c_t + v * s_t)
            }
        };
        match (q as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    fn cis_turns(self) -> (Self, Self) {
        if !self.hi.is_finite() {
            return (Dd::nan(), Dd::nan());
        }
        let frac = self - self.round();
        if frac.hi == 0.0 {
            return (Dd::ONE, Dd::ZERO);
        }
        // both subtractions below are exact
        let k = (frac.hi * TURN_STEPS as f64).round();
        let r = frac - Dd::from(k / TURN_STEPS as f64);
        let (s, c) = Dd::sin_cos_small(Dd::TWO_PI * r);
        let (u, v) = turn_table()[(k as i64).rem_euclid(TURN_STEPS as i64) as usize];
        (u * c - v * s, v * c + u * s)
    }

    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 { Dd::ZERO } else { Dd::nan() };
        }
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let (sq_hi, sq_lo) = two_prod(ax, ax);
        let diff = self - Dd { hi: sq_hi, lo: sq_lo };
        let (hi, lo) = two_sum(ax, diff.hi * (x * 0.5));
        let (hi, lo) = quick_two_sum(hi, lo);
        Dd { hi, lo }
    }

    fn atan(self) -> Self {
        if self.hi == 0.0 {
            return Dd::ZERO;
        }
        let z = Dd::from(self.hi.atan());
        let (s, c) = z.sin_cos();
        z + (self * c - s) * c
    }

    fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    fn round(self) -> Self {
        let hi = self.hi.round();
        if hi == self.hi {
            let (h, l) = quick_two_sum(hi, self.lo.round());
            Dd { hi: h, lo: l }
        } else {
            let mut hi = hi;
            if (hi - self.hi).abs() == 0.5 {
                // tie in hi alone; lo decides
                if hi > self.hi && self.lo < 0.0 {
                    hi -= 1.0;
                } else if hi < self.hi && self.lo > 0.0 {
                    hi += 1.0;
                }
            }
            Dd { hi, lo: 0.0 }
        }
    }

    fn powf(self, p: Self) -> Self {
        if self.hi == 0.0 {
            return if p.hi > 0.0 { Dd::ZERO } else { Dd::from(f64::INFINITY) };
        }
        (p * self.ln()).exp()
    }

    fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }
}
