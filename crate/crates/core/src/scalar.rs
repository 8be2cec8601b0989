//! Exact Gaussian-rational scalars.
//!
//! Every exact computation in the crate runs over `Q(i)`: a pair of
//! arbitrary-precision rationals. Operators with purely real coefficients
//! never allocate a nonzero imaginary part, so the common case stays cheap.

use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarParseError {
    #[error("empty scalar literal")]
    Empty,
    #[error("malformed rational literal `{0}`")]
    Rational(String),
    #[error("malformed Gaussian rational literal `{0}`")]
    Gaussian(String),
}

/// An element `re + im·i` of the Gaussian rationals.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GaussRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        Self { re, im: BigRational::zero() }
    }

    pub fn from_int(n: i64) -> Self {
        Self::real(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::real(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn i() -> Self {
        Self { re: BigRational::zero(), im: BigRational::one() }
    }

    /// Exact conversion of a finite double (every double is a dyadic rational).
    pub fn from_f64_exact(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Self::real)
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: -self.im.clone() }
    }

    /// `|x|²`, always a nonnegative rational.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Self {
        let n = self.norm_sqr();
        assert!(!n.is_zero(), "inverse of zero Gaussian rational");
        Self { re: &self.re / &n, im: -(&self.im / &n) }
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    /// Integer power, negative exponents allowed for nonzero values.
    pub fn powi(&self, e: i64) -> Self {
        let base = if e < 0 { self.inv() } else { self.clone() };
        let mut k = e.unsigned_abs();
        let mut acc = Self::one();
        let mut sq = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &sq;
            }
            sq = &sq * &sq;
            k >>= 1;
        }
        acc
    }

    /// Renders the real part only when the imaginary part vanishes.
    pub fn render(&self) -> String {
        self.to_string()
    }

    /// True if the value is a real number strictly less than zero.
    pub fn is_negative_real(&self) -> bool {
        self.im.is_zero() && self.re.is_negative()
    }
}

/// Continued-fraction rationalization of a double with a bounded denominator.
pub fn rationalize(x: f64, max_den: u64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let neg = x < 0.0;
    let mut v = x.abs();
    // Convergents p/q.
    let (mut p0, mut q0, mut p1, mut q1): (u128, u128, u128, u128) = (0, 1, 1, 0);
    for _ in 0..64 {
        let a = v.floor();
        if a > 1e18 {
            break;
        }
        let a_int = a as u128;
        let p2 = a_int * p1 + p0;
        let q2 = a_int * q1 + q0;
        if q2 > max_den as u128 {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = v - a;
        if frac < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    if q1 == 0 {
        return Some(BigRational::zero());
    }
    let r = BigRational::new(BigInt::from(p1), BigInt::from(q1));
    Some(if neg { -r } else { r })
}

fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", fmt_rational(&self.re));
        }
        let im_abs = fmt_rational(&self.im.abs());
        let sign = if self.im.is_negative() { "-" } else { "+" };
        if self.re.is_zero() {
            let lead = if self.im.is_negative() { "-" } else { "" };
            write!(f, "{lead}{im_abs} i")
        } else {
            write!(f, "{}{sign}{im_abs} i", fmt_rational(&self.re))
        }
    }
}

impl fmt::Debug for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Parses `p`, `p/q`, or a decimal such as `-0.25` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational, ScalarParseError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ScalarParseError::Empty);
    }
    let bad = || ScalarParseError::Rational(s.to_string());
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Ok(n) = BigInt::from_str(s) {
        return Ok(BigRational::from_integer(n));
    }
    // Decimal with optional exponent, converted exactly from its text.
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let r = if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(r)
}

impl FromStr for GaussRational {
    type Err = ScalarParseError;

    /// Accepts `p/q`, `p/q+r/s i`, `r/s i`, `i`, `-i`, and decimals.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(ScalarParseError::Empty);
        }
        let bad = || ScalarParseError::Gaussian(s.to_string());
        let Some(body) = compact.strip_suffix('i') else {
            return parse_rational(&compact).map(Self::real);
        };
        // Split at the last sign that is not the leading one and not part of an exponent.
        let bytes = body.as_bytes();
        let mut split = None;
        for idx in (1..bytes.len()).rev() {
            let c = bytes[idx];
            if (c == b'+' || c == b'-') && !matches!(bytes[idx - 1], b'e' | b'E') {
                split = Some(idx);
                break;
            }
        }
        let (re_txt, im_txt) = match split {
            Some(idx) => (&body[..idx], &body[idx..]),
            None => ("", body),
        };
        let im = match im_txt {
            "" | "+" => BigRational::one(),
            "-" => -BigRational::one(),
            t => parse_rational(t).map_err(|_| bad())?,
        };
        let re = if re_txt.is_empty() {
            BigRational::zero()
        } else {
            parse_rational(re_txt).map_err(|_| bad())?
        };
        Ok(Self { re, im })
    }
}

impl Zero for GaussRational {
    fn zero() -> Self {
        Self { re: BigRational::zero(), im: BigRational::zero() }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for GaussRational {
    fn one() -> Self {
        Self::real(BigRational::one())
    }
}

impl From<BigRational> for GaussRational {
    fn from(r: BigRational) -> Self {
        Self::real(r)
    }
}

impl From<i64> for GaussRational {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl<'a> Add<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn add(self, rhs: &GaussRational) -> GaussRational {
        GaussRational { re: &self.re + &rhs.re, im: &self.im + &rhs.im }
    }
}

impl<'a> Sub<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn sub(self, rhs: &GaussRational) -> GaussRational {
        GaussRational { re: &self.re - &rhs.re, im: &self.im - &rhs.im }
    }
}

impl<'a> Mul<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn mul(self, rhs: &GaussRational) -> GaussRational {
        if self.im.is_zero() && rhs.im.is_zero() {
            return GaussRational::real(&self.re * &rhs.re);
        }
        GaussRational {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl<'a> Div<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn div(self, rhs: &GaussRational) -> GaussRational {
        if rhs.im.is_zero() {
            assert!(!rhs.re.is_zero(), "division by zero Gaussian rational");
            return GaussRational { re: &self.re / &rhs.re, im: &self.im / &rhs.re };
        }
        self * &rhs.inv()
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<GaussRational> for GaussRational {
            type Output = GaussRational;
            fn $m(self, rhs: GaussRational) -> GaussRational {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a GaussRational> for GaussRational {
            type Output = GaussRational;
            fn $m(self, rhs: &GaussRational) -> GaussRational {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for GaussRational {
    type Output = GaussRational;
    fn neg(self) -> GaussRational {
        GaussRational { re: -self.re, im: -self.im }
    }
}

impl Neg for &GaussRational {
    type Output = GaussRational;
    fn neg(self) -> GaussRational {
        GaussRational { re: -self.re.clone(), im: -self.im.clone() }
    }
}

impl AddAssign<&GaussRational> for GaussRational {
    fn add_assign(&mut self, rhs: &GaussRational) {
        self.re += &rhs.re;
        if !rhs.im.is_zero() {
            self.im += &rhs.im;
        }
    }
}

impl SubAssign<&GaussRational> for GaussRational {
    fn sub_assign(&mut self, rhs: &GaussRational) {
        self.re -= &rhs.re;
        if !rhs.im.is_zero() {
            self.im -= &rhs.im;
        }
    }
}

impl MulAssign<&GaussRational> for GaussRational {
    fn mul_assign(&mut self, rhs: &GaussRational) {
        *self = &*self * rhs;
    }
}

impl Sum for GaussRational {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |mut acc, x| {
            acc += &x;
            acc
        })
    }
}

impl Product for GaussRational {
    fn product<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::one(), |acc, x| &acc * &x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> GaussRational {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_render() {
        assert_eq!(g("-1/3").to_string(), "-1/3");
        assert_eq!(g("2/4").to_string(), "1/2");
        assert_eq!(g("1/2+1/3 i").to_string(), "1/2+1/3 i");
        assert_eq!(g("1/2-1/3i").to_string(), "1/2-1/3 i");
        assert_eq!(g("i"), GaussRational::i());
        assert_eq!(g("-i"), -GaussRational::i());
        assert_eq!(g("0.25"), GaussRational::from_ratio(1, 4));
        assert_eq!(g("-1.5e1"), GaussRational::from_int(-15));
        assert_eq!(g("3i").to_string(), "3 i");
        assert!("1/0".parse::<GaussRational>().is_err());
        assert!("abc".parse::<GaussRational>().is_err());
    }

    #[test]
    fn field_ops() {
        let a = g("1/2+1/3 i");
        let b = g("-2+i");
        let q = &a / &b;
        assert_eq!(&q * &b, a);
        assert_eq!(a.conj().conj(), a);
        assert_eq!((&a * &a.conj()).im, BigRational::zero());
        assert_eq!(GaussRational::i().powi(4), GaussRational::one());
        assert_eq!(GaussRational::from_int(2).powi(-2), GaussRational::from_ratio(1, 4));
    }

    #[test]
    fn continued_fraction_rationalization() {
        let r = rationalize(0.5, 1_000_000).unwrap();
        assert_eq!(r, BigRational::new(1.into(), 2.into()));
        let r = rationalize(std::f64::consts::PI, 1000).unwrap();
        assert_eq!(r, BigRational::new(355.into(), 113.into()));
        let r = rationalize(-0.125, 1_000_000).unwrap();
        assert_eq!(r, BigRational::new((-1).into(), 8.into()));
    }
}
