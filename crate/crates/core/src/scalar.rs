//! Exact scalar arithmetic: rationals and Gaussian rationals.
//!
//! Every quantity in this workspace is either a [`Rational`] (measure
//! weights, traces) or a [`Scalar`] (spectral coordinates, matrix and
//! step-function values). There is no floating point anywhere; equality
//! is exact and arithmetic never rounds.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact rational number, always reduced, denominator always positive.
pub type Rational = BigRational;

/// Error raised when rational or scalar text fails to parse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseScalarError {
    pub input: String,
    pub reason: &'static str,
}

impl fmt::Display for ParseScalarError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cannot parse {:?} as exact rational: {}", self.input, self.reason)
    }
}

impl std::error::Error for ParseScalarError {}

/// Rational from an integer.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Rational `n/d`. Panics when `d == 0`.
pub fn ratq(n: i64, d: i64) -> Rational {
    assert!(d != 0, "zero denominator");
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses the text form `p` or `p/q` (sign on `p`, `q > 0` after reduction).
pub fn parse_rational(s: &str) -> Result<Rational, ParseScalarError> {
    let err = |reason| ParseScalarError { input: s.to_string(), reason };
    let s = s.trim();
    if s.is_empty() {
        return Err(err("empty string"));
    }
    let (num_str, den_str) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let numer: BigInt = num_str.parse().map_err(|_| err("bad numerator"))?;
    let denom: BigInt = match den_str {
        Some(d) => d.parse().map_err(|_| err("bad denominator"))?,
        None => BigInt::one(),
    };
    if denom <= BigInt::zero() {
        return Err(err("denominator must be a positive integer"));
    }
    Ok(Rational::new(numer, denom))
}

/// Renders a rational in the text form `p` or `p/q`.
pub fn rational_text(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// A Gaussian rational: `re + im·i` with exact rational parts.
///
/// Closed under `+ - ×` and under `÷` by nonzero values. The derived
/// ordering is lexicographic on `(re, im)`; it exists purely to give
/// deterministic iteration orders and has no analytic meaning.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Scalar {
    re: Rational,
    im: Rational,
}

impl Scalar {
    pub fn new(re: Rational, im: Rational) -> Self {
        Scalar { re, im }
    }

    pub fn from_rational(re: Rational) -> Self {
        Scalar { re, im: Rational::zero() }
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::from_rational(rat(n))
    }

    /// `n/d` as a real scalar. Panics when `d == 0`.
    pub fn from_ratio(n: i64, d: i64) -> Self {
        Scalar::from_rational(ratq(n, d))
    }

    pub fn zero() -> Self {
        Scalar::from_int(0)
    }

    pub fn one() -> Self {
        Scalar::from_int(1)
    }

    pub fn i() -> Self {
        Scalar::new(Rational::zero(), Rational::one())
    }

    pub fn re(&self) -> &Rational {
        &self.re
    }

    pub fn im(&self) -> &Rational {
        &self.im
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Scalar> {
        if self.is_zero() {
            return None;
        }
        // 1/(a+bi) = (a-bi)/(a²+b²)
        let norm = &self.re * &self.re + &self.im * &self.im;
        Some(Scalar::new(&self.re / &norm, -&self.im / &norm))
    }

    pub fn conj(&self) -> Scalar {
        Scalar::new(self.re.clone(), -&self.im)
    }

    /// Parses the pair text form used by model files: `(re, im)` strings.
    pub fn parse_pair(re: &str, im: &str) -> Result<Scalar, ParseScalarError> {
        Ok(Scalar::new(parse_rational(re)?, parse_rational(im)?))
    }

    /// The `(re, im)` text pair, each component in `p/q` form.
    pub fn text_pair(&self) -> (String, String) {
        (rational_text(&self.re), rational_text(&self.im))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", rational_text(&self.re));
        }
        let im_part = |f: &mut fmt::Formatter<'_>, q: &Rational, lead_sign: bool| {
            let mag = q.abs();
            let sign = if q.is_negative() { "-" } else if lead_sign { "+" } else { "" };
            if mag.is_one() {
                write!(f, "{}i", sign)
            } else {
                write!(f, "{}{}i", sign, rational_text(&mag))
            }
        };
        if self.re.is_zero() {
            im_part(f, &self.im, false)
        } else {
            write!(f, "{}", rational_text(&self.re))?;
            im_part(f, &self.im, true)
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Lexicographic on `(re, im)`; deterministic bookkeeping order only.
impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        self.re.cmp(&other.re).then_with(|| self.im.cmp(&other.im))
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident, |$a:ident, $b:ident| $body:expr) => {
        impl<'a, 'b> $trait<&'b Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'b Scalar) -> Scalar {
                let ($a, $b) = (self, rhs);
                $body
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                $trait::$method(&self, &rhs)
            }
        }
        impl<'b> $trait<&'b Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'b Scalar) -> Scalar {
                $trait::$method(&self, rhs)
            }
        }
        impl<'a> $trait<Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                $trait::$method(self, &rhs)
            }
        }
    };
}

scalar_binop!(Add, add, |a, b| Scalar::new(&a.re + &b.re, &a.im + &b.im));
scalar_binop!(Sub, sub, |a, b| Scalar::new(&a.re - &b.re, &a.im - &b.im));
scalar_binop!(Mul, mul, |a, b| Scalar::new(
    &a.re * &b.re - &a.im * &b.im,
    &a.re * &b.im + &a.im * &b.re
));
scalar_binop!(Div, div, |a, b| {
    let inv = b.inv().expect("division by zero scalar");
    a * &inv
});

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::new(-self.re, -self.im)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::new(-&self.re, -&self.im)
    }
}
