//! Generic scalar arithmetic.
//!
//! Every system function is written once against [`Scalar`] and then
//! evaluated over plain floats, exact rationals, first-order [`Jet`]s or the
//! truncated bivariate series ring [`DeltaSeries`].

mod jet;
mod poly;
mod series;

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use jet::{jet_lift, Jet};
pub use poly::{poly_class_check, SPoly};
pub use series::{series_analytic, series_arith, Analytic, DeltaSeries, SeriesOp};

/// Exact rational number used for exact-mode coefficients.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RingError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("divisor is not invertible in the series ring ({0})")]
    NonInvertible(&'static str),
    #[error("{func} is not available over {ring} at a nonzero argument")]
    Unsupported {
        func: &'static str,
        ring: &'static str,
    },
    #[error("truncation orders differ: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error("analytic composition needs a constant leading term")]
    NonConstantBase,
    #[error("value is not finite")]
    NotFinite,
}

/// A system constant that is either an exact fraction or a float.
#[derive(Debug, Clone, PartialEq)]
pub enum Real {
    Exact(Rational),
    Float(f64),
}

impl Real {
    pub fn ratio(num: i64, den: i64) -> Self {
        Real::Exact(Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn int(n: i64) -> Self {
        Real::ratio(n, 1)
    }

    pub fn float(x: f64) -> Self {
        Real::Float(x)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Real::Exact(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Real::Exact(q) => rational_to_f64(q),
            Real::Float(x) => *x,
        }
    }

    pub fn neg(&self) -> Real {
        match self {
            Real::Exact(q) => Real::Exact(-q.clone()),
            Real::Float(x) => Real::Float(-x),
        }
    }

    /// Parses a decimal or fraction literal; decimals become exact fractions.
    pub fn parse(text: &str) -> Option<Real> {
        let t = text.trim();
        if let Some((n, d)) = t.split_once('/') {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            return Some(Real::Exact(Rational::new(n, d)));
        }
        if t.contains(['e', 'E']) || t.eq_ignore_ascii_case("nan") || t.contains("inf") {
            let x: f64 = t.parse().ok()?;
            return x.is_finite().then_some(Real::Float(x));
        }
        let (neg, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
        if whole.is_empty() && frac.is_empty() {
            return None;
        }
        if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
            return None;
        }
        let digits = format!("{whole}{frac}");
        let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let q = Rational::new(if neg { -num } else { num }, den);
        Some(Real::Exact(q))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Real::Exact(q) => write!(f, "{q}"),
            Real::Float(x) => write!(f, "{x}"),
        }
    }
}

impl From<f64> for Real {
    fn from(x: f64) -> Self {
        Real::Float(x)
    }
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    if let Some(x) = ToPrimitive::to_f64(q) {
        if x.is_finite() {
            return x;
        }
    }
    let n = q.numer().to_f64().unwrap_or(f64::NAN);
    let d = q.denom().to_f64().unwrap_or(f64::NAN);
    n / d
}

pub fn rational_from_f64(x: f64) -> Rational {
    Rational::from_float(x).unwrap_or_else(<Rational as Zero>::zero)
}

/// Ring element over which system functions are evaluated.
pub trait Scalar:
    Clone + fmt::Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn from_real(c: &Real) -> Self;

    fn from_i64(n: i64) -> Self {
        Self::from_real(&Real::int(n))
    }

    fn from_f64(x: f64) -> Self {
        Self::from_real(&Real::Float(x))
    }

    /// Numerical value at the base point (the plain value for floats, the
    /// value part for jets, the δ⁰ s⁰ coefficient for series).
    fn lead(&self) -> f64;

    fn recip(&self) -> Result<Self, RingError>;

    fn sin_cos(&self) -> Result<(Self, Self), RingError>;

    fn exp(&self) -> Result<Self, RingError>;

    fn sin(&self) -> Result<Self, RingError> {
        Ok(self.sin_cos()?.0)
    }

    fn cos(&self) -> Result<Self, RingError> {
        Ok(self.sin_cos()?.1)
    }

    fn div(&self, rhs: &Self) -> Result<Self, RingError> {
        Ok(self.clone() * rhs.recip()?)
    }

    fn sq(&self) -> Self {
        self.clone() * self.clone()
    }

    fn powi(&self, n: i32) -> Result<Self, RingError> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut acc = Self::from_i64(1);
        let mut base = self.clone();
        let mut k = n as u32;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base.clone();
            }
            k >>= 1;
            if k > 0 {
                base = base.sq();
            }
        }
        Ok(acc)
    }

    fn scale(&self, c: &Real) -> Self {
        self.clone() * Self::from_real(c)
    }
}

/// Field of polynomial coefficients: exact rationals or floats.
pub trait Coeff: Scalar + Div<Output = Self> + PartialEq {
    const EXACT: bool;

    fn zero() -> Self {
        Self::from_i64(0)
    }

    fn one() -> Self {
        Self::from_i64(1)
    }

    fn is_zero(&self) -> bool;

    fn to_f64(&self) -> f64 {
        self.lead()
    }

    /// Text form: `p/q` for exact values, shortest round-trip decimal otherwise.
    fn render(&self) -> String;
}

impl Scalar for f64 {
    fn from_real(c: &Real) -> Self {
        c.to_f64()
    }

    fn from_i64(n: i64) -> Self {
        n as f64
    }

    fn from_f64(x: f64) -> Self {
        x
    }

    fn lead(&self) -> f64 {
        *self
    }

    fn recip(&self) -> Result<Self, RingError> {
        if *self == 0.0 {
            Err(RingError::DivisionByZero)
        } else {
            Ok(1.0 / self)
        }
    }

    fn sin_cos(&self) -> Result<(Self, Self), RingError> {
        Ok(f64::sin_cos(*self))
    }

    fn exp(&self) -> Result<Self, RingError> {
        Ok(f64::exp(*self))
    }

    fn powi(&self, n: i32) -> Result<Self, RingError> {
        if n < 0 && *self == 0.0 {
            return Err(RingError::DivisionByZero);
        }
        Ok(f64::powi(*self, n))
    }
}

impl Coeff for f64 {
    const EXACT: bool = false;

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn render(&self) -> String {
        format!("{self:e}")
    }
}

impl Scalar for Rational {
    fn from_real(c: &Real) -> Self {
        match c {
            Real::Exact(q) => q.clone(),
            Real::Float(x) => rational_from_f64(*x),
        }
    }

    fn from_i64(n: i64) -> Self {
        Rational::from_integer(BigInt::from(n))
    }

    fn lead(&self) -> f64 {
        rational_to_f64(self)
    }

    fn recip(&self) -> Result<Self, RingError> {
        if Zero::is_zero(self) {
            Err(RingError::DivisionByZero)
        } else {
            Ok(<Rational as One>::one() / self.clone())
        }
    }

    fn sin_cos(&self) -> Result<(Self, Self), RingError> {
        if Zero::is_zero(self) {
            Ok((<Rational as Zero>::zero(), <Rational as One>::one()))
        } else {
            Err(RingError::Unsupported {
                func: "sin/cos",
                ring: "exact rationals",
            })
        }
    }

    fn exp(&self) -> Result<Self, RingError> {
        if Zero::is_zero(self) {
            Ok(<Rational as One>::one())
        } else {
            Err(RingError::Unsupported {
                func: "exp",
                ring: "exact rationals",
            })
        }
    }
}

impl Coeff for Rational {
    const EXACT: bool = true;

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn render(&self) -> String {
        if self.denom().is_one() {
            format!("{}", self.numer())
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

/// Absolute value through the float image, used for pivoting.
pub fn magnitude<C: Coeff>(c: &C) -> f64 {
    c.to_f64().abs()
}

/// Exact absolute value for rationals.
pub fn rational_abs(q: &Rational) -> Rational {
    q.abs()
}
