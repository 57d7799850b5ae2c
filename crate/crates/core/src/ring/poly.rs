use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::Coeff;

/// Polynomial in the inner time `s`; `coeffs[k]` multiplies `s^k`.
///
/// Trailing zeros are always stripped, so the zero polynomial has no
/// coefficients and `degree` is `None` for it.
#[derive(Clone, PartialEq)]
pub struct SPoly<C> {
    coeffs: Vec<C>,
}

impl<C: Coeff> SPoly<C> {
    pub fn new(mut coeffs: Vec<C>) -> Self {
        while coeffs.last().is_some_and(Coeff::is_zero) {
            coeffs.pop();
        }
        SPoly { coeffs }
    }

    pub fn zero() -> Self {
        SPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: C) -> Self {
        SPoly::new(vec![c])
    }

    pub fn monomial(c: C, power: usize) -> Self {
        let mut coeffs = vec![C::zero(); power + 1];
        coeffs[power] = c;
        SPoly::new(coeffs)
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> C {
        self.coeffs.get(k).cloned().unwrap_or_else(C::zero)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// True for polynomials of degree at most zero.
    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn constant_term(&self) -> C {
        self.coeff(0)
    }

    pub fn scale(&self, c: &C) -> Self {
        SPoly::new(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    pub fn derivative(&self) -> Self {
        SPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, a)| a.clone() * C::from_i64(k as i64))
                .collect(),
        )
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |p, _| p.derivative())
    }

    /// Antiderivative vanishing at s = 0.
    pub fn integral(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(C::zero());
        for (k, a) in self.coeffs.iter().enumerate() {
            coeffs.push(a.clone() / C::from_i64(k as i64 + 1));
        }
        SPoly::new(coeffs)
    }

    /// Multiplies by `s`.
    pub fn shift(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(C::zero());
        coeffs.extend(self.coeffs.iter().cloned());
        SPoly { coeffs }
    }

    /// Horner evaluation.
    pub fn eval(&self, s: &C) -> C {
        self.coeffs
            .iter()
            .rev()
            .fold(C::zero(), |acc, a| acc * s.clone() + a.clone())
    }

    pub fn eval_f64(&self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, a| acc * s + a.to_f64())
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }

    /// Zeroes coefficients with magnitude at most `tol`.
    pub fn chop(&self, tol: f64) -> Self {
        SPoly::new(
            self.coeffs
                .iter()
                .map(|c| if c.to_f64().abs() <= tol { C::zero() } else { c.clone() })
                .collect(),
        )
    }

    /// Keeps only the powers admitted by class `P_n`.
    pub fn project_class(&self, n: i64) -> Self {
        SPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| if admitted(k, n) { c.clone() } else { C::zero() })
                .collect(),
        )
    }

    /// Largest magnitude among coefficients outside class `P_n`.
    pub fn class_defect(&self, n: i64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(k, _)| !admitted(*k, n))
            .map(|(_, c)| c.to_f64().abs())
            .fold(0.0, f64::max)
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> SPoly<D> {
        SPoly::new(self.coeffs.iter().map(f).collect())
    }
}

fn admitted(k: usize, n: i64) -> bool {
    let k = k as i64;
    n >= 0 && k <= n && (n - k) % 3 == 0
}

/// Membership in `P_n`: nonzero coefficients only at powers n, n−3, n−6, …
pub fn poly_class_check<C: Coeff>(p: &SPoly<C>, n: i64) -> bool {
    p.coeffs
        .iter()
        .enumerate()
        .all(|(k, c)| c.is_zero() || admitted(k, n))
}

impl<C: Coeff> fmt::Debug for SPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl<C: Coeff> fmt::Display for SPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{}", c.render())?,
                1 => write!(f, "({})*s", c.render())?,
                _ => write!(f, "({})*s^{k}", c.render())?,
            }
        }
        Ok(())
    }
}

impl<C: Coeff> Add for &SPoly<C> {
    type Output = SPoly<C>;
    fn add(self, rhs: &SPoly<C>) -> SPoly<C> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        SPoly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl<C: Coeff> Sub for &SPoly<C> {
    type Output = SPoly<C>;
    fn sub(self, rhs: &SPoly<C>) -> SPoly<C> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        SPoly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl<C: Coeff> Mul for &SPoly<C> {
    type Output = SPoly<C>;
    fn mul(self, rhs: &SPoly<C>) -> SPoly<C> {
        if self.is_zero() || rhs.is_zero() {
            return SPoly::zero();
        }
        let mut out = vec![C::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        SPoly::new(out)
    }
}

impl<C: Coeff> Neg for &SPoly<C> {
    type Output = SPoly<C>;
    fn neg(self) -> SPoly<C> {
        SPoly {
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }
}

macro_rules! by_value {
    ($tr:ident, $m:ident) => {
        impl<C: Coeff> $tr for SPoly<C> {
            type Output = SPoly<C>;
            fn $m(self, rhs: SPoly<C>) -> SPoly<C> {
                (&self).$m(&rhs)
            }
        }
    };
}
by_value!(Add, add);
by_value!(Sub, sub);
by_value!(Mul, mul);

impl<C: Coeff> Neg for SPoly<C> {
    type Output = SPoly<C>;
    fn neg(self) -> SPoly<C> {
        -&self
    }
}
