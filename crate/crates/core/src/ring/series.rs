use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::{Coeff, Real, RingError, SPoly, Scalar};

/// Order marker for exact constants that never need truncation.
const UNBOUNDED: usize = usize::MAX;

/// Truncated series in δ with polynomial-in-s coefficients.
///
/// `coeffs[n]` multiplies δⁿ and only powers below `order` are kept.
/// Constants created through [`Scalar::from_real`] carry an unbounded order
/// and adopt the order of whatever they are combined with.
#[derive(Clone, PartialEq)]
pub struct DeltaSeries<C> {
    coeffs: Vec<SPoly<C>>,
    order: usize,
}

impl<C: Coeff> DeltaSeries<C> {
    pub fn new(coeffs: Vec<SPoly<C>>, order: usize) -> Self {
        let mut s = DeltaSeries { coeffs, order };
        s.normalize();
        s
    }

    pub fn zero(order: usize) -> Self {
        DeltaSeries {
            coeffs: Vec::new(),
            order,
        }
    }

    /// Exact constant, compatible with any truncation order.
    pub fn constant(p: SPoly<C>) -> Self {
        DeltaSeries::new(vec![p], UNBOUNDED)
    }

    /// `p · δ^power` truncated at `order`.
    pub fn term(p: SPoly<C>, power: usize, order: usize) -> Self {
        let mut coeffs = vec![SPoly::zero(); power];
        coeffs.push(p);
        DeltaSeries::new(coeffs, order)
    }

    fn normalize(&mut self) {
        if self.order != UNBOUNDED {
            self.coeffs.truncate(self.order);
        }
        while self.coeffs.last().is_some_and(SPoly::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn order(&self) -> Option<usize> {
        (self.order != UNBOUNDED).then_some(self.order)
    }

    pub fn coeff(&self, n: usize) -> SPoly<C> {
        self.coeffs.get(n).cloned().unwrap_or_else(SPoly::zero)
    }

    pub fn coeffs(&self) -> &[SPoly<C>] {
        &self.coeffs
    }

    pub fn with_order(&self, order: usize) -> Self {
        DeltaSeries::new(self.coeffs.clone(), order)
    }

    /// Sum of coeffs[n](s)·δⁿ.
    pub fn eval(&self, s: &C, delta: &C) -> C {
        self.coeffs
            .iter()
            .rev()
            .fold(C::zero(), |acc, p| acc * delta.clone() + p.eval(s))
    }

    fn combined_order(&self, other: &Self) -> usize {
        self.order.min(other.order)
    }

    /// Splits off the constant δ⁰ s⁰ term, which must carry the whole δ⁰ part.
    fn split_base(&self) -> Result<(C, DeltaSeries<C>), RingError> {
        let c0 = self.coeff(0);
        if !c0.is_constant() {
            return Err(RingError::NonConstantBase);
        }
        let base = c0.constant_term();
        let mut rest = self.coeffs.clone();
        if !rest.is_empty() {
            rest[0] = SPoly::zero();
        }
        Ok((base, DeltaSeries::new(rest, self.order)))
    }

    /// Σ_k weights[k]·h^k for h without a δ⁰ part, stopping once h^k vanishes.
    fn power_sum(h: &DeltaSeries<C>, weight: impl Fn(usize) -> C) -> DeltaSeries<C> {
        let order = h.order;
        let mut acc = DeltaSeries::constant(SPoly::constant(weight(0))).with_order(order);
        if h.coeffs.is_empty() {
            return acc;
        }
        let mut pw = h.clone();
        let mut k = 1;
        while !pw.coeffs.is_empty() {
            let w = weight(k);
            if !w.is_zero() {
                acc = acc + pw.scale_coeff(&w);
            }
            pw = pw * h.clone();
            k += 1;
        }
        acc
    }

    pub fn scale_coeff(&self, c: &C) -> Self {
        DeltaSeries::new(self.coeffs.iter().map(|p| p.scale(c)).collect(), self.order)
    }

    pub fn scale_poly(&self, q: &SPoly<C>) -> Self {
        DeltaSeries::new(self.coeffs.iter().map(|p| p * q).collect(), self.order)
    }
}

fn factorial<C: Coeff>(k: usize) -> C {
    (1..=k as i64).fold(C::one(), |acc, j| acc * C::from_i64(j))
}

impl<C: Coeff> fmt::Debug for DeltaSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, p) in self.coeffs.iter().enumerate() {
            if !p.is_zero() {
                write!(f, "[δ^{n}: {p}] ")?;
            }
        }
        match self.order() {
            Some(m) => write!(f, "+ O(δ^{m})"),
            None => write!(f, "(exact)"),
        }
    }
}

impl<C: Coeff> Add for DeltaSeries<C> {
    type Output = DeltaSeries<C>;
    fn add(self, rhs: Self) -> Self {
        let order = self.combined_order(&rhs);
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|k| &self.coeff(k) + &rhs.coeff(k)).collect();
        DeltaSeries::new(coeffs, order)
    }
}

impl<C: Coeff> Sub for DeltaSeries<C> {
    type Output = DeltaSeries<C>;
    fn sub(self, rhs: Self) -> Self {
        let order = self.combined_order(&rhs);
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|k| &self.coeff(k) - &rhs.coeff(k)).collect();
        DeltaSeries::new(coeffs, order)
    }
}

impl<C: Coeff> Neg for DeltaSeries<C> {
    type Output = DeltaSeries<C>;
    fn neg(self) -> Self {
        DeltaSeries {
            coeffs: self.coeffs.iter().map(|p| -p).collect(),
            order: self.order,
        }
    }
}

impl<C: Coeff> Mul for DeltaSeries<C> {
    type Output = DeltaSeries<C>;
    fn mul(self, rhs: Self) -> Self {
        let order = self.combined_order(&rhs);
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return DeltaSeries::zero(order);
        }
        let len = (self.coeffs.len() + rhs.coeffs.len() - 1).min(order);
        let mut out = vec![SPoly::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if i >= len || a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                if !b.is_zero() {
                    out[i + j] = &out[i + j] + &(a * b);
                }
            }
        }
        DeltaSeries::new(out, order)
    }
}

impl<C: Coeff> Scalar for DeltaSeries<C> {
    fn from_real(c: &Real) -> Self {
        DeltaSeries::constant(SPoly::constant(C::from_real(c)))
    }

    fn from_i64(n: i64) -> Self {
        DeltaSeries::constant(SPoly::constant(C::from_i64(n)))
    }

    fn lead(&self) -> f64 {
        self.coeff(0).constant_term().to_f64()
    }

    fn recip(&self) -> Result<Self, RingError> {
        let c0 = self.coeff(0);
        if !c0.is_constant() {
            return Err(RingError::NonInvertible("δ⁰ coefficient depends on s"));
        }
        let a0 = c0.constant_term();
        if a0.is_zero() {
            return Err(RingError::NonInvertible("zero δ⁰ s⁰ coefficient"));
        }
        let inv = C::one() / a0;
        if self.order == UNBOUNDED {
            return Ok(DeltaSeries::constant(SPoly::constant(inv)));
        }
        let mut y: Vec<SPoly<C>> = vec![SPoly::constant(inv.clone())];
        let minus_inv = -inv;
        for n in 1..self.order {
            let mut acc = SPoly::zero();
            for k in 1..=n.min(self.coeffs.len().saturating_sub(1)) {
                acc = &acc + &(&self.coeffs[k] * &y[n - k]);
            }
            y.push(acc.scale(&minus_inv));
        }
        Ok(DeltaSeries::new(y, self.order))
    }

    fn sin_cos(&self) -> Result<(Self, Self), RingError> {
        let (base, h) = self.split_base()?;
        let (sb, cb) = base.sin_cos()?;
        let sin_h = DeltaSeries::power_sum(&h, |k| {
            if k % 2 == 1 {
                let f: C = factorial(k);
                let sign = if (k / 2) % 2 == 0 { C::one() } else { -C::one() };
                sign / f
            } else {
                C::zero()
            }
        });
        let cos_h = DeltaSeries::power_sum(&h, |k| {
            if k % 2 == 0 {
                let f: C = factorial(k);
                let sign = if (k / 2) % 2 == 0 { C::one() } else { -C::one() };
                sign / f
            } else {
                C::zero()
            }
        });
        let sin = cos_h.scale_coeff(&sb) + sin_h.scale_coeff(&cb);
        let cos = cos_h.scale_coeff(&cb) - sin_h.scale_coeff(&sb);
        Ok((sin, cos))
    }

    fn exp(&self) -> Result<Self, RingError> {
        let (base, h) = self.split_base()?;
        let eb = base.exp()?;
        let e_h = DeltaSeries::power_sum(&h, |k| C::one() / factorial::<C>(k));
        Ok(e_h.scale_coeff(&eb))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesOp {
    Add,
    Mul,
    Div,
}

/// Checked binary arithmetic requiring matching truncation orders.
pub fn series_arith<C: Coeff>(
    a: &DeltaSeries<C>,
    b: &DeltaSeries<C>,
    op: SeriesOp,
) -> Result<DeltaSeries<C>, RingError> {
    if let (Some(m), Some(n)) = (a.order(), b.order()) {
        if m != n {
            return Err(RingError::OrderMismatch(m, n));
        }
    }
    Ok(match op {
        SeriesOp::Add => a.clone() + b.clone(),
        SeriesOp::Mul => a.clone() * b.clone(),
        SeriesOp::Div => a.clone() * b.recip()?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Analytic {
    Sin,
    Cos,
    Exp,
    Power(i32),
}

/// Taylor composition `f(base + a)`; `a` must have no δ⁰ part.
pub fn series_analytic<C: Coeff>(
    f: Analytic,
    a: &DeltaSeries<C>,
    base: &C,
) -> Result<DeltaSeries<C>, RingError> {
    if !a.coeff(0).is_zero() {
        return Err(RingError::NonConstantBase);
    }
    let x = DeltaSeries::constant(SPoly::constant(base.clone())) + a.clone();
    match f {
        Analytic::Sin => x.sin(),
        Analytic::Cos => x.cos(),
        Analytic::Exp => x.exp(),
        Analytic::Power(n) => x.powi(n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Rational;

    type Q = Rational;

    fn q(n: i64, d: i64) -> Q {
        Q::from_i64(n) / Q::from_i64(d)
    }

    fn delta_poly(cs: &[i64], order: usize) -> DeltaSeries<Q> {
        DeltaSeries::new(cs.iter().map(|&c| SPoly::constant(q(c, 1))).collect(), order)
    }

    #[test]
    fn product_of_conjugates() {
        let a = delta_poly(&[1, 1], 4);
        let b = delta_poly(&[1, -1], 4);
        let r = series_arith(&a, &b, SeriesOp::Mul).unwrap();
        assert_eq!(r, delta_poly(&[1, 0, -1], 4));
    }

    #[test]
    fn geometric_series() {
        let one = delta_poly(&[1], 4);
        let d = delta_poly(&[1, -1], 4);
        let r = series_arith(&one, &d, SeriesOp::Div).unwrap();
        assert_eq!(r, delta_poly(&[1, 1, 1, 1], 4));
    }

    #[test]
    fn polynomial_coefficients_multiply() {
        let s = SPoly::monomial(q(1, 1), 1);
        let a = DeltaSeries::term(s.clone(), 2, 6);
        let r = a.clone() * a;
        assert_eq!(r, DeltaSeries::term(SPoly::monomial(q(1, 1), 2), 4, 6));
    }

    #[test]
    fn order_mismatch_rejected() {
        let a = delta_poly(&[1], 3);
        let b = delta_poly(&[1], 4);
        assert_eq!(series_arith(&a, &b, SeriesOp::Add), Err(RingError::OrderMismatch(3, 4)));
    }

    #[test]
    fn non_invertible_divisor() {
        let a = delta_poly(&[0, 1], 4);
        assert!(a.recip().is_err());
    }

    #[test]
    fn sine_taylor() {
        let a = DeltaSeries::term(SPoly::monomial(q(1, 1), 1), 2, 8);
        let r = series_analytic(Analytic::Sin, &a, &q(0, 1)).unwrap();
        let expected = DeltaSeries::term(SPoly::monomial(q(1, 1), 1), 2, 8)
            + DeltaSeries::term(SPoly::monomial(q(-1, 6), 3), 6, 8);
        assert_eq!(r, expected);
    }

    #[test]
    fn cosine_of_constant() {
        let phi = 0.9272952180016122_f64;
        let a = DeltaSeries::<f64>::zero(5);
        let r = series_analytic(Analytic::Cos, &a, &phi).unwrap();
        assert!((r.lead() - phi.cos()).abs() < 1e-15);
        assert_eq!(r.coeffs().len(), 1);
    }

    #[test]
    fn exponential() {
        let a = delta_poly(&[0, 1], 3);
        let r = series_analytic(Analytic::Exp, &a, &q(0, 1)).unwrap();
        let expected = DeltaSeries::new(
            vec![SPoly::constant(q(1, 1)), SPoly::constant(q(1, 1)), SPoly::constant(q(1, 2))],
            3,
        );
        assert_eq!(r, expected);
    }

    #[test]
    fn analytic_rejects_delta_zero_part() {
        let a = delta_poly(&[1, 1], 3);
        assert_eq!(series_analytic(Analytic::Exp, &a, &q(0, 1)), Err(RingError::NonConstantBase));
    }
}
